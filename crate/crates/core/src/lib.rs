//! Behaviour planning: diverse plan sets over a user-defined behaviour space.

pub mod bspace;
pub mod cli;
pub mod domains;
pub mod fbi;
pub mod ltl;
pub mod pddl;
pub mod satplan;
pub mod search;
pub mod strips;
