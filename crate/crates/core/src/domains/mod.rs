//! Bundled case-study domains.

pub mod platformer;
pub mod story;
pub mod urban;
