//! The bundled Aladdin story world.

use crate::bspace::{goal_endings_feature, Feature};
use crate::pddl::{ground, parse_domain, parse_problem, PddlError};
use crate::strips::{GroundProblem, PlanTrace};

pub const DOMAIN_PDDL: &str = include_str!("../../data/aladdin-domain.pddl");
pub const PROBLEM_PDDL: &str = include_str!("../../data/aladdin-problem.pddl");
pub const TINY_DOMAIN_PDDL: &str = include_str!("../../data/tiny-story-domain.pddl");
pub const TINY_PROBLEM_PDDL: &str = include_str!("../../data/tiny-story-problem.pddl");

/// Parses and grounds the Aladdin world and returns it with its
/// possible-endings feature.
pub fn story_pack() -> Result<(GroundProblem, Feature<PlanTrace>), PddlError> {
    pack(DOMAIN_PDDL, PROBLEM_PDDL)
}

/// A two-character world small enough to enumerate every plan.
pub fn tiny_story_pack() -> Result<(GroundProblem, Feature<PlanTrace>), PddlError> {
    pack(TINY_DOMAIN_PDDL, TINY_PROBLEM_PDDL)
}

fn pack(domain: &str, problem: &str) -> Result<(GroundProblem, Feature<PlanTrace>), PddlError> {
    let problem = ground(&parse_domain(domain)?, &parse_problem(problem)?)?;
    let feature = goal_endings_feature(&problem);
    Ok((problem, feature))
}

/// One `X married Y` line per `married-to` fluent true at the end.
pub fn ending_summary(problem: &GroundProblem, trace: &PlanTrace) -> Vec<String> {
    problem
        .state_fluents(trace.final_state())
        .into_iter()
        .filter(|f| f.name() == "married-to" && f.args().len() == 2)
        .map(|f| format!("{} married {}", f.args()[0], f.args()[1]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bspace::FeatureDomain;

    #[test]
    fn story_goal_fluents_are_the_marriages() {
        let (p, feature) = story_pack().unwrap();
        let FeatureDomain::GoalSubsets(fs) = feature.domain() else {
            panic!("symbolic domain expected")
        };
        assert_eq!(fs.len(), 20);
        assert_eq!(feature.domain().size(), Some(1 << 20));
        assert_eq!(p.goal().disjuncts().len(), 20);
    }

    #[test]
    fn tiny_story_is_small() {
        let (p, _) = tiny_story_pack().unwrap();
        assert!(p.actions().len() <= 5);
    }
}
