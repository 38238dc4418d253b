//! Forbid Behaviour Iterative: the diverse-planning driver.
//!
//! The first loop asks a behaviour generator for plans whose behaviour has
//! not been seen yet; once no novel behaviour is left, the second loop pads
//! the set to `k` with any plans not already returned.

use std::collections::BTreeSet;
use std::error::Error as StdError;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bspace::{bdc, pbehaviour, Behaviour, BehaviourSpace, BspaceError};

/// Failure of a single generator call.
#[derive(Debug, Error)]
pub enum GenError {
    /// A resource limit stopped the generator before it could decide.
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error(transparent)]
    Failed(Box<dyn StdError + Send + Sync>),
}

/// Produces a plan whose behaviour is not among `found`, or `None` once no
/// such plan exists.
pub trait BehaviourGenerator<T> {
    fn generate(&mut self, found: &[Behaviour]) -> Result<Option<T>, GenError>;
}

/// Produces a plan not among `existing` (by action sequence), or `None`.
pub trait PlanGenerator<T> {
    fn generate(&mut self, existing: &[T]) -> Result<Option<T>, GenError>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    ReachedK,
    BehavioursExhaustedThenPlansExhausted,
    InconclusiveBudget,
}

#[derive(Debug, Clone)]
pub struct FbiResult<T> {
    pub plans: Vec<T>,
    /// Behaviour of each plan, index-aligned with `plans`.
    pub behaviours: Vec<Behaviour>,
    /// How many leading plans came from the behaviour-novelty loop.
    pub novel_plans: usize,
    pub bdc: usize,
    pub termination: Termination,
    /// Messages from generator calls that ended inconclusively.
    pub inconclusive: Vec<String>,
}

#[derive(Debug, Error)]
pub enum FbiError {
    #[error("k must be at least 1")]
    ZeroK,
    #[error("generator failed: {0}")]
    Generator(#[source] Box<dyn StdError + Send + Sync>),
    #[error(transparent)]
    Behaviour(#[from] BspaceError),
    #[error("generator contract violated: {0}")]
    ContractViolation(String),
    #[error("behaviour counter {counter} disagrees with recomputed BDC {recomputed}")]
    BdcMismatch { counter: usize, recomputed: usize },
}

pub fn fbi<T, B, P>(
    k: usize,
    space: &BehaviourSpace<T>,
    behaviour_gen: &mut B,
    plan_gen: &mut P,
) -> Result<FbiResult<T>, FbiError>
where
    T: PartialEq,
    B: BehaviourGenerator<T> + ?Sized,
    P: PlanGenerator<T> + ?Sized,
{
    if k == 0 {
        return Err(FbiError::ZeroK);
    }
    let mut plans: Vec<T> = Vec::new();
    let mut behaviours: Vec<Behaviour> = Vec::new();
    let mut seen: BTreeSet<Behaviour> = BTreeSet::new();
    let mut counter = 0usize;
    let mut inconclusive = Vec::new();

    while plans.len() < k {
        match behaviour_gen.generate(&behaviours) {
            Ok(Some(plan)) => {
                let b = pbehaviour(space, &plan)?;
                if !seen.insert(b.clone()) {
                    return Err(FbiError::ContractViolation(format!(
                        "behaviour generator repeated behaviour {b}"
                    )));
                }
                plans.push(plan);
                behaviours.push(b);
                counter += 1;
            }
            Ok(None) => break,
            Err(GenError::Inconclusive(msg)) => {
                inconclusive.push(msg);
                break;
            }
            Err(GenError::Failed(e)) => return Err(FbiError::Generator(e)),
        }
    }
    let novel_plans = plans.len();

    while plans.len() < k {
        match plan_gen.generate(&plans) {
            Ok(Some(plan)) => {
                if plans.contains(&plan) {
                    return Err(FbiError::ContractViolation(
                        "plan generator returned an existing plan".into(),
                    ));
                }
                behaviours.push(pbehaviour(space, &plan)?);
                plans.push(plan);
            }
            Ok(None) => break,
            Err(GenError::Inconclusive(msg)) => {
                inconclusive.push(msg);
                break;
            }
            Err(GenError::Failed(e)) => return Err(FbiError::Generator(e)),
        }
    }

    let recomputed = bdc(space, &plans)?;
    // An incomplete first loop may leave behaviours for the padding loop to
    // stumble on; only a conclusive run must agree exactly.
    if recomputed != counter && inconclusive.is_empty() {
        return Err(FbiError::BdcMismatch {
            counter,
            recomputed,
        });
    }
    let termination = if plans.len() == k {
        Termination::ReachedK
    } else if inconclusive.is_empty() {
        Termination::BehavioursExhaustedThenPlansExhausted
    } else {
        Termination::InconclusiveBudget
    };
    Ok(FbiResult {
        plans,
        behaviours,
        novel_plans,
        bdc: recomputed,
        termination,
        inconclusive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bspace::{Feature, FeatureDomain, FeatureExpression, FeatureValue};
    use std::sync::Arc;

    // Plans are integers; behaviour = parity.
    fn parity_space() -> BehaviourSpace<u32> {
        BehaviourSpace::new(vec![Feature::new(
            "parity",
            FeatureDomain::Labels(vec!["even".into(), "odd".into()]),
            Arc::new(|n: &u32| FeatureValue::label(if n % 2 == 0 { "even" } else { "odd" })),
            FeatureExpression::Temporal(vec![]),
        )
        .unwrap()])
        .unwrap()
    }

    struct Pool(Vec<u32>);

    impl BehaviourGenerator<u32> for Pool {
        fn generate(&mut self, found: &[Behaviour]) -> Result<Option<u32>, GenError> {
            let space = parity_space();
            Ok(self
                .0
                .iter()
                .copied()
                .find(|n| !found.contains(&pbehaviour(&space, n).unwrap())))
        }
    }

    impl PlanGenerator<u32> for Pool {
        fn generate(&mut self, existing: &[u32]) -> Result<Option<u32>, GenError> {
            Ok(self.0.iter().copied().find(|n| !existing.contains(n)))
        }
    }

    struct Stuck;

    impl BehaviourGenerator<u32> for Stuck {
        fn generate(&mut self, _: &[Behaviour]) -> Result<Option<u32>, GenError> {
            Err(GenError::Inconclusive("node budget".into()))
        }
    }

    impl PlanGenerator<u32> for Stuck {
        fn generate(&mut self, _: &[u32]) -> Result<Option<u32>, GenError> {
            Ok(None)
        }
    }

    struct Repeater;

    impl BehaviourGenerator<u32> for Repeater {
        fn generate(&mut self, _: &[Behaviour]) -> Result<Option<u32>, GenError> {
            Ok(Some(2))
        }
    }

    #[test]
    fn k1_gives_one_plan() {
        let space = parity_space();
        let r = fbi(1, &space, &mut Pool(vec![1, 2, 3]), &mut Pool(vec![1, 2, 3])).unwrap();
        assert_eq!(r.plans, vec![1]);
        assert_eq!(r.bdc, 1);
        assert_eq!(r.termination, Termination::ReachedK);
    }

    #[test]
    fn pads_after_behaviours_run_out() {
        let space = parity_space();
        let pool = vec![1, 3, 2, 4, 5];
        let r = fbi(4, &space, &mut Pool(pool.clone()), &mut Pool(pool.clone())).unwrap();
        assert_eq!(r.plans, vec![1, 2, 3, 4]);
        assert_eq!(r.novel_plans, 2);
        assert_eq!(r.bdc, 2);
        let r = fbi(9, &space, &mut Pool(pool.clone()), &mut Pool(pool)).unwrap();
        assert_eq!(r.plans.len(), 5);
        assert_eq!(
            r.termination,
            Termination::BehavioursExhaustedThenPlansExhausted
        );
    }

    #[test]
    fn inconclusive_is_surfaced() {
        let space = parity_space();
        let r = fbi(2, &space, &mut Stuck, &mut Stuck).unwrap();
        assert!(r.plans.is_empty());
        assert_eq!(r.termination, Termination::InconclusiveBudget);
    }

    #[test]
    fn repeated_behaviour_is_a_contract_violation() {
        let space = parity_space();
        let err = fbi(3, &space, &mut Repeater, &mut Stuck).unwrap_err();
        assert!(matches!(err, FbiError::ContractViolation(_)));
        assert!(matches!(
            fbi(0, &space, &mut Repeater, &mut Stuck),
            Err(FbiError::ZeroK)
        ));
    }
}
