//! Behaviour and plan generators backed by the SAT encoding.

use std::ops::RangeInclusive;

use serde::Serialize;

use super::dimacs::ExternalSolver;
use super::solver::{SolverConfig, SolverError};
use super::{decode, encode, forbid_plan, resolve_assignment, solve_with_stats, CnfTask, SatError};
use crate::bspace::{Behaviour, BehaviourSpace, FeatureExpression};
use crate::fbi::{BehaviourGenerator, GenError, PlanGenerator};
use crate::strips::{validate_plan, FluentId, GroundProblem, PlanTrace};

#[derive(Debug, Clone)]
pub enum SatBackend {
    Internal(SolverConfig),
    External(ExternalSolver),
}

impl SatBackend {
    /// The external bridge when its environment variable is set, else the
    /// internal solver.
    pub fn from_env(config: SolverConfig) -> Self {
        match ExternalSolver::from_env() {
            Some(ext) => SatBackend::External(ext),
            None => SatBackend::Internal(config),
        }
    }
}

/// Deterministic counters accumulated over generator calls.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SatStats {
    pub calls: u64,
    pub solver_runs: u64,
    pub max_horizon_tried: usize,
    pub clauses: u64,
    pub decisions: u64,
    pub conflicts: u64,
    pub propagations: u64,
}

struct Core<'a> {
    problem: &'a GroundProblem,
    horizons: RangeInclusive<usize>,
    backend: SatBackend,
    stats: SatStats,
}

impl<'a> Core<'a> {
    fn new(problem: &'a GroundProblem, horizons: RangeInclusive<usize>, backend: SatBackend) -> Self {
        let hi = match problem.budget() {
            Some(b) => (*horizons.end()).min(b),
            None => *horizons.end(),
        };
        Core {
            problem,
            horizons: *horizons.start()..=hi,
            backend,
            stats: SatStats::default(),
        }
    }

    /// First trace over ascending horizons whose task, after `constrain`,
    /// is satisfiable.
    fn search(
        &mut self,
        mut constrain: impl FnMut(&mut CnfTask) -> Result<(), SatError>,
    ) -> Result<Option<PlanTrace>, GenError> {
        self.stats.calls += 1;
        for h in self.horizons.clone() {
            let mut task = encode(self.problem, h);
            constrain(&mut task).map_err(failed)?;
            self.stats.solver_runs += 1;
            self.stats.max_horizon_tried = self.stats.max_horizon_tried.max(h);
            self.stats.clauses += task.clauses.len() as u64;
            let model = match &self.backend {
                SatBackend::Internal(cfg) => match solve_with_stats(&task, cfg) {
                    Ok((m, s)) => {
                        self.stats.decisions += s.decisions;
                        self.stats.conflicts += s.conflicts;
                        self.stats.propagations += s.propagations;
                        m
                    }
                    Err(SatError::Solver(e @ SolverError::ResourceLimit { .. })) => {
                        return Err(GenError::Inconclusive(format!("horizon {h}: {e}")))
                    }
                    Err(e) => return Err(failed(e)),
                },
                SatBackend::External(ext) => ext.solve(&task).map_err(failed)?,
            };
            if let Some(m) = model {
                let trace = decode(&m, &task).map_err(failed)?;
                let checked = validate_plan(self.problem, &trace.plan)
                    .map_err(|e| failed(SatError::InvalidDecodedPlan(e.to_string())))?;
                if checked != trace {
                    return Err(failed(SatError::InvalidDecodedPlan(
                        "decoded states differ from simulation".into(),
                    )));
                }
                return Ok(Some(trace));
            }
        }
        Ok(None)
    }
}

fn failed(e: SatError) -> GenError {
    GenError::Failed(Box::new(e))
}

/// Finds plans whose goal-fluent ending differs from every found behaviour.
pub struct SatBehaviourGenerator<'a> {
    core: Core<'a>,
    space: &'a BehaviourSpace<PlanTrace>,
}

impl<'a> SatBehaviourGenerator<'a> {
    pub fn new(
        problem: &'a GroundProblem,
        space: &'a BehaviourSpace<PlanTrace>,
        horizons: RangeInclusive<usize>,
        backend: SatBackend,
    ) -> Result<Self, SatError> {
        for f in space.features() {
            match f.expression() {
                FeatureExpression::GoalAssignment(fs) => {
                    resolve_assignment(problem, &fs.iter().map(|g| (g.clone(), true)).collect::<Vec<_>>())?;
                }
                FeatureExpression::Temporal(_) => {
                    return Err(SatError::UnsupportedSpace(format!(
                        "feature `{}` has a temporal expression",
                        f.name()
                    )))
                }
            }
        }
        Ok(SatBehaviourGenerator {
            core: Core::new(problem, horizons, backend),
            space,
        })
    }

    pub fn stats(&self) -> &SatStats {
        &self.core.stats
    }

    fn assignment(&self, b: &Behaviour) -> Result<Vec<(FluentId, bool)>, SatError> {
        let mut out = Vec::new();
        for (f, v) in self.space.features().iter().zip(&b.0) {
            let a = f.expression().assignment(v).ok_or_else(|| {
                SatError::UnsupportedSpace(format!("value {v} of `{}` has no assignment", f.name()))
            })?;
            out.extend(resolve_assignment(self.core.problem, &a)?);
        }
        Ok(out)
    }
}

impl BehaviourGenerator<PlanTrace> for SatBehaviourGenerator<'_> {
    fn generate(&mut self, found: &[Behaviour]) -> Result<Option<PlanTrace>, GenError> {
        let forbidden = found
            .iter()
            .map(|b| self.assignment(b))
            .collect::<Result<Vec<_>, _>>()
            .map_err(failed)?;
        self.core.search(|task| {
            for a in &forbidden {
                super::forbid_behaviour(task, a);
            }
            Ok(())
        })
    }
}

/// Finds plans whose action sequence differs from every existing plan.
pub struct SatPlanGenerator<'a> {
    core: Core<'a>,
}

impl<'a> SatPlanGenerator<'a> {
    pub fn new(problem: &'a GroundProblem, horizons: RangeInclusive<usize>, backend: SatBackend) -> Self {
        SatPlanGenerator {
            core: Core::new(problem, horizons, backend),
        }
    }

    pub fn stats(&self) -> &SatStats {
        &self.core.stats
    }
}

impl PlanGenerator<PlanTrace> for SatPlanGenerator<'_> {
    fn generate(&mut self, existing: &[PlanTrace]) -> Result<Option<PlanTrace>, GenError> {
        self.core.search(|task| {
            let h = task.horizon();
            for t in existing.iter().filter(|t| t.plan.len() == h) {
                forbid_plan(task, &t.plan)?;
            }
            Ok(())
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bspace::{goal_endings_feature, pbehaviour};
    use crate::strips::ProblemBuilder;

    fn either() -> GroundProblem {
        let mut b = ProblemBuilder::new();
        b.action("make-p", &["-p"], &["p"], &[], 1.0).unwrap();
        b.action("make-q", &["-q"], &["q"], &[], 1.0).unwrap();
        b.goal_disjunct(&["p"]).unwrap().goal_disjunct(&["q"]).unwrap();
        b.build().unwrap()
    }

    fn internal() -> SatBackend {
        SatBackend::Internal(SolverConfig::default())
    }

    #[test]
    fn behaviours_until_exhausted() {
        let p = either();
        let space = BehaviourSpace::new(vec![goal_endings_feature(&p)]).unwrap();
        let mut g = SatBehaviourGenerator::new(&p, &space, 0..=4, internal()).unwrap();
        let mut found = Vec::new();
        while let Some(t) = g.generate(&found).unwrap() {
            let b = pbehaviour(&space, &t).unwrap();
            assert!(!found.contains(&b));
            found.push(b);
        }
        assert_eq!(found.len(), 3);
        assert_eq!(g.stats().calls, 4);
    }

    #[test]
    fn plan_generator_skips_existing() {
        let p = either();
        let mut g = SatPlanGenerator::new(&p, 0..=1, internal());
        let first = g.generate(&[]).unwrap().unwrap();
        let second = g.generate(&[first.clone()]).unwrap().unwrap();
        assert_ne!(first.plan, second.plan);
        assert!(g.generate(&[first, second]).unwrap().is_none());
    }
}
