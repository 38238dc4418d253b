//! Planning as satisfiability.
//!
//! A [`GroundProblem`] at horizon `n` becomes a CNF whose models are exactly
//! the valid plans of length `n`: one action per step, explanatory frame
//! axioms, initial-state units and the goal at the last step. Diversity is
//! added by extra clauses that forbid a behaviour (an assignment of the goal
//! fluents at step `n`) or a specific action sequence.

mod dimacs;
mod generator;
pub mod solver;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::strips::{ActionId, FluentId, GroundProblem, Plan, PlanTrace, State};

pub use dimacs::{parse_dimacs, parse_solver_output, to_dimacs, ExternalSolver, EXTERNAL_SAT_ENV};
pub use generator::{SatBackend, SatBehaviourGenerator, SatPlanGenerator, SatStats};
pub use solver::{Assignment, SolverConfig, SolverError, SolverStats};

#[derive(Debug, Error)]
pub enum SatError {
    #[error("model has {count} actions at step {step}")]
    MalformedModel { step: usize, count: usize },
    #[error("plan length {plan} does not match horizon {horizon}")]
    HorizonMismatch { plan: usize, horizon: usize },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("dimacs: {0}")]
    Dimacs(String),
    #[error("external solver: {0}")]
    External(String),
    #[error("behaviour space is not SAT-compatible: {0}")]
    UnsupportedSpace(String),
    #[error("unknown fluent `{0}` in behaviour")]
    UnknownFluent(String),
    #[error("decoded plan failed validation: {0}")]
    InvalidDecodedPlan(String),
    #[error("varmap: {0}")]
    VarMap(String),
}

/// Meaning of a CNF variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarMeaning {
    Fluent { fluent: FluentId, step: usize },
    Action { action: ActionId, step: usize },
    Aux(usize),
}

/// Layout of the variables of a [`CnfTask`]: fluents for steps `0..=n`,
/// then actions for steps `0..n`, then auxiliary variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarMap {
    pub horizon: usize,
    pub fluents: Vec<String>,
    pub actions: Vec<String>,
    pub aux: usize,
}

impl VarMap {
    fn nf(&self) -> usize {
        self.fluents.len()
    }

    fn na(&self) -> usize {
        self.actions.len()
    }

    pub fn fluent_var(&self, fluent: FluentId, step: usize) -> i32 {
        debug_assert!(fluent < self.nf() && step <= self.horizon);
        (1 + step * self.nf() + fluent) as i32
    }

    pub fn action_var(&self, action: ActionId, step: usize) -> i32 {
        debug_assert!(action < self.na() && step < self.horizon);
        (1 + (self.horizon + 1) * self.nf() + step * self.na() + action) as i32
    }

    fn aux_base(&self) -> usize {
        (self.horizon + 1) * self.nf() + self.horizon * self.na()
    }

    pub fn num_vars(&self) -> usize {
        self.aux_base() + self.aux
    }

    pub fn meaning(&self, var: i32) -> Option<VarMeaning> {
        if var <= 0 || var as usize > self.num_vars() {
            return None;
        }
        let i = var as usize - 1;
        let fluent_block = (self.horizon + 1) * self.nf();
        if i < fluent_block {
            return Some(VarMeaning::Fluent {
                fluent: i % self.nf(),
                step: i / self.nf(),
            });
        }
        let j = i - fluent_block;
        if j < self.horizon * self.na() {
            return Some(VarMeaning::Action {
                action: j % self.na(),
                step: j / self.na(),
            });
        }
        Some(VarMeaning::Aux(i - self.aux_base()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serialisable")
    }

    pub fn from_json(text: &str) -> Result<Self, SatError> {
        serde_json::from_str(text).map_err(|e| SatError::VarMap(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfTask {
    pub clauses: Vec<Vec<i32>>,
    pub varmap: VarMap,
}

impl CnfTask {
    pub fn horizon(&self) -> usize {
        self.varmap.horizon
    }

    pub fn num_vars(&self) -> usize {
        self.varmap.num_vars()
    }
}

/// Total assignment to the variables of one task.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatModel(pub Assignment);

impl SatModel {
    pub fn value(&self, var: i32) -> bool {
        self.0.value(var.unsigned_abs())
    }
}

/// Sequential encoding of `problem` at horizon `n`.
pub fn encode(problem: &GroundProblem, horizon: usize) -> CnfTask {
    let nf = problem.fluents().len();
    let na = problem.actions().len();
    let disjuncts = problem.goal().disjuncts();
    let goal_aux = if disjuncts.len() > 1 { disjuncts.len() } else { 0 };
    let varmap = VarMap {
        horizon,
        fluents: problem.fluents().iter().map(ToString::to_string).collect(),
        actions: problem.actions().iter().map(|a| a.name.clone()).collect(),
        aux: goal_aux,
    };
    let fv = |f: FluentId, t: usize| varmap.fluent_var(f, t);
    let av = |a: ActionId, t: usize| varmap.action_var(a, t);
    let mut clauses: Vec<Vec<i32>> = Vec::new();

    for f in 0..nf {
        let v = fv(f, 0);
        clauses.push(vec![if problem.init().contains(f) { v } else { -v }]);
    }

    // Actions that can make each fluent true / false.
    let mut adders: Vec<Vec<ActionId>> = vec![Vec::new(); nf];
    let mut deleters: Vec<Vec<ActionId>> = vec![Vec::new(); nf];
    for (a, act) in problem.actions().iter().enumerate() {
        for &f in &act.add {
            adders[f].push(a);
        }
        for &f in &act.del {
            deleters[f].push(a);
        }
    }

    for t in 0..horizon {
        clauses.push((0..na).map(|a| av(a, t)).collect());
        for a in 0..na {
            for b in a + 1..na {
                clauses.push(vec![-av(a, t), -av(b, t)]);
            }
        }
        for (a, act) in problem.actions().iter().enumerate() {
            let x = av(a, t);
            clauses.extend(act.pre_pos.iter().map(|&f| vec![-x, fv(f, t)]));
            clauses.extend(act.pre_neg.iter().map(|&f| vec![-x, -fv(f, t)]));
            clauses.extend(act.add.iter().map(|&f| vec![-x, fv(f, t + 1)]));
            clauses.extend(act.del.iter().map(|&f| vec![-x, -fv(f, t + 1)]));
        }
        for f in 0..nf {
            let mut becomes_true = vec![fv(f, t), -fv(f, t + 1)];
            becomes_true.extend(adders[f].iter().map(|&a| av(a, t)));
            clauses.push(becomes_true);
            let mut becomes_false = vec![-fv(f, t), fv(f, t + 1)];
            becomes_false.extend(deleters[f].iter().map(|&a| av(a, t)));
            clauses.push(becomes_false);
        }
    }

    let lit = |l: &crate::strips::Literal| {
        let v = fv(l.fluent, horizon);
        if l.positive {
            v
        } else {
            -v
        }
    };
    if goal_aux == 0 {
        clauses.extend(disjuncts[0].iter().map(|l| vec![lit(l)]));
    } else {
        let base = varmap.aux_base() as i32 + 1;
        clauses.push((0..goal_aux as i32).map(|j| base + j).collect());
        for (j, d) in disjuncts.iter().enumerate() {
            let sel = base + j as i32;
            clauses.extend(d.iter().map(|l| vec![-sel, lit(l)]));
        }
    }
    CnfTask { clauses, varmap }
}

/// Reads the plan and its state sequence off a model.
pub fn decode(model: &SatModel, task: &CnfTask) -> Result<PlanTrace, SatError> {
    let vm = &task.varmap;
    let mut actions = Vec::with_capacity(vm.horizon);
    for t in 0..vm.horizon {
        let chosen: Vec<ActionId> = (0..vm.na())
            .filter(|&a| model.value(vm.action_var(a, t)))
            .collect();
        if chosen.len() != 1 {
            return Err(SatError::MalformedModel {
                step: t,
                count: chosen.len(),
            });
        }
        actions.push(chosen[0]);
    }
    let states = (0..=vm.horizon)
        .map(|t| State::new((0..vm.nf()).filter(|&f| model.value(vm.fluent_var(f, t)))))
        .collect();
    Ok(PlanTrace {
        plan: Plan(actions),
        states,
    })
}

/// Appends `¬⋀ (g@n = b_g)` and returns it.
pub fn forbid_behaviour(task: &mut CnfTask, assignment: &[(FluentId, bool)]) -> Vec<i32> {
    let n = task.horizon();
    let clause: Vec<i32> = assignment
        .iter()
        .map(|&(f, b)| {
            let v = task.varmap.fluent_var(f, n);
            if b {
                -v
            } else {
                v
            }
        })
        .collect();
    task.clauses.push(clause.clone());
    clause
}

/// Appends a clause excluding exactly this action sequence and returns it.
pub fn forbid_plan(task: &mut CnfTask, plan: &Plan) -> Result<Vec<i32>, SatError> {
    if plan.len() != task.horizon() {
        return Err(SatError::HorizonMismatch {
            plan: plan.len(),
            horizon: task.horizon(),
        });
    }
    let clause: Vec<i32> = plan
        .actions()
        .iter()
        .enumerate()
        .map(|(t, &a)| -task.varmap.action_var(a, t))
        .collect();
    task.clauses.push(clause.clone());
    Ok(clause)
}

/// Solves with the internal CDCL solver.
pub fn solve(task: &CnfTask, config: &SolverConfig) -> Result<Option<SatModel>, SatError> {
    Ok(solve_with_stats(task, config)?.0)
}

pub fn solve_with_stats(
    task: &CnfTask,
    config: &SolverConfig,
) -> Result<(Option<SatModel>, SolverStats), SatError> {
    let (m, stats) = solver::solve_clauses(task.num_vars(), &task.clauses, config)?;
    Ok((m.map(SatModel), stats))
}

/// Maps goal-fluent names of a behaviour assignment to fluent ids.
pub(crate) fn resolve_assignment(
    problem: &GroundProblem,
    assignment: &[(crate::strips::Fluent, bool)],
) -> Result<Vec<(FluentId, bool)>, SatError> {
    let index: HashMap<&crate::strips::Fluent, FluentId> = problem
        .fluents()
        .iter()
        .enumerate()
        .map(|(i, f)| (f, i))
        .collect();
    assignment
        .iter()
        .map(|(f, b)| {
            index
                .get(f)
                .map(|&id| (id, *b))
                .ok_or_else(|| SatError::UnknownFluent(f.to_string()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strips::{validate_plan, ProblemBuilder};

    fn one_action() -> GroundProblem {
        let mut b = ProblemBuilder::new();
        b.action("go", &["-g"], &["g"], &[], 1.0).unwrap();
        b.goal_disjunct(&["g"]).unwrap();
        b.build().unwrap()
    }

    #[test]
    fn horizon_zero() {
        let mut b = ProblemBuilder::new();
        b.init(&["g"]).unwrap().goal_disjunct(&["g"]).unwrap();
        let sat = b.build().unwrap();
        let task = encode(&sat, 0);
        let m = solve(&task, &SolverConfig::default()).unwrap().unwrap();
        assert_eq!(decode(&m, &task).unwrap().plan, Plan::empty());
        let task = encode(&one_action(), 0);
        assert!(solve(&task, &SolverConfig::default()).unwrap().is_none());
    }

    #[test]
    fn varmap_is_a_bijection() {
        let p = one_action();
        let task = encode(&p, 3);
        let vm = &task.varmap;
        for v in 1..=task.num_vars() as i32 {
            match vm.meaning(v).unwrap() {
                VarMeaning::Fluent { fluent, step } => assert_eq!(vm.fluent_var(fluent, step), v),
                VarMeaning::Action { action, step } => assert_eq!(vm.action_var(action, step), v),
                VarMeaning::Aux(_) => {}
            }
        }
        assert!(vm.meaning(0).is_none());
        assert!(task.clauses.iter().flatten().all(|&l| l != 0));
    }

    #[test]
    fn hand_built_model_decodes() {
        let p = one_action();
        let task = encode(&p, 1);
        let vm = &task.varmap;
        let mut values = vec![false; task.num_vars()];
        values[vm.fluent_var(0, 1) as usize - 1] = true;
        values[vm.action_var(0, 0) as usize - 1] = true;
        let model = SatModel(Assignment(values));
        assert!(model.0.satisfies(&task.clauses));
        let trace = decode(&model, &task).unwrap();
        assert_eq!(trace.plan, Plan(vec![0]));
        assert_eq!(validate_plan(&p, &trace.plan).unwrap(), trace);
    }

    #[test]
    fn malformed_model_detected() {
        let p = one_action();
        let task = encode(&p, 1);
        let model = SatModel(Assignment(vec![false; task.num_vars()]));
        assert!(matches!(
            decode(&model, &task),
            Err(SatError::MalformedModel { step: 0, count: 0 })
        ));
    }

    #[test]
    fn forbidding_the_only_plan() {
        let p = one_action();
        let mut task = encode(&p, 1);
        let m = solve(&task, &SolverConfig::default()).unwrap().unwrap();
        let plan = decode(&m, &task).unwrap().plan;
        forbid_plan(&mut task, &plan).unwrap();
        assert!(solve(&task, &SolverConfig::default()).unwrap().is_none());
        assert!(matches!(
            forbid_plan(&mut task, &Plan::empty()),
            Err(SatError::HorizonMismatch { .. })
        ));
    }

    #[test]
    fn forbidding_single_goal_value() {
        let p = one_action();
        let mut task = encode(&p, 1);
        let clause = forbid_behaviour(&mut task, &[(0, true)]);
        assert_eq!(clause, vec![-task.varmap.fluent_var(0, 1)]);
        assert!(solve(&task, &SolverConfig::default()).unwrap().is_none());
    }
}
