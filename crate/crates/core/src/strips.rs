//! Grounded STRIPS planning model.
//!
//! States are closed-world sets of true fluents. Goals are kept in
//! disjunctive normal form so that both the SAT encoder and the plan
//! validator treat existential goals uniformly.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type FluentId = usize;
pub type ActionId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("action `{action}` is not applicable")]
    InapplicableAction { action: String },
    #[error("unknown fluent `{0}`")]
    UnknownFluent(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("malformed fluent `{0}`")]
    MalformedFluent(String),
    #[error("invalid action `{action}`: {reason}")]
    InvalidAction { action: String, reason: String },
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("json: {0}")]
    Json(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValidationError {
    #[error("step {index}: action `{action}` is not applicable")]
    InapplicableAction { index: usize, action: String },
    #[error("final state does not satisfy the goal")]
    GoalNotSatisfied,
    #[error("plan length {len} exceeds budget {budget}")]
    BudgetExceeded { len: usize, budget: usize },
}

/// A ground atom such as `married-to(aladdin,jasmine)`.
///
/// Identifiers are lower-cased on construction, so equality is equality of
/// canonical forms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fluent {
    name: String,
    args: Vec<String>,
}

impl Fluent {
    pub fn new<S: AsRef<str>>(name: &str, args: &[S]) -> Self {
        Fluent {
            name: name.trim().to_lowercase(),
            args: args.iter().map(|a| a.as_ref().trim().to_lowercase()).collect(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn args(&self) -> &[String] {
        &self.args
    }
}

impl fmt::Display for Fluent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.args.is_empty() {
            write!(f, "{}", self.name)
        } else {
            write!(f, "{}({})", self.name, self.args.join(","))
        }
    }
}

fn is_ident(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

impl FromStr for Fluent {
    type Err = ModelError;

    /// Accepts `name`, `name(a,b)` and the PDDL form `(name a b)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ModelError::MalformedFluent(s.to_string());
        let s = s.trim();
        let (name, args): (&str, Vec<&str>) = if let Some(inner) =
            s.strip_prefix('(').and_then(|r| r.strip_suffix(')'))
        {
            let mut parts = inner.split_whitespace();
            let name = parts.next().ok_or_else(bad)?;
            (name, parts.collect())
        } else if let Some(open) = s.find('(') {
            let inner = s[open + 1..].strip_suffix(')').ok_or_else(bad)?;
            let args = if inner.trim().is_empty() {
                Vec::new()
            } else {
                inner.split(',').map(str::trim).collect()
            };
            (&s[..open], args)
        } else {
            (s, Vec::new())
        };
        if !is_ident(name) || !args.iter().all(|a| is_ident(a)) {
            return Err(bad());
        }
        Ok(Fluent::new(name, &args))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub fluent: FluentId,
    pub positive: bool,
}

impl Literal {
    pub fn pos(fluent: FluentId) -> Self {
        Literal { fluent, positive: true }
    }

    pub fn neg(fluent: FluentId) -> Self {
        Literal { fluent, positive: false }
    }

    pub fn holds(&self, state: &State) -> bool {
        state.contains(self.fluent) == self.positive
    }
}

/// Closed-world state: the set of fluents that are true.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State(BTreeSet<FluentId>);

impl State {
    pub fn new<I: IntoIterator<Item = FluentId>>(fluents: I) -> Self {
        State(fluents.into_iter().collect())
    }

    pub fn contains(&self, f: FluentId) -> bool {
        self.0.contains(&f)
    }

    pub fn iter(&self) -> impl Iterator<Item = FluentId> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundAction {
    pub name: String,
    pub pre_pos: Vec<FluentId>,
    pub pre_neg: Vec<FluentId>,
    pub add: Vec<FluentId>,
    pub del: Vec<FluentId>,
    pub cost: f64,
}

fn sorted(mut v: Vec<FluentId>) -> Vec<FluentId> {
    v.sort_unstable();
    v.dedup();
    v
}

impl GroundAction {
    /// Builds an action, normalising fluent lists. Fails if add and delete
    /// effects overlap or the cost is negative.
    pub fn new(
        name: impl Into<String>,
        pre_pos: Vec<FluentId>,
        pre_neg: Vec<FluentId>,
        add: Vec<FluentId>,
        del: Vec<FluentId>,
        cost: f64,
    ) -> Result<Self, ModelError> {
        let name = name.into();
        let add = sorted(add);
        let del = sorted(del);
        if add.iter().any(|f| del.binary_search(f).is_ok()) {
            return Err(ModelError::InvalidAction {
                action: name,
                reason: "add and delete effects overlap".into(),
            });
        }
        if !(cost >= 0.0) || !cost.is_finite() {
            return Err(ModelError::InvalidAction {
                action: name,
                reason: format!("cost {cost} is not a non-negative number"),
            });
        }
        Ok(GroundAction {
            name,
            pre_pos: sorted(pre_pos),
            pre_neg: sorted(pre_neg),
            add,
            del,
            cost,
        })
    }

    pub fn is_applicable(&self, state: &State) -> bool {
        self.pre_pos.iter().all(|&f| state.contains(f))
            && self.pre_neg.iter().all(|&f| !state.contains(f))
    }

    fn fluents(&self) -> impl Iterator<Item = FluentId> + '_ {
        self.pre_pos
            .iter()
            .chain(&self.pre_neg)
            .chain(&self.add)
            .chain(&self.del)
            .copied()
    }
}

/// Successor state `(state - del) ∪ add`.
pub fn apply(state: &State, action: &GroundAction) -> Result<State, ModelError> {
    if !action.is_applicable(state) {
        return Err(ModelError::InapplicableAction {
            action: action.name.clone(),
        });
    }
    let mut next = state.0.clone();
    for f in &action.del {
        next.remove(f);
    }
    next.extend(action.add.iter().copied());
    Ok(State(next))
}

/// Goal condition in DNF. A single empty disjunct is the trivially true goal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GoalFormula {
    disjuncts: Vec<Vec<Literal>>,
}

impl GoalFormula {
    pub fn new(disjuncts: Vec<Vec<Literal>>) -> Result<Self, ModelError> {
        if disjuncts.is_empty() {
            return Err(ModelError::InvalidProblem(
                "goal has no disjuncts (unsatisfiable)".into(),
            ));
        }
        let disjuncts = disjuncts
            .into_iter()
            .map(|mut d| {
                d.sort_unstable();
                d.dedup();
                d
            })
            .collect();
        Ok(GoalFormula { disjuncts })
    }

    pub fn trivial() -> Self {
        GoalFormula {
            disjuncts: vec![Vec::new()],
        }
    }

    pub fn conjunction(lits: Vec<Literal>) -> Self {
        GoalFormula::new(vec![lits]).expect("one disjunct")
    }

    pub fn disjuncts(&self) -> &[Vec<Literal>] {
        &self.disjuncts
    }

    pub fn is_trivial(&self) -> bool {
        self.disjuncts.iter().any(Vec::is_empty)
    }

    pub fn holds(&self, state: &State) -> bool {
        self.disjuncts
            .iter()
            .any(|d| d.iter().all(|l| l.holds(state)))
    }

    /// Truth of the goal under an assignment of only its own fluents.
    pub fn holds_under(&self, value: impl Fn(FluentId) -> bool) -> bool {
        self.disjuncts
            .iter()
            .any(|d| d.iter().all(|l| value(l.fluent) == l.positive))
    }

    /// The grounded goal fluents, sorted.
    pub fn fluents(&self) -> Vec<FluentId> {
        let set: BTreeSet<FluentId> = self
            .disjuncts
            .iter()
            .flat_map(|d| d.iter().map(|l| l.fluent))
            .collect();
        set.into_iter().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Plan(pub Vec<ActionId>);

impl Plan {
    pub fn empty() -> Self {
        Plan(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn actions(&self) -> &[ActionId] {
        &self.0
    }
}

/// A plan together with the states it visits; `states[0]` is the initial state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PlanTrace {
    pub plan: Plan,
    pub states: Vec<State>,
}

impl PlanTrace {
    pub fn final_state(&self) -> &State {
        self.states.last().expect("trace holds at least the initial state")
    }
}

#[derive(Debug, Clone)]
pub struct GroundProblem {
    fluents: Vec<Fluent>,
    fluent_index: HashMap<Fluent, FluentId>,
    actions: Vec<GroundAction>,
    action_index: HashMap<String, ActionId>,
    init: State,
    goal: GoalFormula,
    budget: Option<usize>,
}

impl GroundProblem {
    pub fn new(
        fluents: Vec<Fluent>,
        actions: Vec<GroundAction>,
        init: State,
        goal: GoalFormula,
        budget: Option<usize>,
    ) -> Result<Self, ModelError> {
        let mut fluent_index = HashMap::with_capacity(fluents.len());
        for (i, f) in fluents.iter().enumerate() {
            if fluent_index.insert(f.clone(), i).is_some() {
                return Err(ModelError::InvalidProblem(format!("duplicate fluent `{f}`")));
            }
        }
        let n = fluents.len();
        let in_range = |f: FluentId| f < n;
        if !init.iter().all(in_range) {
            return Err(ModelError::InvalidProblem(
                "initial state mentions a fluent outside the universe".into(),
            ));
        }
        if !goal.fluents().into_iter().all(in_range) {
            return Err(ModelError::InvalidProblem(
                "goal mentions a fluent outside the universe".into(),
            ));
        }
        let mut action_index = HashMap::with_capacity(actions.len());
        for (i, a) in actions.iter().enumerate() {
            if !a.fluents().all(in_range) {
                return Err(ModelError::InvalidAction {
                    action: a.name.clone(),
                    reason: "mentions a fluent outside the universe".into(),
                });
            }
            if action_index.insert(a.name.clone(), i).is_some() {
                return Err(ModelError::InvalidProblem(format!(
                    "duplicate action `{}`",
                    a.name
                )));
            }
        }
        if budget == Some(0) {
            return Err(ModelError::InvalidProblem("budget must be positive".into()));
        }
        Ok(GroundProblem {
            fluents,
            fluent_index,
            actions,
            action_index,
            init,
            goal,
            budget,
        })
    }

    pub fn fluents(&self) -> &[Fluent] {
        &self.fluents
    }

    pub fn fluent(&self, id: FluentId) -> &Fluent {
        &self.fluents[id]
    }

    pub fn fluent_id(&self, f: &Fluent) -> Option<FluentId> {
        self.fluent_index.get(f).copied()
    }

    pub fn actions(&self) -> &[GroundAction] {
        &self.actions
    }

    pub fn action(&self, id: ActionId) -> &GroundAction {
        &self.actions[id]
    }

    /// Looks up an action by `name(a,b)` or `(name a b)`.
    pub fn action_id(&self, name: &str) -> Option<ActionId> {
        if let Some(&id) = self.action_index.get(name.trim()) {
            return Some(id);
        }
        let canon = name.parse::<Fluent>().ok()?.to_string();
        self.action_index.get(&canon).copied()
    }

    pub fn init(&self) -> &State {
        &self.init
    }

    pub fn goal(&self) -> &GoalFormula {
        &self.goal
    }

    pub fn budget(&self) -> Option<usize> {
        self.budget
    }

    pub fn action_names(&self, plan: &Plan) -> Vec<String> {
        plan.0.iter().map(|&a| self.actions[a].name.clone()).collect()
    }

    pub fn state_fluents(&self, state: &State) -> Vec<&Fluent> {
        state.iter().map(|f| &self.fluents[f]).collect()
    }

    /// Executes `plan` from the initial state without checking the goal.
    pub fn simulate(&self, plan: &Plan) -> Result<PlanTrace, ValidationError> {
        let mut states = Vec::with_capacity(plan.len() + 1);
        states.push(self.init.clone());
        for (index, &a) in plan.0.iter().enumerate() {
            let action = &self.actions[a];
            let next = apply(states.last().unwrap(), action).map_err(|_| {
                ValidationError::InapplicableAction {
                    index,
                    action: action.name.clone(),
                }
            })?;
            states.push(next);
        }
        Ok(PlanTrace {
            plan: plan.clone(),
            states,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ProblemDoc::from_problem(self)).expect("serialisable")
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let doc: ProblemDoc =
            serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))?;
        doc.into_problem()
    }
}

pub fn validate_plan(problem: &GroundProblem, plan: &Plan) -> Result<PlanTrace, ValidationError> {
    if let Some(budget) = problem.budget {
        if plan.len() > budget {
            return Err(ValidationError::BudgetExceeded {
                len: plan.len(),
                budget,
            });
        }
    }
    let trace = problem.simulate(plan)?;
    if !problem.goal.holds(trace.final_state()) {
        return Err(ValidationError::GoalNotSatisfied);
    }
    Ok(trace)
}

pub fn plan_cost(problem: &GroundProblem, plan: &Plan) -> f64 {
    plan.0.iter().map(|&a| problem.actions[a].cost).sum()
}

/// Every valid plan of length at most `max_len`, shortest first and then in
/// lexicographic order of action ids.
///
/// Exponential in `max_len`; intended as a brute-force oracle on tiny
/// problems (bundled tests stay at `max_len <= 8`).
pub fn enumerate_plans(problem: &GroundProblem, max_len: usize) -> Vec<Plan> {
    let max_len = problem.budget.map_or(max_len, |b| b.min(max_len));
    let mut found = Vec::new();
    let mut stack = Vec::new();
    enumerate_rec(problem, problem.init.clone(), &mut stack, max_len, &mut found);
    found.sort_by(|a: &Plan, b: &Plan| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    found
}

fn enumerate_rec(
    problem: &GroundProblem,
    state: State,
    stack: &mut Vec<ActionId>,
    max_len: usize,
    found: &mut Vec<Plan>,
) {
    if problem.goal.holds(&state) {
        found.push(Plan(stack.clone()));
    }
    if stack.len() == max_len {
        return;
    }
    for (id, action) in problem.actions.iter().enumerate() {
        if let Ok(next) = apply(&state, action) {
            stack.push(id);
            enumerate_rec(problem, next, stack, max_len, found);
            stack.pop();
        }
    }
}

/// Convenience builder addressing fluents and actions by name.
#[derive(Debug, Default)]
pub struct ProblemBuilder {
    fluents: Vec<Fluent>,
    index: HashMap<Fluent, FluentId>,
    actions: Vec<GroundAction>,
    init: Vec<FluentId>,
    goal: Vec<Vec<Literal>>,
    budget: Option<usize>,
}

impl ProblemBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fluent(&mut self, text: &str) -> Result<FluentId, ModelError> {
        let f: Fluent = text.parse()?;
        Ok(self.intern(f))
    }

    fn intern(&mut self, f: Fluent) -> FluentId {
        if let Some(&id) = self.index.get(&f) {
            return id;
        }
        let id = self.fluents.len();
        self.fluents.push(f.clone());
        self.index.insert(f, id);
        id
    }

    fn lits(&mut self, lits: &[&str]) -> Result<Vec<Literal>, ModelError> {
        lits.iter().map(|l| self.literal(l)).collect()
    }

    fn literal(&mut self, text: &str) -> Result<Literal, ModelError> {
        let (positive, body) = split_sign(text);
        Ok(Literal {
            fluent: self.fluent(body)?,
            positive,
        })
    }

    /// `pre` entries may be negated with a leading `-`.
    pub fn action(
        &mut self,
        name: &str,
        pre: &[&str],
        add: &[&str],
        del: &[&str],
        cost: f64,
    ) -> Result<&mut Self, ModelError> {
        let pre = self.lits(pre)?;
        let add = add.iter().map(|f| self.fluent(f)).collect::<Result<_, _>>()?;
        let del = del.iter().map(|f| self.fluent(f)).collect::<Result<_, _>>()?;
        let (pos, neg): (Vec<_>, Vec<_>) = pre.into_iter().partition(|l| l.positive);
        let action = GroundAction::new(
            name,
            pos.into_iter().map(|l| l.fluent).collect(),
            neg.into_iter().map(|l| l.fluent).collect(),
            add,
            del,
            cost,
        )?;
        self.actions.push(action);
        Ok(self)
    }

    pub fn init(&mut self, fluents: &[&str]) -> Result<&mut Self, ModelError> {
        for f in fluents {
            let id = self.fluent(f)?;
            self.init.push(id);
        }
        Ok(self)
    }

    /// Adds one goal disjunct (a conjunction of signed literals).
    pub fn goal_disjunct(&mut self, lits: &[&str]) -> Result<&mut Self, ModelError> {
        let d = self.lits(lits)?;
        self.goal.push(d);
        Ok(self)
    }

    pub fn budget(&mut self, budget: usize) -> &mut Self {
        self.budget = Some(budget);
        self
    }

    pub fn build(&self) -> Result<GroundProblem, ModelError> {
        let goal = if self.goal.is_empty() {
            GoalFormula::trivial()
        } else {
            GoalFormula::new(self.goal.clone())?
        };
        GroundProblem::new(
            self.fluents.clone(),
            self.actions.clone(),
            State::new(self.init.iter().copied()),
            goal,
            self.budget,
        )
    }
}

fn split_sign(text: &str) -> (bool, &str) {
    let t = text.trim();
    if let Some(rest) = t.strip_prefix('-') {
        (false, rest)
    } else if let Some(rest) = t.strip_prefix('+') {
        (true, rest)
    } else {
        (true, t)
    }
}

// JSON interchange: fluents as "name(a,b)", signed literals as "-name(a,b)".

#[derive(Serialize, Deserialize)]
struct ProblemDoc {
    fluents: Vec<String>,
    actions: Vec<ActionDoc>,
    init: Vec<String>,
    goal: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    budget: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct ActionDoc {
    name: String,
    #[serde(default)]
    pre: Vec<String>,
    #[serde(default)]
    add: Vec<String>,
    #[serde(default)]
    del: Vec<String>,
    #[serde(default = "unit_cost")]
    cost: f64,
}

fn unit_cost() -> f64 {
    1.0
}

impl ProblemDoc {
    fn from_problem(p: &GroundProblem) -> Self {
        let name = |f: FluentId| p.fluents[f].to_string();
        let lit = |l: &Literal| {
            if l.positive {
                name(l.fluent)
            } else {
                format!("-{}", name(l.fluent))
            }
        };
        ProblemDoc {
            fluents: p.fluents.iter().map(ToString::to_string).collect(),
            actions: p
                .actions
                .iter()
                .map(|a| ActionDoc {
                    name: a.name.clone(),
                    pre: a
                        .pre_pos
                        .iter()
                        .map(|&f| name(f))
                        .chain(a.pre_neg.iter().map(|&f| format!("-{}", name(f))))
                        .collect(),
                    add: a.add.iter().map(|&f| name(f)).collect(),
                    del: a.del.iter().map(|&f| name(f)).collect(),
                    cost: a.cost,
                })
                .collect(),
            init: p.init.iter().map(name).collect(),
            goal: p
                .goal
                .disjuncts
                .iter()
                .map(|d| d.iter().map(lit).collect())
                .collect(),
            budget: p.budget,
        }
    }

    fn into_problem(self) -> Result<GroundProblem, ModelError> {
        let fluents = self
            .fluents
            .iter()
            .map(|f| f.parse::<Fluent>())
            .collect::<Result<Vec<_>, _>>()?;
        let index: HashMap<&Fluent, FluentId> =
            fluents.iter().enumerate().map(|(i, f)| (f, i)).collect();
        let lookup = |text: &str| -> Result<FluentId, ModelError> {
            let f: Fluent = text.parse()?;
            index
                .get(&f)
                .copied()
                .ok_or_else(|| ModelError::UnknownFluent(text.to_string()))
        };
        let literal = |text: &str| -> Result<Literal, ModelError> {
            let (positive, body) = split_sign(text);
            Ok(Literal {
                fluent: lookup(body)?,
                positive,
            })
        };
        let mut actions = Vec::with_capacity(self.actions.len());
        for a in &self.actions {
            let mut pos = Vec::new();
            let mut neg = Vec::new();
            for p in &a.pre {
                let l = literal(p)?;
                if l.positive {
                    pos.push(l.fluent)
                } else {
                    neg.push(l.fluent)
                }
            }
            let add = a.add.iter().map(|f| lookup(f)).collect::<Result<_, _>>()?;
            let del = a.del.iter().map(|f| lookup(f)).collect::<Result<_, _>>()?;
            actions.push(GroundAction::new(a.name.clone(), pos, neg, add, del, a.cost)?);
        }
        let init = State::new(
            self.init
                .iter()
                .map(|f| lookup(f))
                .collect::<Result<Vec<_>, _>>()?,
        );
        let goal = GoalFormula::new(
            self.goal
                .iter()
                .map(|d| d.iter().map(|l| literal(l)).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()?,
        )?;
        GroundProblem::new(fluents, actions, init, goal, self.budget)
    }
}
