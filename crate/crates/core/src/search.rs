//! Simulator-based planning: forward search over a black-box simulator with
//! temporal-formula monitoring to prune prefixes that can no longer satisfy
//! the target behaviour.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};
use std::fmt;
use std::hash::Hash;
use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bspace::{
    bins_from_config, categorical_score_feature, enumerate_cells, ltl_feature, parse_ltl_values,
    pbehaviour, Behaviour, BehaviourSpace, BspaceError, FeatureConfig, FeatureExpression, PropTraced,
    ScoreFn, SpaceConfig, DEFAULT_CELL_CAP,
};
use crate::fbi::{BehaviourGenerator, GenError, PlanGenerator};
use crate::ltl::{eval_finite, Alphabet, LtlError, LtlFormula, Monitor, Obligation, Valuation, Verdict};

/// A deterministic black-box simulator.
///
/// `step` returns `None` when the action leads to a dead end (for example the
/// avatar dying); search treats such successors as pruned.
pub trait Simulator {
    type State: Clone;
    type Action: Clone + Eq + Hash + fmt::Debug + fmt::Display;
    /// Everything about a state that influences successors, propositions
    /// and goal status.
    type Digest: Clone + Eq + Hash;

    fn alphabet(&self) -> &Alphabet;
    fn initial(&self) -> Self::State;
    fn legal_actions(&self, state: &Self::State) -> Vec<Self::Action>;
    fn step(&self, state: &Self::State, action: &Self::Action) -> Option<Self::State>;
    fn propositions(&self, state: &Self::State) -> Valuation;
    fn is_goal(&self, state: &Self::State) -> bool;
    fn budget(&self) -> Option<usize>;
    fn digest(&self, state: &Self::State) -> Self::Digest;
}

/// Actions, visited states and their valuations; `states.len() ==
/// plan.len() + 1`. Equality compares action sequences only.
#[derive(Debug, Clone)]
pub struct SimTrace<A, S> {
    pub plan: Vec<A>,
    pub states: Vec<S>,
    pub valuations: Vec<Valuation>,
}

impl<A: PartialEq, S> PartialEq for SimTrace<A, S> {
    fn eq(&self, other: &Self) -> bool {
        self.plan == other.plan
    }
}

impl<A, S> PropTraced for SimTrace<A, S> {
    fn valuations(&self) -> &[Valuation] {
        &self.valuations
    }
}

impl<A, S> SimTrace<A, S> {
    pub fn final_state(&self) -> &S {
        self.states.last().expect("trace has an initial state")
    }
}

pub type TraceOf<S> = SimTrace<<S as Simulator>::Action, <S as Simulator>::State>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    #[default]
    BreadthFirst,
    DepthFirst,
    BestFirst,
}

pub type Heuristic<S> = Arc<dyn Fn(&S) -> f64 + Send + Sync>;

pub struct SearchConfig<S> {
    pub strategy: Strategy,
    /// Lower is better; used by best-first only.
    pub heuristic: Option<Heuristic<S>>,
    pub node_budget: usize,
    /// Breaks best-first ties.
    pub seed: u64,
    /// Disable to search without monitor pruning.
    pub prune: bool,
    /// Cell searches run in parallel batches of this size.
    pub jobs: usize,
}

impl<S> Clone for SearchConfig<S> {
    fn clone(&self) -> Self {
        SearchConfig {
            strategy: self.strategy,
            heuristic: self.heuristic.clone(),
            node_budget: self.node_budget,
            seed: self.seed,
            prune: self.prune,
            jobs: self.jobs,
        }
    }
}

impl<S> fmt::Debug for SearchConfig<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SearchConfig")
            .field("strategy", &self.strategy)
            .field("heuristic", &self.heuristic.is_some())
            .field("node_budget", &self.node_budget)
            .field("seed", &self.seed)
            .field("prune", &self.prune)
            .field("jobs", &self.jobs)
            .finish()
    }
}

impl<S> Default for SearchConfig<S> {
    fn default() -> Self {
        SearchConfig {
            strategy: Strategy::BreadthFirst,
            heuristic: None,
            node_budget: 1_000_000,
            seed: 0,
            prune: true,
            jobs: 1,
        }
    }
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("node budget of {budget} expansions exhausted")]
    NodeBudgetExceeded { budget: usize },
    #[error("node budget must be at least 1")]
    ZeroBudget,
    #[error(transparent)]
    Ltl(#[from] LtlError),
    #[error(transparent)]
    Behaviour(#[from] BspaceError),
    #[error("behaviour space is not search-compatible: {0}")]
    UnsupportedSpace(String),
    #[error("returned trace violates its target {0}")]
    TargetViolated(String),
    #[error("trace for cell {cell} extracts to {extracted}")]
    CellMismatch { cell: String, extracted: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub searches: u64,
    pub expanded: u64,
    pub generated: u64,
    pub pruned: u64,
    pub duplicates: u64,
    pub dead_ends: u64,
}

impl SearchStats {
    fn absorb(&mut self, o: &SearchStats) {
        self.searches += o.searches;
        self.expanded += o.expanded;
        self.generated += o.generated;
        self.pruned += o.pruned;
        self.duplicates += o.duplicates;
        self.dead_ends += o.dead_ends;
    }
}

struct Node<S: Simulator> {
    state: S::State,
    valuation: Valuation,
    residual: Obligation,
    depth: usize,
    parent: Option<usize>,
    action: Option<S::Action>,
    /// Excluded plans this node's path is still a prefix of.
    excluded: Vec<usize>,
}

struct Ranked {
    score: f64,
    tie: u64,
    seq: usize,
    node: usize,
}

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Ranked {}

impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ranked {
    // Reversed so that the max-heap pops the lowest score first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .score
            .total_cmp(&self.score)
            .then(other.tie.cmp(&self.tie))
            .then(other.seq.cmp(&self.seq))
    }
}

enum Frontier {
    Queue(VecDeque<usize>),
    Stack(Vec<usize>),
    Heap(BinaryHeap<Ranked>, ChaCha8Rng, usize),
}

impl Frontier {
    fn pop(&mut self) -> Option<usize> {
        match self {
            Frontier::Queue(q) => q.pop_front(),
            Frontier::Stack(s) => s.pop(),
            Frontier::Heap(h, ..) => h.pop().map(|r| r.node),
        }
    }

    fn is_empty(&self) -> bool {
        match self {
            Frontier::Queue(q) => q.is_empty(),
            Frontier::Stack(s) => s.is_empty(),
            Frontier::Heap(h, ..) => h.is_empty(),
        }
    }
}

/// Finds a goal trace within the simulator budget that satisfies `target`
/// (any goal trace when `None`) and whose action sequence is not in
/// `excluded`.
///
/// `Ok(None)` means the bounded space was searched completely.
pub fn constrained_search<S: Simulator>(
    sim: &S,
    target: Option<&LtlFormula>,
    excluded: &[Vec<S::Action>],
    cfg: &SearchConfig<S::State>,
    stats: &mut SearchStats,
) -> Result<Option<TraceOf<S>>, SearchError> {
    if cfg.node_budget == 0 {
        return Err(SearchError::ZeroBudget);
    }
    stats.searches += 1;
    let alphabet = sim.alphabet();
    let start = match target {
        Some(f) => Monitor::new(f, alphabet)?.start().clone(),
        None => Obligation::True,
    };
    let max_depth = sim.budget().unwrap_or(usize::MAX);

    let mut nodes: Vec<Node<S>> = Vec::new();
    let mut best_depth: HashMap<(S::Digest, Obligation), usize> = HashMap::new();
    let mut frontier = match cfg.strategy {
        Strategy::BreadthFirst => Frontier::Queue(VecDeque::new()),
        Strategy::DepthFirst => Frontier::Stack(Vec::new()),
        Strategy::BestFirst => Frontier::Heap(BinaryHeap::new(), ChaCha8Rng::seed_from_u64(cfg.seed), 0),
    };

    let init = sim.initial();
    let valuation = sim.propositions(&init);
    let residual = start.progress(&valuation);
    if cfg.prune && residual.verdict() == Verdict::ViolatedAllExtensions {
        stats.pruned += 1;
        return Ok(None);
    }
    let root = Node::<S> {
        state: init,
        valuation,
        residual,
        depth: 0,
        parent: None,
        action: None,
        excluded: (0..excluded.len()).collect(),
    };

    let push = |frontier: &mut Frontier, nodes: &mut Vec<Node<S>>, node: Node<S>| {
        let idx = nodes.len();
        let score = match (&mut *frontier, &cfg.heuristic) {
            (Frontier::Heap(..), Some(h)) => h(&node.state),
            _ => 0.0,
        };
        nodes.push(node);
        match frontier {
            Frontier::Queue(q) => q.push_back(idx),
            Frontier::Stack(s) => s.push(idx),
            Frontier::Heap(h, rng, seq) => {
                *seq += 1;
                h.push(Ranked {
                    score,
                    tie: rng.next_u64(),
                    seq: *seq,
                    node: idx,
                });
            }
        }
    };
    if root.excluded.is_empty() {
        best_depth.insert((sim.digest(&root.state), root.residual.clone()), 0);
    }
    push(&mut frontier, &mut nodes, root);

    let mut expanded = 0usize;
    while let Some(idx) = frontier.pop() {
        let node = &nodes[idx];
        // A shallower duplicate may have superseded this entry.
        if node.excluded.is_empty() {
            let key = (sim.digest(&node.state), node.residual.clone());
            if best_depth.get(&key).is_some_and(|&d| d < node.depth) {
                stats.duplicates += 1;
                continue;
            }
        }
        if sim.is_goal(&node.state)
            && node.residual.accepts_end()
            && !node.excluded.iter().any(|&e| excluded[e].len() == node.depth)
        {
            return Ok(Some(reconstruct(&nodes, idx)));
        }
        if node.depth >= max_depth {
            continue;
        }
        if expanded == cfg.node_budget {
            return Err(SearchError::NodeBudgetExceeded {
                budget: cfg.node_budget,
            });
        }
        expanded += 1;
        stats.expanded += 1;

        let (depth, state, residual, excl) = (
            node.depth,
            node.state.clone(),
            node.residual.clone(),
            node.excluded.clone(),
        );
        let mut children = Vec::new();
        for action in sim.legal_actions(&state) {
            stats.generated += 1;
            let Some(next) = sim.step(&state, &action) else {
                stats.dead_ends += 1;
                continue;
            };
            let valuation = sim.propositions(&next);
            let residual = residual.progress(&valuation);
            if cfg.prune && residual.verdict() == Verdict::ViolatedAllExtensions {
                stats.pruned += 1;
                continue;
            }
            let still: Vec<usize> = excl
                .iter()
                .copied()
                .filter(|&e| excluded[e].get(depth) == Some(&action))
                .collect();
            if still.is_empty() {
                let key = (sim.digest(&next), residual.clone());
                match best_depth.get(&key) {
                    Some(&d) if d <= depth + 1 => {
                        stats.duplicates += 1;
                        continue;
                    }
                    _ => {
                        best_depth.insert(key, depth + 1);
                    }
                }
            }
            children.push(Node::<S> {
                state: next,
                valuation,
                residual,
                depth: depth + 1,
                parent: Some(idx),
                action: Some(action),
                excluded: still,
            });
        }
        // Depth-first explores children in action order.
        if matches!(frontier, Frontier::Stack(_)) {
            children.reverse();
        }
        for c in children {
            push(&mut frontier, &mut nodes, c);
        }
    }
    debug_assert!(frontier.is_empty());
    Ok(None)
}

fn reconstruct<S: Simulator>(nodes: &[Node<S>], mut idx: usize) -> TraceOf<S> {
    let mut plan = Vec::new();
    let mut states = Vec::new();
    let mut valuations = Vec::new();
    loop {
        let n = &nodes[idx];
        states.push(n.state.clone());
        valuations.push(n.valuation.clone());
        match (n.parent, &n.action) {
            (Some(p), Some(a)) => {
                plan.push(a.clone());
                idx = p;
            }
            _ => break,
        }
    }
    plan.reverse();
    states.reverse();
    valuations.reverse();
    SimTrace {
        plan,
        states,
        valuations,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellStatus {
    Found,
    Exhausted,
    NodeBudget,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CellOutcome {
    pub cell: String,
    pub status: CellStatus,
}

/// Conjunction of the per-feature formulas of a cell.
pub fn cell_formula<T>(space: &BehaviourSpace<T>, cell: &Behaviour) -> Result<LtlFormula, SearchError> {
    let mut parts = Vec::new();
    for (f, v) in space.features().iter().zip(&cell.0) {
        let formula = f.expression().formula(v).ok_or_else(|| {
            SearchError::UnsupportedSpace(format!("no formula for value {v} of `{}`", f.name()))
        })?;
        parts.push(formula.clone());
    }
    LtlFormula::conjoin(parts).ok_or_else(|| SearchError::UnsupportedSpace("space has no features".into()))
}

/// One constrained search per unvisited cell, in cell enumeration order.
pub struct SimBehaviourGenerator<'a, S: Simulator> {
    sim: &'a S,
    space: &'a BehaviourSpace<TraceOf<S>>,
    cfg: SearchConfig<S::State>,
    cells: Vec<(Behaviour, LtlFormula)>,
    exhausted: HashSet<usize>,
    over_budget: HashSet<usize>,
    stats: SearchStats,
    outcomes: Vec<CellOutcome>,
}

impl<'a, S: Simulator> SimBehaviourGenerator<'a, S> {
    pub fn new(
        sim: &'a S,
        space: &'a BehaviourSpace<TraceOf<S>>,
        cfg: SearchConfig<S::State>,
    ) -> Result<Self, SearchError> {
        for f in space.features() {
            if let FeatureExpression::GoalAssignment(_) = f.expression() {
                return Err(SearchError::UnsupportedSpace(format!(
                    "feature `{}` forbids goal assignments",
                    f.name()
                )));
            }
        }
        let mut cells = Vec::new();
        for cell in enumerate_cells(space, DEFAULT_CELL_CAP)? {
            let f = cell_formula(space, &cell)?;
            sim.alphabet().check(&f)?;
            cells.push((cell, f));
        }
        Ok(SimBehaviourGenerator {
            sim,
            space,
            cfg,
            cells,
            exhausted: HashSet::new(),
            over_budget: HashSet::new(),
            stats: SearchStats::default(),
            outcomes: Vec::new(),
        })
    }

    pub fn stats(&self) -> &SearchStats {
        &self.stats
    }

    /// Outcome of every cell search so far, in search order.
    pub fn outcomes(&self) -> &[CellOutcome] {
        &self.outcomes
    }

    fn check(&self, cell: &Behaviour, target: &LtlFormula, trace: &TraceOf<S>) -> Result<(), SearchError> {
        if !eval_finite(target, self.sim.alphabet(), &trace.valuations)? {
            return Err(SearchError::TargetViolated(target.to_string()));
        }
        let extracted = pbehaviour(self.space, trace)?;
        if &extracted != cell {
            return Err(SearchError::CellMismatch {
                cell: cell.to_string(),
                extracted: extracted.to_string(),
            });
        }
        Ok(())
    }
}

fn fail(e: SearchError) -> GenError {
    GenError::Failed(Box::new(e))
}

type CellResult<S> = (Result<Option<TraceOf<S>>, SearchError>, SearchStats);

impl<S> BehaviourGenerator<TraceOf<S>> for SimBehaviourGenerator<'_, S>
where
    S: Simulator + Sync,
    S::State: Send + Sync,
    S::Action: Send + Sync,
{
    fn generate(&mut self, found: &[Behaviour]) -> Result<Option<TraceOf<S>>, GenError> {
        let pending: Vec<usize> = (0..self.cells.len())
            .filter(|i| !self.exhausted.contains(i) && !self.over_budget.contains(i))
            .filter(|&i| !found.contains(&self.cells[i].0))
            .collect();
        let jobs = self.cfg.jobs.max(1);
        for batch in pending.chunks(jobs) {
            let results: Vec<CellResult<S>> = if batch.len() == 1 {
                vec![self.search_cell(batch[0])]
            } else {
                std::thread::scope(|scope| {
                    let handles: Vec<_> = batch
                        .iter()
                        .map(|&i| {
                            let this = &*self;
                            scope.spawn(move || this.search_cell(i))
                        })
                        .collect();
                    handles
                        .into_iter()
                        .map(|h| h.join().expect("cell search panicked"))
                        .collect()
                })
            };
            // Outcomes are recorded in cell order up to the first success, so
            // the batch size does not change the result.
            for (&i, (r, st)) in batch.iter().zip(results) {
                let label = self.cells[i].0.to_string();
                self.stats.absorb(&st);
                match r {
                    Ok(Some(trace)) => {
                        let (cell, target) = &self.cells[i];
                        self.check(cell, target, &trace).map_err(fail)?;
                        self.outcomes.push(CellOutcome {
                            cell: label,
                            status: CellStatus::Found,
                        });
                        return Ok(Some(trace));
                    }
                    Ok(None) => {
                        self.exhausted.insert(i);
                        self.outcomes.push(CellOutcome {
                            cell: label,
                            status: CellStatus::Exhausted,
                        });
                    }
                    Err(SearchError::NodeBudgetExceeded { .. }) => {
                        self.over_budget.insert(i);
                        self.outcomes.push(CellOutcome {
                            cell: label,
                            status: CellStatus::NodeBudget,
                        });
                    }
                    Err(e) => return Err(fail(e)),
                }
            }
        }
        let unresolved = self
            .over_budget
            .iter()
            .filter(|&&i| !found.contains(&self.cells[i].0))
            .count();
        if unresolved > 0 {
            return Err(GenError::Inconclusive(format!(
                "{unresolved} cell(s) hit the node budget of {}",
                self.cfg.node_budget
            )));
        }
        Ok(None)
    }
}

impl<S: Simulator> SimBehaviourGenerator<'_, S> {
    fn search_cell(&self, i: usize) -> CellResult<S> {
        let mut st = SearchStats::default();
        let r = constrained_search(self.sim, Some(&self.cells[i].1), &[], &self.cfg, &mut st);
        (r, st)
    }
}

/// Unconstrained goal search that skips already-returned action sequences.
pub struct SimPlanGenerator<'a, S: Simulator> {
    sim: &'a S,
    cfg: SearchConfig<S::State>,
    stats: SearchStats,
}

impl<'a, S: Simulator> SimPlanGenerator<'a, S> {
    pub fn new(sim: &'a S, cfg: SearchConfig<S::State>) -> Self {
        SimPlanGenerator {
            sim,
            cfg,
            stats: SearchStats::default(),
        }
    }

    pub fn stats(&self) -> &SearchStats {
        &self.stats
    }
}

impl<S: Simulator> PlanGenerator<TraceOf<S>> for SimPlanGenerator<'_, S> {
    fn generate(&mut self, existing: &[TraceOf<S>]) -> Result<Option<TraceOf<S>>, GenError> {
        let excluded: Vec<Vec<S::Action>> = existing.iter().map(|t| t.plan.clone()).collect();
        match constrained_search(self.sim, None, &excluded, &self.cfg, &mut self.stats) {
            Ok(r) => Ok(r),
            Err(e @ SearchError::NodeBudgetExceeded { .. }) => Err(GenError::Inconclusive(e.to_string())),
            Err(e) => Err(fail(e)),
        }
    }
}

/// Binds a space configuration to simulator traces. Categorical features
/// look their score up in `scores` by name.
pub fn bind_sim<A, St>(
    config: &SpaceConfig,
    alphabet: &Alphabet,
    scores: &HashMap<String, ScoreFn<SimTrace<A, St>>>,
) -> Result<BehaviourSpace<SimTrace<A, St>>, BspaceError>
where
    A: 'static,
    St: 'static,
{
    let mut features = Vec::new();
    for fc in &config.features {
        match fc {
            FeatureConfig::GoalEndings { .. } => {
                return Err(BspaceError::UnsupportedFeature {
                    kind: "goal-endings".into(),
                    reason: "simulators have no declarative goal fluents".into(),
                })
            }
            FeatureConfig::CategoricalScore {
                name,
                score,
                suffix,
                bins,
            } => {
                let f = scores
                    .get(score)
                    .ok_or_else(|| BspaceError::UnknownScore(score.clone()))?;
                let feature = categorical_score_feature(name, f.clone(), bins_from_config(bins)?, suffix);
                if let FeatureExpression::Temporal(table) = feature.expression() {
                    for (_, formula) in table {
                        alphabet.check(formula).map_err(|source| BspaceError::Ltl {
                            feature: name.clone(),
                            source,
                        })?;
                    }
                }
                features.push(feature);
            }
            FeatureConfig::Ltl { name, values } => {
                features.push(ltl_feature(name, parse_ltl_values(name, values)?, alphabet)?);
            }
        }
    }
    BehaviourSpace::new(features)
}
