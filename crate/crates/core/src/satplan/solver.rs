//! Conflict-driven clause-learning SAT solver.
//!
//! Two watched literals, first-UIP learning with local minimisation, VSIDS
//! branching with phase saving, Luby restarts and activity-based learnt
//! clause deletion. Runs are deterministic for a given seed.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolverError {
    #[error("resource limit reached after {conflicts} conflicts")]
    ResourceLimit { conflicts: u64 },
    #[error("literal {0} out of range")]
    BadLiteral(i32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverConfig {
    /// Seeds a small initial perturbation of variable activities; `0`
    /// keeps the plain index order.
    pub seed: u64,
    pub conflict_limit: Option<u64>,
    pub time_limit: Option<Duration>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            seed: 0,
            conflict_limit: Some(5_000_000),
            time_limit: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub decisions: u64,
    pub conflicts: u64,
    pub propagations: u64,
    pub restarts: u64,
}

/// Satisfying assignment; index `v - 1` holds the value of variable `v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment(pub Vec<bool>);

impl Assignment {
    pub fn value(&self, var: u32) -> bool {
        self.0[var as usize - 1]
    }

    pub fn satisfies(&self, clauses: &[Vec<i32>]) -> bool {
        clauses.iter().all(|c| {
            c.iter()
                .any(|&l| self.value(l.unsigned_abs()) == (l > 0))
        })
    }
}

type Lit = u32;
const NO_REASON: u32 = u32::MAX;

#[inline]
fn lit_of(dimacs: i32) -> Lit {
    let v = dimacs.unsigned_abs() - 1;
    2 * v + u32::from(dimacs < 0)
}

#[inline]
fn var(l: Lit) -> usize {
    (l >> 1) as usize
}

#[inline]
fn neg(l: Lit) -> Lit {
    l ^ 1
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Value {
    True,
    False,
    Unassigned,
}

struct Clause {
    lits: Vec<Lit>,
    learnt: bool,
    deleted: bool,
    activity: f64,
}

struct Heap {
    heap: Vec<usize>,
    pos: Vec<usize>,
}

const NOT_IN_HEAP: usize = usize::MAX;

impl Heap {
    fn new(n: usize) -> Self {
        Heap {
            heap: Vec::with_capacity(n),
            pos: vec![NOT_IN_HEAP; n],
        }
    }

    fn contains(&self, v: usize) -> bool {
        self.pos[v] != NOT_IN_HEAP
    }

    fn better(act: &[f64], a: usize, b: usize) -> bool {
        act[a] > act[b] || (act[a] == act[b] && a < b)
    }

    fn up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let p = (i - 1) / 2;
            if !Self::better(act, v, self.heap[p]) {
                break;
            }
            self.heap[i] = self.heap[p];
            self.pos[self.heap[i]] = i;
            i = p;
        }
        self.heap[i] = v;
        self.pos[v] = i;
    }

    fn down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let c = if r < n && Self::better(act, self.heap[r], self.heap[l]) {
                r
            } else {
                l
            };
            if !Self::better(act, self.heap[c], v) {
                break;
            }
            self.heap[i] = self.heap[c];
            self.pos[self.heap[i]] = i;
            i = c;
        }
        self.heap[i] = v;
        self.pos[v] = i;
    }

    fn insert(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.heap.push(v);
        let i = self.heap.len() - 1;
        self.pos[v] = i;
        self.up(i, act);
    }

    fn increased(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            self.up(self.pos[v], act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<usize> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().unwrap();
        self.pos[top] = NOT_IN_HEAP;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last] = 0;
            self.down(0, act);
        }
        Some(top)
    }
}

fn luby(mut i: u64) -> u64 {
    // i >= 1
    loop {
        let mut k = 1u32;
        while (1u64 << k) - 1 < i {
            k += 1;
        }
        if (1u64 << k) - 1 == i {
            return 1u64 << (k - 1);
        }
        i -= (1u64 << (k - 1)) - 1;
    }
}

pub struct Solver {
    num_vars: usize,
    clauses: Vec<Clause>,
    watches: Vec<Vec<u32>>,
    assigns: Vec<Value>,
    level: Vec<u32>,
    reason: Vec<u32>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f64,
    heap: Heap,
    phase: Vec<bool>,
    seen: Vec<bool>,
    ok: bool,
    num_learnts: usize,
    max_learnts: f64,
    config: SolverConfig,
    stats: SolverStats,
}

impl Solver {
    pub fn new(num_vars: usize, config: SolverConfig) -> Self {
        let mut activity = vec![0.0; num_vars];
        if config.seed != 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            for a in &mut activity {
                *a = rng.gen::<f64>() * 1e-5;
            }
        }
        let mut heap = Heap::new(num_vars);
        for v in 0..num_vars {
            heap.insert(v, &activity);
        }
        Solver {
            num_vars,
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * num_vars],
            assigns: vec![Value::Unassigned; num_vars],
            level: vec![0; num_vars],
            reason: vec![NO_REASON; num_vars],
            trail: Vec::with_capacity(num_vars),
            trail_lim: Vec::new(),
            qhead: 0,
            activity,
            var_inc: 1.0,
            cla_inc: 1.0,
            heap,
            phase: vec![false; num_vars],
            seen: vec![false; num_vars],
            ok: true,
            num_learnts: 0,
            max_learnts: 0.0,
            config,
            stats: SolverStats::default(),
        }
    }

    pub fn stats(&self) -> &SolverStats {
        &self.stats
    }

    #[inline]
    fn value(&self, l: Lit) -> Value {
        match self.assigns[var(l)] {
            Value::Unassigned => Value::Unassigned,
            Value::True if l & 1 == 0 => Value::True,
            Value::False if l & 1 == 1 => Value::True,
            _ => Value::False,
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, l: Lit, reason: u32) {
        let v = var(l);
        self.assigns[v] = if l & 1 == 0 { Value::True } else { Value::False };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Adds a clause at decision level 0 (before `solve`).
    pub fn add_clause(&mut self, clause: &[i32]) -> Result<(), SolverError> {
        if !self.ok {
            return Ok(());
        }
        let mut lits = Vec::with_capacity(clause.len());
        for &d in clause {
            if d == 0 || d.unsigned_abs() as usize > self.num_vars {
                return Err(SolverError::BadLiteral(d));
            }
            lits.push(lit_of(d));
        }
        lits.sort_unstable();
        lits.dedup();
        if lits.windows(2).any(|w| w[0] == neg(w[1])) {
            return Ok(());
        }
        lits.retain(|&l| self.value(l) != Value::False);
        if lits.iter().any(|&l| self.value(l) == Value::True) {
            return Ok(());
        }
        match lits.len() {
            0 => self.ok = false,
            1 => self.enqueue(lits[0], NO_REASON),
            _ => {
                self.attach(lits, false);
            }
        }
        Ok(())
    }

    fn attach(&mut self, lits: Vec<Lit>, learnt: bool) -> u32 {
        let cref = self.clauses.len() as u32;
        self.watches[lits[0] as usize].push(cref);
        self.watches[lits[1] as usize].push(cref);
        self.clauses.push(Clause {
            lits,
            learnt,
            deleted: false,
            activity: 0.0,
        });
        if learnt {
            self.num_learnts += 1;
        }
        cref
    }

    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = neg(p);
            let mut ws = std::mem::take(&mut self.watches[false_lit as usize]);
            let mut i = 0;
            let mut j = 0;
            let mut conflict = None;
            while i < ws.len() {
                let cref = ws[i];
                i += 1;
                if self.clauses[cref as usize].deleted {
                    continue;
                }
                let first = {
                    let c = &mut self.clauses[cref as usize].lits;
                    if c[0] == false_lit {
                        c.swap(0, 1);
                    }
                    c[0]
                };
                if self.value(first) == Value::True {
                    ws[j] = cref;
                    j += 1;
                    continue;
                }
                let len = self.clauses[cref as usize].lits.len();
                let mut moved = false;
                for k in 2..len {
                    let l = self.clauses[cref as usize].lits[k];
                    if self.value(l) != Value::False {
                        self.clauses[cref as usize].lits.swap(1, k);
                        self.watches[l as usize].push(cref);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = cref;
                j += 1;
                if self.value(first) == Value::False {
                    conflict = Some(cref);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, cref);
                }
            }
            ws.truncate(j);
            // Watches pushed for other literals never target `false_lit`.
            debug_assert!(self.watches[false_lit as usize].is_empty());
            self.watches[false_lit as usize] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.increased(v, &self.activity);
    }

    fn bump_clause(&mut self, cref: u32) {
        let c = &mut self.clauses[cref as usize];
        if !c.learnt {
            return;
        }
        c.activity += self.cla_inc;
        if c.activity > 1e20 {
            for c in self.clauses.iter_mut().filter(|c| c.learnt) {
                c.activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    fn analyze(&mut self, mut confl: u32) -> (Vec<Lit>, u32) {
        let mut learnt: Vec<Lit> = vec![0];
        let mut path = 0;
        let mut p: Option<Lit> = None;
        let mut index = self.trail.len();
        let current = self.decision_level();
        loop {
            self.bump_clause(confl);
            let lits = self.clauses[confl as usize].lits.clone();
            let start = usize::from(p.is_some());
            for &q in &lits[start..] {
                let v = var(q);
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump_var(v);
                    if self.level[v] >= current {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[var(self.trail[index])] {
                    break;
                }
            }
            let pl = self.trail[index];
            p = Some(pl);
            confl = self.reason[var(pl)];
            self.seen[var(pl)] = false;
            path -= 1;
            if path == 0 {
                break;
            }
        }
        learnt[0] = neg(p.unwrap());

        // Drop literals implied by other literals of the clause.
        let keep: Vec<bool> = learnt
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                if i == 0 {
                    return true;
                }
                let r = self.reason[var(l)];
                if r == NO_REASON {
                    return true;
                }
                !self.clauses[r as usize].lits[1..]
                    .iter()
                    .all(|&q| self.seen[var(q)] || self.level[var(q)] == 0)
            })
            .collect();
        for &l in &learnt {
            self.seen[var(l)] = false;
        }
        let mut learnt: Vec<Lit> = learnt
            .into_iter()
            .zip(keep)
            .filter(|(_, k)| *k)
            .map(|(l, _)| l)
            .collect();

        let bt = if learnt.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[var(learnt[i])] > self.level[var(learnt[max_i])] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            self.level[var(learnt[1])]
        };
        (learnt, bt)
    }

    fn cancel_until(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let lim = self.trail_lim[level as usize];
        for i in (lim..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = var(l);
            self.phase[v] = l & 1 == 0;
            self.assigns[v] = Value::Unassigned;
            self.reason[v] = NO_REASON;
            self.heap.insert(v, &self.activity);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(level as usize);
        self.qhead = lim;
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.assigns[v] == Value::Unassigned {
                return Some(2 * v as u32 + u32::from(!self.phase[v]));
            }
        }
        None
    }

    fn locked(&self, cref: u32) -> bool {
        let c = &self.clauses[cref as usize];
        let v = var(c.lits[0]);
        self.reason[v] == cref && self.value(c.lits[0]) == Value::True
    }

    fn reduce_db(&mut self) {
        let mut learnts: Vec<u32> = (0..self.clauses.len() as u32)
            .filter(|&c| {
                let cl = &self.clauses[c as usize];
                cl.learnt && !cl.deleted && cl.lits.len() > 2
            })
            .collect();
        learnts.sort_by(|&a, &b| {
            self.clauses[a as usize]
                .activity
                .total_cmp(&self.clauses[b as usize].activity)
                .then(a.cmp(&b))
        });
        let half = learnts.len() / 2;
        for &c in &learnts[..half] {
            if !self.locked(c) {
                self.clauses[c as usize].deleted = true;
                self.clauses[c as usize].lits.clear();
                self.clauses[c as usize].lits.shrink_to_fit();
                self.num_learnts -= 1;
            }
        }
        for ws in &mut self.watches {
            let clauses = &self.clauses;
            ws.retain(|&c| !clauses[c as usize].deleted);
        }
    }

    /// `Ok(Some(model))` when satisfiable, `Ok(None)` when unsatisfiable.
    pub fn solve(&mut self) -> Result<Option<Assignment>, SolverError> {
        if !self.ok {
            return Ok(None);
        }
        if self.propagate().is_some() {
            self.ok = false;
            return Ok(None);
        }
        let started = Instant::now();
        self.max_learnts = (self.clauses.len() as f64 / 3.0).max(2000.0);
        let mut restart_no = 1u64;
        loop {
            let budget = luby(restart_no) * 100;
            let mut conflicts_here = 0u64;
            loop {
                if let Some(confl) = self.propagate() {
                    self.stats.conflicts += 1;
                    conflicts_here += 1;
                    if self.decision_level() == 0 {
                        self.ok = false;
                        return Ok(None);
                    }
                    let (learnt, bt) = self.analyze(confl);
                    self.cancel_until(bt);
                    if learnt.len() == 1 {
                        self.enqueue(learnt[0], NO_REASON);
                    } else {
                        let first = learnt[0];
                        let cref = self.attach(learnt, true);
                        self.bump_clause(cref);
                        self.enqueue(first, cref);
                    }
                    self.var_inc /= 0.95;
                    self.cla_inc /= 0.999;
                    if let Some(limit) = self.config.conflict_limit {
                        if self.stats.conflicts >= limit {
                            return Err(SolverError::ResourceLimit {
                                conflicts: self.stats.conflicts,
                            });
                        }
                    }
                    if let Some(limit) = self.config.time_limit {
                        if self.stats.conflicts % 256 == 0 && started.elapsed() > limit {
                            return Err(SolverError::ResourceLimit {
                                conflicts: self.stats.conflicts,
                            });
                        }
                    }
                } else {
                    if conflicts_here >= budget {
                        self.cancel_until(0);
                        self.stats.restarts += 1;
                        break;
                    }
                    if self.num_learnts as f64 >= self.max_learnts + self.trail.len() as f64 {
                        self.reduce_db();
                        self.max_learnts *= 1.1;
                    }
                    match self.pick_branch() {
                        None => {
                            let model = self
                                .assigns
                                .iter()
                                .map(|v| *v == Value::True)
                                .collect();
                            self.cancel_until(0);
                            return Ok(Some(Assignment(model)));
                        }
                        Some(l) => {
                            self.stats.decisions += 1;
                            self.trail_lim.push(self.trail.len());
                            self.enqueue(l, NO_REASON);
                        }
                    }
                }
            }
            restart_no += 1;
        }
    }
}

/// Solves a clause list over variables `1..=num_vars`.
pub fn solve_clauses(
    num_vars: usize,
    clauses: &[Vec<i32>],
    config: &SolverConfig,
) -> Result<(Option<Assignment>, SolverStats), SolverError> {
    let mut s = Solver::new(num_vars, config.clone());
    for c in clauses {
        s.add_clause(c)?;
    }
    let r = s.solve()?;
    Ok((r, s.stats.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(n: usize, cs: &[Vec<i32>]) -> Option<Assignment> {
        solve_clauses(n, cs, &SolverConfig::default()).unwrap().0
    }

    fn pigeonhole(pigeons: i32, holes: i32) -> (usize, Vec<Vec<i32>>) {
        let v = |p: i32, h: i32| p * holes + h + 1;
        let mut cs = Vec::new();
        for p in 0..pigeons {
            cs.push((0..holes).map(|h| v(p, h)).collect());
        }
        for h in 0..holes {
            for a in 0..pigeons {
                for b in a + 1..pigeons {
                    cs.push(vec![-v(a, h), -v(b, h)]);
                }
            }
        }
        ((pigeons * holes) as usize, cs)
    }

    #[test]
    fn trivial_cases() {
        assert!(solve(0, &[]).is_some());
        assert!(solve(1, &[vec![1], vec![-1]]).is_none());
        assert!(solve(2, &[vec![]]).is_none());
        let m = solve(2, &[vec![1, 2], vec![-1]]).unwrap();
        assert!(!m.value(1) && m.value(2));
    }

    #[test]
    fn pigeonhole_unsat_and_sat() {
        let (n, cs) = pigeonhole(4, 3);
        assert!(solve(n, &cs).is_none());
        let (n, cs) = pigeonhole(3, 3);
        let m = solve(n, &cs).unwrap();
        assert!(m.satisfies(&cs));
        let (n, cs) = pigeonhole(7, 6);
        assert!(solve(n, &cs).is_none());
    }

    #[test]
    fn conflict_limit_is_reported() {
        let (n, cs) = pigeonhole(8, 7);
        let cfg = SolverConfig {
            conflict_limit: Some(10),
            ..SolverConfig::default()
        };
        assert!(matches!(
            solve_clauses(n, &cs, &cfg),
            Err(SolverError::ResourceLimit { .. })
        ));
    }

    #[test]
    fn bad_literals_rejected() {
        let mut s = Solver::new(2, SolverConfig::default());
        assert_eq!(s.add_clause(&[3]), Err(SolverError::BadLiteral(3)));
        assert_eq!(s.add_clause(&[0]), Err(SolverError::BadLiteral(0)));
    }

    #[test]
    fn luby_prefix() {
        let seq: Vec<u64> = (1..=15).map(luby).collect();
        assert_eq!(seq, vec![1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
    }

    #[test]
    fn deterministic_for_seed() {
        let (n, cs) = pigeonhole(5, 5);
        let cfg = SolverConfig {
            seed: 7,
            ..SolverConfig::default()
        };
        let a = solve_clauses(n, &cs, &cfg).unwrap();
        let b = solve_clauses(n, &cs, &cfg).unwrap();
        assert_eq!(a, b);
    }
}
