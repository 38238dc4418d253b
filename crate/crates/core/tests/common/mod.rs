//! Oracles and small instances shared by the integration tests.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use divplan::domains::story::tiny_story_pack;
use divplan::ltl::{Alphabet, LtlFormula, Valuation};
use divplan::strips::{enumerate_plans, validate_plan, GroundProblem, Plan, ProblemBuilder};
use itertools::Itertools;

/// Textbook LTLf satisfaction at position `i` of a non-empty trace, with
/// atoms looked up by name.
pub fn ltl_holds(f: &LtlFormula, trace: &[Vec<(String, bool)>], i: usize) -> bool {
    let n = trace.len();
    match f {
        LtlFormula::Atom(a) => trace[i].iter().any(|(name, v)| name == a && *v),
        LtlFormula::Not(x) => !ltl_holds(x, trace, i),
        LtlFormula::And(a, b) => ltl_holds(a, trace, i) && ltl_holds(b, trace, i),
        LtlFormula::Or(a, b) => ltl_holds(a, trace, i) || ltl_holds(b, trace, i),
        LtlFormula::Always(x) => (i..n).all(|j| ltl_holds(x, trace, j)),
        LtlFormula::Eventually(x) => (i..n).any(|j| ltl_holds(x, trace, j)),
    }
}

/// A trace given as per-step truth values, index-aligned with `names`.
pub fn named_trace(names: &[&str], bits: &[Vec<bool>]) -> Vec<Vec<(String, bool)>> {
    bits.iter()
        .map(|step| names.iter().map(|n| n.to_string()).zip(step.iter().copied()).collect())
        .collect()
}

pub fn valuations(bits: &[Vec<bool>]) -> Vec<Valuation> {
    bits.iter().map(|b| Valuation::from_bools(b.clone())).collect()
}

/// Every trace of length `1..=max_len` over `atoms` atoms, shortest first.
pub fn all_traces(atoms: usize, max_len: usize) -> Vec<Vec<Vec<bool>>> {
    let letters: Vec<Vec<bool>> = (0..1usize << atoms)
        .map(|m| (0..atoms).map(|i| m >> i & 1 == 1).collect())
        .collect();
    let mut out = Vec::new();
    for len in 1..=max_len {
        for t in (0..len).map(|_| letters.iter().cloned()).multi_cartesian_product() {
            out.push(t);
        }
    }
    out
}

/// Every formula over `atoms` whose operator nesting is at most `depth`.
pub fn formulas_up_to(atoms: &[&str], depth: usize) -> Vec<Vec<LtlFormula>> {
    let mut by_depth: Vec<Vec<LtlFormula>> = vec![atoms.iter().map(|a| LtlFormula::atom(a)).collect()];
    for d in 1..=depth {
        let below: Vec<&LtlFormula> = by_depth.iter().flatten().collect();
        let mut next = Vec::new();
        for f in by_depth[d - 1].iter() {
            next.push(LtlFormula::not(f.clone()));
            next.push(LtlFormula::always(f.clone()));
            next.push(LtlFormula::eventually(f.clone()));
        }
        for a in &below {
            for b in &below {
                if a.depth().max(b.depth()) == d - 1 {
                    next.push(LtlFormula::and((*a).clone(), (*b).clone()));
                    next.push(LtlFormula::or((*a).clone(), (*b).clone()));
                }
            }
        }
        by_depth.push(next);
    }
    by_depth
}

/// The goal fluents true at the end of `plan`, computed by replaying it.
pub fn ending(problem: &GroundProblem, plan: &Plan) -> BTreeSet<String> {
    let trace = validate_plan(problem, plan).expect("oracle plans are valid");
    let last = trace.final_state();
    problem
        .goal()
        .fluents()
        .into_iter()
        .filter(|&f| last.contains(f))
        .map(|f| problem.fluent(f).to_string())
        .collect()
}

/// Largest number of distinct endings over all plan subsets of size at most
/// `k`, by brute force over subsets.
pub fn max_bdc(problem: &GroundProblem, plans: &[Plan], k: usize) -> usize {
    let endings: Vec<BTreeSet<String>> = plans.iter().map(|p| ending(problem, p)).collect();
    let mut best = 0;
    for size in 1..=k.min(plans.len()) {
        for subset in (0..plans.len()).combinations(size) {
            let distinct: BTreeSet<&BTreeSet<String>> = subset.iter().map(|&i| &endings[i]).collect();
            best = best.max(distinct.len());
        }
    }
    best
}

/// Tiny declarative instances, each with at most five ground actions and
/// every plan within horizon 6 enumerable.
pub fn tiny_instances() -> Vec<(&'static str, GroundProblem)> {
    let mut out = vec![("tiny-story", tiny_story_pack().unwrap().0)];

    let mut b = ProblemBuilder::new();
    b.action("make-p", &["-p"], &["p"], &[], 1.0).unwrap();
    b.action("make-q", &["-q"], &["q"], &[], 1.0).unwrap();
    b.goal_disjunct(&["p"]).unwrap().goal_disjunct(&["q"]).unwrap();
    out.push(("either", b.build().unwrap()));

    let mut b = ProblemBuilder::new();
    b.action("light-red", &["-red"], &["red"], &[], 1.0).unwrap();
    b.action("light-green", &["-green"], &["green"], &[], 1.0).unwrap();
    b.action("dim-red", &["red"], &[], &["red"], 1.0).unwrap();
    b.goal_disjunct(&["red"]).unwrap().goal_disjunct(&["green"]).unwrap();
    out.push(("lamp", b.build().unwrap()));

    let mut b = ProblemBuilder::new();
    for item in ["a", "b", "c"] {
        b.action(&format!("pick-{item}"), &["-busy"], &["busy", item], &[], 1.0)
            .unwrap();
    }
    b.goal_disjunct(&["a"])
        .unwrap()
        .goal_disjunct(&["b"])
        .unwrap()
        .goal_disjunct(&["c"])
        .unwrap();
    out.push(("pick-one", b.build().unwrap()));

    let mut b = ProblemBuilder::new();
    b.init(&["off"]).unwrap();
    b.action("toggle-on", &["off"], &["on"], &["off"], 1.0).unwrap();
    b.action("toggle-off", &["on"], &["off"], &["on"], 1.0).unwrap();
    b.goal_disjunct(&["on"]).unwrap();
    out.push(("toggle", b.build().unwrap()));
    out
}

pub fn oracle_plans(problem: &GroundProblem, max_len: usize) -> Vec<Plan> {
    enumerate_plans(problem, max_len)
}

/// Alphabet plus a name-to-index map, for building valuations by name.
pub fn alphabet_of(names: &[&str]) -> (Alphabet, HashMap<String, usize>) {
    let index = names.iter().enumerate().map(|(i, n)| (n.to_string(), i)).collect();
    (Alphabet::new(names.iter().copied()), index)
}
