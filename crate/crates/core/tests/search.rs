//! Constrained search over the bundled simulators: pruning soundness,
//! post-hoc target checks and determinism.

use std::sync::Arc;

use divplan::bspace::enumerate_cells;
use divplan::domains::platformer::{self, Platformer};
use divplan::domains::urban::{self, sustainability_score, UrbanSimulator};
use divplan::fbi::fbi;
use divplan::ltl::eval_finite;
use divplan::search::{
    cell_formula, constrained_search, SearchConfig, SearchStats, SimBehaviourGenerator, SimPlanGenerator, Simulator,
    Strategy,
};

fn pruning_preserves_satisfiability<S: Simulator>(sim: &S, formulas: &[divplan::ltl::LtlFormula]) -> usize {
    let mut found = 0;
    for f in formulas {
        let mut results = Vec::new();
        for prune in [true, false] {
            let cfg = SearchConfig {
                prune,
                node_budget: 5_000_000,
                ..SearchConfig::default()
            };
            let r = constrained_search(sim, Some(f), &[], &cfg, &mut SearchStats::default()).unwrap();
            if let Some(t) = &r {
                assert!(eval_finite(f, sim.alphabet(), &t.valuations).unwrap(), "{f}");
                assert!(sim.is_goal(t.final_state()));
                assert!(t.plan.len() <= sim.budget().unwrap());
            }
            results.push(r.is_some());
        }
        assert_eq!(results[0], results[1], "pruning changed satisfiability of {f}");
        found += usize::from(results[0]);
    }
    found
}

#[test]
fn platformer_pruning_is_sound() {
    let sim = Platformer::bundled();
    let space = platformer::bind_space(&sim, &platformer::default_space_config()).unwrap();
    let formulas: Vec<_> = enumerate_cells(&space, 100)
        .unwrap()
        .map(|c| cell_formula(&space, &c).unwrap())
        .collect();
    assert_eq!(pruning_preserves_satisfiability(&sim, &formulas), 2);
}

#[test]
fn urban_pruning_is_sound() {
    let sim = UrbanSimulator::bundled();
    let space = urban::bind_space(&sim, &urban::default_space_config()).unwrap();
    let formulas: Vec<_> = enumerate_cells(&space, 100)
        .unwrap()
        .map(|c| cell_formula(&space, &c).unwrap())
        .collect();
    assert_eq!(formulas.len(), 49);
    assert!(pruning_preserves_satisfiability(&sim, &formulas) >= 2);
}

#[test]
fn best_first_is_reproducible_per_seed() {
    let sim = UrbanSimulator::bundled();
    let f = divplan::ltl::LtlFormula::parse("F G M_S").unwrap();
    let run = |seed| {
        let cfg = SearchConfig {
            strategy: Strategy::BestFirst,
            heuristic: Some(Arc::new(|g: &urban::UrbanGrid| -sustainability_score(g).unwrap())),
            seed,
            ..SearchConfig::default()
        };
        constrained_search(&sim, Some(&f), &[], &cfg, &mut SearchStats::default())
            .unwrap()
            .map(|t| t.plan)
    };
    let a = run(7);
    assert!(a.is_some());
    assert_eq!(a, run(7));
}

#[test]
fn excluded_plans_are_skipped() {
    let sim = Platformer::bundled();
    let cfg = SearchConfig::default();
    let mut gen = SimPlanGenerator::new(&sim, cfg);
    let mut found = Vec::new();
    for _ in 0..3 {
        let t = divplan::fbi::PlanGenerator::generate(&mut gen, &found).unwrap().unwrap();
        assert!(found.iter().all(|o: &platformer::PlatformerTrace| o.plan != t.plan));
        assert!(sim.is_goal(t.final_state()));
        found.push(t);
    }
}

#[test]
fn parallel_cells_give_the_same_result() {
    let sim = Platformer::bundled();
    let space = platformer::bind_space(&sim, &platformer::default_space_config()).unwrap();
    let run = |jobs| {
        let cfg = SearchConfig {
            jobs,
            ..SearchConfig::default()
        };
        let mut b = SimBehaviourGenerator::new(&sim, &space, cfg.clone()).unwrap();
        let mut p = SimPlanGenerator::new(&sim, cfg);
        let r = fbi(3, &space, &mut b, &mut p).unwrap();
        (
            r.plans.into_iter().map(|t| t.plan).collect::<Vec<_>>(),
            r.behaviours,
            b.outcomes().to_vec(),
        )
    };
    let one = run(1);
    assert_eq!(one.0.len(), 3);
    assert_eq!(one, run(2));
    assert_eq!(one, run(4));
}
