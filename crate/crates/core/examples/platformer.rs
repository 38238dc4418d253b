//! Clear the level twice: once stomping the enemy, once jumping over it.
//!
//! Run with `cargo run --example platformer`.

use divplan::domains::platformer::{bind_space, default_space_config, Platformer};
use divplan::fbi::fbi;
use divplan::search::{SearchConfig, SimBehaviourGenerator, SimPlanGenerator};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let k: usize = std::env::args().nth(1).map_or(Ok(2), |s| s.parse())?;
    let sim = Platformer::bundled();
    let space = bind_space(&sim, &default_space_config())?;
    let cfg = SearchConfig::default();
    let mut behaviours = SimBehaviourGenerator::new(&sim, &space, cfg.clone())?;
    let mut plans = SimPlanGenerator::new(&sim, cfg);
    let result = fbi(k, &space, &mut behaviours, &mut plans)?;

    for (i, (trace, behaviour)) in result.plans.iter().zip(&result.behaviours).enumerate() {
        let actions: Vec<String> = trace.plan.iter().map(ToString::to_string).collect();
        println!("plan {} {behaviour} ({} moves)\n  {}", i + 1, actions.len(), actions.join(" "));
        println!("{}", sim.render(trace));
    }
    println!("bdc = {}, termination = {:?}", result.bdc, result.termination);
    println!("search: {:?}", behaviours.stats());
    Ok(())
}
