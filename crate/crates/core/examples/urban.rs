//! Two urban plans of ten conversions each, landing in different
//! sustainability/diversity bins.
//!
//! Run with `cargo run --example urban -- [k]`.

use divplan::domains::urban::{bind_space, default_space_config, legend, UrbanSimulator};
use divplan::fbi::fbi;
use divplan::search::{SearchConfig, SimBehaviourGenerator, SimPlanGenerator, Simulator};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let k: usize = std::env::args().nth(1).map_or(Ok(2), |s| s.parse())?;
    let sim = UrbanSimulator::bundled();
    let space = bind_space(&sim, &default_space_config())?;
    let cfg = SearchConfig::default();
    let mut behaviours = SimBehaviourGenerator::new(&sim, &space, cfg.clone())?;
    let mut plans = SimPlanGenerator::new(&sim, cfg);
    let result = fbi(k, &space, &mut behaviours, &mut plans)?;

    println!("initial grid\n{}", sim.initial().render_ascii());
    for (i, (trace, behaviour)) in result.plans.iter().zip(&result.behaviours).enumerate() {
        let actions: Vec<String> = trace.plan.iter().map(ToString::to_string).collect();
        println!("plan {} {behaviour}\n  {}", i + 1, actions.join(" "));
        println!("{}", trace.final_state().render_ascii());
    }
    println!("{}", legend());
    println!("bdc = {}, termination = {:?}", result.bdc, result.termination);
    println!("search: {:?}", behaviours.stats());
    Ok(())
}
