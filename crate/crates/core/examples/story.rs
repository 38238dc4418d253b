//! Three narratives for the Aladdin world, each ending in a different set
//! of marriages.
//!
//! Run with `cargo run --example story -- [k]`.

use divplan::bspace::BehaviourSpace;
use divplan::domains::story::{ending_summary, story_pack};
use divplan::fbi::fbi;
use divplan::satplan::{SatBackend, SatBehaviourGenerator, SatPlanGenerator, SolverConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let k: usize = std::env::args().nth(1).map_or(Ok(3), |s| s.parse())?;
    let (problem, endings) = story_pack()?;
    println!(
        "{} fluents, {} ground actions, {} goal disjuncts",
        problem.fluents().len(),
        problem.actions().len(),
        problem.goal().disjuncts().len()
    );
    let space = BehaviourSpace::new(vec![endings])?;
    let backend = SatBackend::from_env(SolverConfig::default());
    let mut behaviours = SatBehaviourGenerator::new(&problem, &space, 0..=20, backend.clone())?;
    let mut plans = SatPlanGenerator::new(&problem, 0..=20, backend);
    let result = fbi(k, &space, &mut behaviours, &mut plans)?;

    for (i, (trace, behaviour)) in result.plans.iter().zip(&result.behaviours).enumerate() {
        println!("\nnarrative {} ({} steps) {behaviour}", i + 1, trace.plan.len());
        for action in problem.action_names(&trace.plan) {
            println!("  {action}");
        }
        for line in ending_summary(&problem, trace) {
            println!("  => {line}");
        }
    }
    println!("\nbdc = {}, termination = {:?}", result.bdc, result.termination);
    println!("solver: {:?}", behaviours.stats());
    Ok(())
}
