//! Parse and ground a PDDL domain and problem, then print the ground model.
//!
//! Run with `cargo run --example pddl -- domain.pddl problem.pddl`; without
//! arguments the bundled tiny story is used.

use divplan::pddl::{ground, parse_domain, parse_problem};
use divplan::domains::story::{TINY_DOMAIN_PDDL, TINY_PROBLEM_PDDL};
use divplan::strips::enumerate_plans;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (domain_text, problem_text) = match args.as_slice() {
        [d, p] => (std::fs::read_to_string(d)?, std::fs::read_to_string(p)?),
        _ => (TINY_DOMAIN_PDDL.to_string(), TINY_PROBLEM_PDDL.to_string()),
    };
    let domain = parse_domain(&domain_text)?;
    let problem = parse_problem(&problem_text)?;
    let ground = ground(&domain, &problem)?;
    println!(
        "{}: {} fluents, {} actions, {} goal disjuncts",
        problem.name,
        ground.fluents().len(),
        ground.actions().len(),
        ground.goal().disjuncts().len()
    );
    for a in ground.actions().iter().take(20) {
        println!("  {}", a.name);
    }
    if ground.actions().len() <= 12 {
        for plan in enumerate_plans(&ground, 4) {
            println!("plan: {}", ground.action_names(&plan).join(", "));
        }
    }
    Ok(())
}
