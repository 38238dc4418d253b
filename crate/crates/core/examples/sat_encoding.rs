//! The planning-as-satisfiability pipeline by hand: encode a horizon, export
//! DIMACS with its variable map, solve, decode, then forbid the found
//! ending and solve again.
//!
//! Run with `cargo run --example sat_encoding -- [out-dir]`.

use divplan::satplan::{decode, encode, forbid_behaviour, solve, to_dimacs, CnfTask, SolverConfig};
use divplan::strips::{validate_plan, ProblemBuilder};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut b = ProblemBuilder::new();
    b.init(&["closed"])?;
    b.action("open", &["closed"], &["open"], &["closed"], 1.0)?;
    b.action("paint-red", &["open", "-red"], &["red"], &[], 1.0)?;
    b.action("paint-blue", &["open", "-blue"], &["blue"], &[], 1.0)?;
    b.goal_disjunct(&["red"])?.goal_disjunct(&["blue"])?;
    let problem = b.build()?;

    let mut task = encode(&problem, 2);
    println!("horizon 2: {} variables, {} clauses", task.num_vars(), task.clauses.len());
    if let Some(dir) = std::env::args().nth(1) {
        let (cnf, map) = task.write_files(&std::path::Path::new(&dir).join("paint"))?;
        let back = CnfTask::read_files(&cnf, &map)?;
        println!("wrote {} and {}", cnf.display(), map.display());
        assert_eq!(back.clauses, task.clauses);
    } else {
        for line in to_dimacs(&task).lines().take(6) {
            println!("  {line}");
        }
        println!("  ...");
    }

    let cfg = SolverConfig::default();
    while let Some(model) = solve(&task, &cfg)? {
        let trace = decode(&model, &task)?;
        validate_plan(&problem, &trace.plan)?;
        let ending: Vec<_> = problem
            .goal()
            .fluents()
            .into_iter()
            .map(|f| (f, trace.final_state().contains(f)))
            .collect();
        let shown: Vec<String> = ending
            .iter()
            .map(|&(f, v)| format!("{}{}", if v { "" } else { "-" }, problem.fluent(f)))
            .collect();
        println!("{:?} ends with {}", problem.action_names(&trace.plan), shown.join(" "));
        let clause = forbid_behaviour(&mut task, &ending);
        println!("  forbidding that ending adds clause {clause:?}");
    }
    println!("no further ending within the horizon");
    Ok(())
}
