//! Finite-trace LTL: evaluation, step-wise progression and early verdicts.
//!
//! Run with `cargo run --example ltl -- "F G p" "p,q" "q" "p"`; each trace
//! step lists the atoms that are true.

use divplan::ltl::{eval_finite, Alphabet, LtlFormula, Monitor, Valuation};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let formula = LtlFormula::parse(&args.next().unwrap_or_else(|| "G (p | q) & F G p".into()))?;
    let steps: Vec<String> = match args.collect::<Vec<_>>() {
        s if s.is_empty() => vec!["q".into(), "p,q".into(), "p".into()],
        s => s,
    };
    let mut names: Vec<&str> = formula.atoms().into_iter().collect();
    names.sort_unstable();
    let alphabet = Alphabet::new(names);
    let trace: Vec<Valuation> = steps
        .iter()
        .map(|s| alphabet.valuation(s.split(',').map(str::trim).filter(|a| !a.is_empty())))
        .collect::<Result<_, _>>()?;

    println!("formula  {formula}");
    let monitor = Monitor::new(&formula, &alphabet)?;
    let mut residual = monitor.start().clone();
    for (i, (text, v)) in steps.iter().zip(&trace).enumerate() {
        residual = residual.progress(v);
        println!(
            "step {i} {{{text}}}  verdict {:?}  ends-ok {}",
            residual.verdict(),
            residual.accepts_end()
        );
    }
    println!("holds on the whole trace: {}", eval_finite(&formula, &alphabet, &trace)?);
    Ok(())
}
