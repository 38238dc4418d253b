//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

mod common;

use std::collections::{BTreeSet, HashMap};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use divplan::bspace::{BehaviourSpace, FeatureValue};
use divplan::cli::Report;
use divplan::domains::platformer::Platformer;
use divplan::domains::story::story_pack;
use divplan::domains::urban::{
    diversity_score, sustainability_score, Convert, LandUse, UrbanGrid, UrbanSimulator, DEFAULT_BUDGET,
};
use divplan::fbi::fbi;
use divplan::ltl::{eval_finite, monitor, Alphabet, LtlFormula, Monitor, Obligation, Valuation, Verdict};
use divplan::satplan::{
    decode, encode, forbid_plan, solve, SatBackend, SatBehaviourGenerator, SatPlanGenerator, SolverConfig,
};
use divplan::search::Simulator;
use divplan::strips::{validate_plan, GroundProblem, Plan};

use common::*;

type Outcome = Result<String, String>;

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let criteria: Vec<(&str, Box<dyn Fn(&Path) -> Outcome>)> = vec![
        ("story reproduction", Box::new(story)),
        ("platformer reproduction", Box::new(platformer)),
        ("urban reproduction", Box::new(urban)),
        ("oracle maximality", Box::new(|_: &Path| oracle_maximality())),
        ("backend cross-validation", Box::new(|_: &Path| sat_soundness())),
        ("LTLf oracle equivalence", Box::new(|_: &Path| ltl_equivalence())),
        ("monitor soundness", Box::new(|_: &Path| monitor_soundness())),
        ("score sanity", Box::new(|_: &Path| score_sanity())),
        ("determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check(dir.path());
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail}; {secs:.1}s)", i + 1),
            Err(reason) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({reason}; {secs:.1}s)", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Runs `divplan plan` for a bundled domain, returning the report and the
/// wall time.
fn run_plan(dir: &Path, tag: &str, args: &[&str]) -> Result<(Report, String, Duration), String> {
    let out = dir.join(format!("{tag}.json"));
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_divplan"))
        .arg("plan")
        .args(args)
        .arg("--out")
        .arg(&out)
        .env_remove("DIVPLAN_EXTERNAL_SAT")
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    if !status.status.success() {
        return Err(format!(
            "exit {:?}: {}",
            status.status.code(),
            String::from_utf8_lossy(&status.stderr)
        ));
    }
    let text = std::fs::read_to_string(&out).map_err(|e| e.to_string())?;
    let report = Report::from_json(&text).map_err(|e| e.to_string())?;
    Ok((report, text, elapsed))
}

const STORY: &[&str] = &["--domain", "story", "--backend", "sat", "--k", "3"];
const PLATFORMER: &[&str] = &["--domain", "platformer", "--backend", "search", "--k", "2"];
const URBAN: &[&str] = &["--domain", "urban", "--backend", "search", "--k", "2"];

fn story(dir: &Path) -> Outcome {
    let (report, _, elapsed) = run_plan(dir, "story-1", STORY)?;
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    ensure(report.plans.len() == 3, || format!("{} plans", report.plans.len()))?;
    ensure(report.bdc == 3, || format!("bdc {}", report.bdc))?;
    let (problem, _) = story_pack().map_err(|e| e.to_string())?;
    let mut endings = BTreeSet::new();
    for (i, p) in report.plans.iter().enumerate() {
        let ids = p
            .actions
            .iter()
            .map(|a| problem.action_id(a).ok_or_else(|| format!("unknown action {a}")))
            .collect::<Result<Vec<_>, _>>()?;
        let plan = Plan(ids);
        validate_plan(&problem, &plan).map_err(|e| format!("plan {}: {e}", i + 1))?;
        let end = ending(&problem, &plan);
        ensure(end.iter().all(|f| f.starts_with("married-to(")) && !end.is_empty(), || {
            format!("plan {} ends with {end:?}", i + 1)
        })?;
        let recorded = match p.behaviour.as_slice() {
            [FeatureValue::Assignment(names)] => names.iter().cloned().collect::<BTreeSet<_>>(),
            other => return Err(format!("unexpected behaviour {other:?}")),
        };
        ensure(recorded == end, || format!("plan {} records {recorded:?}, replays to {end:?}", i + 1))?;
        endings.insert(end);
    }
    ensure(endings.len() == 3, || "marriage outcomes are not pairwise distinct".into())?;
    Ok(format!("3 distinct marriage outcomes, bdc 3, {:.1}s", elapsed.as_secs_f64()))
}

fn platformer(dir: &Path) -> Outcome {
    let (report, _, elapsed) = run_plan(dir, "platformer-1", PLATFORMER)?;
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    ensure(report.plans.len() == 2, || format!("{} plans", report.plans.len()))?;
    ensure(report.bdc == 2, || format!("bdc {}", report.bdc))?;
    let sim = Platformer::bundled();
    let fg_killed = LtlFormula::parse("F G killed").unwrap();
    let g_avoided = LtlFormula::parse("G avoided").unwrap();
    let (mut killed, mut avoided) = (0, 0);
    for (i, p) in report.plans.iter().enumerate() {
        let moves = p
            .actions
            .iter()
            .map(|a| a.parse())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| format!("{e}"))?;
        let trace = sim.replay(&moves).map_err(|e| format!("plan {}: {e}", i + 1))?;
        ensure(sim.is_goal(trace.final_state()), || format!("plan {} misses the goal", i + 1))?;
        ensure(moves.len() <= sim.budget().unwrap(), || format!("plan {} over budget", i + 1))?;
        let steps: Vec<Vec<(String, bool)>> = trace
            .states
            .iter()
            .map(|s| vec![("killed".to_string(), s.killed), ("avoided".to_string(), !s.killed)])
            .collect();
        let k = ltl_holds(&fg_killed, &steps, 0);
        let a = ltl_holds(&g_avoided, &steps, 0);
        ensure(k != a, || format!("plan {} satisfies both or neither", i + 1))?;
        killed += usize::from(k);
        avoided += usize::from(a);
    }
    ensure(killed == 1 && avoided == 1, || format!("{killed} killing, {avoided} avoiding"))?;
    Ok(format!("one FG killed plan, one G avoided plan, {:.1}s", elapsed.as_secs_f64()))
}

/// Bin of a score in `[0, 100]` with upper-inclusive boundaries.
fn bin(score: f64) -> &'static str {
    [(20.0, "VL"), (30.0, "L"), (50.0, "M"), (70.0, "H"), (90.0, "VH")]
        .iter()
        .find(|(upper, _)| score <= *upper)
        .map_or("ID", |(_, l)| l)
}

/// Scores recomputed from raw cell counts.
fn oracle_scores(grid: &UrbanGrid) -> (f64, f64) {
    let count = |l: LandUse| grid.cells().iter().filter(|&&c| c == l).count() as f64;
    let used = grid.cells().iter().filter(|&&c| c != LandUse::Empty).count() as f64;
    let s = 100.0 * (count(LandUse::Green) + count(LandUse::Commercial) + count(LandUse::Facility)) / used;
    let h: f64 = [
        LandUse::Residential,
        LandUse::Office,
        LandUse::Green,
        LandUse::Commercial,
        LandUse::Facility,
    ]
    .iter()
    .map(|&l| count(l) / used)
    .filter(|&p| p > 0.0)
    .map(|p| -p * p.ln())
    .sum();
    (s, 100.0 * h / 5f64.ln())
}

fn urban(dir: &Path) -> Outcome {
    let (report, _, elapsed) = run_plan(dir, "urban-1", URBAN)?;
    ensure(elapsed < Duration::from_secs(120), || format!("took {elapsed:?}"))?;
    ensure(report.plans.len() == 2, || format!("{} plans", report.plans.len()))?;
    let sim = UrbanSimulator::bundled();
    let mut tuples = BTreeSet::new();
    for (i, p) in report.plans.iter().enumerate() {
        ensure(p.actions.len() == DEFAULT_BUDGET, || {
            format!("plan {} has {} actions", i + 1, p.actions.len())
        })?;
        let actions = p
            .actions
            .iter()
            .map(|a| a.parse::<Convert>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        let trace = sim.replay(&actions).ok_or("replay failed")?;
        let (s, d) = oracle_scores(trace.final_state());
        let tuple = (bin(s), bin(d));
        let recorded: Vec<String> = p.behaviour.iter().map(ToString::to_string).collect();
        ensure(recorded == [tuple.0, tuple.1], || {
            format!("plan {} records {recorded:?}, oracle bins {tuple:?}", i + 1)
        })?;
        tuples.insert(tuple);
    }
    ensure(tuples.len() == 2, || "bin tuples coincide".into())?;
    Ok(format!("bins {tuples:?}, 10 actions each, {:.1}s", elapsed.as_secs_f64()))
}

fn oracle_maximality() -> Outcome {
    let mut checks = 0;
    for (name, problem) in tiny_instances() {
        ensure(problem.actions().len() <= 5, || format!("{name} has too many actions"))?;
        let plans = oracle_plans(&problem, 6);
        let space_size = 1usize << problem.goal().fluents().len();
        let mut previous = 0;
        for k in [1, 2, 3, space_size + 1] {
            let expected = max_bdc(&problem, &plans, k);
            let got = run_fbi(&problem, k)?;
            ensure(got == expected, || format!("{name} k={k}: fbi bdc {got}, oracle {expected}"))?;
            ensure(got >= previous, || format!("{name}: bdc fell at k={k}"))?;
            previous = got;
            checks += 1;
        }
    }
    Ok(format!("{checks} instance/k pairs match the brute-force maximum"))
}

fn run_fbi(problem: &GroundProblem, k: usize) -> Result<usize, String> {
    let feature = divplan::bspace::goal_endings_feature(problem);
    let space = BehaviourSpace::new(vec![feature]).map_err(|e| e.to_string())?;
    let backend = SatBackend::Internal(SolverConfig::default());
    let mut b = SatBehaviourGenerator::new(problem, &space, 0..=6, backend.clone()).map_err(|e| e.to_string())?;
    let mut p = SatPlanGenerator::new(problem, 0..=6, backend);
    let result = fbi(k, &space, &mut b, &mut p).map_err(|e| e.to_string())?;
    for t in &result.plans {
        validate_plan(problem, &t.plan).map_err(|e| e.to_string())?;
    }
    Ok(result.bdc)
}

/// Decodes every model (up to `cap`) at each horizon and validates it.
fn sat_soundness() -> Outcome {
    let mut matrix: Vec<(&str, GroundProblem, usize, usize)> = tiny_instances()
        .into_iter()
        .map(|(n, p)| (n, p, 12, 64))
        .collect();
    matrix.push(("story", story_pack().map_err(|e| e.to_string())?.0, 8, 3));
    let cfg = SolverConfig::default();
    let mut decoded = 0;
    for (name, problem, max_h, cap) in &matrix {
        for h in 0..=*max_h {
            let mut task = encode(problem, h);
            for _ in 0..*cap {
                let Some(model) = solve(&task, &cfg).map_err(|e| e.to_string())? else {
                    break;
                };
                let trace = decode(&model, &task).map_err(|e| format!("{name} h={h}: {e}"))?;
                let checked = validate_plan(problem, &trace.plan).map_err(|e| format!("{name} h={h}: {e}"))?;
                ensure(checked == trace, || format!("{name} h={h}: decoded states differ"))?;
                ensure(trace.plan.len() == h, || format!("{name} h={h}: wrong length"))?;
                decoded += 1;
                forbid_plan(&mut task, &trace.plan).map_err(|e| e.to_string())?;
            }
        }
    }
    ensure(decoded > 0, || "nothing decoded".into())?;
    Ok(format!("{decoded}/{decoded} decoded plans validate"))
}

fn ltl_equivalence() -> Outcome {
    let names = ["p", "q"];
    let alphabet = Alphabet::new(names);
    let traces = all_traces(2, 5);
    let index: HashMap<&Vec<Vec<bool>>, usize> = traces.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let suffixes: Vec<Vec<usize>> = traces
        .iter()
        .map(|t| (0..t.len()).map(|j| index[&t[j..].to_vec()]).collect())
        .collect();
    let letter = |step: &[bool]| usize::from(step[0]) | usize::from(step[1]) << 1;
    let parent: Vec<Option<usize>> = traces
        .iter()
        .map(|t| (t.len() > 1).then(|| index[&t[..t.len() - 1].to_vec()]))
        .collect();
    let named: Vec<_> = traces.iter().map(|t| named_trace(&names, t)).collect();
    let vals: Vec<Vec<Valuation>> = traces.iter().map(|t| valuations(t)).collect();

    // Textbook semantics per trace, memoised per subformula.
    let unary = |f: &LtlFormula, a: &[bool]| -> Vec<bool> {
        match f {
            LtlFormula::Not(_) => a.iter().map(|v| !v).collect(),
            LtlFormula::Always(_) => suffixes.iter().map(|s| s.iter().all(|&j| a[j])).collect(),
            LtlFormula::Eventually(_) => suffixes.iter().map(|s| s.iter().any(|&j| a[j])).collect(),
            _ => unreachable!(),
        }
    };

    let levels = formulas_up_to(&names, 2);
    let mut oracle: HashMap<LtlFormula, Vec<bool>> = HashMap::new();
    let mut mismatches = 0usize;
    let mut checked = 0usize;
    for f in levels.iter().flatten() {
        let truth: Vec<bool> = named.iter().map(|t| ltl_holds(f, t, 0)).collect();
        for (i, v) in vals.iter().enumerate() {
            if eval_finite(f, &alphabet, v).map_err(|e| e.to_string())? != truth[i] {
                mismatches += 1;
            }
            checked += 1;
        }
        oracle.insert(f.clone(), truth);
    }

    // Depth three: the progression automaton of each formula is built once
    // and read off for every trace; one trace per formula also goes through
    // eval_finite directly.
    let base: Vec<&LtlFormula> = levels.iter().flatten().collect();
    let mut depth3 = 0usize;
    let mut check = |f: LtlFormula, truth: Vec<bool>| -> Result<(), String> {
        let start = Monitor::new(&f, &alphabet).map_err(|e| e.to_string())?.start().clone();
        let mut ids: HashMap<Obligation, usize> = HashMap::new();
        let mut states = vec![start.clone()];
        ids.insert(start, 0);
        let mut trans: Vec<[usize; 4]> = Vec::new();
        let mut s = 0;
        while s < states.len() {
            let mut row = [0; 4];
            for (l, slot) in row.iter_mut().enumerate() {
                let next = states[s].progress(&Valuation::from_bools(vec![l & 1 == 1, l & 2 == 2]));
                *slot = match ids.get(&next) {
                    Some(&id) => id,
                    None => {
                        ids.insert(next.clone(), states.len());
                        states.push(next);
                        states.len() - 1
                    }
                };
            }
            trans.push(row);
            s += 1;
        }
        let accept: Vec<bool> = states.iter().map(Obligation::accepts_end).collect();
        let mut at = vec![0usize; traces.len()];
        for (i, t) in traces.iter().enumerate() {
            let from = parent[i].map_or(0, |p| at[p]);
            at[i] = trans[from][letter(t.last().unwrap())];
            if accept[at[i]] != truth[i] {
                mismatches += 1;
            }
        }
        let probe = (depth3 * 7919) % traces.len();
        if eval_finite(&f, &alphabet, &vals[probe]).map_err(|e| e.to_string())? != truth[probe] {
            mismatches += 1;
        }
        depth3 += 1;
        checked += traces.len();
        Ok(())
    };
    for f in &levels[2] {
        let a = &oracle[f];
        for g in [
            LtlFormula::not(f.clone()),
            LtlFormula::always(f.clone()),
            LtlFormula::eventually(f.clone()),
        ] {
            let truth = unary(&g, a);
            check(g, truth)?;
        }
    }
    for a in &base {
        for b in &base {
            if a.depth().max(b.depth()) != 2 {
                continue;
            }
            let (va, vb) = (&oracle[*a], &oracle[*b]);
            let and: Vec<bool> = va.iter().zip(vb).map(|(x, y)| *x && *y).collect();
            let or: Vec<bool> = va.iter().zip(vb).map(|(x, y)| *x || *y).collect();
            check(LtlFormula::and((*a).clone(), (*b).clone()), and)?;
            check(LtlFormula::or((*a).clone(), (*b).clone()), or)?;
        }
    }

    // FG p holds exactly when p holds in the last state.
    let fg = LtlFormula::parse("F G p").unwrap();
    let single = Alphabet::new(["p"]);
    let mut identity_failures = 0;
    for m in 0..64u32 {
        let bits: Vec<Vec<bool>> = (0..6).map(|i| vec![m >> i & 1 == 1]).collect();
        if eval_finite(&fg, &single, &valuations(&bits)).map_err(|e| e.to_string())? != bits[5][0] {
            identity_failures += 1;
        }
    }

    ensure(mismatches == 0 && identity_failures == 0, || {
        format!("{mismatches} mismatches, {identity_failures} FG identity failures")
    })?;
    Ok(format!(
        "{} formulas of depth <= 3 x {} traces ({checked} checks), 0 mismatches; FG p identity on 64 traces",
        base.len() + depth3,
        traces.len()
    ))
}

fn monitor_soundness() -> Outcome {
    let shapes = [
        "F G a",
        "G a",
        "F a",
        "G !a",
        "F G a & F G b",
        "F G a & G b",
        "F G (b & !a)",
        "G (a | b)",
        "F G a & G !b",
    ];
    let alphabet = Alphabet::new(["a", "b"]);
    let words = all_traces(2, 4);
    let mut prefixes: Vec<Vec<Vec<bool>>> = vec![vec![]];
    prefixes.extend(words.iter().cloned());
    let mut definite = 0usize;
    let mut violations = 0usize;
    for shape in shapes {
        let f = LtlFormula::parse(shape).unwrap();
        for prefix in &prefixes {
            let verdict = if prefix.is_empty() {
                Monitor::new(&f, &alphabet).map_err(|e| e.to_string())?.start().verdict()
            } else {
                monitor(&f, &alphabet, &valuations(prefix)).map_err(|e| e.to_string())?
            };
            let expected = match verdict {
                Verdict::SatisfiedAllExtensions => true,
                Verdict::ViolatedAllExtensions => false,
                Verdict::Undetermined => continue,
            };
            definite += 1;
            let mut extensions: Vec<&Vec<Vec<bool>>> = words.iter().collect();
            let empty = Vec::new();
            if !prefix.is_empty() {
                extensions.push(&empty);
            }
            for s in extensions {
                let mut full = prefix.clone();
                full.extend(s.iter().cloned());
                if eval_finite(&f, &alphabet, &valuations(&full)).map_err(|e| e.to_string())? != expected {
                    violations += 1;
                }
            }
        }
    }
    ensure(violations == 0, || format!("{violations} violations"))?;
    ensure(definite > 0, || "no definite verdicts were exercised".into())?;
    Ok(format!(
        "{} shapes, {definite} definite verdicts, 0 violations over extensions of length <= 4",
        shapes.len()
    ))
}

fn grid(parts: &[(LandUse, usize)]) -> UrbanGrid {
    let cells: Vec<LandUse> = parts
        .iter()
        .flat_map(|&(l, n)| std::iter::repeat(l).take(n))
        .collect();
    UrbanGrid::new(10, cells.len() / 10, cells).unwrap()
}

fn score_sanity() -> Outcome {
    use LandUse::*;
    let fifths = grid(&[(Residential, 2), (Office, 2), (Green, 2), (Commercial, 2), (Facility, 2)]);
    let d = diversity_score(&fifths).map_err(|e| e.to_string())?;
    ensure((d - 100.0).abs() <= 1e-9, || format!("equal fifths give {d}"))?;
    let halves = grid(&[(Residential, 5), (Green, 5)]);
    let d2 = diversity_score(&halves).map_err(|e| e.to_string())?;
    let expected = 100.0 * 2f64.ln() / 5f64.ln();
    ensure((d2 - expected).abs() <= 1e-9, || format!("halves give {d2}, expected {expected}"))?;
    let mixed = grid(&[(Green, 30), (Commercial, 20), (Facility, 10), (Residential, 40)]);
    let s = sustainability_score(&mixed).map_err(|e| e.to_string())?;
    ensure(s == 60.0, || format!("30/20/10/40 gives {s}"))?;
    Ok(format!("D(fifths) = {d}, D(halves) = {d2:.12}, S(30/20/10/40) = {s}"))
}

fn determinism(dir: &Path) -> Outcome {
    for (tag, args) in [("story", STORY), ("platformer", PLATFORMER), ("urban", URBAN)] {
        let first = std::fs::read(dir.join(format!("{tag}-1.json")));
        let first = match first {
            Ok(bytes) => bytes,
            Err(_) => run_plan(dir, &format!("{tag}-1"), args)?.1.into_bytes(),
        };
        let second = run_plan(dir, &format!("{tag}-2"), args)?.1.into_bytes();
        ensure(first == second, || format!("{tag} reports differ"))?;
    }
    Ok("byte-identical reports for story, platformer and urban".into())
}
