//! The `divplan` command line: `plan`, `validate` and `render`.
//!
//! Exit codes: 0 when plans were found (or a plan is valid), 2 when none
//! were found (or the plan is invalid), 1 on usage or input errors.

use std::collections::BTreeMap;
use std::error::Error as StdError;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bspace::{pbehaviour, BehaviourSpace, FeatureDomain, FeatureValue, SpaceConfig};
use crate::domains::platformer::{self, Move, Platformer};
use crate::domains::story;
use crate::domains::urban::{self, legend, Convert, UrbanSimulator};
use crate::fbi::{fbi, FbiResult, Termination};
use crate::pddl::{ground, parse_domain, parse_problem};
use crate::satplan::{SatBackend, SatBehaviourGenerator, SatPlanGenerator, SolverConfig};
use crate::search::{SearchConfig, SimBehaviourGenerator, SimPlanGenerator, Simulator, Strategy, TraceOf};
use crate::strips::{validate_plan, GroundProblem, Plan, PlanTrace};

pub const SCHEMA_VERSION: u32 = 1;

type BoxError = Box<dyn StdError + Send + Sync>;

#[derive(Debug, Parser)]
#[command(name = "divplan", version, about = "Diverse plans over a user-defined behaviour space")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find up to k plans covering as many behaviours as possible.
    Plan(PlanArgs),
    /// Check a plan file against a problem.
    Validate(ValidateArgs),
    /// Draw the plans of a report.
    Render(RenderArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    Sat,
    Search,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Domain {
    Story,
    Urban,
    Platformer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    BreadthFirst,
    DepthFirst,
    BestFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RenderWhat {
    UrbanGrid,
    Platformer,
    StorySummary,
}

#[derive(Debug, Args)]
pub struct SourceArgs {
    /// A bundled domain.
    #[arg(long, value_enum)]
    pub domain: Option<Domain>,
    /// A PDDL domain file; needs `--pddl-problem`.
    #[arg(long, requires = "pddl_problem")]
    pub pddl_domain: Option<PathBuf>,
    /// A PDDL problem file; needs `--pddl-domain`.
    #[arg(long, requires = "pddl_domain")]
    pub pddl_problem: Option<PathBuf>,
    /// A ground problem in JSON.
    #[arg(long)]
    pub problem: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Defaults to `sat` for declarative problems and `search` for simulators.
    #[arg(long, value_enum)]
    pub backend: Option<Backend>,
    /// Behaviour-space configuration in JSON; defaults to the domain's own.
    #[arg(long)]
    pub space: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub horizon_min: usize,
    #[arg(long, default_value_t = 20)]
    pub horizon_max: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub node_budget: usize,
    #[arg(long, value_enum, default_value_t = StrategyArg::BreadthFirst)]
    pub strategy: StrategyArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Report path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// One action per line; `;` starts a comment.
    pub plan: PathBuf,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// A report written by `plan`.
    pub report: PathBuf,
    /// Defaults to the natural view of the report's domain.
    #[arg(long, value_enum)]
    pub what: Option<RenderWhat>,
    /// Colour urban grids with ANSI escapes.
    #[arg(long)]
    pub ansi: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("unsupported report schema version {0} (expected {SCHEMA_VERSION})")]
    SchemaVersion(u64),
    #[error("report: {0}")]
    Report(String),
}

fn usage(msg: impl Into<String>) -> BoxError {
    Box::new(CliError::Usage(msg.into()))
}

fn read(path: &Path) -> Result<String, BoxError> {
    fs::read_to_string(path).map_err(|source| {
        Box::new(CliError::Io {
            path: path.to_path_buf(),
            source,
        }) as BoxError
    })
}

/// The single interchange document between `plan` and `render`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    /// `story`, `urban`, `platformer`, `pddl` or `ground`.
    pub domain: String,
    pub backend: Backend,
    pub k: usize,
    pub seed: u64,
    pub features: Vec<FeatureSummary>,
    pub plans: Vec<PlanReport>,
    pub bdc: usize,
    pub termination: Termination,
    pub inconclusive: Vec<String>,
    pub stats: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSummary {
    pub name: String,
    /// Listed for label domains; goal-subset domains stay symbolic.
    pub values: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    pub actions: Vec<String>,
    pub behaviour: Vec<FeatureValue>,
    /// Found by the behaviour-novelty loop rather than by padding.
    pub novel: bool,
    /// Fluents true at the end, for declarative problems.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_fluents: Option<Vec<String>>,
}

impl Report {
    /// Parses a report, rejecting any schema version but the current one.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::Report(e.to_string()))?;
        match value.get("schema_version").and_then(|v| v.as_u64()) {
            Some(v) if v == u64::from(SCHEMA_VERSION) => {}
            Some(v) => return Err(CliError::SchemaVersion(v)),
            None => return Err(CliError::Report("missing schema_version".into())),
        }
        serde_json::from_value(value).map_err(|e| CliError::Report(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serialisable") + "\n"
    }
}

/// Parses `args` (program name first) and runs the command, returning the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Plan(a) => cmd_plan(&a),
        Command::Validate(a) => cmd_validate(&a),
        Command::Render(a) => cmd_render(&a).map(|text| {
            print!("{text}");
            0
        }),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        1
    })
}

enum Source {
    Strips { label: &'static str, problem: GroundProblem },
    Urban,
    Platformer,
}

impl SourceArgs {
    fn load(&self) -> Result<Source, BoxError> {
        let given = [
            self.domain.is_some(),
            self.pddl_domain.is_some(),
            self.problem.is_some(),
        ];
        match given.iter().filter(|&&g| g).count() {
            0 => return Err(usage("give a problem: --domain, --pddl-domain with --pddl-problem, or --problem")),
            1 => {}
            _ => return Err(usage("--domain, --pddl-domain/--pddl-problem and --problem are exclusive")),
        }
        if let Some(d) = self.domain {
            return Ok(match d {
                Domain::Story => Source::Strips {
                    label: "story",
                    problem: story::story_pack()?.0,
                },
                Domain::Urban => Source::Urban,
                Domain::Platformer => Source::Platformer,
            });
        }
        if let (Some(d), Some(p)) = (&self.pddl_domain, &self.pddl_problem) {
            let domain = parse_domain(&read(d)?).map_err(|e| format!("{}: {e}", d.display()))?;
            let problem = parse_problem(&read(p)?).map_err(|e| format!("{}: {e}", p.display()))?;
            return Ok(Source::Strips {
                label: "pddl",
                problem: ground(&domain, &problem)?,
            });
        }
        let path = self.problem.as_ref().expect("one source is present");
        let problem = GroundProblem::from_json(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))?;
        Ok(Source::Strips { label: "ground", problem })
    }
}

fn space_config(path: &Option<PathBuf>) -> Result<Option<SpaceConfig>, BoxError> {
    match path {
        None => Ok(None),
        Some(p) => Ok(Some(
            SpaceConfig::from_json(&read(p)?).map_err(|e| format!("{}: {e}", p.display()))?,
        )),
    }
}

fn feature_summaries<T>(space: &BehaviourSpace<T>) -> Vec<FeatureSummary> {
    space
        .features()
        .iter()
        .map(|f| FeatureSummary {
            name: f.name().to_string(),
            values: match f.domain() {
                FeatureDomain::Labels(ls) => Some(ls.clone()),
                FeatureDomain::GoalSubsets(_) => None,
            },
        })
        .collect()
}

fn plan_reports<T>(
    result: &FbiResult<T>,
    actions: impl Fn(&T) -> Vec<String>,
    final_fluents: impl Fn(&T) -> Option<Vec<String>>,
) -> Vec<PlanReport> {
    result
        .plans
        .iter()
        .zip(&result.behaviours)
        .enumerate()
        .map(|(i, (t, b))| PlanReport {
            actions: actions(t),
            behaviour: b.0.clone(),
            novel: i < result.novel_plans,
            final_fluents: final_fluents(t),
        })
        .collect()
}

struct Outcome {
    plans: Vec<PlanReport>,
    features: Vec<FeatureSummary>,
    bdc: usize,
    termination: Termination,
    inconclusive: Vec<String>,
    stats: serde_json::Value,
}

fn cmd_plan(args: &PlanArgs) -> Result<i32, BoxError> {
    if args.k == 0 {
        return Err(usage("--k must be at least 1"));
    }
    if args.jobs == 0 {
        return Err(usage("--jobs must be at least 1"));
    }
    if args.node_budget == 0 {
        return Err(usage("--node-budget must be at least 1"));
    }
    if args.horizon_min > args.horizon_max {
        return Err(usage("--horizon-min exceeds --horizon-max"));
    }
    let source = args.source.load()?;
    let backend = args.backend.unwrap_or(match source {
        Source::Strips { .. } => Backend::Sat,
        _ => Backend::Search,
    });
    let config = space_config(&args.space)?;
    let (label, outcome) = match (&source, backend) {
        (Source::Strips { label, problem }, Backend::Sat) => (*label, plan_sat(problem, config, args)?),
        (Source::Strips { .. }, Backend::Search) => {
            return Err(usage(
                "the search backend needs a simulator domain (--domain urban or --domain platformer)",
            ))
        }
        (_, Backend::Sat) => {
            return Err(usage(
                "the sat backend needs a declarative problem (--domain story, --pddl-domain/--pddl-problem or --problem)",
            ))
        }
        (Source::Urban, Backend::Search) => {
            let sim = UrbanSimulator::bundled();
            let space = urban::bind_space(&sim, &config.unwrap_or_else(urban::default_space_config))?;
            ("urban", plan_search(&sim, &space, args)?)
        }
        (Source::Platformer, Backend::Search) => {
            let sim = Platformer::bundled();
            let space = platformer::bind_space(&sim, &config.unwrap_or_else(platformer::default_space_config))?;
            ("platformer", plan_search(&sim, &space, args)?)
        }
    };
    let found = outcome.plans.len();
    let report = Report {
        schema_version: SCHEMA_VERSION,
        domain: label.to_string(),
        backend,
        k: args.k,
        seed: args.seed,
        features: outcome.features,
        plans: outcome.plans,
        bdc: outcome.bdc,
        termination: outcome.termination,
        inconclusive: outcome.inconclusive,
        stats: outcome.stats,
    };
    let text = report.to_json();
    match &args.out {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io { path: p.clone(), source })?,
        None => print!("{text}"),
    }
    eprintln!(
        "{found} plan(s), bdc {}, termination {}",
        report.bdc,
        serde_json::to_value(&report.termination)?.as_str().unwrap_or_default()
    );
    Ok(if found == 0 { 2 } else { 0 })
}

fn plan_sat(problem: &GroundProblem, config: Option<SpaceConfig>, args: &PlanArgs) -> Result<Outcome, BoxError> {
    let space = match config {
        Some(c) => c.bind_strips(problem)?,
        None => BehaviourSpace::new(vec![crate::bspace::goal_endings_feature(problem)])?,
    };
    let backend = SatBackend::from_env(SolverConfig {
        seed: args.seed,
        ..SolverConfig::default()
    });
    let horizons = args.horizon_min..=args.horizon_max;
    let mut bgen = SatBehaviourGenerator::new(problem, &space, horizons.clone(), backend.clone())?;
    let mut pgen = SatPlanGenerator::new(problem, horizons, backend);
    let result = fbi(args.k, &space, &mut bgen, &mut pgen)?;
    Ok(Outcome {
        plans: plan_reports(
            &result,
            |t: &PlanTrace| problem.action_names(&t.plan),
            |t| {
                Some(
                    problem
                        .state_fluents(t.final_state())
                        .into_iter()
                        .map(ToString::to_string)
                        .collect(),
                )
            },
        ),
        features: feature_summaries(&space),
        bdc: result.bdc,
        termination: result.termination,
        inconclusive: result.inconclusive,
        stats: serde_json::json!({ "behaviour": bgen.stats(), "padding": pgen.stats() }),
    })
}

fn plan_search<S>(sim: &S, space: &BehaviourSpace<TraceOf<S>>, args: &PlanArgs) -> Result<Outcome, BoxError>
where
    S: Simulator + Sync,
    S::State: Send + Sync,
    S::Action: Send + Sync,
{
    let cfg = SearchConfig {
        strategy: match args.strategy {
            StrategyArg::BreadthFirst => Strategy::BreadthFirst,
            StrategyArg::DepthFirst => Strategy::DepthFirst,
            StrategyArg::BestFirst => Strategy::BestFirst,
        },
        heuristic: None,
        node_budget: args.node_budget,
        seed: args.seed,
        prune: true,
        jobs: args.jobs,
    };
    let mut bgen = SimBehaviourGenerator::new(sim, space, cfg.clone())?;
    let mut pgen = SimPlanGenerator::new(sim, cfg);
    let result = fbi(args.k, space, &mut bgen, &mut pgen)?;
    Ok(Outcome {
        plans: plan_reports(
            &result,
            |t: &TraceOf<S>| t.plan.iter().map(ToString::to_string).collect(),
            |_| None,
        ),
        features: feature_summaries(space),
        bdc: result.bdc,
        termination: result.termination,
        inconclusive: result.inconclusive,
        stats: serde_json::json!({
            "behaviour": bgen.stats(),
            "padding": pgen.stats(),
            "cells": bgen.outcomes(),
        }),
    })
}

fn plan_lines(text: &str) -> Vec<&str> {
    text.lines()
        .map(|l| l.split(';').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .collect()
}

fn cmd_validate(args: &ValidateArgs) -> Result<i32, BoxError> {
    let source = args.source.load()?;
    let text = read(&args.plan)?;
    let lines = plan_lines(&text);
    match source {
        Source::Strips { problem, .. } => {
            let ids = lines
                .iter()
                .map(|l| problem.action_id(l).ok_or_else(|| format!("unknown action `{l}`")))
                .collect::<Result<Vec<_>, _>>()?;
            match validate_plan(&problem, &Plan(ids)) {
                Ok(trace) => {
                    for (i, name) in problem.action_names(&trace.plan).iter().enumerate() {
                        println!("{:>3}  {name}", i + 1);
                    }
                    let end: Vec<String> = problem
                        .state_fluents(trace.final_state())
                        .into_iter()
                        .map(ToString::to_string)
                        .collect();
                    println!("final state: {}", end.join(" "));
                    println!("valid plan of {} step(s)", trace.plan.len());
                    Ok(0)
                }
                Err(e) => {
                    println!("invalid plan: {e}");
                    Ok(2)
                }
            }
        }
        Source::Urban => {
            let sim = UrbanSimulator::bundled();
            let actions = lines
                .iter()
                .map(|l| l.parse::<Convert>())
                .collect::<Result<Vec<_>, _>>()?;
            let verdict = match sim.replay(&actions) {
                None => Err(format!("plan length {} exceeds budget {}", actions.len(), urban::DEFAULT_BUDGET)),
                Some(t) if !sim.is_goal(t.final_state()) => Err(format!(
                    "final state does not satisfy the goal: {} of {} conversions",
                    actions.len(),
                    urban::DEFAULT_BUDGET
                )),
                Some(t) => Ok(t.final_state().render_ascii()),
            };
            report_sim_verdict(verdict, actions.len())
        }
        Source::Platformer => {
            let sim = Platformer::bundled();
            let actions = lines
                .iter()
                .map(|l| l.parse::<Move>())
                .collect::<Result<Vec<_>, _>>()?;
            let verdict = match sim.replay(&actions) {
                Err(e) => Err(e.to_string()),
                Ok(_) if actions.len() > platformer::DEFAULT_BUDGET => Err(format!(
                    "plan length {} exceeds budget {}",
                    actions.len(),
                    platformer::DEFAULT_BUDGET
                )),
                Ok(t) if !sim.is_goal(t.final_state()) => {
                    Err("final state does not satisfy the goal".to_string())
                }
                Ok(t) => Ok(sim.render(&t)),
            };
            report_sim_verdict(verdict, actions.len())
        }
    }
}

fn report_sim_verdict(verdict: Result<String, String>, len: usize) -> Result<i32, BoxError> {
    match verdict {
        Ok(picture) => {
            print!("{picture}");
            println!("valid plan of {len} step(s)");
            Ok(0)
        }
        Err(e) => {
            println!("invalid plan: {e}");
            Ok(2)
        }
    }
}

fn cmd_render(args: &RenderArgs) -> Result<String, BoxError> {
    let report = Report::from_json(&read(&args.report)?)?;
    let what = match args.what {
        Some(w) => w,
        None => match report.domain.as_str() {
            "urban" => RenderWhat::UrbanGrid,
            "platformer" => RenderWhat::Platformer,
            _ => RenderWhat::StorySummary,
        },
    };
    let mut out = String::new();
    match what {
        RenderWhat::UrbanGrid => render_urban(&report, args.ansi, &mut out)?,
        RenderWhat::Platformer => render_platformer(&report, &mut out)?,
        RenderWhat::StorySummary => render_story(&report, &mut out)?,
    }
    out.push('\n');
    out.push_str(&occupancy_table(&report));
    Ok(out)
}

fn expect_domain(report: &Report, domain: &str) -> Result<(), BoxError> {
    if report.domain != domain {
        return Err(usage(format!(
            "this view needs a {domain} report, got a {} report",
            report.domain
        )));
    }
    Ok(())
}

fn behaviour_label(values: &[FeatureValue]) -> String {
    crate::bspace::Behaviour(values.to_vec()).to_string()
}

fn render_urban(report: &Report, ansi: bool, out: &mut String) -> Result<(), BoxError> {
    expect_domain(report, "urban")?;
    let sim = UrbanSimulator::bundled();
    for (i, p) in report.plans.iter().enumerate() {
        let actions = p
            .actions
            .iter()
            .map(|a| a.parse::<Convert>())
            .collect::<Result<Vec<_>, _>>()?;
        let trace = sim
            .replay(&actions)
            .ok_or_else(|| CliError::Report(format!("plan {} does not replay", i + 1)))?;
        let (before, after) = (&trace.states[0], trace.final_state());
        let draw = |g: &urban::UrbanGrid| if ansi { g.render_ansi() } else { g.render_ascii() };
        let score = |g: &urban::UrbanGrid| -> Result<String, BoxError> {
            Ok(format!(
                "S {:.1}  D {:.1}",
                urban::sustainability_score(g)?,
                urban::diversity_score(g)?
            ))
        };
        out.push_str(&format!("plan {} {}\n  {}\n", i + 1, behaviour_label(&p.behaviour), p.actions.join(" ")));
        let width = before.width();
        out.push_str(&format!("{:<w$}   {}\n", "before", "after", w = width));
        for (l, r) in draw(before).lines().zip(draw(after).lines()) {
            out.push_str(&format!("{l}   {r}\n"));
        }
        out.push_str(&format!("{:<w$}   {}\n\n", score(before)?, score(after)?, w = width));
    }
    out.push_str(&legend());
    out.push('\n');
    Ok(())
}

fn render_platformer(report: &Report, out: &mut String) -> Result<(), BoxError> {
    expect_domain(report, "platformer")?;
    let sim = Platformer::bundled();
    for (i, p) in report.plans.iter().enumerate() {
        let actions = p
            .actions
            .iter()
            .map(|a| a.parse::<Move>())
            .collect::<Result<Vec<_>, _>>()?;
        let trace = sim.replay(&actions)?;
        out.push_str(&format!(
            "plan {} {} ({} moves)\n{}\n",
            i + 1,
            behaviour_label(&p.behaviour),
            actions.len(),
            sim.render(&trace)
        ));
    }
    Ok(())
}

fn render_story(report: &Report, out: &mut String) -> Result<(), BoxError> {
    for (i, p) in report.plans.iter().enumerate() {
        let fluents = p
            .final_fluents
            .as_ref()
            .ok_or_else(|| usage("story summaries need a report from a declarative problem"))?;
        out.push_str(&format!("narrative {} ({} steps)\n", i + 1, p.actions.len()));
        for a in &p.actions {
            out.push_str(&format!("  {a}\n"));
        }
        let mut married = 0;
        for f in fluents {
            if let Some(args) = f.strip_prefix("married-to(").and_then(|r| r.strip_suffix(')')) {
                if let Some((x, y)) = args.split_once(',') {
                    out.push_str(&format!("  => {x} married {y}\n"));
                    married += 1;
                }
            }
        }
        if married == 0 {
            out.push_str("  => no marriage\n");
        }
    }
    Ok(())
}

/// Plan counts per behaviour-space cell: a grid for two label features, a
/// list for one, and the occupied cells otherwise.
pub fn occupancy_table(report: &Report) -> String {
    let mut counts: BTreeMap<Vec<String>, usize> = BTreeMap::new();
    for p in &report.plans {
        *counts
            .entry(p.behaviour.iter().map(ToString::to_string).collect())
            .or_default() += 1;
    }
    let names: Vec<&str> = report.features.iter().map(|f| f.name.as_str()).collect();
    let values: Option<Vec<&Vec<String>>> = report.features.iter().map(|f| f.values.as_ref()).collect();
    let mut out = format!("behaviour space occupancy ({} plans, bdc {})\n", report.plans.len(), report.bdc);
    let cell = |n: usize| if n == 0 { ".".to_string() } else { n.to_string() };
    match values.as_deref() {
        Some([rows, cols]) => {
            let w = rows.iter().map(|r| r.len()).max().unwrap_or(0).max(names[0].len());
            out.push_str(&format!("{:<w$} \\ {}\n{:<w$}  ", names[0], names[1], ""));
            for c in cols.iter() {
                out.push_str(&format!(" {c:>3}"));
            }
            out.push('\n');
            for r in rows.iter() {
                out.push_str(&format!("{r:<w$}  "));
                for c in cols.iter() {
                    let n = counts.get(&vec![r.clone(), c.clone()]).copied().unwrap_or(0);
                    out.push_str(&format!(" {:>3}", cell(n)));
                }
                out.push('\n');
            }
        }
        Some([vals]) => {
            out.push_str(&format!("{}\n", names[0]));
            let w = vals.iter().map(|v| v.len()).max().unwrap_or(0);
            for v in vals.iter() {
                let n = counts.get(&vec![v.clone()]).copied().unwrap_or(0);
                out.push_str(&format!("  {v:<w$}  {}\n", cell(n)));
            }
        }
        _ => {
            out.push_str(&format!("occupied cells over ({})\n", names.join(", ")));
            for (c, n) in &counts {
                out.push_str(&format!("  ⟨{}⟩  {n}\n", c.join(", ")));
            }
        }
    }
    out
}

/// Recomputes the behaviour of every plan in `report` and checks it
/// against the recorded one.
pub fn check_report_behaviours<T>(
    report: &Report,
    space: &BehaviourSpace<T>,
    replay: impl Fn(&[String]) -> Option<T>,
) -> Result<(), String> {
    for (i, p) in report.plans.iter().enumerate() {
        let t = replay(&p.actions).ok_or_else(|| format!("plan {} does not replay", i + 1))?;
        let b = pbehaviour(space, &t).map_err(|e| e.to_string())?;
        if b.0 != p.behaviour {
            return Err(format!("plan {} extracts to {b}", i + 1));
        }
    }
    Ok(())
}
