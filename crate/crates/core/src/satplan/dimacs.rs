//! DIMACS CNF files and the bridge to external solvers.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::atomic::{AtomicU64, Ordering};

use super::solver::Assignment;
use super::{CnfTask, SatError, SatModel, VarMap};

/// Names an executable that accepts a DIMACS file path as its only argument
/// and prints a competition-format answer.
pub const EXTERNAL_SAT_ENV: &str = "DIVPLAN_EXTERNAL_SAT";

pub fn to_dimacs(task: &CnfTask) -> String {
    let mut out = String::new();
    let vm = &task.varmap;
    let _ = writeln!(
        out,
        "c horizon {} fluents {} actions {}",
        vm.horizon,
        vm.fluents.len(),
        vm.actions.len()
    );
    let _ = writeln!(out, "p cnf {} {}", task.num_vars(), task.clauses.len());
    for clause in &task.clauses {
        for lit in clause {
            let _ = write!(out, "{lit} ");
        }
        out.push_str("0\n");
    }
    out
}

/// Parses a DIMACS CNF, returning the declared variable count and clauses.
pub fn parse_dimacs(text: &str) -> Result<(usize, Vec<Vec<i32>>), SatError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if line.starts_with('p') {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if header.is_some() || parts.len() != 4 || parts[1] != "cnf" {
                return Err(SatError::Dimacs(format!("line {}: bad header", ln + 1)));
            }
            let num = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| SatError::Dimacs(format!("line {}: bad number `{s}`", ln + 1)))
            };
            header = Some((num(parts[2])?, num(parts[3])?));
            continue;
        }
        let (vars, _) =
            header.ok_or_else(|| SatError::Dimacs(format!("line {}: clause before header", ln + 1)))?;
        for tok in line.split_whitespace() {
            let lit: i32 = tok
                .parse()
                .map_err(|_| SatError::Dimacs(format!("line {}: bad literal `{tok}`", ln + 1)))?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut current));
            } else if lit.unsigned_abs() as usize > vars {
                return Err(SatError::Dimacs(format!(
                    "line {}: literal {lit} exceeds {vars} variables",
                    ln + 1
                )));
            } else {
                current.push(lit);
            }
        }
    }
    let (vars, count) = header.ok_or_else(|| SatError::Dimacs("missing header".into()))?;
    if !current.is_empty() {
        clauses.push(current);
    }
    if clauses.len() != count {
        return Err(SatError::Dimacs(format!(
            "header declares {count} clauses, found {}",
            clauses.len()
        )));
    }
    Ok((vars, clauses))
}

impl CnfTask {
    /// Rebuilds a task from a DIMACS file and its varmap sidecar.
    pub fn from_dimacs(text: &str, varmap: VarMap) -> Result<Self, SatError> {
        let (vars, clauses) = parse_dimacs(text)?;
        if vars != varmap.num_vars() {
            return Err(SatError::VarMap(format!(
                "varmap describes {} variables, file declares {vars}",
                varmap.num_vars()
            )));
        }
        Ok(CnfTask { clauses, varmap })
    }

    /// Writes `<stem>.cnf` and `<stem>.varmap.json`.
    pub fn write_files(&self, stem: &Path) -> std::io::Result<(PathBuf, PathBuf)> {
        let cnf = stem.with_extension("cnf");
        let map = stem.with_extension("varmap.json");
        std::fs::write(&cnf, to_dimacs(self))?;
        std::fs::write(&map, self.varmap.to_json())?;
        Ok((cnf, map))
    }

    pub fn read_files(cnf: &Path, varmap: &Path) -> Result<Self, SatError> {
        let io = |e: std::io::Error| SatError::Dimacs(e.to_string());
        let vm = VarMap::from_json(&std::fs::read_to_string(varmap).map_err(io)?)?;
        Self::from_dimacs(&std::fs::read_to_string(cnf).map_err(io)?, vm)
    }
}

/// Parses `s SATISFIABLE` / `s UNSATISFIABLE` plus `v` lines. Variables the
/// solver leaves out are false.
pub fn parse_solver_output(text: &str, num_vars: usize) -> Result<Option<SatModel>, SatError> {
    let mut status = None;
    let mut values = vec![false; num_vars];
    for line in text.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("s ") {
            status = Some(match rest.trim() {
                "SATISFIABLE" => true,
                "UNSATISFIABLE" => false,
                other => return Err(SatError::External(format!("solver reported `{other}`"))),
            });
        } else if let Some(rest) = line.strip_prefix("v ") {
            for tok in rest.split_whitespace() {
                let lit: i32 = tok
                    .parse()
                    .map_err(|_| SatError::External(format!("bad model literal `{tok}`")))?;
                let v = lit.unsigned_abs() as usize;
                if v > num_vars {
                    return Err(SatError::External(format!("model literal {lit} out of range")));
                }
                if lit > 0 {
                    values[v - 1] = true;
                }
            }
        }
    }
    match status {
        Some(true) => Ok(Some(SatModel(Assignment(values)))),
        Some(false) => Ok(None),
        None => Err(SatError::External("no status line".into())),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalSolver {
    pub program: PathBuf,
}

impl ExternalSolver {
    pub fn from_env() -> Option<Self> {
        std::env::var_os(EXTERNAL_SAT_ENV)
            .filter(|v| !v.is_empty())
            .map(|p| ExternalSolver { program: p.into() })
    }

    pub fn solve(&self, task: &CnfTask) -> Result<Option<SatModel>, SatError> {
        static COUNTER: AtomicU64 = AtomicU64::new(0);
        let n = COUNTER.fetch_add(1, Ordering::Relaxed);
        let path = std::env::temp_dir().join(format!("divplan-{}-{n}.cnf", std::process::id()));
        std::fs::write(&path, to_dimacs(task)).map_err(|e| SatError::External(e.to_string()))?;
        let output = Command::new(&self.program).arg(&path).output();
        let _ = std::fs::remove_file(&path);
        let output = output.map_err(|e| {
            SatError::External(format!("cannot run {}: {e}", self.program.display()))
        })?;
        let model = parse_solver_output(&String::from_utf8_lossy(&output.stdout), task.num_vars())?;
        if let Some(m) = &model {
            if !m.0.satisfies(&task.clauses) {
                return Err(SatError::External("returned model violates the formula".into()));
            }
        }
        Ok(model)
    }
}
