//! Land-use grid simulator with sustainability and diversity scores.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bspace::{BinTable, BspaceError, FeatureConfig, ScoreFn, SpaceConfig, L_REACHED};
use crate::ltl::{Alphabet, Valuation};
use crate::search::{bind_sim, SimTrace, Simulator};

pub const GRID_JSON: &str = include_str!("../../data/urban-grid.json");
pub const DEFAULT_BUDGET: usize = 10;
pub const SUSTAINABILITY_SUFFIX: &str = "_S";
pub const DIVERSITY_SUFFIX: &str = "_D";

#[derive(Debug, Error, PartialEq)]
pub enum UrbanError {
    #[error("grid has no non-empty cells")]
    EmptyGrid,
    #[error("grid is {got} cells, expected {width}x{height}")]
    Shape { width: usize, height: usize, got: usize },
    #[error("unknown land-use letter `{0}`")]
    UnknownLetter(char),
    #[error("invalid conversion rule: {0}")]
    InvalidRule(String),
    #[error("json: {0}")]
    Json(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LandUse {
    Residential,
    Office,
    Green,
    Commercial,
    Facility,
    Empty,
}

impl LandUse {
    pub const ALL: [LandUse; 6] = [
        LandUse::Residential,
        LandUse::Office,
        LandUse::Green,
        LandUse::Commercial,
        LandUse::Facility,
        LandUse::Empty,
    ];

    pub fn letter(self) -> char {
        match self {
            LandUse::Residential => 'R',
            LandUse::Office => 'O',
            LandUse::Green => 'G',
            LandUse::Commercial => 'C',
            LandUse::Facility => 'F',
            LandUse::Empty => '.',
        }
    }

    pub fn from_letter(c: char) -> Result<Self, UrbanError> {
        LandUse::ALL
            .into_iter()
            .find(|l| l.letter() == c.to_ascii_uppercase())
            .ok_or(UrbanError::UnknownLetter(c))
    }

    pub fn name(self) -> &'static str {
        match self {
            LandUse::Residential => "residential",
            LandUse::Office => "office",
            LandUse::Green => "green",
            LandUse::Commercial => "commercial",
            LandUse::Facility => "facility",
            LandUse::Empty => "empty",
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    /// ANSI background colour code.
    fn ansi(self) -> &'static str {
        match self {
            LandUse::Residential => "44",
            LandUse::Office => "43",
            LandUse::Green => "42",
            LandUse::Commercial => "41",
            LandUse::Facility => "45",
            LandUse::Empty => "100",
        }
    }
}

/// Land-use counts in [`LandUse::ALL`] order.
pub type Counts = [u32; 6];

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UrbanGrid {
    width: usize,
    height: usize,
    cells: Vec<LandUse>,
    counts: Counts,
    pub counter: usize,
}

#[derive(Serialize, Deserialize)]
struct GridDoc {
    width: usize,
    height: usize,
    rows: Vec<String>,
}

impl UrbanGrid {
    pub fn new(width: usize, height: usize, cells: Vec<LandUse>) -> Result<Self, UrbanError> {
        if cells.len() != width * height {
            return Err(UrbanError::Shape {
                width,
                height,
                got: cells.len(),
            });
        }
        let mut counts = [0u32; 6];
        for c in &cells {
            counts[c.index()] += 1;
        }
        Ok(UrbanGrid {
            width,
            height,
            cells,
            counts,
            counter: 0,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cells(&self) -> &[LandUse] {
        &self.cells
    }

    pub fn counts(&self) -> &Counts {
        &self.counts
    }

    pub fn count(&self, l: LandUse) -> u32 {
        self.counts[l.index()]
    }

    pub fn from_rows(rows: &[&str]) -> Result<Self, UrbanError> {
        let width = rows.first().map_or(0, |r| r.chars().count());
        let cells = rows
            .iter()
            .flat_map(|r| r.chars())
            .map(LandUse::from_letter)
            .collect::<Result<Vec<_>, _>>()?;
        UrbanGrid::new(width, rows.len(), cells)
    }

    pub fn from_json(text: &str) -> Result<Self, UrbanError> {
        let doc: GridDoc = serde_json::from_str(text).map_err(|e| UrbanError::Json(e.to_string()))?;
        let rows: Vec<&str> = doc.rows.iter().map(String::as_str).collect();
        let g = UrbanGrid::from_rows(&rows)?;
        if g.width != doc.width || g.height != doc.height {
            return Err(UrbanError::Shape {
                width: doc.width,
                height: doc.height,
                got: g.cells.len(),
            });
        }
        Ok(g)
    }

    pub fn rows(&self) -> Vec<String> {
        self.cells
            .chunks(self.width.max(1))
            .map(|r| r.iter().map(|c| c.letter()).collect())
            .collect()
    }

    pub fn to_json(&self) -> String {
        let doc = GridDoc {
            width: self.width,
            height: self.height,
            rows: self.rows(),
        };
        serde_json::to_string_pretty(&doc).expect("serialisable")
    }

    pub fn bundled() -> Self {
        UrbanGrid::from_json(GRID_JSON).expect("bundled grid is valid")
    }

    pub fn render_ascii(&self) -> String {
        self.rows().join("\n") + "\n"
    }

    pub fn render_ansi(&self) -> String {
        let mut s = String::new();
        for row in self.cells.chunks(self.width.max(1)) {
            for c in row {
                s.push_str(&format!("\x1b[{}m{} \x1b[0m", c.ansi(), c.letter()));
            }
            s.push('\n');
        }
        s
    }
}

/// Legend for rendered grids.
pub fn legend() -> String {
    LandUse::ALL
        .iter()
        .map(|l| format!("{} {}", l.letter(), l.name()))
        .collect::<Vec<_>>()
        .join("  ")
}

/// `100 × (green + commercial + facility) / non-empty`.
pub fn sustainability_score(grid: &UrbanGrid) -> Result<f64, UrbanError> {
    sustainability_of(grid.counts())
}

/// Shannon-Weaver entropy of the five land-use proportions among non-empty
/// cells, scaled to `[0, 100]` by `ln 5`.
pub fn diversity_score(grid: &UrbanGrid) -> Result<f64, UrbanError> {
    diversity_of(grid.counts())
}

pub fn sustainability_of(counts: &Counts) -> Result<f64, UrbanError> {
    let used: u32 = counts[..5].iter().sum();
    if used == 0 {
        return Err(UrbanError::EmptyGrid);
    }
    let good = counts[LandUse::Green.index()]
        + counts[LandUse::Commercial.index()]
        + counts[LandUse::Facility.index()];
    Ok(100.0 * f64::from(good) / f64::from(used))
}

pub fn diversity_of(counts: &Counts) -> Result<f64, UrbanError> {
    let used: u32 = counts[..5].iter().sum();
    if used == 0 {
        return Err(UrbanError::EmptyGrid);
    }
    let h: f64 = counts[..5]
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = f64::from(c) / f64::from(used);
            -p * p.ln()
        })
        .sum();
    Ok((100.0 * h / 5f64.ln()).clamp(0.0, 100.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConversionRule {
    pub source: LandUse,
    /// Percentage of source cells converted per application, in `(0, 100]`.
    pub percent: f64,
    /// Receives the converted cells in equal shares; remainders go to the
    /// first target.
    pub targets: Vec<LandUse>,
}

impl ConversionRule {
    pub fn new(source: LandUse, percent: f64, targets: Vec<LandUse>) -> Result<Self, UrbanError> {
        if !(percent > 0.0 && percent <= 100.0) {
            return Err(UrbanError::InvalidRule(format!("percent {percent} outside (0, 100]")));
        }
        if targets.is_empty() || targets.contains(&source) {
            return Err(UrbanError::InvalidRule(format!(
                "rule for {} needs targets other than its source",
                source.name()
            )));
        }
        Ok(ConversionRule {
            source,
            percent,
            targets,
        })
    }

    /// Number of cells converted from `available` source cells.
    pub fn affected(&self, available: u32) -> u32 {
        ((self.percent * f64::from(available) / 100.0).ceil() as u32).min(available)
    }

    /// How many of `n` converted cells each target receives.
    pub fn split(&self, n: u32) -> Vec<u32> {
        let k = self.targets.len() as u32;
        let mut shares = vec![n / k; self.targets.len()];
        shares[0] += n % k;
        shares
    }
}

/// The bundled rule set: every land use converts 5% of its cells into two
/// neighbouring uses.
pub fn default_rules() -> Vec<ConversionRule> {
    use LandUse::*;
    [
        (Green, vec![Commercial, Facility]),
        (Residential, vec![Office, Commercial]),
        (Office, vec![Residential, Green]),
        (Commercial, vec![Office, Residential]),
        (Facility, vec![Residential, Green]),
        (Empty, vec![Residential, Green]),
    ]
    .into_iter()
    .map(|(s, t)| ConversionRule::new(s, 5.0, t).expect("valid bundled rule"))
    .collect()
}

/// Applies `rule` to the first affected source cells in row-major order and
/// advances the step counter. A rule with no source cells only advances the
/// counter.
pub fn urban_step(grid: &UrbanGrid, rule: &ConversionRule) -> UrbanGrid {
    let mut next = grid.clone();
    let n = rule.affected(grid.count(rule.source));
    let mut assignments = rule
        .targets
        .iter()
        .zip(rule.split(n))
        .flat_map(|(&t, k)| std::iter::repeat(t).take(k as usize));
    for i in 0..next.cells.len() {
        if next.cells[i] != rule.source {
            continue;
        }
        let Some(t) = assignments.next() else { break };
        next.cells[i] = t;
        next.counts[rule.source.index()] -= 1;
        next.counts[t.index()] += 1;
    }
    next.counter += 1;
    next
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Convert(pub LandUse);

impl fmt::Display for Convert {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "convert-{}", self.0.name())
    }
}

impl std::str::FromStr for Convert {
    type Err = UrbanError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let name = s.trim().strip_prefix("convert-").unwrap_or(s.trim());
        LandUse::ALL
            .into_iter()
            .find(|l| l.name() == name)
            .map(Convert)
            .ok_or_else(|| UrbanError::InvalidRule(format!("unknown action `{s}`")))
    }
}

pub type UrbanTrace = SimTrace<Convert, UrbanGrid>;

pub struct UrbanSimulator {
    initial: UrbanGrid,
    rules: Vec<ConversionRule>,
    budget: usize,
    bins: BinTable,
    alphabet: Alphabet,
}

impl UrbanSimulator {
    pub fn new(initial: UrbanGrid, rules: Vec<ConversionRule>, budget: usize) -> Result<Self, UrbanError> {
        if sustainability_score(&initial).is_err() {
            return Err(UrbanError::EmptyGrid);
        }
        let bins = BinTable::standard();
        let mut names: Vec<String> = Vec::new();
        for suffix in [SUSTAINABILITY_SUFFIX, DIVERSITY_SUFFIX] {
            names.extend(bins.labels().map(|l| format!("{l}{suffix}")));
        }
        names.push(L_REACHED.to_string());
        Ok(UrbanSimulator {
            initial,
            rules,
            budget,
            bins,
            alphabet: Alphabet::new(names),
        })
    }

    pub fn bundled() -> Self {
        UrbanSimulator::new(UrbanGrid::bundled(), default_rules(), DEFAULT_BUDGET).expect("bundled grid")
    }

    pub fn rules(&self) -> &[ConversionRule] {
        &self.rules
    }

    pub fn bins(&self) -> &BinTable {
        &self.bins
    }

    fn rule(&self, source: LandUse) -> Option<&ConversionRule> {
        self.rules.iter().find(|r| r.source == source)
    }

    /// Replays action names from the initial grid.
    pub fn replay(&self, actions: &[Convert]) -> Option<UrbanTrace> {
        let mut states = vec![self.initial()];
        for a in actions {
            let next = self.step(states.last().unwrap(), a)?;
            states.push(next);
        }
        let valuations = states.iter().map(|s| self.propositions(s)).collect();
        Some(SimTrace {
            plan: actions.to_vec(),
            states,
            valuations,
        })
    }

    /// Named scores over the final state of a trace.
    pub fn scores() -> HashMap<String, ScoreFn<UrbanTrace>> {
        let mut m: HashMap<String, ScoreFn<UrbanTrace>> = HashMap::new();
        m.insert(
            "sustainability".into(),
            Arc::new(|t: &UrbanTrace| sustainability_score(t.final_state()).ok()),
        );
        m.insert(
            "diversity".into(),
            Arc::new(|t: &UrbanTrace| diversity_score(t.final_state()).ok()),
        );
        m
    }
}

impl Simulator for UrbanSimulator {
    type State = UrbanGrid;
    type Action = Convert;
    type Digest = (Counts, usize);

    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn initial(&self) -> UrbanGrid {
        self.initial.clone()
    }

    fn legal_actions(&self, state: &UrbanGrid) -> Vec<Convert> {
        if state.counter >= self.budget {
            return Vec::new();
        }
        self.rules.iter().map(|r| Convert(r.source)).collect()
    }

    fn step(&self, state: &UrbanGrid, action: &Convert) -> Option<UrbanGrid> {
        (state.counter < self.budget)
            .then(|| self.rule(action.0).map(|r| urban_step(state, r)))
            .flatten()
    }

    fn propositions(&self, state: &UrbanGrid) -> Valuation {
        let mut true_names = Vec::new();
        if let (Ok(s), Ok(d)) = (sustainability_score(state), diversity_score(state)) {
            if let Some(l) = self.bins.classify(s) {
                true_names.push(format!("{l}{SUSTAINABILITY_SUFFIX}"));
            }
            if let Some(l) = self.bins.classify(d) {
                true_names.push(format!("{l}{DIVERSITY_SUFFIX}"));
            }
        }
        if state.counter >= self.budget {
            true_names.push(L_REACHED.to_string());
        }
        self.alphabet
            .valuation(true_names.iter().map(String::as_str))
            .expect("names come from the alphabet")
    }

    fn is_goal(&self, state: &UrbanGrid) -> bool {
        state.counter == self.budget
    }

    fn budget(&self) -> Option<usize> {
        Some(self.budget)
    }

    /// Scores and successor counts depend on land-use counts alone.
    fn digest(&self, state: &UrbanGrid) -> (Counts, usize) {
        (state.counts, state.counter)
    }
}

/// Sustainability × diversity categorical space.
pub fn default_space_config() -> SpaceConfig {
    SpaceConfig {
        features: vec![
            FeatureConfig::CategoricalScore {
                name: "sustainability".into(),
                score: "sustainability".into(),
                suffix: SUSTAINABILITY_SUFFIX.into(),
                bins: None,
            },
            FeatureConfig::CategoricalScore {
                name: "diversity".into(),
                score: "diversity".into(),
                suffix: DIVERSITY_SUFFIX.into(),
                bins: None,
            },
        ],
    }
}

pub fn bind_space(
    sim: &UrbanSimulator,
    config: &SpaceConfig,
) -> Result<crate::bspace::BehaviourSpace<UrbanTrace>, BspaceError> {
    bind_sim(config, sim.alphabet(), &UrbanSimulator::scores())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_of(counts: &[(LandUse, usize)]) -> UrbanGrid {
        let cells: Vec<LandUse> = counts
            .iter()
            .flat_map(|&(l, n)| std::iter::repeat(l).take(n))
            .collect();
        let n = cells.len();
        UrbanGrid::new(n, 1, cells).unwrap()
    }

    #[test]
    fn score_extremes() {
        let green = grid_of(&[(LandUse::Green, 9)]);
        assert_eq!(sustainability_score(&green).unwrap(), 100.0);
        assert_eq!(diversity_score(&green).unwrap(), 0.0);
        let res = grid_of(&[(LandUse::Residential, 9)]);
        assert_eq!(sustainability_score(&res).unwrap(), 0.0);
        let empty = grid_of(&[(LandUse::Empty, 4)]);
        assert_eq!(sustainability_score(&empty), Err(UrbanError::EmptyGrid));
        assert_eq!(diversity_score(&empty), Err(UrbanError::EmptyGrid));
    }

    #[test]
    fn empty_cells_do_not_count() {
        let g = grid_of(&[(LandUse::Green, 1), (LandUse::Residential, 1), (LandUse::Empty, 8)]);
        assert_eq!(sustainability_score(&g).unwrap(), 50.0);
    }

    #[test]
    fn green_rule_splits_with_remainder_first() {
        let g = grid_of(&[(LandUse::Green, 100)]);
        let rule = &default_rules()[0];
        let next = urban_step(&g, rule);
        assert_eq!(next.count(LandUse::Green), 95);
        assert_eq!(next.count(LandUse::Commercial), 3);
        assert_eq!(next.count(LandUse::Facility), 2);
        assert_eq!(next.counter, 1);
        // Row-major: the first five cells changed.
        assert!(next.cells()[..5].iter().all(|&c| c != LandUse::Green));
        assert!(next.cells()[5..].iter().all(|&c| c == LandUse::Green));
    }

    #[test]
    fn vacuous_conversion_consumes_a_step() {
        let g = grid_of(&[(LandUse::Residential, 3)]);
        let next = urban_step(&g, &default_rules()[0]);
        assert_eq!(next.cells(), g.cells());
        assert_eq!(next.counter, 1);
    }

    #[test]
    fn bundled_grid_roundtrips() {
        let g = UrbanGrid::bundled();
        assert_eq!((g.width(), g.height()), (20, 12));
        assert_eq!(UrbanGrid::from_json(&g.to_json()).unwrap(), g);
        assert!(UrbanGrid::from_rows(&["RX"]).is_err());
        assert!(UrbanGrid::from_json(r#"{"width":3,"height":1,"rows":["RR"]}"#).is_err());
    }

    #[test]
    fn propositions_pick_one_bin_per_score() {
        let sim = UrbanSimulator::bundled();
        let g = sim.initial();
        let v = sim.propositions(&g);
        let names: Vec<&str> = v.true_names(sim.alphabet()).collect();
        assert_eq!(names.len(), 2);
        let s = sim.bins().classify(sustainability_score(&g).unwrap()).unwrap();
        let d = sim.bins().classify(diversity_score(&g).unwrap()).unwrap();
        assert_eq!(names, [format!("{s}_S"), format!("{d}_D")]);
        let mut last = g;
        for _ in 0..DEFAULT_BUDGET {
            last = sim.step(&last, &Convert(LandUse::Green)).unwrap();
        }
        assert!(sim.is_goal(&last));
        let v = sim.propositions(&last);
        assert!(v.true_names(sim.alphabet()).any(|n| n == L_REACHED));
        assert!(sim.step(&last, &Convert(LandUse::Green)).is_none());
    }

    #[test]
    fn action_names_parse() {
        assert_eq!("convert-green".parse::<Convert>().unwrap(), Convert(LandUse::Green));
        assert_eq!(Convert(LandUse::Empty).to_string(), "convert-empty");
        assert!("convert-lava".parse::<Convert>().is_err());
    }
}
