//! Behaviour spaces: features, plan behaviours and the behaviour diversity
//! count (BDC).
//!
//! A feature pairs a finite value domain with an extraction function over
//! plan traces and an expression used by the backends to forbid or target a
//! value. Features are generic over the trace type so the same machinery
//! serves STRIPS plan traces and simulator traces.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ltl::{eval_finite, Alphabet, LtlError, LtlFormula, Valuation};
use crate::strips::{Fluent, GroundProblem, PlanTrace};

/// Distinguished categorical value meaning "horizon reached with no score".
pub const L_REACHED: &str = "l-reached";

/// Default cap on the number of cells `enumerate_cells` will walk.
pub const DEFAULT_CELL_CAP: u128 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BspaceError {
    #[error("feature `{feature}` extracted `{value}`, which is outside its domain")]
    ExtractorRange { feature: String, value: String },
    #[error("duplicate feature name `{0}`")]
    DuplicateFeature(String),
    #[error("feature `{0}` has an empty domain")]
    EmptyDomain(String),
    #[error("behaviour has {got} values, space has {expected} features")]
    Arity { expected: usize, got: usize },
    #[error("bins leave a gap between {from} and {to}")]
    BinGap { from: f64, to: f64 },
    #[error("bins overlap between {from} and {to}")]
    BinOverlap { from: f64, to: f64 },
    #[error("invalid bin table: {0}")]
    InvalidBins(String),
    #[error("behaviour space has {size} cells, above the cap of {cap}")]
    SpaceTooLarge { size: String, cap: u128 },
    #[error("feature `{feature}`: {source}")]
    Ltl {
        feature: String,
        #[source]
        source: LtlError,
    },
    #[error("feature kind `{kind}` cannot be bound here: {reason}")]
    UnsupportedFeature { kind: String, reason: String },
    #[error("unknown score `{0}`")]
    UnknownScore(String),
    #[error("space config: {0}")]
    Config(String),
}

/// One coordinate of a behaviour.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FeatureValue {
    /// The goal fluents that are true, by canonical name, sorted.
    Assignment(Vec<String>),
    Label(String),
}

impl FeatureValue {
    pub fn assignment<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let set: BTreeSet<String> = names.into_iter().map(Into::into).collect();
        FeatureValue::Assignment(set.into_iter().collect())
    }

    pub fn label(s: &str) -> Self {
        FeatureValue::Label(s.to_string())
    }
}

impl fmt::Display for FeatureValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureValue::Assignment(v) => write!(f, "{{{}}}", v.join(", ")),
            FeatureValue::Label(l) => write!(f, "{l}"),
        }
    }
}

/// A cell of the behaviour space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Behaviour(pub Vec<FeatureValue>);

impl fmt::Display for Behaviour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟨")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "⟩")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeatureDomain {
    /// Every subset of the listed goal fluents, kept symbolic.
    GoalSubsets(Vec<Fluent>),
    Labels(Vec<String>),
}

impl FeatureDomain {
    /// Number of values, `None` when it does not fit in a `u128`.
    pub fn size(&self) -> Option<u128> {
        match self {
            FeatureDomain::GoalSubsets(fs) => 1u128.checked_shl(fs.len() as u32),
            FeatureDomain::Labels(ls) => Some(ls.len() as u128),
        }
    }

    pub fn contains(&self, value: &FeatureValue) -> bool {
        match (self, value) {
            (FeatureDomain::GoalSubsets(fs), FeatureValue::Assignment(names)) => {
                names.iter().all(|n| fs.iter().any(|f| f.to_string() == *n))
            }
            (FeatureDomain::Labels(ls), FeatureValue::Label(l)) => ls.contains(l),
            _ => false,
        }
    }

    /// The value at `index` in declaration order. For goal subsets, bit `i`
    /// of the index selects the `i`-th goal fluent.
    fn value_at(&self, index: u128) -> FeatureValue {
        match self {
            FeatureDomain::GoalSubsets(fs) => FeatureValue::assignment(
                fs.iter()
                    .enumerate()
                    .filter(|(i, _)| index >> i & 1 == 1)
                    .map(|(_, f)| f.to_string()),
            ),
            FeatureDomain::Labels(ls) => FeatureValue::Label(ls[index as usize].clone()),
        }
    }
}

/// How a backend turns a feature value into a constraint.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureExpression {
    /// Conjunction of `g = value(g)` over the listed goal fluents.
    GoalAssignment(Vec<Fluent>),
    /// One temporal formula per domain label.
    Temporal(Vec<(String, LtlFormula)>),
}

impl FeatureExpression {
    /// Truth value required of every goal fluent for `value`.
    pub fn assignment(&self, value: &FeatureValue) -> Option<Vec<(Fluent, bool)>> {
        match (self, value) {
            (FeatureExpression::GoalAssignment(fs), FeatureValue::Assignment(names)) => Some(
                fs.iter()
                    .map(|f| (f.clone(), names.contains(&f.to_string())))
                    .collect(),
            ),
            _ => None,
        }
    }

    pub fn formula(&self, value: &FeatureValue) -> Option<&LtlFormula> {
        match (self, value) {
            (FeatureExpression::Temporal(table), FeatureValue::Label(l)) => {
                table.iter().find(|(k, _)| k == l).map(|(_, f)| f)
            }
            _ => None,
        }
    }
}

/// Extraction functions must be pure.
pub type Extractor<T> = Arc<dyn Fn(&T) -> FeatureValue + Send + Sync>;

pub struct Feature<T> {
    name: String,
    domain: FeatureDomain,
    extractor: Extractor<T>,
    expression: FeatureExpression,
}

impl<T> Clone for Feature<T> {
    fn clone(&self) -> Self {
        Feature {
            name: self.name.clone(),
            domain: self.domain.clone(),
            extractor: Arc::clone(&self.extractor),
            expression: self.expression.clone(),
        }
    }
}

impl<T> fmt::Debug for Feature<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Feature")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("expression", &self.expression)
            .finish_non_exhaustive()
    }
}

impl<T> Feature<T> {
    pub fn new(
        name: impl Into<String>,
        domain: FeatureDomain,
        extractor: Extractor<T>,
        expression: FeatureExpression,
    ) -> Result<Self, BspaceError> {
        let name = name.into();
        if domain.size() == Some(0) {
            return Err(BspaceError::EmptyDomain(name));
        }
        Ok(Feature {
            name,
            domain,
            extractor,
            expression,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &FeatureDomain {
        &self.domain
    }

    pub fn expression(&self) -> &FeatureExpression {
        &self.expression
    }

    pub fn extract(&self, trace: &T) -> Result<FeatureValue, BspaceError> {
        let value = (self.extractor)(trace);
        if !self.domain.contains(&value) {
            return Err(BspaceError::ExtractorRange {
                feature: self.name.clone(),
                value: value.to_string(),
            });
        }
        Ok(value)
    }
}

pub struct BehaviourSpace<T> {
    features: Vec<Feature<T>>,
}

impl<T> Clone for BehaviourSpace<T> {
    fn clone(&self) -> Self {
        BehaviourSpace {
            features: self.features.clone(),
        }
    }
}

impl<T> fmt::Debug for BehaviourSpace<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.features).finish()
    }
}

impl<T> BehaviourSpace<T> {
    pub fn new(features: Vec<Feature<T>>) -> Result<Self, BspaceError> {
        let mut names = BTreeSet::new();
        for f in &features {
            if !names.insert(f.name.as_str()) {
                return Err(BspaceError::DuplicateFeature(f.name.clone()));
            }
        }
        Ok(BehaviourSpace { features })
    }

    pub fn features(&self) -> &[Feature<T>] {
        &self.features
    }

    /// `Π |D_i|`, or `None` on overflow.
    pub fn size(&self) -> Option<u128> {
        self.features
            .iter()
            .try_fold(1u128, |acc, f| acc.checked_mul(f.domain.size()?))
    }

    pub fn contains(&self, b: &Behaviour) -> bool {
        b.0.len() == self.features.len()
            && self.features.iter().zip(&b.0).all(|(f, v)| f.domain.contains(v))
    }
}

/// `⟨e_1(π), …, e_n(π)⟩`.
pub fn pbehaviour<T>(space: &BehaviourSpace<T>, trace: &T) -> Result<Behaviour, BspaceError> {
    space
        .features
        .iter()
        .map(|f| f.extract(trace))
        .collect::<Result<Vec<_>, _>>()
        .map(Behaviour)
}

/// Number of distinct behaviours among `traces`.
pub fn bdc<T>(space: &BehaviourSpace<T>, traces: &[T]) -> Result<usize, BspaceError> {
    let mut seen = BTreeSet::new();
    for t in traces {
        seen.insert(pbehaviour(space, t)?);
    }
    Ok(seen.len())
}

/// Every cell exactly once, first feature varying slowest.
pub fn enumerate_cells<T>(
    space: &BehaviourSpace<T>,
    cap: u128,
) -> Result<impl Iterator<Item = Behaviour> + '_, BspaceError> {
    let size = space.size();
    match size {
        Some(n) if n <= cap => {}
        _ => {
            return Err(BspaceError::SpaceTooLarge {
                size: size.map_or_else(|| "more than 2^128".to_string(), |n| n.to_string()),
                cap,
            })
        }
    }
    let radices: Vec<u128> = space
        .features
        .iter()
        .map(|f| f.domain.size().unwrap())
        .collect();
    let total = size.unwrap();
    Ok((0..total).map(move |mut i| {
        let mut values = vec![FeatureValue::Label(String::new()); radices.len()];
        for (k, r) in radices.iter().enumerate().rev() {
            values[k] = space.features[k].domain.value_at(i % r);
            i /= r;
        }
        Behaviour(values)
    }))
}

/// Possible-endings feature: which goal fluents hold in the final state.
///
/// The domain is the power set of the grounded goal fluents, held
/// symbolically. Only goal-satisfying assignments are reachable.
pub fn goal_endings_feature(problem: &GroundProblem) -> Feature<PlanTrace> {
    let ids = problem.goal().fluents();
    let fluents: Vec<Fluent> = ids.iter().map(|&f| problem.fluent(f).clone()).collect();
    let names: Vec<(usize, String)> = ids
        .iter()
        .map(|&f| (f, problem.fluent(f).to_string()))
        .collect();
    let extractor: Extractor<PlanTrace> = Arc::new(move |trace: &PlanTrace| {
        let last = trace.final_state();
        FeatureValue::assignment(
            names
                .iter()
                .filter(|(id, _)| last.contains(*id))
                .map(|(_, n)| n.clone()),
        )
    });
    Feature {
        name: "possible-endings".to_string(),
        domain: FeatureDomain::GoalSubsets(fluents.clone()),
        extractor,
        expression: FeatureExpression::GoalAssignment(fluents),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub label: String,
    pub lower: f64,
    pub upper: f64,
}

/// Partition of `[0, 100]` into labelled bins. The first bin is closed
/// `[lower, upper]`; the others are half-open `(lower, upper]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinTable {
    bins: Vec<Bin>,
}

impl BinTable {
    pub fn new(bins: Vec<Bin>) -> Result<Self, BspaceError> {
        let first = bins
            .first()
            .ok_or_else(|| BspaceError::InvalidBins("no bins".into()))?;
        if first.lower > 0.0 {
            return Err(BspaceError::BinGap {
                from: 0.0,
                to: first.lower,
            });
        }
        if first.lower < 0.0 {
            return Err(BspaceError::InvalidBins("bins start below 0".into()));
        }
        let mut labels = BTreeSet::new();
        for (i, b) in bins.iter().enumerate() {
            if !(b.lower < b.upper) {
                return Err(BspaceError::InvalidBins(format!(
                    "bin `{}` has lower {} >= upper {}",
                    b.label, b.lower, b.upper
                )));
            }
            if b.label == L_REACHED || !labels.insert(b.label.as_str()) {
                return Err(BspaceError::InvalidBins(format!(
                    "duplicate or reserved label `{}`",
                    b.label
                )));
            }
            if i > 0 {
                let prev = bins[i - 1].upper;
                if b.lower > prev {
                    return Err(BspaceError::BinGap {
                        from: prev,
                        to: b.lower,
                    });
                }
                if b.lower < prev {
                    return Err(BspaceError::BinOverlap {
                        from: b.lower,
                        to: prev,
                    });
                }
            }
        }
        let last = bins.last().unwrap().upper;
        if last < 100.0 {
            return Err(BspaceError::BinGap {
                from: last,
                to: 100.0,
            });
        }
        if last > 100.0 {
            return Err(BspaceError::InvalidBins("bins end above 100".into()));
        }
        Ok(BinTable { bins })
    }

    /// VL [0,20], L (20,30], M (30,50], H (50,70], VH (70,90], ID (90,100].
    pub fn standard() -> Self {
        let edges = [
            ("VL", 0.0, 20.0),
            ("L", 20.0, 30.0),
            ("M", 30.0, 50.0),
            ("H", 50.0, 70.0),
            ("VH", 70.0, 90.0),
            ("ID", 90.0, 100.0),
        ];
        BinTable::new(
            edges
                .iter()
                .map(|&(label, lower, upper)| Bin {
                    label: label.to_string(),
                    lower,
                    upper,
                })
                .collect(),
        )
        .expect("standard table is a partition")
    }

    pub fn bins(&self) -> &[Bin] {
        &self.bins
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.bins.iter().map(|b| b.label.as_str())
    }

    pub fn classify(&self, score: f64) -> Option<&str> {
        let first = &self.bins[0];
        if score >= first.lower && score <= first.upper {
            return Some(&first.label);
        }
        self.bins[1..]
            .iter()
            .find(|b| score > b.lower && score <= b.upper)
            .map(|b| b.label.as_str())
    }
}

/// Pure score function; `None` means the score is undefined for the trace.
pub type ScoreFn<T> = Arc<dyn Fn(&T) -> Option<f64> + Send + Sync>;

/// Categorical feature over a `[0, 100]` score.
///
/// Each bin label `v` is targeted by `FG v<suffix>`. The extra
/// [`L_REACHED`] value is targeted by reaching the horizon with no bin
/// proposition true.
pub fn categorical_score_feature<T: 'static>(
    name: &str,
    score_fn: ScoreFn<T>,
    bins: BinTable,
    atom_suffix: &str,
) -> Feature<T> {
    let mut labels: Vec<String> = bins.labels().map(str::to_string).collect();
    labels.push(L_REACHED.to_string());
    let mut formulas: Vec<(String, LtlFormula)> = bins
        .labels()
        .map(|l| {
            let atom = LtlFormula::atom(&format!("{l}{atom_suffix}"));
            (l.to_string(), LtlFormula::eventually(LtlFormula::always(atom)))
        })
        .collect();
    let no_bin = bins
        .labels()
        .map(|l| LtlFormula::not(LtlFormula::atom(&format!("{l}{atom_suffix}"))));
    let reached = LtlFormula::conjoin(std::iter::once(LtlFormula::atom(L_REACHED)).chain(no_bin))
        .expect("non-empty");
    formulas.push((
        L_REACHED.to_string(),
        LtlFormula::eventually(LtlFormula::always(reached)),
    ));
    let table = bins.clone();
    let extractor: Extractor<T> = Arc::new(move |trace: &T| match score_fn(trace) {
        None => FeatureValue::label(L_REACHED),
        Some(s) => match table.classify(s) {
            Some(l) => FeatureValue::label(l),
            None => FeatureValue::Label(format!("out-of-range({s})")),
        },
    });
    Feature {
        name: name.to_string(),
        domain: FeatureDomain::Labels(labels),
        extractor,
        expression: FeatureExpression::Temporal(formulas),
    }
}

/// Traces that carry one proposition valuation per visited state.
pub trait PropTraced {
    fn valuations(&self) -> &[Valuation];
}

/// Feature whose value is the first label (in declaration order) whose
/// formula holds on the trace.
pub fn ltl_feature<T: PropTraced + 'static>(
    name: &str,
    values: Vec<(String, LtlFormula)>,
    alphabet: &Alphabet,
) -> Result<Feature<T>, BspaceError> {
    for (_, f) in &values {
        alphabet.check(f).map_err(|source| BspaceError::Ltl {
            feature: name.to_string(),
            source,
        })?;
    }
    let labels: Vec<String> = values.iter().map(|(l, _)| l.clone()).collect();
    let table = values.clone();
    let alphabet = alphabet.clone();
    let extractor: Extractor<T> = Arc::new(move |trace: &T| {
        table
            .iter()
            .find(|(_, f)| eval_finite(f, &alphabet, trace.valuations()).unwrap_or(false))
            .map_or_else(
                || FeatureValue::Label("<none>".into()),
                |(l, _)| FeatureValue::Label(l.clone()),
            )
    });
    Feature::new(
        name,
        FeatureDomain::Labels(labels),
        extractor,
        FeatureExpression::Temporal(values),
    )
}

/// JSON behaviour-space configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceConfig {
    pub features: Vec<FeatureConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FeatureConfig {
    GoalEndings {
        #[serde(default)]
        name: Option<String>,
    },
    CategoricalScore {
        name: String,
        /// Score registered by the simulator, e.g. `sustainability`.
        score: String,
        #[serde(default)]
        suffix: String,
        /// Defaults to [`BinTable::standard`].
        #[serde(default)]
        bins: Option<Vec<Bin>>,
    },
    Ltl {
        name: String,
        values: Vec<LtlValueConfig>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LtlValueConfig {
    pub label: String,
    pub formula: String,
}

impl SpaceConfig {
    pub fn from_json(text: &str) -> Result<Self, BspaceError> {
        serde_json::from_str(text).map_err(|e| BspaceError::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serialisable")
    }

    /// Binds the configuration to a ground problem. Only goal-endings
    /// features apply to STRIPS plan traces.
    pub fn bind_strips(&self, problem: &GroundProblem) -> Result<BehaviourSpace<PlanTrace>, BspaceError> {
        let mut features = Vec::new();
        for fc in &self.features {
            match fc {
                FeatureConfig::GoalEndings { name } => {
                    let mut f = goal_endings_feature(problem);
                    if let Some(n) = name {
                        f.name = n.clone();
                    }
                    features.push(f);
                }
                FeatureConfig::CategoricalScore { .. } => {
                    return Err(BspaceError::UnsupportedFeature {
                        kind: "categorical-score".into(),
                        reason: "declarative problems expose no scores".into(),
                    })
                }
                FeatureConfig::Ltl { .. } => {
                    return Err(BspaceError::UnsupportedFeature {
                        kind: "ltl".into(),
                        reason: "the SAT backend forbids goal-fluent assignments only".into(),
                    })
                }
            }
        }
        BehaviourSpace::new(features)
    }
}

pub(crate) fn parse_ltl_values(
    feature: &str,
    values: &[LtlValueConfig],
) -> Result<Vec<(String, LtlFormula)>, BspaceError> {
    values
        .iter()
        .map(|v| {
            LtlFormula::parse(&v.formula)
                .map(|f| (v.label.clone(), f))
                .map_err(|source| BspaceError::Ltl {
                    feature: feature.to_string(),
                    source,
                })
        })
        .collect()
}

pub(crate) fn bins_from_config(bins: &Option<Vec<Bin>>) -> Result<BinTable, BspaceError> {
    match bins {
        None => Ok(BinTable::standard()),
        Some(b) => BinTable::new(b.clone()),
    }
}
