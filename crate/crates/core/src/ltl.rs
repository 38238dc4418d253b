//! Linear temporal logic over finite traces.
//!
//! Formulas use the `G`/`F` fragment with boolean connectives. Evaluation
//! and prefix monitoring share one mechanism: formula progression over a
//! negation normal form, where the residual obligation after a prefix is
//! simplified to a canonical form.
//!
//! Text grammar (loosest binding first):
//!
//! ```text
//! or    := and ('|' and)*
//! and   := unary ('&' unary)*
//! unary := '!' unary | 'G' unary | 'F' unary | '(' or ')' | atom
//! ```
//!
//! Operator runs may be written without spaces, so `FG p` is `F (G p)`.
//! Atoms are identifiers over `[A-Za-z0-9_-]`; names made only of the
//! letters `F` and `G` are read as operators, and `X`, `U`, `R`, `W` are
//! reserved.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LtlError {
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("unsupported temporal operator `{0}`")]
    Unsupported(String),
    #[error("trace is empty")]
    EmptyTrace,
    #[error("valuation has {got} propositions, alphabet has {expected}")]
    ValuationArity { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LtlFormula {
    Atom(String),
    Not(Box<LtlFormula>),
    And(Box<LtlFormula>, Box<LtlFormula>),
    Or(Box<LtlFormula>, Box<LtlFormula>),
    Always(Box<LtlFormula>),
    Eventually(Box<LtlFormula>),
}

impl LtlFormula {
    pub fn atom(name: &str) -> Self {
        LtlFormula::Atom(name.to_string())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: LtlFormula) -> Self {
        LtlFormula::Not(Box::new(f))
    }

    pub fn and(a: LtlFormula, b: LtlFormula) -> Self {
        LtlFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: LtlFormula, b: LtlFormula) -> Self {
        LtlFormula::Or(Box::new(a), Box::new(b))
    }

    pub fn always(f: LtlFormula) -> Self {
        LtlFormula::Always(Box::new(f))
    }

    pub fn eventually(f: LtlFormula) -> Self {
        LtlFormula::Eventually(Box::new(f))
    }

    /// Conjunction of all formulas; `None` for an empty list.
    pub fn conjoin<I: IntoIterator<Item = LtlFormula>>(parts: I) -> Option<Self> {
        parts.into_iter().reduce(LtlFormula::and)
    }

    pub fn parse(text: &str) -> Result<Self, LtlError> {
        Parser::new(text)?.parse_all()
    }

    pub fn atoms(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            LtlFormula::Atom(a) => {
                out.insert(a);
            }
            LtlFormula::Not(f) | LtlFormula::Always(f) | LtlFormula::Eventually(f) => {
                f.collect_atoms(out)
            }
            LtlFormula::And(a, b) | LtlFormula::Or(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            LtlFormula::Atom(_) => 0,
            LtlFormula::Not(f) | LtlFormula::Always(f) | LtlFormula::Eventually(f) => {
                1 + f.depth()
            }
            LtlFormula::And(a, b) | LtlFormula::Or(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    fn is_binary(&self) -> bool {
        matches!(self, LtlFormula::And(..) | LtlFormula::Or(..))
    }
}

impl fmt::Display for LtlFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn operand(f: &mut fmt::Formatter<'_>, x: &LtlFormula) -> fmt::Result {
            if x.is_binary() {
                write!(f, "({x})")
            } else {
                write!(f, "{x}")
            }
        }
        fn unary(f: &mut fmt::Formatter<'_>, op: &str, x: &LtlFormula) -> fmt::Result {
            match x {
                LtlFormula::Always(_) | LtlFormula::Eventually(_) => write!(f, "{op}{x}"),
                LtlFormula::Atom(_) if op != "!" => write!(f, "{op} {x}"),
                _ => {
                    write!(f, "{op}")?;
                    operand(f, x)
                }
            }
        }
        match self {
            LtlFormula::Atom(a) => write!(f, "{a}"),
            LtlFormula::Not(x) => unary(f, "!", x),
            LtlFormula::Always(x) => unary(f, "G", x),
            LtlFormula::Eventually(x) => unary(f, "F", x),
            LtlFormula::And(a, b) | LtlFormula::Or(a, b) => {
                let op = if matches!(self, LtlFormula::And(..)) { "&" } else { "|" };
                // Left operands of the same connective print bare since
                // parsing is left-associative.
                let same = |x: &LtlFormula| {
                    std::mem::discriminant(x) == std::mem::discriminant(self)
                };
                if same(a) {
                    write!(f, "{a}")?;
                } else {
                    operand(f, a)?;
                }
                write!(f, " {op} ")?;
                operand(f, b)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Not,
    And,
    Or,
    Open,
    Close,
    Always,
    Eventually,
    Atom(String),
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self, LtlError> {
        let mut tokens = Vec::new();
        let bytes = text.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i] as char;
            match c {
                ' ' | '\t' | '\n' | '\r' => i += 1,
                '!' | '~' => {
                    tokens.push((i, Token::Not));
                    i += 1
                }
                '&' => {
                    tokens.push((i, Token::And));
                    i += if bytes.get(i + 1) == Some(&b'&') { 2 } else { 1 };
                }
                '|' => {
                    tokens.push((i, Token::Or));
                    i += if bytes.get(i + 1) == Some(&b'|') { 2 } else { 1 };
                }
                '(' => {
                    tokens.push((i, Token::Open));
                    i += 1
                }
                ')' => {
                    tokens.push((i, Token::Close));
                    i += 1
                }
                c if c.is_ascii_alphanumeric() || c == '_' => {
                    let start = i;
                    while i < bytes.len()
                        && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'-')
                    {
                        i += 1;
                    }
                    let word = &text[start..i];
                    if word.chars().all(|c| c == 'F' || c == 'G') {
                        for (k, c) in word.chars().enumerate() {
                            let t = if c == 'G' { Token::Always } else { Token::Eventually };
                            tokens.push((start + k, t));
                        }
                    } else if matches!(word, "X" | "U" | "R" | "W") {
                        return Err(LtlError::Unsupported(word.to_string()));
                    } else {
                        tokens.push((start, Token::Atom(word.to_string())));
                    }
                }
                other => {
                    return Err(LtlError::Parse {
                        offset: i,
                        message: format!("unexpected character `{other}`"),
                    })
                }
            }
        }
        Ok(Parser {
            tokens,
            pos: 0,
            len: text.len(),
        })
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.len, |(o, _)| *o)
    }

    fn error(&self, message: &str) -> LtlError {
        LtlError::Parse {
            offset: self.offset(),
            message: message.to_string(),
        }
    }

    fn parse_all(mut self) -> Result<LtlFormula, LtlError> {
        let f = self.parse_or()?;
        if self.pos != self.tokens.len() {
            return Err(self.error("trailing input"));
        }
        Ok(f)
    }

    fn parse_or(&mut self) -> Result<LtlFormula, LtlError> {
        let mut lhs = self.parse_and()?;
        while self.peek() == Some(&Token::Or) {
            self.pos += 1;
            lhs = LtlFormula::or(lhs, self.parse_and()?);
        }
        Ok(lhs)
    }

    fn parse_and(&mut self) -> Result<LtlFormula, LtlError> {
        let mut lhs = self.parse_unary()?;
        while self.peek() == Some(&Token::And) {
            self.pos += 1;
            lhs = LtlFormula::and(lhs, self.parse_unary()?);
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<LtlFormula, LtlError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.error("unexpected end of formula"));
        };
        self.pos += 1;
        match tok {
            Token::Not => Ok(LtlFormula::not(self.parse_unary()?)),
            Token::Always => Ok(LtlFormula::always(self.parse_unary()?)),
            Token::Eventually => Ok(LtlFormula::eventually(self.parse_unary()?)),
            Token::Atom(a) => Ok(LtlFormula::Atom(a)),
            Token::Open => {
                let inner = self.parse_or()?;
                if self.peek() != Some(&Token::Close) {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Token::Close | Token::And | Token::Or => {
                self.pos -= 1;
                Err(self.error("expected a formula"))
            }
        }
    }
}

/// Ordered set of proposition names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Alphabet {
    pub fn new<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut out = Alphabet {
            names: Vec::new(),
            index: HashMap::new(),
        };
        for n in names {
            let n = n.into();
            if !out.index.contains_key(&n) {
                out.index.insert(n.clone(), out.names.len());
                out.names.push(n);
            }
        }
        out
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Result<usize, LtlError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| LtlError::UnknownAtom(name.to_string()))
    }

    /// Valuation with exactly the named propositions true.
    pub fn valuation<'a, I: IntoIterator<Item = &'a str>>(
        &self,
        true_props: I,
    ) -> Result<Valuation, LtlError> {
        let mut bits = vec![false; self.names.len()];
        for p in true_props {
            bits[self.index_of(p)?] = true;
        }
        Ok(Valuation(bits))
    }

    pub fn check(&self, f: &LtlFormula) -> Result<(), LtlError> {
        f.atoms().into_iter().try_for_each(|a| self.index_of(a).map(|_| ()))
    }
}

/// Truth values of every alphabet proposition at one state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Valuation(Vec<bool>);

impl Valuation {
    pub fn from_bools(bits: Vec<bool>) -> Self {
        Valuation(bits)
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn true_names<'a>(&'a self, alphabet: &'a Alphabet) -> impl Iterator<Item = &'a str> + 'a {
        self.0
            .iter()
            .zip(alphabet.names())
            .filter(|(b, _)| **b)
            .map(|(_, n)| n.as_str())
    }
}

/// Residual obligation in negation normal form with canonically ordered
/// conjunctions and disjunctions, so structurally equal obligations compare
/// and hash equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Obligation {
    True,
    False,
    Lit(usize, bool),
    And(Vec<Obligation>),
    Or(Vec<Obligation>),
    Always(Box<Obligation>),
    Eventually(Box<Obligation>),
}

impl Obligation {
    fn all(parts: Vec<Obligation>) -> Obligation {
        let mut flat = Vec::with_capacity(parts.len());
        for p in parts {
            match p {
                Obligation::True => {}
                Obligation::False => return Obligation::False,
                Obligation::And(xs) => flat.extend(xs),
                other => flat.push(other),
            }
        }
        flat.sort();
        flat.dedup();
        match flat.len() {
            0 => Obligation::True,
            1 => flat.pop().unwrap(),
            _ => Obligation::And(flat),
        }
    }

    fn any(parts: Vec<Obligation>) -> Obligation {
        let mut flat = Vec::with_capacity(parts.len());
        for p in parts {
            match p {
                Obligation::False => {}
                Obligation::True => return Obligation::True,
                Obligation::Or(xs) => flat.extend(xs),
                other => flat.push(other),
            }
        }
        flat.sort();
        flat.dedup();
        match flat.len() {
            0 => Obligation::False,
            1 => flat.pop().unwrap(),
            _ => Obligation::Or(flat),
        }
    }

    fn from_formula(f: &LtlFormula, alphabet: &Alphabet, negated: bool) -> Result<Self, LtlError> {
        use LtlFormula as F;
        Ok(match (f, negated) {
            (F::Atom(a), n) => Obligation::Lit(alphabet.index_of(a)?, !n),
            (F::Not(x), n) => Self::from_formula(x, alphabet, !n)?,
            (F::And(a, b), false) | (F::Or(a, b), true) => Obligation::all(vec![
                Self::from_formula(a, alphabet, negated)?,
                Self::from_formula(b, alphabet, negated)?,
            ]),
            (F::Or(a, b), false) | (F::And(a, b), true) => Obligation::any(vec![
                Self::from_formula(a, alphabet, negated)?,
                Self::from_formula(b, alphabet, negated)?,
            ]),
            (F::Always(x), false) | (F::Eventually(x), true) => {
                Obligation::Always(Box::new(Self::from_formula(x, alphabet, negated)?))
            }
            (F::Eventually(x), false) | (F::Always(x), true) => {
                Obligation::Eventually(Box::new(Self::from_formula(x, alphabet, negated)?))
            }
        })
    }

    /// Obligation on the remainder of the trace after observing `state`.
    pub fn progress(&self, state: &Valuation) -> Obligation {
        match self {
            Obligation::True => Obligation::True,
            Obligation::False => Obligation::False,
            Obligation::Lit(i, positive) => {
                if state.get(*i) == *positive {
                    Obligation::True
                } else {
                    Obligation::False
                }
            }
            Obligation::And(xs) => Obligation::all(xs.iter().map(|x| x.progress(state)).collect()),
            Obligation::Or(xs) => Obligation::any(xs.iter().map(|x| x.progress(state)).collect()),
            Obligation::Always(x) => Obligation::all(vec![x.progress(state), self.clone()]),
            Obligation::Eventually(x) => Obligation::any(vec![x.progress(state), self.clone()]),
        }
    }

    /// Whether the obligation is met if the trace ends here.
    pub fn accepts_end(&self) -> bool {
        match self {
            Obligation::True | Obligation::Always(_) => true,
            Obligation::False | Obligation::Lit(..) | Obligation::Eventually(_) => false,
            Obligation::And(xs) => xs.iter().all(Obligation::accepts_end),
            Obligation::Or(xs) => xs.iter().any(Obligation::accepts_end),
        }
    }

    pub fn verdict(&self) -> Verdict {
        match self {
            Obligation::True => Verdict::SatisfiedAllExtensions,
            Obligation::False => Verdict::ViolatedAllExtensions,
            _ => Verdict::Undetermined,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    SatisfiedAllExtensions,
    ViolatedAllExtensions,
    Undetermined,
}

/// A formula compiled against an alphabet, ready for step-wise progression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monitor {
    start: Obligation,
    arity: usize,
}

impl Monitor {
    pub fn new(formula: &LtlFormula, alphabet: &Alphabet) -> Result<Self, LtlError> {
        Ok(Monitor {
            start: Obligation::from_formula(formula, alphabet, false)?,
            arity: alphabet.len(),
        })
    }

    /// Obligation before any state has been observed.
    pub fn start(&self) -> &Obligation {
        &self.start
    }

    pub fn run(&self, trace: &[Valuation]) -> Result<Obligation, LtlError> {
        if trace.is_empty() {
            return Err(LtlError::EmptyTrace);
        }
        let mut ob = self.start.clone();
        for v in trace {
            if v.len() != self.arity {
                return Err(LtlError::ValuationArity {
                    expected: self.arity,
                    got: v.len(),
                });
            }
            ob = ob.progress(v);
        }
        Ok(ob)
    }
}

/// LTLf truth of `f` at position 0 of a non-empty trace.
pub fn eval_finite(f: &LtlFormula, alphabet: &Alphabet, trace: &[Valuation]) -> Result<bool, LtlError> {
    Ok(Monitor::new(f, alphabet)?.run(trace)?.accepts_end())
}

/// Three-valued verdict over all finite extensions of `prefix` (the prefix
/// itself included). Sound, not complete.
pub fn monitor(f: &LtlFormula, alphabet: &Alphabet, prefix: &[Valuation]) -> Result<Verdict, LtlError> {
    Ok(Monitor::new(f, alphabet)?.run(prefix)?.verdict())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Alphabet {
        Alphabet::new(["killed", "avoided"])
    }

    fn trace(alpha: &Alphabet, steps: &[&[&str]]) -> Vec<Valuation> {
        steps
            .iter()
            .map(|s| alpha.valuation(s.iter().copied()).unwrap())
            .collect()
    }

    #[test]
    fn parses_compact_operator_runs() {
        let f = LtlFormula::parse("FG killed").unwrap();
        assert_eq!(
            f,
            LtlFormula::eventually(LtlFormula::always(LtlFormula::atom("killed")))
        );
        assert_eq!(f.to_string(), "FG killed");
        let g = LtlFormula::parse("G avoided & !(F l-reached | x)").unwrap();
        assert_eq!(LtlFormula::parse(&g.to_string()).unwrap(), g);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(LtlFormula::parse(""), Err(LtlError::Parse { .. })));
        assert!(matches!(LtlFormula::parse("(p"), Err(LtlError::Parse { .. })));
        assert!(matches!(LtlFormula::parse("p q"), Err(LtlError::Parse { .. })));
        assert!(matches!(LtlFormula::parse("p $ q"), Err(LtlError::Parse { .. })));
        assert_eq!(
            LtlFormula::parse("X p"),
            Err(LtlError::Unsupported("X".into()))
        );
    }

    #[test]
    fn always_avoided() {
        let a = ab();
        let f = LtlFormula::parse("G avoided").unwrap();
        let t = trace(&a, &[&["avoided"], &["avoided"], &["avoided"]]);
        assert!(eval_finite(&f, &a, &t).unwrap());
        let t = trace(&a, &[&["avoided"], &["avoided"], &["killed"]]);
        assert!(!eval_finite(&f, &a, &t).unwrap());
        assert_eq!(monitor(&f, &a, &t).unwrap(), Verdict::ViolatedAllExtensions);
    }

    #[test]
    fn eventually_always_is_undetermined() {
        let a = ab();
        let f = LtlFormula::parse("FG killed").unwrap();
        for t in [
            trace(&a, &[&["killed"]]),
            trace(&a, &[&[], &["killed"], &["killed"]]),
            trace(&a, &[&["avoided"]]),
        ] {
            assert_eq!(monitor(&f, &a, &t).unwrap(), Verdict::Undetermined);
        }
    }

    #[test]
    fn eventually_satisfied_once_seen() {
        let a = ab();
        let f = LtlFormula::parse("F killed").unwrap();
        let t = trace(&a, &[&[], &["killed"]]);
        assert_eq!(monitor(&f, &a, &t).unwrap(), Verdict::SatisfiedAllExtensions);
    }

    #[test]
    fn unknown_atom_and_empty_trace() {
        let a = ab();
        let f = LtlFormula::parse("G coins").unwrap();
        assert_eq!(
            eval_finite(&f, &a, &trace(&a, &[&[]])),
            Err(LtlError::UnknownAtom("coins".into()))
        );
        let g = LtlFormula::parse("G killed").unwrap();
        assert_eq!(eval_finite(&g, &a, &[]), Err(LtlError::EmptyTrace));
    }

    #[test]
    fn residual_stays_bounded() {
        let a = Alphabet::new(["p"]);
        let f = LtlFormula::parse("FG p & G F p").unwrap();
        let m = Monitor::new(&f, &a).unwrap();
        let on = a.valuation(["p"]).unwrap();
        let off = a.valuation([]).unwrap();
        let mut seen = BTreeSet::new();
        let mut ob = m.start().clone();
        for i in 0..64 {
            ob = ob.progress(if i % 3 == 0 { &off } else { &on });
            seen.insert(ob.clone());
        }
        assert!(seen.len() < 8, "{} distinct residuals", seen.len());
    }
}
