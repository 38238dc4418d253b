//! Parser, pretty-printer and grounder for a small PDDL subset: typed STRIPS
//! with negative preconditions, equality, constants and existential goals.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::strips::{Fluent, GoalFormula, GroundAction, GroundProblem, Literal, ModelError, State};

pub const DEFAULT_MAX_GROUND_ACTIONS: usize = 200_000;
const MAX_GOAL_DISJUNCTS: usize = 100_000;

const SUPPORTED_REQUIREMENTS: &[&str] = &[
    ":strips",
    ":typing",
    ":negative-preconditions",
    ":equality",
    ":existential-preconditions",
];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Error)]
pub enum PddlError {
    #[error("{pos}: syntax error: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{pos}: unsupported PDDL feature `{feature}`")]
    UnsupportedFeature { pos: Pos, feature: String },
    #[error("{pos}: object `{object}` has undeclared type `{ty}`")]
    UndeclaredObjectType { pos: Pos, object: String, ty: String },
    #[error("problem targets domain `{problem}` but domain is `{domain}`")]
    DomainMismatch { domain: String, problem: String },
    #[error("grounding exceeds the cap of {cap} {what}")]
    GroundingExplosion { what: &'static str, cap: usize },
    #[error("goal is unsatisfiable after grounding")]
    UnsatisfiableGoal,
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn syntax(pos: Pos, msg: impl Into<String>) -> PddlError {
    PddlError::Syntax {
        pos,
        msg: msg.into(),
    }
}

fn unsupported(pos: Pos, feature: &str) -> PddlError {
    PddlError::UnsupportedFeature {
        pos,
        feature: feature.to_string(),
    }
}

// ---------------------------------------------------------------------------
// S-expressions

#[derive(Debug, Clone)]
enum Sexp {
    Atom(String, Pos),
    List(Vec<Sexp>, Pos),
}

impl Sexp {
    fn pos(&self) -> Pos {
        match self {
            Sexp::Atom(_, p) | Sexp::List(_, p) => *p,
        }
    }

    fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(s, _) => Some(s),
            Sexp::List(..) => None,
        }
    }

    fn expect_atom(&self, what: &str) -> Result<&str, PddlError> {
        self.atom()
            .ok_or_else(|| syntax(self.pos(), format!("expected {what}, found a list")))
    }

    fn expect_list(&self, what: &str) -> Result<&[Sexp], PddlError> {
        match self {
            Sexp::List(items, _) => Ok(items),
            Sexp::Atom(a, p) => Err(syntax(*p, format!("expected {what}, found `{a}`"))),
        }
    }

    /// The head keyword of a list, if it starts with an atom.
    fn head(&self) -> Option<&str> {
        match self {
            Sexp::List(items, _) => items.first().and_then(Sexp::atom),
            Sexp::Atom(..) => None,
        }
    }
}

fn read_sexp(text: &str) -> Result<Sexp, PddlError> {
    let mut stack: Vec<(Vec<Sexp>, Pos)> = Vec::new();
    let mut top: Option<Sexp> = None;
    let (mut line, mut col) = (1usize, 0usize);
    let mut chars = text.chars().peekable();
    let mut word = String::new();
    let mut word_pos = Pos::default();

    fn flush(
        word: &mut String,
        pos: Pos,
        stack: &mut [(Vec<Sexp>, Pos)],
        top: &Option<Sexp>,
    ) -> Result<(), PddlError> {
        if word.is_empty() {
            return Ok(());
        }
        let atom = Sexp::Atom(std::mem::take(word).to_lowercase(), pos);
        match stack.last_mut() {
            Some((items, _)) if top.is_none() => {
                items.push(atom);
                Ok(())
            }
            _ => Err(syntax(pos, "text outside the top-level form")),
        }
    }

    while let Some(c) = chars.next() {
        if c == '\n' {
            flush(&mut word, word_pos, &mut stack, &top)?;
            line += 1;
            col = 0;
            continue;
        }
        col += 1;
        let here = Pos { line, col };
        match c {
            ';' => {
                flush(&mut word, word_pos, &mut stack, &top)?;
                while chars.peek().is_some_and(|&c| c != '\n') {
                    chars.next();
                }
            }
            '(' => {
                flush(&mut word, word_pos, &mut stack, &top)?;
                if top.is_some() {
                    return Err(syntax(here, "text after the top-level form"));
                }
                stack.push((Vec::new(), here));
            }
            ')' => {
                flush(&mut word, word_pos, &mut stack, &top)?;
                let (items, open) = stack
                    .pop()
                    .ok_or_else(|| syntax(here, "unbalanced `)`"))?;
                let list = Sexp::List(items, open);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(list),
                    None => top = Some(list),
                }
            }
            c if c.is_whitespace() => flush(&mut word, word_pos, &mut stack, &top)?,
            c => {
                if word.is_empty() {
                    word_pos = here;
                }
                word.push(c);
            }
        }
    }
    flush(&mut word, word_pos, &mut stack, &top)?;
    if let Some((_, open)) = stack.last() {
        return Err(syntax(*open, "unclosed `(`"));
    }
    top.ok_or_else(|| syntax(Pos { line, col }, "empty input"))
}

// ---------------------------------------------------------------------------
// AST

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedName {
    pub name: String,
    pub ty: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Const(String),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "?{v}"),
            Term::Const(c) => write!(f, "{c}"),
        }
    }
}

/// Predicate application. The position is kept for error reporting and is
/// ignored by equality.
#[derive(Debug, Clone)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<Term>,
    pub pos: Pos,
}

impl PartialEq for Atom {
    fn eq(&self, other: &Self) -> bool {
        self.pred == other.pred && self.args == other.args
    }
}

impl Eq for Atom {}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.pred)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PreLiteral {
    Atom(Atom, bool),
    Eq(Term, Term, bool),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Condition {
    Atom(Atom),
    Eq(Term, Term),
    Not(Box<Condition>),
    And(Vec<Condition>),
    Or(Vec<Condition>),
    Exists(Vec<TypedName>, Box<Condition>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateDecl {
    pub name: String,
    pub params: Vec<TypedName>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    pub params: Vec<TypedName>,
    pub pre: Vec<PreLiteral>,
    pub add: Vec<Atom>,
    pub del: Vec<Atom>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainAst {
    pub name: String,
    pub requirements: Vec<String>,
    /// Declared types with their parent; `object` is implicit.
    pub types: Vec<TypedName>,
    pub constants: Vec<TypedName>,
    pub predicates: Vec<PredicateDecl>,
    pub actions: Vec<ActionSchema>,
}

#[derive(Debug, Clone)]
pub struct ProblemAst {
    pub name: String,
    pub domain: String,
    pub requirements: Vec<String>,
    pub objects: Vec<TypedName>,
    /// Declaration positions of `objects`, index-aligned.
    pub object_pos: Vec<Pos>,
    pub init: Vec<Atom>,
    pub goal: Condition,
}

impl PartialEq for ProblemAst {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.domain == other.domain
            && self.requirements == other.requirements
            && self.objects == other.objects
            && self.init == other.init
            && self.goal == other.goal
    }
}

impl Eq for ProblemAst {}

// ---------------------------------------------------------------------------
// Parsing

fn parse_typed_list(items: &[Sexp], vars: bool) -> Result<Vec<(TypedName, Pos)>, PddlError> {
    let mut out = Vec::new();
    let mut pending: Vec<(String, Pos)> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let item = &items[i];
        let word = item.expect_atom("a name")?;
        if word == "-" {
            let ty_item = items
                .get(i + 1)
                .ok_or_else(|| syntax(item.pos(), "`-` without a type"))?;
            if ty_item.head() == Some("either") {
                return Err(unsupported(ty_item.pos(), "either"));
            }
            let ty = ty_item.expect_atom("a type")?;
            if pending.is_empty() {
                return Err(syntax(item.pos(), "type without names"));
            }
            out.extend(pending.drain(..).map(|(name, pos)| {
                (
                    TypedName {
                        name,
                        ty: ty.to_string(),
                    },
                    pos,
                )
            }));
            i += 2;
            continue;
        }
        let name = if vars {
            word.strip_prefix('?')
                .filter(|v| !v.is_empty())
                .ok_or_else(|| syntax(item.pos(), format!("expected a variable, found `{word}`")))?
        } else {
            if word.starts_with('?') {
                return Err(syntax(item.pos(), format!("unexpected variable `{word}`")));
            }
            word
        };
        pending.push((name.to_string(), item.pos()));
        i += 1;
    }
    out.extend(pending.into_iter().map(|(name, pos)| {
        (
            TypedName {
                name,
                ty: "object".to_string(),
            },
            pos,
        )
    }));
    Ok(out)
}

fn strip_pos(list: Vec<(TypedName, Pos)>) -> Vec<TypedName> {
    list.into_iter().map(|(t, _)| t).collect()
}

fn parse_term(s: &Sexp) -> Result<Term, PddlError> {
    let word = s.expect_atom("a term")?;
    Ok(match word.strip_prefix('?') {
        Some(v) if !v.is_empty() => Term::Var(v.to_string()),
        Some(_) => return Err(syntax(s.pos(), "empty variable name")),
        None => Term::Const(word.to_string()),
    })
}

fn parse_atom(s: &Sexp) -> Result<Atom, PddlError> {
    let items = s.expect_list("an atom")?;
    let pred = items
        .first()
        .ok_or_else(|| syntax(s.pos(), "empty atom"))?
        .expect_atom("a predicate name")?;
    if pred.starts_with('?') || pred.starts_with(':') {
        return Err(syntax(s.pos(), format!("bad predicate name `{pred}`")));
    }
    Ok(Atom {
        pred: pred.to_string(),
        args: items[1..].iter().map(parse_term).collect::<Result<_, _>>()?,
        pos: s.pos(),
    })
}

fn parse_condition(s: &Sexp) -> Result<Condition, PddlError> {
    let items = s.expect_list("a condition")?;
    let Some(head) = items.first().and_then(Sexp::atom) else {
        return Err(syntax(s.pos(), "condition must start with a keyword or predicate"));
    };
    let args = &items[1..];
    let arity = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(syntax(s.pos(), format!("`{head}` takes {n} argument(s)")))
        }
    };
    Ok(match head {
        "and" => Condition::And(args.iter().map(parse_condition).collect::<Result<_, _>>()?),
        "or" => Condition::Or(args.iter().map(parse_condition).collect::<Result<_, _>>()?),
        "not" => {
            arity(1)?;
            Condition::Not(Box::new(parse_condition(&args[0])?))
        }
        "=" => {
            arity(2)?;
            Condition::Eq(parse_term(&args[0])?, parse_term(&args[1])?)
        }
        "exists" => {
            arity(2)?;
            let vars = strip_pos(parse_typed_list(args[0].expect_list("a variable list")?, true)?);
            Condition::Exists(vars, Box::new(parse_condition(&args[1])?))
        }
        "forall" | "imply" | "when" | "preference" => return Err(unsupported(s.pos(), head)),
        "<" | ">" | "<=" | ">=" => return Err(unsupported(s.pos(), "numeric-fluents")),
        _ => Condition::Atom(parse_atom(s)?),
    })
}

fn parse_precondition(s: &Sexp, out: &mut Vec<PreLiteral>) -> Result<(), PddlError> {
    fn literal(c: Condition, pos: Pos, positive: bool) -> Result<PreLiteral, PddlError> {
        match c {
            Condition::Atom(a) => Ok(PreLiteral::Atom(a, positive)),
            Condition::Eq(a, b) => Ok(PreLiteral::Eq(a, b, positive)),
            Condition::Not(inner) if positive => literal(*inner, pos, false),
            Condition::Or(_) => Err(unsupported(pos, "disjunctive-preconditions")),
            Condition::Exists(..) => Err(unsupported(pos, "existential-preconditions in actions")),
            _ => Err(syntax(pos, "precondition must be a conjunction of literals")),
        }
    }
    if s.head() == Some("and") {
        for item in &s.expect_list("a precondition")?[1..] {
            parse_precondition(item, out)?;
        }
        return Ok(());
    }
    out.push(literal(parse_condition(s)?, s.pos(), true)?);
    Ok(())
}

fn parse_effect(s: &Sexp, add: &mut Vec<Atom>, del: &mut Vec<Atom>) -> Result<(), PddlError> {
    match s.head() {
        Some("and") => {
            for item in &s.expect_list("an effect")?[1..] {
                parse_effect(item, add, del)?;
            }
        }
        Some("not") => {
            let items = s.expect_list("an effect")?;
            if items.len() != 2 {
                return Err(syntax(s.pos(), "`not` takes 1 argument(s)"));
            }
            del.push(parse_atom(&items[1])?);
        }
        Some("when") => return Err(unsupported(s.pos(), "conditional-effects")),
        Some("forall") => return Err(unsupported(s.pos(), "universal effects")),
        Some("increase" | "decrease" | "assign" | "scale-up" | "scale-down") => {
            return Err(unsupported(s.pos(), "numeric-fluents"))
        }
        _ => add.push(parse_atom(s)?),
    }
    Ok(())
}

fn parse_requirements(items: &[Sexp]) -> Result<Vec<String>, PddlError> {
    items
        .iter()
        .map(|r| {
            let word = r.expect_atom("a requirement")?;
            if SUPPORTED_REQUIREMENTS.contains(&word) {
                Ok(word.to_string())
            } else {
                Err(unsupported(r.pos(), word))
            }
        })
        .collect()
}

/// Splits `(define (<kind> name) sections...)`.
fn parse_define<'a>(root: &'a Sexp, kind: &str) -> Result<(String, &'a [Sexp]), PddlError> {
    let items = root.expect_list("`(define ...)`")?;
    if items.first().and_then(Sexp::atom) != Some("define") {
        return Err(syntax(root.pos(), "expected `(define ...)`"));
    }
    let header = items
        .get(1)
        .ok_or_else(|| syntax(root.pos(), format!("missing `({kind} ...)`")))?;
    let h = header.expect_list("a header")?;
    if h.len() != 2 || h[0].atom() != Some(kind) {
        return Err(syntax(header.pos(), format!("expected `({kind} <name>)`")));
    }
    Ok((h[1].expect_atom("a name")?.to_string(), &items[2..]))
}

fn parse_action(items: &[Sexp], pos: Pos) -> Result<ActionSchema, PddlError> {
    let name = items
        .get(1)
        .ok_or_else(|| syntax(pos, "action without a name"))?
        .expect_atom("an action name")?
        .to_string();
    let mut schema = ActionSchema {
        name,
        params: Vec::new(),
        pre: Vec::new(),
        add: Vec::new(),
        del: Vec::new(),
    };
    let mut rest = items[2..].iter();
    while let Some(key) = rest.next() {
        let k = key.expect_atom("an action keyword")?;
        let value = rest
            .next()
            .ok_or_else(|| syntax(key.pos(), format!("`{k}` without a value")))?;
        match k {
            ":parameters" => {
                schema.params = strip_pos(parse_typed_list(value.expect_list("parameters")?, true)?)
            }
            ":precondition" => {
                if value.expect_list("a precondition")?.is_empty() {
                    continue;
                }
                parse_precondition(value, &mut schema.pre)?
            }
            ":effect" => {
                if value.expect_list("an effect")?.is_empty() {
                    continue;
                }
                parse_effect(value, &mut schema.add, &mut schema.del)?
            }
            _ => return Err(syntax(key.pos(), format!("unknown action keyword `{k}`"))),
        }
    }
    Ok(schema)
}

pub fn parse_domain(text: &str) -> Result<DomainAst, PddlError> {
    let root = read_sexp(text)?;
    let (name, sections) = parse_define(&root, "domain")?;
    let mut dom = DomainAst {
        name,
        requirements: Vec::new(),
        types: Vec::new(),
        constants: Vec::new(),
        predicates: Vec::new(),
        actions: Vec::new(),
    };
    let mut type_pos = Vec::new();
    for sec in sections {
        let items = sec.expect_list("a section")?;
        let key = sec
            .head()
            .ok_or_else(|| syntax(sec.pos(), "section without a keyword"))?;
        match key {
            ":requirements" => dom.requirements.extend(parse_requirements(&items[1..])?),
            ":types" => {
                for (t, p) in parse_typed_list(&items[1..], false)? {
                    type_pos.push(p);
                    dom.types.push(t);
                }
            }
            ":constants" => dom.constants.extend(strip_pos(parse_typed_list(&items[1..], false)?)),
            ":predicates" => {
                for p in &items[1..] {
                    let parts = p.expect_list("a predicate declaration")?;
                    let name = parts
                        .first()
                        .ok_or_else(|| syntax(p.pos(), "empty predicate declaration"))?
                        .expect_atom("a predicate name")?;
                    dom.predicates.push(PredicateDecl {
                        name: name.to_string(),
                        params: strip_pos(parse_typed_list(&parts[1..], true)?),
                    });
                }
            }
            ":action" => dom.actions.push(parse_action(items, sec.pos())?),
            ":functions" => return Err(unsupported(sec.pos(), "numeric-fluents")),
            ":durative-action" => return Err(unsupported(sec.pos(), "durative-actions")),
            ":derived" => return Err(unsupported(sec.pos(), "derived-predicates")),
            ":constraints" => return Err(unsupported(sec.pos(), "constraints")),
            _ => return Err(syntax(sec.pos(), format!("unknown domain section `{key}`"))),
        }
    }
    check_domain(&dom, &type_pos)?;
    Ok(dom)
}

pub fn parse_problem(text: &str) -> Result<ProblemAst, PddlError> {
    let root = read_sexp(text)?;
    let (name, sections) = parse_define(&root, "problem")?;
    let mut domain = None;
    let mut requirements = Vec::new();
    let mut objects = Vec::new();
    let mut object_pos = Vec::new();
    let mut init = Vec::new();
    let mut goal = None;
    for sec in sections {
        let items = sec.expect_list("a section")?;
        let key = sec
            .head()
            .ok_or_else(|| syntax(sec.pos(), "section without a keyword"))?;
        match key {
            ":domain" => {
                if items.len() != 2 {
                    return Err(syntax(sec.pos(), "expected `(:domain <name>)`"));
                }
                domain = Some(items[1].expect_atom("a domain name")?.to_string());
            }
            ":requirements" => requirements.extend(parse_requirements(&items[1..])?),
            ":objects" => {
                for (t, p) in parse_typed_list(&items[1..], false)? {
                    objects.push(t);
                    object_pos.push(p);
                }
            }
            ":init" => {
                for fact in &items[1..] {
                    match fact.head() {
                        Some("=") => return Err(unsupported(fact.pos(), "numeric-fluents")),
                        Some("not") => {
                            return Err(syntax(fact.pos(), "initial state lists true facts only"))
                        }
                        _ => {}
                    }
                    let atom = parse_atom(fact)?;
                    if let Some(a) = atom.args.iter().find(|a| matches!(a, Term::Var(_))) {
                        return Err(syntax(fact.pos(), format!("variable {a} in initial state")));
                    }
                    init.push(atom);
                }
            }
            ":goal" => {
                if items.len() != 2 {
                    return Err(syntax(sec.pos(), "expected `(:goal <formula>)`"));
                }
                goal = Some(parse_condition(&items[1])?);
            }
            ":metric" => return Err(unsupported(sec.pos(), "metric")),
            ":constraints" => return Err(unsupported(sec.pos(), "constraints")),
            _ => return Err(syntax(sec.pos(), format!("unknown problem section `{key}`"))),
        }
    }
    Ok(ProblemAst {
        name,
        domain: domain.ok_or_else(|| syntax(root.pos(), "missing `(:domain ...)`"))?,
        requirements,
        objects,
        object_pos,
        init,
        goal: goal.ok_or_else(|| syntax(root.pos(), "missing `(:goal ...)`"))?,
    })
}

// ---------------------------------------------------------------------------
// Checking

struct TypeTable {
    parent: HashMap<String, String>,
}

impl TypeTable {
    fn new(dom: &DomainAst) -> Self {
        TypeTable {
            parent: dom
                .types
                .iter()
                .map(|t| (t.name.clone(), t.ty.clone()))
                .collect(),
        }
    }

    fn declared(&self, ty: &str) -> bool {
        ty == "object" || self.parent.contains_key(ty)
    }

    fn is_subtype(&self, ty: &str, ancestor: &str) -> bool {
        let mut cur = ty;
        for _ in 0..=self.parent.len() {
            if cur == ancestor {
                return true;
            }
            match self.parent.get(cur) {
                Some(p) => cur = p,
                None => return ancestor == "object",
            }
        }
        false
    }
}

struct Scope<'a> {
    preds: HashMap<&'a str, &'a PredicateDecl>,
    consts: HashMap<&'a str, &'a str>,
}

impl<'a> Scope<'a> {
    fn new(dom: &'a DomainAst) -> Self {
        Scope {
            preds: dom.predicates.iter().map(|p| (p.name.as_str(), p)).collect(),
            consts: dom
                .constants
                .iter()
                .map(|c| (c.name.as_str(), c.ty.as_str()))
                .collect(),
        }
    }

    fn check_term(
        &self,
        t: &Term,
        vars: &HashMap<String, String>,
        objects: &HashMap<&str, &str>,
        pos: Pos,
    ) -> Result<(), PddlError> {
        match t {
            Term::Var(v) if !vars.contains_key(v) => Err(syntax(pos, format!("unbound variable ?{v}"))),
            Term::Const(c) if !self.consts.contains_key(c.as_str()) && !objects.contains_key(c.as_str()) => {
                Err(syntax(pos, format!("unknown object `{c}`")))
            }
            _ => Ok(()),
        }
    }

    fn check_atom(
        &self,
        a: &Atom,
        vars: &HashMap<String, String>,
        objects: &HashMap<&str, &str>,
    ) -> Result<(), PddlError> {
        let decl = self
            .preds
            .get(a.pred.as_str())
            .ok_or_else(|| syntax(a.pos, format!("unknown predicate `{}`", a.pred)))?;
        if decl.params.len() != a.args.len() {
            return Err(syntax(
                a.pos,
                format!(
                    "`{}` expects {} argument(s), found {}",
                    a.pred,
                    decl.params.len(),
                    a.args.len()
                ),
            ));
        }
        for t in &a.args {
            self.check_term(t, vars, objects, a.pos)?;
        }
        Ok(())
    }

    fn check_condition(
        &self,
        c: &Condition,
        vars: &mut HashMap<String, String>,
        objects: &HashMap<&str, &str>,
        types: &TypeTable,
    ) -> Result<(), PddlError> {
        match c {
            Condition::Atom(a) => self.check_atom(a, vars, objects),
            Condition::Eq(a, b) => {
                self.check_term(a, vars, objects, Pos::default())?;
                self.check_term(b, vars, objects, Pos::default())
            }
            Condition::Not(inner) => self.check_condition(inner, vars, objects, types),
            Condition::And(cs) | Condition::Or(cs) => cs
                .iter()
                .try_for_each(|c| self.check_condition(c, vars, objects, types)),
            Condition::Exists(vs, body) => {
                let saved = vars.clone();
                for v in vs {
                    if !types.declared(&v.ty) {
                        return Err(syntax(Pos::default(), format!("unknown type `{}`", v.ty)));
                    }
                    vars.insert(v.name.clone(), v.ty.clone());
                }
                let r = self.check_condition(body, vars, objects, types);
                *vars = saved;
                r
            }
        }
    }
}

fn check_domain(dom: &DomainAst, type_pos: &[Pos]) -> Result<(), PddlError> {
    let types = TypeTable::new(dom);
    for (t, pos) in dom.types.iter().zip(type_pos) {
        if !types.declared(&t.ty) {
            return Err(syntax(*pos, format!("unknown parent type `{}`", t.ty)));
        }
        if t.name == "object" || types.is_subtype(&t.ty, &t.name) {
            return Err(syntax(*pos, format!("cyclic type `{}`", t.name)));
        }
    }
    let no_objects = HashMap::new();
    let mut seen = HashSet::new();
    for p in &dom.predicates {
        if !seen.insert(&p.name) {
            return Err(syntax(Pos::default(), format!("duplicate predicate `{}`", p.name)));
        }
        if let Some(t) = p.params.iter().find(|t| !types.declared(&t.ty)) {
            return Err(syntax(Pos::default(), format!("unknown type `{}`", t.ty)));
        }
    }
    for c in &dom.constants {
        if !types.declared(&c.ty) {
            return Err(PddlError::UndeclaredObjectType {
                pos: Pos::default(),
                object: c.name.clone(),
                ty: c.ty.clone(),
            });
        }
    }
    let scope = Scope::new(dom);
    let mut names = HashSet::new();
    for a in &dom.actions {
        if !names.insert(&a.name) {
            return Err(syntax(Pos::default(), format!("duplicate action `{}`", a.name)));
        }
        let mut vars = HashMap::new();
        for p in &a.params {
            if !types.declared(&p.ty) {
                return Err(syntax(Pos::default(), format!("unknown type `{}` in `{}`", p.ty, a.name)));
            }
            if vars.insert(p.name.clone(), p.ty.clone()).is_some() {
                return Err(syntax(Pos::default(), format!("duplicate parameter ?{} in `{}`", p.name, a.name)));
            }
        }
        for l in &a.pre {
            match l {
                PreLiteral::Atom(at, _) => scope.check_atom(at, &vars, &no_objects)?,
                PreLiteral::Eq(x, y, _) => {
                    scope.check_term(x, &vars, &no_objects, Pos::default())?;
                    scope.check_term(y, &vars, &no_objects, Pos::default())?;
                }
            }
        }
        for at in a.add.iter().chain(&a.del) {
            scope.check_atom(at, &vars, &no_objects)?;
        }
    }
    Ok(())
}

fn check_problem(dom: &DomainAst, prob: &ProblemAst) -> Result<(), PddlError> {
    if dom.name != prob.domain {
        return Err(PddlError::DomainMismatch {
            domain: dom.name.clone(),
            problem: prob.domain.clone(),
        });
    }
    let types = TypeTable::new(dom);
    let mut objects: HashMap<&str, &str> = HashMap::new();
    for (i, o) in prob.objects.iter().enumerate() {
        let pos = prob.object_pos.get(i).copied().unwrap_or_default();
        if !types.declared(&o.ty) {
            return Err(PddlError::UndeclaredObjectType {
                pos,
                object: o.name.clone(),
                ty: o.ty.clone(),
            });
        }
        let clash = dom.constants.iter().any(|c| c.name == o.name);
        if clash || objects.insert(&o.name, &o.ty).is_some() {
            return Err(syntax(pos, format!("duplicate object `{}`", o.name)));
        }
    }
    let scope = Scope::new(dom);
    let no_vars = HashMap::new();
    for a in &prob.init {
        scope.check_atom(a, &no_vars, &objects)?;
    }
    scope.check_condition(&prob.goal, &mut HashMap::new(), &objects, &types)
}

// ---------------------------------------------------------------------------
// Pretty-printing

fn typed_list(items: &[TypedName], var: bool) -> String {
    let prefix = if var { "?" } else { "" };
    items
        .iter()
        .map(|t| format!("{prefix}{} - {}", t.name, t.ty))
        .collect::<Vec<_>>()
        .join(" ")
}

fn write_condition(out: &mut String, c: &Condition) {
    match c {
        Condition::Atom(a) => {
            let _ = write!(out, "{a}");
        }
        Condition::Eq(a, b) => {
            let _ = write!(out, "(= {a} {b})");
        }
        Condition::Not(inner) => {
            out.push_str("(not ");
            write_condition(out, inner);
            out.push(')');
        }
        Condition::And(cs) | Condition::Or(cs) => {
            out.push_str(if matches!(c, Condition::And(_)) { "(and" } else { "(or" });
            for c in cs {
                out.push(' ');
                write_condition(out, c);
            }
            out.push(')');
        }
        Condition::Exists(vs, body) => {
            let _ = write!(out, "(exists ({}) ", typed_list(vs, true));
            write_condition(out, body);
            out.push(')');
        }
    }
}

impl DomainAst {
    pub fn to_pddl(&self) -> String {
        let mut s = format!("(define (domain {})\n", self.name);
        if !self.requirements.is_empty() {
            let _ = writeln!(s, "  (:requirements {})", self.requirements.join(" "));
        }
        if !self.types.is_empty() {
            let _ = writeln!(s, "  (:types {})", typed_list(&self.types, false));
        }
        if !self.constants.is_empty() {
            let _ = writeln!(s, "  (:constants {})", typed_list(&self.constants, false));
        }
        s.push_str("  (:predicates");
        for p in &self.predicates {
            let params = typed_list(&p.params, true);
            let sep = if params.is_empty() { "" } else { " " };
            let _ = write!(s, "\n    ({}{sep}{params})", p.name);
        }
        s.push_str(")\n");
        for a in &self.actions {
            let _ = writeln!(s, "  (:action {}", a.name);
            let _ = writeln!(s, "    :parameters ({})", typed_list(&a.params, true));
            let pre: Vec<String> = a
                .pre
                .iter()
                .map(|l| match l {
                    PreLiteral::Atom(at, true) => at.to_string(),
                    PreLiteral::Atom(at, false) => format!("(not {at})"),
                    PreLiteral::Eq(x, y, true) => format!("(= {x} {y})"),
                    PreLiteral::Eq(x, y, false) => format!("(not (= {x} {y}))"),
                })
                .collect();
            let _ = writeln!(s, "    :precondition (and {})", pre.join(" "));
            let eff: Vec<String> = a
                .add
                .iter()
                .map(ToString::to_string)
                .chain(a.del.iter().map(|d| format!("(not {d})")))
                .collect();
            let _ = writeln!(s, "    :effect (and {}))", eff.join(" "));
        }
        s.push_str(")\n");
        s
    }
}

impl ProblemAst {
    pub fn to_pddl(&self) -> String {
        let mut s = format!("(define (problem {})\n  (:domain {})\n", self.name, self.domain);
        if !self.requirements.is_empty() {
            let _ = writeln!(s, "  (:requirements {})", self.requirements.join(" "));
        }
        let _ = writeln!(s, "  (:objects {})", typed_list(&self.objects, false));
        s.push_str("  (:init");
        for a in &self.init {
            let _ = write!(s, "\n    {a}");
        }
        s.push_str(")\n  (:goal ");
        write_condition(&mut s, &self.goal);
        s.push_str("))\n");
        s
    }
}

// ---------------------------------------------------------------------------
// Grounding

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroundOptions {
    pub max_actions: usize,
}

impl Default for GroundOptions {
    fn default() -> Self {
        GroundOptions {
            max_actions: DEFAULT_MAX_GROUND_ACTIONS,
        }
    }
}

pub fn ground(domain: &DomainAst, problem: &ProblemAst) -> Result<GroundProblem, PddlError> {
    ground_with(domain, problem, &GroundOptions::default())
}

type GroundAtom = (String, Vec<String>);

struct Grounder<'a> {
    types: TypeTable,
    /// Objects in declaration order (constants first) with their types.
    objects: Vec<(&'a str, &'a str)>,
    statics: HashSet<&'a str>,
    init: HashSet<GroundAtom>,
}

impl<'a> Grounder<'a> {
    fn objects_of(&self, ty: &str) -> Vec<&'a str> {
        self.objects
            .iter()
            .filter(|(_, t)| self.types.is_subtype(t, ty))
            .map(|(o, _)| *o)
            .collect()
    }

    fn resolve(t: &Term, binding: &HashMap<&str, &'a str>) -> String {
        match t {
            Term::Var(v) => binding[v.as_str()].to_string(),
            Term::Const(c) => c.clone(),
        }
    }

    fn ground_atom(a: &Atom, binding: &HashMap<&str, &'a str>) -> GroundAtom {
        (
            a.pred.clone(),
            a.args.iter().map(|t| Self::resolve(t, binding)).collect(),
        )
    }

    /// Truth value of a literal that does not depend on the state.
    fn static_value(&self, l: &PreLiteral, binding: &HashMap<&str, &'a str>) -> Option<bool> {
        match l {
            PreLiteral::Eq(x, y, pos) => {
                Some((Self::resolve(x, binding) == Self::resolve(y, binding)) == *pos)
            }
            PreLiteral::Atom(a, pos) if self.statics.contains(a.pred.as_str()) => {
                Some(self.init.contains(&Self::ground_atom(a, binding)) == *pos)
            }
            PreLiteral::Atom(..) => None,
        }
    }

    /// Goal DNF over non-static atoms; `[]` is false, `[[]]` is true.
    fn dnf(
        &self,
        c: &Condition,
        positive: bool,
        binding: &mut HashMap<String, String>,
    ) -> Result<Vec<Vec<(GroundAtom, bool)>>, PddlError> {
        let resolve = |t: &Term, b: &HashMap<String, String>| match t {
            Term::Var(v) => b[v].clone(),
            Term::Const(c) => c.clone(),
        };
        let truth = |v: bool| if v { vec![Vec::new()] } else { Vec::new() };
        Ok(match c {
            Condition::Atom(a) => {
                let g: GroundAtom = (a.pred.clone(), a.args.iter().map(|t| resolve(t, binding)).collect());
                if self.statics.contains(a.pred.as_str()) {
                    truth(self.init.contains(&g) == positive)
                } else {
                    vec![vec![(g, positive)]]
                }
            }
            Condition::Eq(x, y) => truth((resolve(x, binding) == resolve(y, binding)) == positive),
            Condition::Not(inner) => self.dnf(inner, !positive, binding)?,
            Condition::And(cs) | Condition::Or(cs) => {
                let conjunctive = matches!(c, Condition::And(_)) == positive;
                let parts = cs
                    .iter()
                    .map(|c| self.dnf(c, positive, binding))
                    .collect::<Result<Vec<_>, _>>()?;
                if conjunctive {
                    product(parts)?
                } else {
                    union(parts)?
                }
            }
            Condition::Exists(vs, body) => {
                let domains: Vec<Vec<&str>> = vs.iter().map(|v| self.objects_of(&v.ty)).collect();
                let saved = binding.clone();
                let mut parts = Vec::new();
                for combo in cartesian(&domains) {
                    for (v, o) in vs.iter().zip(&combo) {
                        binding.insert(v.name.clone(), o.to_string());
                    }
                    parts.push(self.dnf(body, positive, binding)?);
                }
                *binding = saved;
                if positive {
                    union(parts)?
                } else {
                    product(parts)?
                }
            }
        })
    }
}

fn cartesian<'a>(domains: &[Vec<&'a str>]) -> Vec<Vec<&'a str>> {
    let mut out: Vec<Vec<&str>> = vec![Vec::new()];
    for d in domains {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                d.iter().map(move |o| {
                    let mut p = prefix.clone();
                    p.push(*o);
                    p
                })
            })
            .collect();
    }
    out
}

type Dnf = Vec<Vec<(GroundAtom, bool)>>;

fn normalise(mut d: Dnf) -> Result<Dnf, PddlError> {
    for conj in &mut d {
        conj.sort();
        conj.dedup();
    }
    d.retain(|conj| !conj.windows(2).any(|w| w[0].0 == w[1].0));
    d.sort();
    d.dedup();
    if d.len() > MAX_GOAL_DISJUNCTS {
        return Err(PddlError::GroundingExplosion {
            what: "goal disjuncts",
            cap: MAX_GOAL_DISJUNCTS,
        });
    }
    Ok(d)
}

fn union(parts: Vec<Dnf>) -> Result<Dnf, PddlError> {
    normalise(parts.into_iter().flatten().collect())
}

fn product(parts: Vec<Dnf>) -> Result<Dnf, PddlError> {
    let mut acc: Dnf = vec![Vec::new()];
    for part in parts {
        let mut next = Vec::new();
        for a in &acc {
            for b in &part {
                next.push(a.iter().chain(b).cloned().collect());
            }
        }
        acc = normalise(next)?;
    }
    Ok(acc)
}

pub fn ground_with(
    domain: &DomainAst,
    problem: &ProblemAst,
    opts: &GroundOptions,
) -> Result<GroundProblem, PddlError> {
    check_problem(domain, problem)?;
    let dynamic: HashSet<&str> = domain
        .actions
        .iter()
        .flat_map(|a| a.add.iter().chain(&a.del))
        .map(|a| a.pred.as_str())
        .collect();
    let g = Grounder {
        types: TypeTable::new(domain),
        objects: domain
            .constants
            .iter()
            .chain(&problem.objects)
            .map(|o| (o.name.as_str(), o.ty.as_str()))
            .collect(),
        statics: domain
            .predicates
            .iter()
            .map(|p| p.name.as_str())
            .filter(|p| !dynamic.contains(p))
            .collect(),
        init: problem
            .init
            .iter()
            .map(|a| Grounder::ground_atom(a, &HashMap::new()))
            .collect(),
    };

    let mut raw: Vec<RawAction> = Vec::new();
    for schema in &domain.actions {
        let mut e = SchemaEnum::new(&g, schema);
        e.run(0, &mut raw, opts.max_actions)?;
    }

    let goal_dnf = g.dnf(&problem.goal, true, &mut HashMap::new())?;
    if goal_dnf.is_empty() {
        return Err(PddlError::UnsatisfiableGoal);
    }

    // Fluent universe, sorted for determinism.
    let mut universe: BTreeSet<Fluent> = BTreeSet::new();
    let to_fluent = |a: &GroundAtom| Fluent::new(&a.0, &a.1);
    for a in &raw {
        universe.extend(a.pre.iter().map(|(f, _)| to_fluent(f)));
        universe.extend(a.add.iter().chain(&a.del).map(to_fluent));
    }
    let dynamic_init: Vec<&GroundAtom> = g
        .init
        .iter()
        .filter(|a| !g.statics.contains(a.0.as_str()))
        .collect();
    universe.extend(dynamic_init.iter().map(|a| to_fluent(a)));
    universe.extend(goal_dnf.iter().flatten().map(|(a, _)| to_fluent(a)));
    let fluents: Vec<Fluent> = universe.into_iter().collect();
    let id: BTreeMap<&Fluent, usize> = fluents.iter().enumerate().map(|(i, f)| (f, i)).collect();
    let fid = |a: &GroundAtom| id[&to_fluent(a)];

    let mut actions = Vec::with_capacity(raw.len());
    for a in &raw {
        let pos = a.pre.iter().filter(|(_, b)| *b).map(|(f, _)| fid(f)).collect();
        let neg = a.pre.iter().filter(|(_, b)| !*b).map(|(f, _)| fid(f)).collect();
        actions.push(GroundAction::new(
            a.name.to_string(),
            pos,
            neg,
            a.add.iter().map(fid).collect(),
            a.del.iter().map(fid).collect(),
            1.0,
        )?);
    }
    let init = State::new(dynamic_init.iter().map(|a| fid(a)));
    let disjuncts = goal_dnf
        .iter()
        .map(|conj| {
            conj.iter()
                .map(|(a, b)| Literal {
                    fluent: fid(a),
                    positive: *b,
                })
                .collect()
        })
        .collect();
    Ok(GroundProblem::new(
        fluents,
        actions,
        init,
        GoalFormula::new(disjuncts)?,
        None,
    )?)
}

struct RawAction {
    name: Fluent,
    pre: Vec<(GroundAtom, bool)>,
    add: Vec<GroundAtom>,
    del: Vec<GroundAtom>,
}

/// Enumerates the type-respecting parameter bindings of one schema,
/// checking each static literal as soon as its last variable is bound.
struct SchemaEnum<'g, 'a> {
    g: &'g Grounder<'a>,
    schema: &'a ActionSchema,
    domains: Vec<Vec<&'a str>>,
    checks: Vec<Vec<&'a PreLiteral>>,
    binding: HashMap<&'a str, &'a str>,
}

impl<'g, 'a> SchemaEnum<'g, 'a> {
    fn new(g: &'g Grounder<'a>, schema: &'a ActionSchema) -> Self {
        let idx: HashMap<&str, usize> = schema
            .params
            .iter()
            .enumerate()
            .map(|(i, p)| (p.name.as_str(), i))
            .collect();
        let mut checks = vec![Vec::new(); schema.params.len() + 1];
        for l in &schema.pre {
            let terms: Vec<&Term> = match l {
                PreLiteral::Atom(a, _) if g.statics.contains(a.pred.as_str()) => a.args.iter().collect(),
                PreLiteral::Atom(..) => continue,
                PreLiteral::Eq(x, y, _) => vec![x, y],
            };
            let ready = terms
                .iter()
                .filter_map(|t| match t {
                    Term::Var(v) => Some(idx[v.as_str()] + 1),
                    Term::Const(_) => None,
                })
                .max()
                .unwrap_or(0);
            checks[ready].push(l);
        }
        SchemaEnum {
            g,
            schema,
            domains: schema.params.iter().map(|p| g.objects_of(&p.ty)).collect(),
            checks,
            binding: HashMap::new(),
        }
    }

    fn run(&mut self, depth: usize, out: &mut Vec<RawAction>, cap: usize) -> Result<(), PddlError> {
        if !self.checks[depth]
            .iter()
            .all(|l| self.g.static_value(l, &self.binding) == Some(true))
        {
            return Ok(());
        }
        let params = &self.schema.params;
        if depth == params.len() {
            let b = &self.binding;
            let args: Vec<&str> = params.iter().map(|p| b[p.name.as_str()]).collect();
            let add: Vec<GroundAtom> = self.schema.add.iter().map(|a| Grounder::ground_atom(a, b)).collect();
            let del = self
                .schema
                .del
                .iter()
                .map(|a| Grounder::ground_atom(a, b))
                .filter(|d| !add.contains(d))
                .collect();
            let pre = self
                .schema
                .pre
                .iter()
                .filter_map(|l| match l {
                    PreLiteral::Atom(a, pos) if !self.g.statics.contains(a.pred.as_str()) => {
                        Some((Grounder::ground_atom(a, b), *pos))
                    }
                    _ => None,
                })
                .collect();
            out.push(RawAction {
                name: Fluent::new(&self.schema.name, &args),
                pre,
                add,
                del,
            });
            if out.len() > cap {
                return Err(PddlError::GroundingExplosion {
                    what: "ground actions",
                    cap,
                });
            }
            return Ok(());
        }
        let name = params[depth].name.as_str();
        for i in 0..self.domains[depth].len() {
            let o = self.domains[depth][i];
            self.binding.insert(name, o);
            self.run(depth + 1, out, cap)?;
        }
        self.binding.remove(name);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strips::{enumerate_plans, validate_plan};

    const ALADDIN_DOMAIN: &str = include_str!("../data/aladdin-domain.pddl");
    const ALADDIN_PROBLEM: &str = include_str!("../data/aladdin-problem.pddl");
    const TINY_DOMAIN: &str = include_str!("../data/tiny-story-domain.pddl");
    const TINY_PROBLEM: &str = include_str!("../data/tiny-story-problem.pddl");

    fn aladdin() -> (DomainAst, ProblemAst) {
        (parse_domain(ALADDIN_DOMAIN).unwrap(), parse_problem(ALADDIN_PROBLEM).unwrap())
    }

    #[test]
    fn parses_bundled_domain() {
        let (d, p) = aladdin();
        let names: Vec<&str> = d.actions.iter().map(|a| a.name.as_str()).collect();
        assert_eq!(
            names,
            ["move", "give-lamp", "rub-lamp", "cast-love-spell", "fall-in-love", "marry"]
        );
        assert_eq!(p.objects.iter().filter(|o| o.ty == "character").count(), 5);
    }

    #[test]
    fn empty_input_is_a_syntax_error() {
        assert!(matches!(parse_domain(""), Err(PddlError::Syntax { .. })));
        assert!(matches!(parse_domain("  ; only a comment\n"), Err(PddlError::Syntax { .. })));
        assert!(matches!(parse_domain("(define (domain d)"), Err(PddlError::Syntax { .. })));
    }

    #[test]
    fn subset_boundary() {
        let e = parse_domain("(define (domain d) (:requirements :strips :conditional-effects))").unwrap_err();
        assert!(matches!(e, PddlError::UnsupportedFeature { ref feature, .. } if feature == ":conditional-effects"));
        let e = parse_domain(
            "(define (domain d) (:predicates (p) (q))
               (:action a :parameters () :precondition (p) :effect (when (p) (q))))",
        )
        .unwrap_err();
        assert!(matches!(e, PddlError::UnsupportedFeature { ref feature, .. } if feature == "conditional-effects"));
        let e = parse_domain("(define (domain d) (:functions (f)))").unwrap_err();
        assert!(matches!(e, PddlError::UnsupportedFeature { .. }));
    }

    #[test]
    fn unknown_predicate_reported_at_reference() {
        let d = parse_domain(TINY_DOMAIN).unwrap();
        let text = "(define (problem x) (:domain tiny-story)\n  (:objects ann - character)\n  (:init (hates ann ann))\n  (:goal (single ann)))";
        let p = parse_problem(text).unwrap();
        match ground(&d, &p).unwrap_err() {
            PddlError::Syntax { pos, msg } => {
                assert_eq!(pos, Pos { line: 3, col: 10 });
                assert!(msg.contains("hates"));
            }
            e => panic!("{e}"),
        }
        let bad_type = "(define (problem x) (:domain tiny-story) (:objects ann - wizard) (:init) (:goal (single ann)))";
        assert!(matches!(
            ground(&d, &parse_problem(bad_type).unwrap()),
            Err(PddlError::UndeclaredObjectType { .. })
        ));
    }

    #[test]
    fn nested_exists_structure() {
        let p = parse_problem(ALADDIN_PROBLEM).unwrap();
        let v = |n: &str| TypedName {
            name: n.into(),
            ty: "character".into(),
        };
        let expected = Condition::Exists(
            vec![v("c1"), v("c2")],
            Box::new(Condition::And(vec![
                Condition::Atom(Atom {
                    pred: "married-to".into(),
                    args: vec![Term::Var("c2".into()), Term::Var("c1".into())],
                    pos: Pos::default(),
                }),
                Condition::Not(Box::new(Condition::Eq(
                    Term::Var("c1".into()),
                    Term::Var("c2".into()),
                ))),
            ])),
        );
        assert_eq!(p.goal, expected);
    }

    #[test]
    fn pretty_print_roundtrip() {
        for (d, p) in [(ALADDIN_DOMAIN, ALADDIN_PROBLEM), (TINY_DOMAIN, TINY_PROBLEM)] {
            let d = parse_domain(d).unwrap();
            let p = parse_problem(p).unwrap();
            assert_eq!(parse_domain(&d.to_pddl()).unwrap(), d);
            assert_eq!(parse_problem(&p.to_pddl()).unwrap(), p);
        }
    }

    #[test]
    fn goal_grounds_to_ordered_pairs() {
        let (d, p) = aladdin();
        let g = ground(&d, &p).unwrap();
        assert_eq!(g.goal().disjuncts().len(), 20);
        let names: BTreeSet<String> = g
            .goal()
            .fluents()
            .into_iter()
            .map(|f| g.fluent(f).to_string())
            .collect();
        assert_eq!(names.len(), 20);
        assert!(names.iter().all(|n| n.starts_with("married-to(")));
        assert!(names.contains("married-to(aladdin,jasmine)"));
        assert!(names.contains("married-to(dragon,jafar)"));
    }

    #[test]
    fn identical_pairs_without_inequality() {
        let d = parse_domain(TINY_DOMAIN).unwrap();
        let text = "(define (problem x) (:domain tiny-story) (:objects ann bob - character) (:init)
            (:goal (exists (?x - character ?y - character) (married-to ?x ?y))))";
        let g = ground(&d, &parse_problem(text).unwrap()).unwrap();
        assert_eq!(g.goal().disjuncts().len(), 4);
    }

    #[test]
    fn zero_parameter_schema() {
        let d = parse_domain(
            "(define (domain z) (:predicates (p)) (:action go :parameters () :precondition (and) :effect (p)))",
        )
        .unwrap();
        let p = parse_problem("(define (problem z1) (:domain z) (:objects) (:init) (:goal (p)))").unwrap();
        let g = ground(&d, &p).unwrap();
        assert_eq!(g.actions().len(), 1);
        assert_eq!(g.actions()[0].name, "go");
    }

    #[test]
    fn static_pruning_and_universe() {
        let d = parse_domain(TINY_DOMAIN).unwrap();
        let p = parse_problem(TINY_PROBLEM).unwrap();
        let g = ground(&d, &p).unwrap();
        let names: Vec<&str> = g.actions().iter().map(|a| a.name.as_str()).collect();
        assert_eq!(
            names,
            ["fall-in-love(ann,bob)", "fall-in-love(bob,ann)", "marry(ann,bob)", "marry(bob,ann)"]
        );
        assert!(g.fluents().iter().all(|f| f.name() != "admires"));
        let plans = enumerate_plans(&g, 3);
        assert_eq!(plans.len(), 4);
        for plan in plans {
            validate_plan(&g, &plan).unwrap();
        }
    }

    #[test]
    fn grounding_cap() {
        let (d, p) = aladdin();
        let r = ground_with(&d, &p, &GroundOptions { max_actions: 10 });
        assert!(matches!(r, Err(PddlError::GroundingExplosion { cap: 10, .. })));
    }
}
