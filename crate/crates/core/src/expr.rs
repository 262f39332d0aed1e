//! Symbolic probability expressions: the output language of the
//! identification engine, with exact evaluation against either a full
//! discrete model or an observed data law.
//!
//! Expressions render to a text form close to standard probability notation
//! (`p(R_Y | X, R_X=1)`, `Σ_{W}(..)`, `(..)|_{R_X=1}`) and parse back to an
//! equal tree. A JSON tree form is also provided; both are stable.
//!
//! Evaluation against an observed law refuses to touch cells of partially
//! observed variables unless the term itself pins the matching response
//! indicator to 1 (`NotObservable`); this is the backstop guaranteeing that
//! emitted functionals are genuinely functions of the observed data law.

use crate::model::{rational_string, DiscreteModel, LawTable, ObservedLaw};
use num::rational::BigRational;
use num::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use thiserror::Error;

/// Reference to a variable inside a term, optionally pinned to a value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarRef {
    pub var: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub value: Option<u8>,
}

impl VarRef {
    pub fn free(var: impl Into<String>) -> Self {
        VarRef {
            var: var.into(),
            value: None,
        }
    }

    pub fn fixed(var: impl Into<String>, value: u8) -> Self {
        VarRef {
            var: var.into(),
            value: Some(value),
        }
    }
}

/// A joint or conditional probability over named variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbTerm {
    pub outcomes: Vec<VarRef>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub given: Vec<VarRef>,
}

/// One arm of a case split over indicator values. An empty pattern matches
/// everything (default arm). Arms are tried in order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseArm {
    pub pattern: Vec<(String, u8)>,
    pub body: ProbExpr,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum ProbExpr {
    Term(ProbTerm),
    Product {
        factors: Vec<ProbExpr>,
    },
    Quotient {
        num: Box<ProbExpr>,
        den: Box<ProbExpr>,
    },
    /// Sum of the body over all values of the listed variables.
    MarginalSum {
        over: Vec<String>,
        body: Box<ProbExpr>,
    },
    Constant {
        #[serde(with = "rational_serde")]
        value: BigRational,
    },
    /// Value-assignment pinning: evaluates the body with the assignment
    /// merged over the ambient one.
    Restrict {
        assign: Vec<(String, u8)>,
        body: Box<ProbExpr>,
    },
    /// Case split on (indicator) values of the ambient assignment.
    Cases {
        arms: Vec<CaseArm>,
    },
}

mod rational_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&rational_string(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        crate::model::parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

impl ProbExpr {
    pub fn term(outcomes: Vec<VarRef>, given: Vec<VarRef>) -> Self {
        ProbExpr::Term(ProbTerm { outcomes, given })
    }

    pub fn constant(value: BigRational) -> Self {
        ProbExpr::Constant { value }
    }

    pub fn zero() -> Self {
        Self::constant(BigRational::zero())
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    /// Flattening product constructor; a singleton collapses to its factor.
    pub fn product(factors: Vec<ProbExpr>) -> Self {
        let mut flat = Vec::new();
        for f in factors {
            match f {
                ProbExpr::Product { factors } => flat.extend(factors),
                other => flat.push(other),
            }
        }
        if flat.len() == 1 {
            flat.pop().unwrap()
        } else {
            ProbExpr::Product { factors: flat }
        }
    }

    pub fn quotient(num: ProbExpr, den: ProbExpr) -> Self {
        ProbExpr::Quotient {
            num: Box::new(num),
            den: Box::new(den),
        }
    }

    pub fn sum(over: Vec<String>, body: ProbExpr) -> Self {
        ProbExpr::MarginalSum {
            over,
            body: Box::new(body),
        }
    }

    pub fn restrict(assign: Vec<(String, u8)>, body: ProbExpr) -> Self {
        ProbExpr::Restrict {
            assign,
            body: Box::new(body),
        }
    }

    /// Variables that must be supplied by the ambient assignment.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = BTreeMap::new();
        self.collect_free(&mut BTreeMap::new(), &mut out);
        out.into_keys().collect()
    }

    fn collect_free(&self, bound: &mut BTreeMap<String, usize>, out: &mut BTreeMap<String, ()>) {
        fn mark(name: &str, bound: &BTreeMap<String, usize>, out: &mut BTreeMap<String, ()>) {
            if !bound.contains_key(name) {
                out.insert(name.to_string(), ());
            }
        }
        match self {
            ProbExpr::Term(t) => {
                for r in t.outcomes.iter().chain(t.given.iter()) {
                    if r.value.is_none() {
                        mark(&r.var, bound, out);
                    }
                }
            }
            ProbExpr::Product { factors } => {
                for f in factors {
                    f.collect_free(bound, out);
                }
            }
            ProbExpr::Quotient { num, den } => {
                num.collect_free(bound, out);
                den.collect_free(bound, out);
            }
            ProbExpr::MarginalSum { over, body } => {
                for v in over {
                    *bound.entry(v.clone()).or_insert(0) += 1;
                }
                body.collect_free(bound, out);
                for v in over {
                    let n = bound.get_mut(v).unwrap();
                    *n -= 1;
                    if *n == 0 {
                        bound.remove(v);
                    }
                }
            }
            ProbExpr::Constant { .. } => {}
            ProbExpr::Restrict { assign, body } => {
                for (v, _) in assign {
                    *bound.entry(v.clone()).or_insert(0) += 1;
                }
                body.collect_free(bound, out);
                for (v, _) in assign {
                    let n = bound.get_mut(v).unwrap();
                    *n -= 1;
                    if *n == 0 {
                        bound.remove(v);
                    }
                }
            }
            ProbExpr::Cases { arms } => {
                for arm in &arms[..] {
                    for (v, _) in &arm.pattern {
                        mark(v, bound, out);
                    }
                    arm.body.collect_free(bound, out);
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// evaluation

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("unknown variable `{0}` for this law")]
    UnknownVariable(String),
    #[error("value {1} out of range for `{0}`")]
    BadValue(String, u8),
    #[error("conditioning event has probability zero in `{0}`")]
    ConditioningOnNull(String),
    #[error("term touches partially observed `{0}` without `{1}` pinned to 1: not a function of the observed law")]
    NotObservable(String, String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("no case arm matches the assignment")]
    NoMatchingCase,
}

/// What an expression is evaluated against.
pub enum LawRef<'a> {
    /// The model's full law; partially observed cells are directly available.
    Model(&'a DiscreteModel),
    /// The observed data law; the `NotObservable` rule applies.
    Observed(&'a ObservedLaw),
}

struct LawVar {
    idx: usize,
    card: u8,
    partial: bool,
    indicator: Option<usize>,
}

/// Evaluator with per-law projection caching. Reuse one evaluator for many
/// assignments against the same law; projections of the law onto each
/// distinct variable set are computed once.
pub struct Evaluator<'a> {
    law: LawRef<'a>,
    full: Option<LawTable>,
    projections: HashMap<Vec<usize>, HashMap<Vec<u8>, BigRational>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(law: LawRef<'a>) -> Self {
        let full = match &law {
            LawRef::Model(m) => Some(m.full_law()),
            LawRef::Observed(_) => None,
        };
        Evaluator {
            law,
            full,
            projections: HashMap::new(),
        }
    }

    pub fn for_model(m: &'a DiscreteModel) -> Self {
        Self::new(LawRef::Model(m))
    }

    pub fn for_observed(o: &'a ObservedLaw) -> Self {
        Self::new(LawRef::Observed(o))
    }

    fn lookup(&self, name: &str) -> Result<LawVar, EvalError> {
        match &self.law {
            LawRef::Model(m) => {
                let g = &m.graph;
                let id = g
                    .id(name)
                    .map_err(|_| EvalError::UnknownVariable(name.to_string()))?;
                Ok(LawVar {
                    idx: id,
                    card: m.card(id),
                    partial: g.kind(id) == crate::graph::VertexKind::Partial,
                    indicator: g.indicator_of(id),
                })
            }
            LawRef::Observed(o) => {
                let idx = o
                    .var_index(name)
                    .ok_or_else(|| EvalError::UnknownVariable(name.to_string()))?;
                Ok(LawVar {
                    idx,
                    card: o.card(idx),
                    partial: o.kind(idx) == crate::graph::VertexKind::Partial,
                    indicator: o.indicator_of(idx),
                })
            }
        }
    }

    fn card(&self, name: &str) -> Result<u8, EvalError> {
        Ok(self.lookup(name)?.card)
    }

    fn event_prob(&mut self, event: &mut [(usize, u8)]) -> BigRational {
        event.sort_unstable_by_key(|&(i, _)| i);
        let key: Vec<usize> = event.iter().map(|&(i, _)| i).collect();
        if !self.projections.contains_key(&key) {
            let mut table: HashMap<Vec<u8>, BigRational> = HashMap::new();
            match (&self.law, &self.full) {
                (LawRef::Model(_), Some(full)) => {
                    for (values, p) in full.iter_assignments() {
                        if p.is_zero() {
                            continue;
                        }
                        let proj: Vec<u8> = key.iter().map(|&i| values[i]).collect();
                        *table.entry(proj).or_insert_with(BigRational::zero) += p;
                    }
                }
                (LawRef::Observed(o), _) => {
                    for (values, p) in o.cells() {
                        let proj: Vec<u8> = key.iter().map(|&i| values[i]).collect();
                        *table.entry(proj).or_insert_with(BigRational::zero) += p;
                    }
                }
                _ => unreachable!(),
            }
            self.projections.insert(key.clone(), table);
        }
        let proj: Vec<u8> = event.iter().map(|&(_, v)| v).collect();
        self.projections[&key]
            .get(&proj)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    fn eval_term(
        &mut self,
        term: &ProbTerm,
        assignment: &BTreeMap<String, u8>,
    ) -> Result<BigRational, EvalError> {
        let resolve = |r: &VarRef| -> Result<u8, EvalError> {
            match r.value {
                Some(v) => Ok(v),
                None => assignment
                    .get(&r.var)
                    .copied()
                    .ok_or_else(|| EvalError::UnboundVariable(r.var.clone())),
            }
        };
        // resolved event, by name
        let mut event: BTreeMap<String, u8> = BTreeMap::new();
        for r in term.outcomes.iter().chain(term.given.iter()) {
            event.insert(r.var.clone(), resolve(r)?);
        }
        let observed = matches!(self.law, LawRef::Observed(_));
        let mut joint: Vec<(usize, u8)> = Vec::new();
        let mut given: Vec<(usize, u8)> = Vec::new();
        for (name, &val) in &event {
            let var = self.lookup(name)?;
            if val >= var.card {
                return Err(EvalError::BadValue(name.clone(), val));
            }
            if observed && var.partial {
                // the indicator must be pinned to 1 within this very term
                let ind_name = match &self.law {
                    LawRef::Observed(o) => o.names()[var.indicator.expect("paired")].clone(),
                    _ => unreachable!(),
                };
                if event.get(&ind_name) != Some(&1) {
                    return Err(EvalError::NotObservable(name.clone(), ind_name));
                }
            }
            joint.push((var.idx, val));
        }
        for r in &term.given {
            let var = self.lookup(&r.var)?;
            given.push((var.idx, resolve(r)?));
        }
        let num = self.event_prob(&mut joint);
        if term.given.is_empty() {
            return Ok(num);
        }
        let den = self.event_prob(&mut given);
        if den.is_zero() {
            return Err(EvalError::ConditioningOnNull(render_term(term)));
        }
        Ok(num / den)
    }

    fn eval_inner(
        &mut self,
        expr: &ProbExpr,
        assignment: &BTreeMap<String, u8>,
    ) -> Result<BigRational, EvalError> {
        match expr {
            ProbExpr::Term(t) => self.eval_term(t, assignment),
            ProbExpr::Constant { value } => Ok(value.clone()),
            ProbExpr::Product { factors } => {
                // A factor that is exactly zero absorbs ConditioningOnNull in
                // sibling factors: assembled laws multiply p(R = r) into
                // conditionals that are undefined exactly where that mass is
                // zero, and the product is zero there.
                let mut acc = BigRational::one();
                let mut null_err: Option<EvalError> = None;
                let mut saw_zero = false;
                for f in factors {
                    match self.eval_inner(f, assignment) {
                        Ok(v) => {
                            if v.is_zero() {
                                saw_zero = true;
                            }
                            acc *= v;
                        }
                        Err(e @ EvalError::ConditioningOnNull(_)) => {
                            null_err = Some(e);
                        }
                        Err(e) => return Err(e),
                    }
                }
                if saw_zero {
                    Ok(BigRational::zero())
                } else if let Some(e) = null_err {
                    Err(e)
                } else {
                    Ok(acc)
                }
            }
            ProbExpr::Quotient { num, den } => {
                let d = self.eval_inner(den, assignment)?;
                if d.is_zero() {
                    return Err(EvalError::DivisionByZero);
                }
                let n = self.eval_inner(num, assignment)?;
                Ok(n / d)
            }
            ProbExpr::MarginalSum { over, body } => {
                let mut acc = BigRational::zero();
                let cards: Result<Vec<u8>, EvalError> = over.iter().map(|v| self.card(v)).collect();
                let cards = cards?;
                let mut values = vec![0u8; over.len()];
                loop {
                    let mut inner = assignment.clone();
                    for (v, &val) in over.iter().zip(values.iter()) {
                        inner.insert(v.clone(), val);
                    }
                    acc += self.eval_inner(body, &inner)?;
                    // advance mixed-radix counter
                    let mut pos = over.len();
                    loop {
                        if pos == 0 {
                            return Ok(acc);
                        }
                        pos -= 1;
                        if values[pos] + 1 < cards[pos] {
                            values[pos] += 1;
                            values[pos + 1..].iter_mut().for_each(|v| *v = 0);
                            break;
                        }
                    }
                }
            }
            ProbExpr::Restrict { assign, body } => {
                let mut inner = assignment.clone();
                for (v, val) in assign {
                    inner.insert(v.clone(), *val);
                }
                self.eval_inner(body, &inner)
            }
            ProbExpr::Cases { arms } => {
                for arm in arms {
                    let mut matched = true;
                    for (v, val) in &arm.pattern {
                        match assignment.get(v) {
                            Some(a) if a == val => {}
                            Some(_) => {
                                matched = false;
                                break;
                            }
                            None => return Err(EvalError::UnboundVariable(v.clone())),
                        }
                    }
                    if matched {
                        return self.eval_inner(&arm.body, assignment);
                    }
                }
                Err(EvalError::NoMatchingCase)
            }
        }
    }

    pub fn eval(
        &mut self,
        expr: &ProbExpr,
        assignment: &BTreeMap<String, u8>,
    ) -> Result<BigRational, EvalError> {
        self.eval_inner(expr, assignment)
    }
}

/// One-shot evaluation. For many assignments against one law, construct an
/// [`Evaluator`] instead.
pub fn evaluate(
    expr: &ProbExpr,
    law: LawRef<'_>,
    assignment: &BTreeMap<String, u8>,
) -> Result<BigRational, EvalError> {
    Evaluator::new(law).eval(expr, assignment)
}

// ---------------------------------------------------------------------------
// text rendering

fn render_refs(refs: &[VarRef]) -> String {
    refs.iter()
        .map(|r| match r.value {
            Some(v) => format!("{}={}", r.var, v),
            None => r.var.clone(),
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn render_term(t: &ProbTerm) -> String {
    if t.given.is_empty() {
        format!("p({})", render_refs(&t.outcomes))
    } else {
        format!(
            "p({} | {})",
            render_refs(&t.outcomes),
            render_refs(&t.given)
        )
    }
}

fn render_assigns(assigns: &[(String, u8)]) -> String {
    assigns
        .iter()
        .map(|(v, val)| format!("{v}={val}"))
        .collect::<Vec<_>>()
        .join(", ")
}

impl fmt::Display for ProbExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProbExpr::Term(t) => write!(f, "{}", render_term(t)),
            ProbExpr::Constant { value } => write!(f, "{}", rational_string(value)),
            ProbExpr::Product { factors } => {
                let parts: Vec<String> = factors
                    .iter()
                    .map(|x| match x {
                        ProbExpr::Quotient { .. } => format!("({x})"),
                        _ => x.to_string(),
                    })
                    .collect();
                write!(f, "{}", parts.join(" * "))
            }
            ProbExpr::Quotient { num, den } => write!(f, "({num}) / ({den})"),
            ProbExpr::MarginalSum { over, body } => {
                write!(f, "Σ_{{{}}}({})", over.join(", "), body)
            }
            ProbExpr::Restrict { assign, body } => {
                write!(f, "({})|_{{{}}}", body, render_assigns(assign))
            }
            ProbExpr::Cases { arms } => {
                let parts: Vec<String> = arms
                    .iter()
                    .map(|arm| {
                        let pat = if arm.pattern.is_empty() {
                            "_".to_string()
                        } else {
                            render_assigns(&arm.pattern)
                        };
                        format!("{pat} => {}", arm.body)
                    })
                    .collect();
                write!(f, "{{ {} }}", parts.join("; "))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// text parsing

#[derive(Debug, Error, PartialEq, Eq)]
#[error("parse error at byte {at}: {message}")]
pub struct ExprParseError {
    pub at: usize,
    pub message: String,
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    src: &'a str,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser {
            chars: src.chars().collect(),
            pos: 0,
            src,
        }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ExprParseError> {
        let at = self
            .src
            .char_indices()
            .nth(self.pos)
            .map_or(self.src.len(), |(i, _)| i);
        Err(ExprParseError {
            at,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ExprParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn eat_str(&mut self, s: &str) -> bool {
        self.skip_ws();
        let chars: Vec<char> = s.chars().collect();
        if self.chars[self.pos..].starts_with(&chars) {
            self.pos += chars.len();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String, ExprParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len()
            && (self.chars[self.pos].is_alphanumeric() || self.chars[self.pos] == '_')
        {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected identifier");
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn number(&mut self) -> Result<i64, ExprParseError> {
        self.skip_ws();
        let start = self.pos;
        if self.peek() == Some('-') {
            self.pos += 1;
        }
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected number");
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().map_err(|_| ExprParseError {
            at: start,
            message: "bad number".into(),
        })
    }

    fn assigns(&mut self) -> Result<Vec<(String, u8)>, ExprParseError> {
        let mut out = Vec::new();
        loop {
            let var = self.ident()?;
            self.expect('=')?;
            let val = self.number()?;
            out.push((var, val as u8));
            if !self.eat(',') {
                break;
            }
        }
        Ok(out)
    }

    fn var_refs(&mut self) -> Result<Vec<VarRef>, ExprParseError> {
        let mut out = Vec::new();
        loop {
            let var = self.ident()?;
            let value = if self.eat('=') {
                Some(self.number()? as u8)
            } else {
                None
            };
            out.push(VarRef { var, value });
            if !self.eat(',') {
                break;
            }
        }
        Ok(out)
    }

    // expr := product (('/' product))*   -- left-assoc quotients
    fn expr(&mut self) -> Result<ProbExpr, ExprParseError> {
        let mut acc = self.product()?;
        while self.eat('/') {
            let rhs = self.product()?;
            acc = ProbExpr::quotient(acc, rhs);
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<ProbExpr, ExprParseError> {
        let mut factors = vec![self.postfix()?];
        while self.eat('*') {
            factors.push(self.postfix()?);
        }
        Ok(ProbExpr::product(factors))
    }

    // postfix := atom ('|_{' assigns '}')*
    fn postfix(&mut self) -> Result<ProbExpr, ExprParseError> {
        let mut e = self.atom()?;
        loop {
            self.skip_ws();
            if self.chars[self.pos..].starts_with(&['|', '_', '{']) {
                self.pos += 3;
                let assign = self.assigns()?;
                self.expect('}')?;
                e = ProbExpr::restrict(assign, e);
            } else {
                break;
            }
        }
        Ok(e)
    }

    fn atom(&mut self) -> Result<ProbExpr, ExprParseError> {
        self.skip_ws();
        match self.peek() {
            Some('p') if self.chars.get(self.pos + 1) == Some(&'(') => {
                self.pos += 2;
                let outcomes = self.var_refs()?;
                let given = if self.eat('|') {
                    self.var_refs()?
                } else {
                    Vec::new()
                };
                self.expect(')')?;
                Ok(ProbExpr::Term(ProbTerm { outcomes, given }))
            }
            Some('Σ') => {
                self.pos += 1;
                self.sum_tail()
            }
            Some('s') if self.eat_str("sum") => self.sum_tail(),
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some('{') => {
                self.pos += 1;
                let mut arms = Vec::new();
                loop {
                    let pattern = if self.eat('_') {
                        Vec::new()
                    } else {
                        self.assigns()?
                    };
                    self.skip_ws();
                    if !self.eat_str("=>") {
                        return self.err("expected `=>` in case arm");
                    }
                    let body = self.expr()?;
                    arms.push(CaseArm { pattern, body });
                    if !self.eat(';') {
                        break;
                    }
                }
                self.expect('}')?;
                Ok(ProbExpr::Cases { arms })
            }
            Some(c) if c.is_ascii_digit() || c == '-' => {
                let n = self.number()?;
                if self.eat('/') {
                    let d = self.number()?;
                    Ok(ProbExpr::constant(crate::model::ratio(n, d)))
                } else {
                    Ok(ProbExpr::constant(crate::model::ratio(n, 1)))
                }
            }
            _ => self.err("expected expression"),
        }
    }

    fn sum_tail(&mut self) -> Result<ProbExpr, ExprParseError> {
        self.skip_ws();
        if !self.eat_str("_{") {
            return self.err("expected `_{` after sum");
        }
        let mut over = vec![self.ident()?];
        while self.eat(',') {
            over.push(self.ident()?);
        }
        self.expect('}')?;
        self.expect('(')?;
        let body = self.expr()?;
        self.expect(')')?;
        Ok(ProbExpr::sum(over, body))
    }
}

/// Parses the text form produced by [`ProbExpr`]'s `Display`. A digit-valued
/// atom `a/b` parses as a constant; quotients of expressions need at least one
/// non-numeric operand or explicit parentheses.
pub fn parse_expr(src: &str) -> Result<ProbExpr, ExprParseError> {
    let mut p = Parser::new(src);
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.chars.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::figures;
    use crate::model::{observed_law, random_model, ratio};
    use std::collections::BTreeMap;

    fn no_cards() -> BTreeMap<String, u8> {
        BTreeMap::new()
    }

    #[test]
    fn empty_product_is_one() {
        let e = ProbExpr::Product { factors: vec![] };
        let (g, mono) = figures::fig1();
        let m = random_model(&g, &mono, 0, &no_cards()).unwrap();
        let v = evaluate(&e, LawRef::Model(&m), &BTreeMap::new()).unwrap();
        assert!(v.is_one());
    }

    use num::One;

    #[test]
    fn marginal_sum_linearity() {
        let (g, mono) = figures::fig1();
        let m = random_model(&g, &mono, 4, &no_cards()).unwrap();
        let body = ProbExpr::term(vec![VarRef::free("X"), VarRef::free("Y")], vec![]);
        let summed = ProbExpr::sum(vec!["Y".into()], body.clone());
        let mut ev = Evaluator::for_model(&m);
        for x in 0..2u8 {
            let asg: BTreeMap<String, u8> = [("X".to_string(), x)].into_iter().collect();
            let lhs = ev.eval(&summed, &asg).unwrap();
            let mut rhs = num::BigRational::from_integer(0.into());
            for y in 0..2u8 {
                let mut a = asg.clone();
                a.insert("Y".into(), y);
                rhs += ev.eval(&body, &a).unwrap();
            }
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn restrict_equals_merged_assignment() {
        let (g, mono) = figures::fig2a();
        let m = random_model(&g, &mono, 8, &no_cards()).unwrap();
        let body = ProbExpr::term(
            vec![VarRef::free("Y")],
            vec![VarRef::free("R_X"), VarRef::fixed("R_Y", 1)],
        );
        let restricted = ProbExpr::restrict(vec![("R_X".into(), 1), ("Y".into(), 0)], body.clone());
        let mut ev = Evaluator::for_model(&m);
        let empty = BTreeMap::new();
        let merged: BTreeMap<String, u8> = [("R_X".to_string(), 1u8), ("Y".to_string(), 0u8)]
            .into_iter()
            .collect();
        assert_eq!(
            ev.eval(&restricted, &empty).unwrap(),
            ev.eval(&body, &merged).unwrap()
        );
    }

    #[test]
    fn observed_law_blocks_partial_without_indicator() {
        let (g, mono) = figures::fig1();
        let m = random_model(&g, &mono, 1, &no_cards()).unwrap();
        let o = observed_law(&m);
        let bad = ProbExpr::term(vec![VarRef::fixed("X", 1)], vec![]);
        let err = evaluate(&bad, LawRef::Observed(&o), &BTreeMap::new()).unwrap_err();
        assert!(matches!(err, EvalError::NotObservable(..)));
        let good = ProbExpr::term(vec![VarRef::fixed("X", 1), VarRef::fixed("R_X", 1)], vec![]);
        assert!(evaluate(&good, LawRef::Observed(&o), &BTreeMap::new()).is_ok());
    }

    #[test]
    fn conditioning_on_mono_null_event() {
        let (g, mono) = figures::fig1();
        let m = random_model(&g, &mono, 6, &no_cards()).unwrap();
        let e = ProbExpr::term(
            vec![VarRef::free("Y")],
            vec![VarRef::fixed("R_X", 0), VarRef::fixed("R_Y", 1)],
        );
        let asg: BTreeMap<String, u8> = [("Y".to_string(), 0u8)].into_iter().collect();
        let err = evaluate(&e, LawRef::Model(&m), &asg).unwrap_err();
        assert!(matches!(err, EvalError::ConditioningOnNull(_)));
    }

    #[test]
    fn zero_factor_absorbs_null_conditioning() {
        let (g, mono) = figures::fig1();
        let m = random_model(&g, &mono, 6, &no_cards()).unwrap();
        let zero_term = ProbExpr::term(
            vec![VarRef::fixed("R_X", 0), VarRef::fixed("R_Y", 1)],
            vec![],
        );
        let null_cond = ProbExpr::term(
            vec![VarRef::free("Y")],
            vec![VarRef::fixed("R_X", 0), VarRef::fixed("R_Y", 1)],
        );
        let prod = ProbExpr::product(vec![zero_term, null_cond]);
        let asg: BTreeMap<String, u8> = [("Y".to_string(), 0u8)].into_iter().collect();
        let v = evaluate(&prod, LawRef::Model(&m), &asg).unwrap();
        assert!(v.is_zero());
    }

    use num::Zero;

    #[test]
    fn appendix_value_from_spec() {
        // p(R_X = 0) on the first solved bivariate model equals 1/4
        let models = crate::counterexample::bivariate_pair_default(&[ratio(7, 15)]).unwrap();
        let m = &models[0].model;
        let e = ProbExpr::term(vec![VarRef::fixed("R_X", 0)], vec![]);
        let v = evaluate(&e, LawRef::Model(m), &BTreeMap::new()).unwrap();
        assert_eq!(v, ratio(1, 4));
        // conditioning on the monotonicity-forced event is rejected
        let bad = ProbExpr::term(
            vec![VarRef::free("Y")],
            vec![VarRef::fixed("R_X", 0), VarRef::fixed("R_Y", 1)],
        );
        let asg: BTreeMap<String, u8> = [("Y".to_string(), 1u8)].into_iter().collect();
        assert!(matches!(
            evaluate(&bad, LawRef::Model(m), &asg),
            Err(EvalError::ConditioningOnNull(_))
        ));
    }

    #[test]
    fn render_parse_round_trip_samples() {
        let samples = [
            "p(R_Y | X, Z, R_X=1, R_Z=1)",
            "(p(Z | R_Z=1, R_Y, R_X=1, X) * p(R_Y, R_X=1, X)) / (Σ_{R_Y}(p(Z | R_Z=1, R_Y, R_X=1, X) * p(R_Y, R_X=1, X)))",
            "{ R_X=0 => { R_Y=1 => 0; R_Y=0 => 1 }; _ => p(R_Y | X, R_X=1) }",
            "(p(X, Y, R_X=1, R_Y=1))|_{R_X=1}",
            "Σ_{W}((p(Z | W, R_Y)) / (p(W)))",
            "3/4 * p(X | R_X=1)",
        ];
        for s in samples {
            let e = parse_expr(s).unwrap();
            let rendered = e.to_string();
            let back = parse_expr(&rendered).unwrap();
            assert_eq!(e, back, "{s} vs {rendered}");
        }
    }

    #[test]
    fn json_round_trip() {
        let e =
            parse_expr("{ R_X=0 => 1; _ => (p(R_Y | X, R_X=1)) / (Σ_{R_Y}(p(R_Y, X | R_X=1))) }")
                .unwrap();
        let json = serde_json::to_string(&e).unwrap();
        let back: ProbExpr = serde_json::from_str(&json).unwrap();
        assert_eq!(e, back);
    }
}
