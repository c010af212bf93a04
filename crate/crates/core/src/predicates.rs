//! Predicates over a frozen universe, the canonical lifting of behaviours,
//! invariant and logical-predicate checks, and the ultrametric on
//! predicates.
//!
//! The heavy lifting works on a [`Tabulation`]: every element's
//! observations with labels and results resolved to element ids. Both the
//! combinator universes and the λ-calculus universes tabulate into it.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::semantics::{Behaviour, EvalError, Model};
use crate::syntax::{parse_term_in, Term, Universe};
use crate::types::Ty;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PredError {
    #[error("{0} is not a member of the universe")]
    NotAMember(String),
    #[error("term {term} is listed under type {key} but has type {found}")]
    TypeMismatch { key: String, term: String, found: String },
    #[error("predicate file: {0}")]
    Parse(String),
    #[error("{0} escapes the universe")]
    Escaped(Term),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// A boolean table indexed by universe element id.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Predicate {
    bits: Vec<bool>,
}

impl Predicate {
    pub fn from_bits(bits: Vec<bool>) -> Predicate {
        Predicate { bits }
    }

    pub fn full(n: usize) -> Predicate {
        Predicate { bits: vec![true; n] }
    }

    pub fn empty(n: usize) -> Predicate {
        Predicate { bits: vec![false; n] }
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize) -> bool) -> Predicate {
        Predicate { bits: (0..n).map(f).collect() }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, id: usize) -> bool {
        self.bits[id]
    }

    pub fn set(&mut self, id: usize, v: bool) {
        self.bits[id] = v;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_full(&self) -> bool {
        self.bits.iter().all(|b| *b)
    }

    /// Pointwise `self ≤ other`.
    pub fn le(&self, other: &Predicate) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| !a || *b)
    }

    pub fn and(&self, other: &Predicate) -> Predicate {
        Predicate { bits: self.bits.iter().zip(&other.bits).map(|(a, b)| *a && *b).collect() }
    }

    pub fn or(&self, other: &Predicate) -> Predicate {
        Predicate { bits: self.bits.iter().zip(&other.bits).map(|(a, b)| *a || *b).collect() }
    }

    pub fn true_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i)
    }

    /// Membership of a term; non-members are an error.
    pub fn holds(&self, u: &Universe, t: &Term) -> Result<bool, PredError> {
        u.id_of(t).map(|i| self.bits[i]).ok_or_else(|| PredError::NotAMember(t.to_string()))
    }
}

/// `2^-n`; `exponent = None` encodes `n = ∞`, i.e. distance 0.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct Distance {
    pub exponent: Option<usize>,
}

impl Distance {
    pub const ZERO: Distance = Distance { exponent: None };

    pub fn value(self) -> f64 {
        match self.exponent {
            None => 0.0,
            Some(n) => 0.5f64.powi(n as i32),
        }
    }

    pub fn is_zero(self) -> bool {
        self.exponent.is_none()
    }

    /// `self ≤ other / 2`.
    pub fn at_most_half_of(self, other: Distance) -> bool {
        match (self.exponent, other.exponent) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(a), Some(b)) => a > b,
        }
    }
}

impl Ord for Distance {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.exponent, other.exponent) {
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Less,
            (Some(_), None) => Ordering::Greater,
            (Some(a), Some(b)) => b.cmp(&a),
        }
    }
}

impl PartialOrd for Distance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl std::fmt::Display for Distance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.exponent {
            None => write!(f, "0"),
            Some(n) => write!(f, "2^-{n}"),
        }
    }
}

/// `d(P,Q) = 2^-n` with `n` the least type size at which the predicates
/// differ; `type_sizes[i]` is the size of element `i`'s type.
pub fn distance_by_sizes(p: &Predicate, q: &Predicate, type_sizes: &[usize]) -> Distance {
    let exponent = p.bits.iter().zip(&q.bits).zip(type_sizes).filter(|((a, b), _)| a != b).map(|(_, n)| *n).min();
    Distance { exponent }
}

pub fn distance(p: &Predicate, q: &Predicate, u: &Universe) -> Distance {
    let sizes: Vec<usize> = (0..u.len()).map(|i| u.types()[u.elem_type(i)].size()).collect();
    distance_by_sizes(p, q, &sizes)
}

/// One observation of an element with everything resolved to element ids;
/// `None` marks a result outside the universe.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Obs {
    Step(Option<usize>),
    Done,
    Stuck,
    /// `(label, result)` for every label of the domain type.
    Fun(Vec<(usize, Option<usize>)>),
}

/// Observations of every universe element, plus each element's type size.
#[derive(Clone, Debug)]
pub struct Tabulation {
    pub type_sizes: Vec<usize>,
    /// One entry per behaviour; a singleton for deterministic laws.
    pub obs: Vec<Vec<Obs>>,
}

impl Tabulation {
    pub fn from_universe(model: &Model, u: &Universe) -> Result<Tabulation, EvalError> {
        let mut obs = Vec::with_capacity(u.len());
        let mut type_sizes = Vec::with_capacity(u.len());
        for (i, t) in u.terms().iter().enumerate() {
            type_sizes.push(u.types()[u.elem_type(i)].size());
            let bs = model.gamma_all(t)?;
            if bs.is_empty() {
                obs.push(vec![Obs::Stuck]);
                continue;
            }
            let mut os = Vec::with_capacity(bs.len());
            for b in bs {
                os.push(match b {
                    Behaviour::Step(x) => Obs::Step(u.id_of(&x)),
                    Behaviour::UnitDone => Obs::Done,
                    Behaviour::Fun(f) => {
                        let mut pairs = Vec::new();
                        for &s in u.labels(f.domain()) {
                            pairs.push((s, u.id_of(&f.apply(u.term(s))?)));
                        }
                        Obs::Fun(pairs)
                    }
                });
            }
            obs.push(os);
        }
        Ok(Tabulation { type_sizes, obs })
    }

    pub fn len(&self) -> usize {
        self.obs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.obs.is_empty()
    }

    pub fn distance(&self, p: &Predicate, q: &Predicate) -> Distance {
        distance_by_sizes(p, q, &self.type_sizes)
    }

    /// Whether element `i`'s behaviour lies in `B̄(S,P)`.
    pub fn in_lifting(&self, s: &Predicate, p: &Predicate, i: usize) -> Lift {
        let mut verdict = Lift::Holds;
        for o in &self.obs[i] {
            match obs_in_lifting(s, p, o) {
                Lift::Holds => {}
                other => {
                    verdict = other;
                    if other == Lift::Fails {
                        return other;
                    }
                }
            }
        }
        verdict
    }

    pub fn max_type_size(&self) -> usize {
        self.type_sizes.iter().copied().max().unwrap_or(0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Lift {
    Holds,
    Fails,
    /// A result the check needed lies outside the universe.
    Escaped,
}

impl Lift {
    pub fn holds(self) -> bool {
        self == Lift::Holds
    }
}

pub fn obs_in_lifting(s: &Predicate, p: &Predicate, o: &Obs) -> Lift {
    match o {
        Obs::Step(Some(j)) => {
            if p.get(*j) {
                Lift::Holds
            } else {
                Lift::Fails
            }
        }
        Obs::Step(None) => Lift::Escaped,
        Obs::Done | Obs::Stuck => Lift::Holds,
        Obs::Fun(pairs) => {
            let mut v = Lift::Holds;
            for (l, r) in pairs {
                if !s.get(*l) {
                    continue;
                }
                match r {
                    Some(r) if p.get(*r) => {}
                    Some(_) => return Lift::Fails,
                    None => v = Lift::Escaped,
                }
            }
            v
        }
    }
}

/// The canonical lifting on a live behaviour; `ty` is the type of the term
/// that produced it.
pub fn behaviour_in_lifting(s: &Predicate, p: &Predicate, ty: &Ty, b: &Behaviour, u: &Universe) -> Result<bool, PredError> {
    match b {
        Behaviour::Step(t) => {
            debug_assert_eq!(t.ty(), ty);
            p.holds(u, t).map_err(|_| PredError::Escaped(t.clone()))
        }
        Behaviour::UnitDone => Ok(true),
        Behaviour::Fun(f) => {
            for &l in u.labels(f.domain()) {
                if !s.get(l) {
                    continue;
                }
                let r = f.apply(u.term(l))?;
                if !p.holds(u, &r).map_err(|_| PredError::Escaped(r.clone()))? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

/// Powerset variant: every member of the set must pass.
pub fn nbehaviour_in_lifting(s: &Predicate, p: &Predicate, ty: &Ty, bs: &[Behaviour], u: &Universe) -> Result<bool, PredError> {
    for b in bs {
        if !behaviour_in_lifting(s, p, ty, b, u)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, Serialize)]
pub struct PredViolation {
    #[serde(rename = "type")]
    pub ty: String,
    pub term: String,
    pub reason: Lift,
}

#[derive(Clone, Debug, Serialize)]
pub struct InvariantReport {
    pub holds: bool,
    pub checked: usize,
    pub violations: Vec<PredViolation>,
}

/// Element ids in `P` whose behaviour is not in `B̄(S,P)`.
pub fn invariant_violations(tab: &Tabulation, s: &Predicate, p: &Predicate) -> Vec<(usize, Lift)> {
    p.true_ids().filter_map(|i| match tab.in_lifting(s, p, i) {
        Lift::Holds => None,
        other => Some((i, other)),
    })
    .collect()
}

/// `P ≤ c*[B̄(S,P)]`.
pub fn invariant_check(model: &Model, u: &Universe, s: &Predicate, p: &Predicate) -> Result<InvariantReport, EvalError> {
    let tab = Tabulation::from_universe(model, u)?;
    Ok(invariant_report(&tab, u, s, p))
}

pub fn invariant_report(tab: &Tabulation, u: &Universe, s: &Predicate, p: &Predicate) -> InvariantReport {
    let violations: Vec<PredViolation> = invariant_violations(tab, s, p)
        .into_iter()
        .map(|(i, reason)| PredViolation {
            ty: u.types()[u.elem_type(i)].to_string(),
            term: u.term(i).to_string(),
            reason,
        })
        .collect();
    InvariantReport { holds: violations.is_empty(), checked: p.count(), violations }
}

/// `P` is a `P`-relative invariant.
pub fn logical_check(model: &Model, u: &Universe, p: &Predicate) -> Result<InvariantReport, EvalError> {
    invariant_check(model, u, p, p)
}

/// Reads `{type-string: [term-strings]}`; members not listed are false.
pub fn predicate_from_json(src: &str, u: &Universe) -> Result<Predicate, PredError> {
    let map: BTreeMap<String, Vec<String>> = serde_json::from_str(src).map_err(|e| PredError::Parse(e.to_string()))?;
    let mut p = Predicate::empty(u.len());
    for (key, terms) in map {
        let ty: Ty = key.parse().map_err(|e: crate::types::TyParseError| PredError::Parse(e.to_string()))?;
        for ts in terms {
            let t = parse_term_in(&ts, u.signature()).map_err(|e| PredError::Parse(e.to_string()))?;
            if t.ty() != &ty {
                return Err(PredError::TypeMismatch { key: key.clone(), term: ts, found: t.ty().to_string() });
            }
            let id = u.id_of(&t).ok_or_else(|| PredError::NotAMember(ts.clone()))?;
            p.set(id, true);
        }
    }
    Ok(p)
}

/// Inverse of [`predicate_from_json`]; only types with a true entry appear.
pub fn predicate_to_json(p: &Predicate, u: &Universe) -> serde_json::Value {
    let mut map: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for ty in u.types() {
        let members: Vec<String> = u.slice(ty).iter().filter(|&&i| p.get(i)).map(|&i| u.term(i).to_string()).collect();
        if !members.is_empty() {
            map.insert(ty.to_string(), members);
        }
    }
    serde_json::to_value(map).expect("string map serializes")
}
