//! Relative henceforth `□(S,P)`, the logical refinement `□P` by Banach
//! iteration, direct type-directed versions of `□⇓`, `⤋` and `SN`, and the
//! induction-up-to-`□` certificate.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::law::{flatness_check, FlatnessViolation, LawError, RankAssignment};
use crate::predicates::{Distance, Predicate, Tabulation};
use crate::semantics::{Behaviour, EvalError, Model, TraceEnd, Weak};
use crate::syntax::{Term, Universe, UniverseStats};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HenceforthError {
    #[error("Banach iteration did not converge within {limit} outer iterations")]
    NoConvergence { limit: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Law(#[from] LawError),
}

/// Greatest `G ≤ P` with `G ≤ c*[B̄(S,G)]`, by whole-table descent from
/// `P`. Returns the fixed point and the number of sweeps.
pub fn henceforth_rel_tab(tab: &Tabulation, s: &Predicate, p: &Predicate) -> (Predicate, usize) {
    let mut g = p.clone();
    let mut sweeps = 0;
    loop {
        sweeps += 1;
        let next = Predicate::from_fn(tab.len(), |i| p.get(i) && tab.in_lifting(s, &g, i).holds());
        if next == g {
            return (g, sweeps);
        }
        g = next;
    }
}

pub fn henceforth_rel(model: &Model, u: &Universe, s: &Predicate, p: &Predicate) -> Result<Predicate, EvalError> {
    let tab = Tabulation::from_universe(model, u)?;
    Ok(henceforth_rel_tab(&tab, s, p).0)
}

#[derive(Clone, Debug, Serialize)]
pub struct HenceforthResult {
    #[serde(skip)]
    pub result: Predicate,
    pub result_count: usize,
    /// Number of `□(S,P)` evaluations until `S` was reproduced.
    pub iterations_outer: usize,
    pub iterations_inner: Vec<usize>,
    /// `d(S_k, S_{k+1})` for each outer step.
    pub distances: Vec<Distance>,
}

/// `□P`: iterate `S ↦ □(S,P)` from `⊤` until it is stable.
pub fn henceforth_tab(tab: &Tabulation, p: &Predicate) -> Result<HenceforthResult, HenceforthError> {
    let limit = tab.max_type_size() + 2;
    let mut s = Predicate::full(tab.len());
    let mut inner = Vec::new();
    let mut distances = Vec::new();
    loop {
        let (next, sweeps) = henceforth_rel_tab(tab, &s, p);
        inner.push(sweeps);
        distances.push(tab.distance(&s, &next));
        if next == s {
            return Ok(HenceforthResult {
                result_count: s.count(),
                result: s,
                iterations_outer: inner.len(),
                iterations_inner: inner,
                distances,
            });
        }
        if inner.len() >= limit {
            return Err(HenceforthError::NoConvergence { limit });
        }
        s = next;
    }
}

pub fn henceforth(model: &Model, u: &Universe, p: &Predicate) -> Result<HenceforthResult, HenceforthError> {
    let tab = Tabulation::from_universe(model, u)?;
    henceforth_tab(&tab, p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direct {
    Holds,
    Fails,
    /// A trace ran out of fuel on the way.
    Fuel,
}

impl Direct {
    pub fn holds(self) -> bool {
        self == Direct::Holds
    }

    fn and(self, other: Direct) -> Direct {
        match (self, other) {
            (Direct::Fails, _) | (_, Direct::Fails) => Direct::Fails,
            (Direct::Fuel, _) | (_, Direct::Fuel) => Direct::Fuel,
            _ => Direct::Holds,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Flavour {
    /// `□⇓` read off the strong model: the value's labelled results.
    BoxDown,
    /// `⤋`: weak application.
    Plotkin,
    /// `SN`: syntactic application.
    Tait,
}

/// Type-directed evaluator for the three termination predicates. Labels
/// range over the universe's labels of the domain type; recursion is on
/// strictly smaller types.
pub struct DirectPredicates<'a> {
    model: &'a Model,
    u: &'a Universe,
    fuel: usize,
    memo: HashMap<(u8, Term), Direct>,
    /// Applications built by `SN` that are not universe members.
    pub scratch_terms: usize,
}

impl<'a> DirectPredicates<'a> {
    pub fn new(model: &'a Model, u: &'a Universe, fuel: usize) -> Self {
        DirectPredicates { model, u, fuel, memo: HashMap::new(), scratch_terms: 0 }
    }

    pub fn box_down(&mut self, t: &Term) -> Result<Direct, EvalError> {
        self.eval(Flavour::BoxDown, t)
    }

    pub fn plotkin(&mut self, t: &Term) -> Result<Direct, EvalError> {
        self.eval(Flavour::Plotkin, t)
    }

    pub fn tait(&mut self, t: &Term) -> Result<Direct, EvalError> {
        self.eval(Flavour::Tait, t)
    }

    /// Table over the whole universe.
    pub fn table(&mut self, which: &str) -> Result<Predicate, EvalError> {
        let f = match which {
            "box_down" => Flavour::BoxDown,
            "plotkin" => Flavour::Plotkin,
            _ => Flavour::Tait,
        };
        let mut bits = Vec::with_capacity(self.u.len());
        for t in self.u.terms() {
            bits.push(self.eval(f, t)?.holds());
        }
        Ok(Predicate::from_bits(bits))
    }

    fn eval(&mut self, f: Flavour, t: &Term) -> Result<Direct, EvalError> {
        let key = (f as u8, t.clone());
        if let Some(v) = self.memo.get(&key) {
            return Ok(*v);
        }
        let v = self.compute(f, t)?;
        self.memo.insert(key, v);
        Ok(v)
    }

    fn compute(&mut self, f: Flavour, t: &Term) -> Result<Direct, EvalError> {
        let trace = self.model.reduce_trace(t, self.fuel)?;
        match trace.end {
            TraceEnd::Fuel => return Ok(Direct::Fuel),
            TraceEnd::Stuck => return Ok(Direct::Fails),
            TraceEnd::Done => return Ok(Direct::Holds),
            TraceEnd::Fun => {}
        }
        let dom = t.ty().domain().expect("function values live at arrow types").clone();
        let labels: Vec<Term> = self.u.labels(&dom).iter().map(|&i| self.u.term(i).clone()).collect();
        let value_beh = match f {
            Flavour::BoxDown => self.model.gamma(trace.last())?,
            _ => None,
        };
        let mut verdict = Direct::Holds;
        for s in labels {
            let ls = self.eval(f, &s)?;
            if !ls.holds() {
                // an unverified label imposes nothing
                continue;
            }
            let r = match f {
                Flavour::BoxDown => match &value_beh {
                    Some(Behaviour::Fun(g)) => g.apply(&s)?,
                    _ => unreachable!("trace ended in a function value"),
                },
                Flavour::Plotkin => match self.model.weak_apply(t, &s, self.fuel)? {
                    Weak::Term(r) => r,
                    Weak::Fuel => return Ok(Direct::Fuel),
                    Weak::Stuck => return Ok(Direct::Fails),
                },
                Flavour::Tait => {
                    let a = Term::app(t.clone(), s.clone())?;
                    if !self.u.contains(&a) {
                        self.scratch_terms += 1;
                    }
                    a
                }
            };
            verdict = verdict.and(self.eval(f, &r)?);
            if verdict == Direct::Fails {
                break;
            }
        }
        Ok(verdict)
    }
}

pub fn box_down_direct(model: &Model, u: &Universe, t: &Term, fuel: usize) -> Result<Direct, EvalError> {
    DirectPredicates::new(model, u, fuel).box_down(t)
}

pub fn plotkin_pred(model: &Model, u: &Universe, t: &Term, fuel: usize) -> Result<Direct, EvalError> {
    DirectPredicates::new(model, u, fuel).plotkin(t)
}

pub fn tait_pred(model: &Model, u: &Universe, t: &Term, fuel: usize) -> Result<Direct, EvalError> {
    DirectPredicates::new(model, u, fuel).tait(t)
}

#[derive(Clone, Debug, Serialize)]
pub struct UpToBoxReport {
    pub law: String,
    pub flat: bool,
    pub flatness_violations: Vec<FlatnessViolation>,
    pub box_count: usize,
    pub henceforth: HenceforthResult,
    /// Universe members whose immediate subterms all lie in `□P`.
    pub instances_checked: usize,
    pub counterexamples: Vec<String>,
    /// Premise holds and the law is flat, so `P` covers the universe.
    pub certified: bool,
    /// Direct check of the conclusion: `P` is true on every member.
    pub conclusion_confirmed: bool,
    pub universe: UniverseStats,
}

/// Checks `Σ̄(□P) ≤ ι*[P]` on the universe: every member whose arguments
/// all satisfy `□P` satisfies `P`.
pub fn up_to_box_check(
    model: &Model,
    rank: &RankAssignment,
    u: &Universe,
    p: &Predicate,
) -> Result<UpToBoxReport, HenceforthError> {
    let flat = flatness_check(model.law(), rank)?;
    let tab = Tabulation::from_universe(model, u)?;
    let hf = henceforth_tab(&tab, p)?;
    let boxp = &hf.result;
    let mut checked = 0;
    let mut counterexamples = Vec::new();
    for (i, t) in u.terms().iter().enumerate() {
        let args_in_box = t.args().iter().all(|a| u.id_of(a).is_some_and(|j| boxp.get(j)));
        if !args_in_box {
            continue;
        }
        checked += 1;
        if !p.get(i) {
            counterexamples.push(t.to_string());
        }
    }
    let certified = flat.accepted && counterexamples.is_empty();
    Ok(UpToBoxReport {
        law: model.law().name.clone(),
        flat: flat.accepted,
        flatness_violations: flat.violations,
        box_count: boxp.count(),
        henceforth: hf.clone(),
        instances_checked: checked,
        counterexamples,
        certified,
        conclusion_confirmed: p.is_full(),
        universe: u.stats(),
    })
}
