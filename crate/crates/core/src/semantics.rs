//! Operational models induced by a law: the one-step map `γ`, reduction
//! traces, weak application, the n-step extensions `γ^(n)` and the
//! termination predicates `⇓_n` and `⇓`.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::law::{instantiate, LawSpec};
use crate::predicates::Predicate;
use crate::syntax::{Term, TypeError, Universe};
use crate::types::Ty;

/// Default step budget for anything that follows weak transitions.
pub const DEFAULT_FUEL: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("rule template: {0}")]
    Template(String),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("label {found} does not have the function's domain type {expected}")]
    LabelType { expected: Ty, found: Ty },
    #[error("law `{0}` is nondeterministic; this operation needs a deterministic law")]
    NotDeterministic(String),
    #[error("no rule applies to {0}")]
    Stuck(Term),
}

type ApplyFn = dyn Fn(&Term) -> Result<Term, EvalError> + Send + Sync;

/// A function value: its labelled transitions, computed on demand.
#[derive(Clone)]
pub struct FunBehaviour {
    dom: Ty,
    cod: Ty,
    f: Arc<ApplyFn>,
}

impl FunBehaviour {
    pub fn new(dom: Ty, cod: Ty, f: impl Fn(&Term) -> Result<Term, EvalError> + Send + Sync + 'static) -> Self {
        FunBehaviour { dom, cod, f: Arc::new(f) }
    }

    pub fn domain(&self) -> &Ty {
        &self.dom
    }

    pub fn codomain(&self) -> &Ty {
        &self.cod
    }

    pub fn apply(&self, s: &Term) -> Result<Term, EvalError> {
        if s.ty() != &self.dom {
            return Err(EvalError::LabelType { expected: self.dom.clone(), found: s.ty().clone() });
        }
        (self.f)(s)
    }
}

/// One observation of a term.
#[derive(Clone)]
pub enum Behaviour {
    Step(Term),
    UnitDone,
    Fun(FunBehaviour),
}

impl Behaviour {
    pub fn is_value(&self) -> bool {
        !matches!(self, Behaviour::Step(_))
    }
}

impl fmt::Debug for Behaviour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Behaviour::Step(t) => write!(f, "Step({t})"),
            Behaviour::UnitDone => write!(f, "UnitDone"),
            Behaviour::Fun(g) => write!(f, "Fun({} -> {})", g.dom, g.cod),
        }
    }
}

/// Set-valued behaviour of a nondeterministic law.
pub type NBehaviour = Vec<Behaviour>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceEnd {
    Done,
    Fun,
    Stuck,
    Fuel,
}

impl TraceEnd {
    pub fn is_value(self) -> bool {
        matches!(self, TraceEnd::Done | TraceEnd::Fun)
    }

    pub fn marker(self) -> &'static str {
        match self {
            TraceEnd::Done => "✓",
            TraceEnd::Fun => "fun",
            TraceEnd::Stuck => "STUCK",
            TraceEnd::Fuel => "FUEL",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Trace {
    /// Every term visited, starting with the input.
    pub terms: Vec<Term>,
    pub end: TraceEnd,
}

impl Trace {
    pub fn steps(&self) -> usize {
        self.terms.len() - 1
    }

    pub fn last(&self) -> &Term {
        self.terms.last().expect("traces are nonempty")
    }
}

/// One term per line; the last line carries the end marker.
impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i + 1 == self.terms.len() {
                writeln!(f, "{t} {}", self.end.marker())?;
            } else {
                writeln!(f, "{t}")?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Weak {
    Term(Term),
    Fuel,
    Stuck,
}

/// Result of `γ^(n)`: still reducing, a value observation (identified by
/// the value term it was read off), or no rule applies.
#[derive(Clone, Debug)]
pub enum GammaN {
    Reducing(Term),
    Value { source: Term, behaviour: Behaviour },
    Stuck(Term),
}

impl GammaN {
    pub fn is_value(&self) -> bool {
        matches!(self, GammaN::Value { .. })
    }
}

impl PartialEq for GammaN {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (GammaN::Reducing(a), GammaN::Reducing(b)) => a == b,
            (GammaN::Value { source: a, .. }, GammaN::Value { source: b, .. }) => a == b,
            (GammaN::Stuck(a), GammaN::Stuck(b)) => a == b,
            _ => false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NdOutcome {
    pub all_terminate: bool,
    pub fuel_exhausted: bool,
    /// A term that reaches itself again, if any.
    pub cycle: Option<Term>,
    pub longest_trace: usize,
    pub distinct_terms: usize,
}

/// The operational model of a law.
#[derive(Clone)]
pub struct Model {
    law: Arc<LawSpec>,
}

impl Model {
    pub fn new(law: LawSpec) -> Model {
        Model { law: Arc::new(law) }
    }

    pub fn cbn() -> Model {
        Model::new(LawSpec::xtcl_cbn())
    }

    pub fn law(&self) -> &LawSpec {
        &self.law
    }

    /// All behaviours of `t` (a singleton for deterministic laws, empty
    /// when no rule applies).
    pub fn gamma_all(&self, t: &Term) -> Result<NBehaviour, EvalError> {
        instantiate(&self.law, t, &mut |i| self.gamma_all(&t.args()[i]))
    }

    /// `γ(t)`; `None` when no rule applies.
    pub fn gamma(&self, t: &Term) -> Result<Option<Behaviour>, EvalError> {
        self.require_deterministic()?;
        Ok(self.gamma_all(t)?.into_iter().next())
    }

    fn require_deterministic(&self) -> Result<(), EvalError> {
        if self.law.powerset {
            return Err(EvalError::NotDeterministic(self.law.name.clone()));
        }
        Ok(())
    }

    /// Step function in the shape used by universe closure.
    pub fn step_fn(&self) -> impl Fn(&Term) -> Result<Vec<Behaviour>, EvalError> + '_ {
        move |t| self.gamma_all(t)
    }

    /// Follows steps for at most `fuel` steps.
    pub fn reduce_trace(&self, t: &Term, fuel: usize) -> Result<Trace, EvalError> {
        self.require_deterministic()?;
        let mut terms = vec![t.clone()];
        loop {
            let cur = terms.last().unwrap().clone();
            let end = match self.gamma(&cur)? {
                Some(Behaviour::Step(next)) => {
                    if terms.len() > fuel {
                        TraceEnd::Fuel
                    } else {
                        terms.push(next);
                        continue;
                    }
                }
                Some(Behaviour::UnitDone) => TraceEnd::Done,
                Some(Behaviour::Fun(_)) => TraceEnd::Fun,
                None => TraceEnd::Stuck,
            };
            return Ok(Trace { terms, end });
        }
    }

    /// Final behaviour reached from `t` within `fuel` steps.
    pub fn reduce(&self, t: &Term, fuel: usize) -> Result<(Term, Option<Behaviour>), EvalError> {
        let mut cur = t.clone();
        for _ in 0..=fuel {
            match self.gamma(&cur)? {
                Some(Behaviour::Step(next)) => cur = next,
                other => return Ok((cur, other)),
            }
        }
        Ok((cur.clone(), Some(Behaviour::Step(cur))))
    }

    /// `s ⇒^t r`: reduce `s` to a function value, then apply it to `t`.
    pub fn weak_apply(&self, s: &Term, t: &Term, fuel: usize) -> Result<Weak, EvalError> {
        let mut cur = s.clone();
        for _ in 0..=fuel {
            match self.gamma(&cur)? {
                Some(Behaviour::Step(next)) => cur = next,
                Some(Behaviour::Fun(f)) => return Ok(Weak::Term(f.apply(t)?)),
                Some(Behaviour::UnitDone) => {
                    return Err(EvalError::Template(format!("weak_apply on unit-typed term {s}")))
                }
                None => return Ok(Weak::Stuck),
            }
        }
        Ok(Weak::Fuel)
    }

    /// `γ^(n)(t)`.
    pub fn gamma_n(&self, t: &Term, n: usize) -> Result<GammaN, EvalError> {
        let mut cur = t.clone();
        for _ in 0..n {
            match self.gamma(&cur)? {
                Some(Behaviour::Step(next)) => cur = next,
                Some(b) => return Ok(GammaN::Value { source: cur, behaviour: b }),
                None => return Ok(GammaN::Stuck(cur)),
            }
        }
        Ok(GammaN::Reducing(cur))
    }

    /// `⇓_n` over a universe.
    pub fn down_n(&self, u: &Universe, n: usize) -> Result<Predicate, EvalError> {
        let mut bits = Vec::with_capacity(u.len());
        for t in u.terms() {
            bits.push(self.gamma_n(t, n)?.is_value());
        }
        Ok(Predicate::from_bits(bits))
    }

    /// `⋁_{n ≤ fuel} ⇓_n` over a universe.
    pub fn down(&self, u: &Universe, fuel: usize) -> Result<Predicate, EvalError> {
        let mut memo: HashMap<Term, bool> = HashMap::new();
        let mut bits = Vec::with_capacity(u.len());
        for t in u.terms() {
            let b = match memo.get(t) {
                Some(b) => *b,
                None => {
                    let b = self.gamma_n(t, fuel)?.is_value();
                    memo.insert(t.clone(), b);
                    b
                }
            };
            bits.push(b);
        }
        Ok(Predicate::from_bits(bits))
    }

    /// Explores every maximal trace from `t` (depth-first, with cycle
    /// detection); each branch gets at most `fuel` steps.
    pub fn nd_traces(&self, t: &Term, fuel: usize) -> Result<NdOutcome, EvalError> {
        self.nd_explorer().explore(t, fuel)
    }

    /// A trace explorer whose results are shared between start terms.
    pub fn nd_explorer(&self) -> NdExplorer<'_> {
        NdExplorer { model: self, marks: HashMap::new() }
    }
}

enum Mark {
    OnPath,
    /// Every maximal trace terminates; the longest has this many steps.
    Finished(usize),
    /// Some trace reaches a cycle.
    Diverges,
}

/// Depth-first search over all reducts, remembering which terms are known
/// to terminate or diverge. Results cut short by fuel are not remembered.
pub struct NdExplorer<'a> {
    model: &'a Model,
    marks: HashMap<Term, Mark>,
}

struct Frame {
    term: Term,
    succ: Vec<Term>,
    next: usize,
    longest: usize,
    diverges: bool,
    exhausted: bool,
}

impl NdExplorer<'_> {
    fn successors(&self, x: &Term) -> Result<Vec<Term>, EvalError> {
        Ok(self
            .model
            .gamma_all(x)?
            .into_iter()
            .filter_map(|b| match b {
                Behaviour::Step(y) => Some(y),
                _ => None,
            })
            .collect())
    }

    /// Terms visited so far, over all calls.
    pub fn visited(&self) -> usize {
        self.marks.len()
    }

    pub fn explore(&mut self, t: &Term, fuel: usize) -> Result<NdOutcome, EvalError> {
        let mut out = NdOutcome { all_terminate: true, fuel_exhausted: false, cycle: None, longest_trace: 0, distinct_terms: 0 };
        match self.marks.get(t) {
            Some(Mark::Finished(len)) => {
                out.longest_trace = *len;
                out.distinct_terms = self.marks.len();
                return Ok(out);
            }
            Some(Mark::Diverges) => {
                out.all_terminate = false;
                out.cycle = Some(t.clone());
                out.distinct_terms = self.marks.len();
                return Ok(out);
            }
            _ => {}
        }
        self.marks.insert(t.clone(), Mark::OnPath);
        let succ = self.successors(t)?;
        let mut stack = vec![Frame { term: t.clone(), succ, next: 0, longest: 0, diverges: false, exhausted: false }];
        loop {
            let depth = stack.len();
            let Some(frame) = stack.last_mut() else { break };
            if frame.next < frame.succ.len() {
                let child = frame.succ[frame.next].clone();
                frame.next += 1;
                match self.marks.get(&child) {
                    Some(Mark::OnPath) => {
                        frame.diverges = true;
                        out.cycle.get_or_insert(child);
                    }
                    Some(Mark::Diverges) => {
                        frame.diverges = true;
                        out.cycle.get_or_insert(child);
                    }
                    Some(Mark::Finished(len)) => frame.longest = frame.longest.max(len + 1),
                    None => {
                        if depth > fuel {
                            frame.exhausted = true;
                            continue;
                        }
                        self.marks.insert(child.clone(), Mark::OnPath);
                        let succ = self.successors(&child)?;
                        stack.push(Frame { term: child, succ, next: 0, longest: 0, diverges: false, exhausted: false });
                    }
                }
            } else {
                let f = stack.pop().unwrap();
                if f.diverges {
                    self.marks.insert(f.term, Mark::Diverges);
                } else if f.exhausted {
                    self.marks.remove(&f.term);
                } else {
                    self.marks.insert(f.term, Mark::Finished(f.longest));
                }
                match stack.last_mut() {
                    Some(parent) => {
                        parent.longest = parent.longest.max(f.longest + 1);
                        parent.diverges |= f.diverges;
                        parent.exhausted |= f.exhausted;
                    }
                    None => {
                        out.longest_trace = f.longest;
                        out.all_terminate = !f.diverges && !f.exhausted;
                        out.fuel_exhausted = f.exhausted;
                    }
                }
            }
        }
        out.distinct_terms = self.marks.len();
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::law::parse_law;
    use crate::syntax::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn gamma_examples() {
        let m = Model::cbn();
        assert!(matches!(m.gamma(&Term::e()).unwrap(), Some(Behaviour::UnitDone)));
        match m.gamma(&t("(app I[unit] e)")).unwrap() {
            Some(Behaviour::Step(x)) => assert_eq!(x, Term::e()),
            other => panic!("{other:?}"),
        }
        match m.gamma(&t("K[unit,unit]")).unwrap() {
            Some(Behaviour::Fun(f)) => assert_eq!(f.apply(&Term::e()).unwrap(), t("K'[unit,unit](e)")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ski_trace() {
        let m = Model::cbn();
        let skke = t("(app (app (app S[unit,(-> unit unit),unit] K[unit,(-> unit unit)]) K[unit,unit]) e)");
        let tr = m.reduce_trace(&skke, 100).unwrap();
        assert_eq!(tr.end, TraceEnd::Done);
        assert_eq!(tr.steps(), 5);
        assert_eq!(tr.last(), &Term::e());
        let tr = m.reduce_trace(&Term::e(), 10).unwrap();
        assert_eq!(tr.terms, vec![Term::e()]);
        assert_eq!(tr.to_string(), "e ✓\n");
    }

    #[test]
    fn fuel_exhaustion() {
        let law = parse_law("extends xtcl-cbn\nop f(unit) : unit\nrule f: arg0 -> X => step f(arg0)\nrule f: arg0 val => done").unwrap();
        let m = Model::new(law.clone());
        let sig = law.signature();
        let loopy = crate::syntax::parse_term_in("f((app I[unit] e))", &sig).unwrap();
        let tr = m.reduce_trace(&loopy, 7).unwrap();
        assert_eq!(tr.end, TraceEnd::Fuel);
        assert_eq!(tr.steps(), 7);
        assert_eq!(m.weak_apply(&t("I[unit]"), &Term::e(), 3).unwrap(), Weak::Term(Term::e()));
    }

    #[test]
    fn weak_apply_examples() {
        let m = Model::cbn();
        let spp = t("S''[unit,(-> unit unit),unit](K[unit,(-> unit unit)],K[unit,unit])");
        let Weak::Term(r) = m.weak_apply(&spp, &Term::e(), 10).unwrap() else { panic!() };
        assert_eq!(r, t("(app (app K[unit,(-> unit unit)] e) (app K[unit,unit] e))"));
        let Weak::Term(r) = m.weak_apply(&t("(app K[unit,unit] e)"), &Term::e(), 10).unwrap() else { panic!() };
        assert_eq!(r, Term::e());
    }

    #[test]
    fn gamma_n_examples() {
        let m = Model::cbn();
        assert_eq!(m.gamma_n(&Term::e(), 0).unwrap(), GammaN::Reducing(Term::e()));
        assert!(m.gamma_n(&Term::e(), 1).unwrap().is_value());
        let ie = t("(app I[unit] e)");
        assert_eq!(m.gamma_n(&ie, 1).unwrap(), GammaN::Reducing(Term::e()));
        assert!(m.gamma_n(&ie, 2).unwrap().is_value());
    }

    #[test]
    fn nd_behaviour_sets() {
        let m = Model::new(LawSpec::xtcl_nd());
        let x = t("(app (app I[(-> unit unit)] I[unit]) (app I[unit] e))");
        let bs = m.gamma_all(&x).unwrap();
        let steps: Vec<String> = bs
            .iter()
            .map(|b| match b {
                Behaviour::Step(y) => y.to_string(),
                other => format!("{other:?}"),
            })
            .collect();
        assert_eq!(steps, vec!["(app I[unit] (app I[unit] e))", "(app (app I[(-> unit unit)] I[unit]) e)"]);
        assert!(m.gamma(&x).is_err());
        let o = m.nd_traces(&x, 100).unwrap();
        assert!(o.all_terminate);
        assert_eq!(o.longest_trace, 3);
    }
}
