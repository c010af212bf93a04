//! Respect for weak transitions, and the assembled strong normalization
//! report (flatness, simplicity, weak-respect, `□⇓`, plus the empirical
//! check that every member terminates).

use std::collections::HashSet;

use serde::Serialize;

use crate::henceforth::{henceforth_tab, HenceforthError, HenceforthResult};
use crate::law::{flatness_check, instantiate, simplicity_check, FlatnessReport, RankAssignment, SimplicityReport};
use crate::predicates::Tabulation;
use crate::semantics::{Behaviour, EvalError, GammaN, Model};
use crate::syntax::{Term, Universe, UniverseStats};

/// A law with an argument that loops on itself while reducing, and
/// terminates once the argument is a value.
pub const FIXTURE_SELF_LOOP: &str = "\
law self-loop
extends xtcl-cbn
op f(unit) : unit
rule f: arg0 -> X => step f(arg0)
rule f: arg0 val => done
";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeakCounterexample {
    pub operator: String,
    pub args: Vec<String>,
    pub n: usize,
    pub computed: String,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeakRespectReport {
    pub law: String,
    pub n_max: usize,
    pub k_max: usize,
    pub verdict: Verdict,
    pub checked: usize,
    pub counterexamples: Vec<WeakCounterexample>,
    /// Instances whose witness search ran out of the `k` budget.
    pub inconclusive: Vec<WeakCounterexample>,
    pub universe_closed: bool,
}

enum Found {
    Yes,
    No(String),
    Budget,
}

/// `γ^(n)` read as a behaviour: still reducing becomes a step to the
/// `n`-step reduct.
fn gamma_n_behaviour(model: &Model, t: &Term, n: usize) -> Result<Vec<Behaviour>, EvalError> {
    Ok(match model.gamma_n(t, n)? {
        GammaN::Reducing(x) => vec![Behaviour::Step(x)],
        GammaN::Value { behaviour, .. } => vec![behaviour],
        GammaN::Stuck(_) => vec![],
    })
}

fn describe(b: &Behaviour) -> String {
    match b {
        Behaviour::Step(t) => format!("step {t}"),
        Behaviour::UnitDone => "done".into(),
        Behaviour::Fun(f) => format!("fun {} -> {}", f.domain(), f.codomain()),
    }
}

/// Searches `γ^(k)(t)`, `k ≤ k_max`, for the behaviour `c`; functions are
/// compared on the universe labels.
fn witness(model: &Model, u: &Universe, t: &Term, c: &Behaviour, k_max: usize) -> Result<Found, EvalError> {
    let mut seen = HashSet::new();
    let mut cur = t.clone();
    for _ in 0..=k_max {
        // cur is γ^(k)(t) while still reducing
        if let Behaviour::Step(x) = c {
            if *x == cur {
                return Ok(Found::Yes);
            }
        }
        if !seen.insert(cur.clone()) {
            return Ok(Found::No(format!("reduction of {t} cycles without reaching it")));
        }
        match model.gamma(&cur)? {
            Some(Behaviour::Step(next)) => cur = next,
            None => return Ok(Found::No(format!("{t} gets stuck at {cur}"))),
            Some(v) => return value_matches(u, t, &cur, &v, c),
        }
    }
    Ok(Found::Budget)
}

fn value_matches(u: &Universe, t: &Term, at: &Term, v: &Behaviour, c: &Behaviour) -> Result<Found, EvalError> {
    match (v, c) {
        (Behaviour::UnitDone, Behaviour::UnitDone) => Ok(Found::Yes),
        (Behaviour::Fun(h), Behaviour::Fun(g)) => {
            for &s in u.labels(h.domain()) {
                let s = u.term(s);
                let (a, b) = (h.apply(s)?, g.apply(s)?);
                if a != b {
                    return Ok(Found::No(format!("at label {s} the value {at} gives {a}, the composite gives {b}")));
                }
            }
            Ok(Found::Yes)
        }
        _ => Ok(Found::No(format!("{t} reaches the value {at} ({}) instead", describe(v)))),
    }
}

/// For each `n ≤ n_max` and member `f(args)`, fires the law on the
/// `n`-step behaviours of the arguments and looks for the result among
/// `γ^(k)(f(args))`, `k ≤ k_max`.
pub fn respects_weak_check(model: &Model, u: &Universe, n_max: usize, k_max: usize) -> Result<WeakRespectReport, EvalError> {
    let law = model.law();
    if law.powerset {
        return Err(EvalError::NotDeterministic(law.name.clone()));
    }
    let mut checked = 0;
    let mut counterexamples = Vec::new();
    let mut inconclusive = Vec::new();
    for t in u.terms() {
        for n in 0..=n_max {
            let composite = instantiate(law, t, &mut |i| gamma_n_behaviour(model, &t.args()[i], n))?;
            let Some(c) = composite.into_iter().next() else { continue };
            checked += 1;
            let cx = |reason: String| WeakCounterexample {
                operator: t.op().sym().name().to_string(),
                args: t.args().iter().map(Term::to_string).collect(),
                n,
                computed: describe(&c),
                reason,
            };
            match witness(model, u, t, &c, k_max)? {
                Found::Yes => {}
                Found::No(reason) => counterexamples.push(cx(reason)),
                Found::Budget => inconclusive.push(cx(format!("no witness within k ≤ {k_max}"))),
            }
        }
    }
    let verdict = if !counterexamples.is_empty() {
        Verdict::Fail
    } else if !inconclusive.is_empty() {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    Ok(WeakRespectReport {
        law: law.name.clone(),
        n_max,
        k_max,
        verdict,
        checked,
        counterexamples,
        inconclusive,
        universe_closed: u.is_closed(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Condition {
    pub id: &'static str,
    pub description: &'static str,
    pub status: ConditionStatus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConditionStatus {
    /// A category-level hypothesis that holds for typed sets.
    Static,
    Pass,
    Fail,
    Inconclusive,
}

impl From<Verdict> for ConditionStatus {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Pass => ConditionStatus::Pass,
            Verdict::Fail => ConditionStatus::Fail,
            Verdict::Inconclusive => ConditionStatus::Inconclusive,
        }
    }
}

fn pass_fail(b: bool) -> ConditionStatus {
    if b {
        ConditionStatus::Pass
    } else {
        ConditionStatus::Fail
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SnReport {
    pub law: String,
    pub conditions: Vec<Condition>,
    pub flatness: FlatnessReport,
    pub simplicity: SimplicityReport,
    pub weak_respect: WeakRespectReport,
    pub henceforth: Option<HenceforthResult>,
    pub members: usize,
    pub terminating: usize,
    /// A member that does not terminate within fuel, if any.
    pub diverging_witness: Option<String>,
    pub certified: bool,
    pub empirically_confirmed: bool,
    pub verdict: String,
    pub universe: UniverseStats,
}

pub const SN_VERDICT: &str = "strongly normalizing (relative to universe/fuel)";

/// Checks the hypotheses of the strong normalization theorem on the
/// universe and compares with direct evaluation.
pub fn sn_theorem_report(
    model: &Model,
    rank: &RankAssignment,
    u: &Universe,
    n_max: usize,
    k_max: usize,
    fuel: usize,
) -> Result<SnReport, HenceforthError> {
    let law = model.law();
    let flatness = flatness_check(law, rank)?;
    let simplicity = simplicity_check(law);
    let weak_respect = respects_weak_check(model, u, n_max, k_max)?;
    let down = model.down(u, fuel)?;
    let tab = Tabulation::from_universe(model, u)?;
    let henceforth = match henceforth_tab(&tab, &down) {
        Ok(h) => Some(h),
        Err(HenceforthError::NoConvergence { .. }) => None,
        Err(e) => return Err(e),
    };
    let conditions = vec![
        Condition {
            id: "1",
            description: "monos are ω-smooth and the syntax functor preserves ω-directed unions",
            status: ConditionStatus::Static,
        },
        Condition {
            id: "2",
            description: "the behaviour functor has a contractive predicate lifting",
            status: ConditionStatus::Static,
        },
        Condition { id: "3a", description: "the law is relatively flat", status: pass_fail(flatness.accepted) },
        Condition { id: "3b", description: "the law is simple", status: pass_fail(simplicity.accepted) },
        Condition { id: "3c", description: "the law respects weak transitions", status: weak_respect.verdict.into() },
        Condition {
            id: "4",
            description: "termination has a locally maximal logical refinement",
            status: pass_fail(henceforth.is_some()),
        },
    ];
    let hypotheses = conditions.iter().all(|c| matches!(c.status, ConditionStatus::Static | ConditionStatus::Pass));
    let diverging_witness = u.terms().iter().zip(down.bits()).find(|(_, b)| !**b).map(|(t, _)| t.to_string());
    let empirically_confirmed = down.is_full();
    let certified = hypotheses && empirically_confirmed;
    let verdict = if certified {
        SN_VERDICT.to_string()
    } else if hypotheses {
        "hypotheses hold but some member does not terminate within fuel".to_string()
    } else {
        "not certified".to_string()
    };
    Ok(SnReport {
        law: law.name.clone(),
        conditions,
        flatness,
        simplicity,
        weak_respect,
        henceforth,
        members: u.len(),
        terminating: down.count(),
        diverging_witness,
        certified,
        empirically_confirmed,
        verdict,
        universe: u.stats(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::law::{load_law, LawSpec};
    use crate::syntax::close_universe;

    fn universe(model: &Model, sb: usize, tb: usize) -> Universe {
        let u = Universe::enumerate(model.law().signature(), sb, tb).with_label_bound(3);
        close_universe(u, &model.step_fn(), 200_000).unwrap()
    }

    #[test]
    fn cbn_respects_weak_transitions() {
        let m = Model::cbn();
        let u = universe(&m, 5, 3);
        let r = respects_weak_check(&m, &u, 0, 100).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        let r = respects_weak_check(&m, &u, 3, 100).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{:?}", r.counterexamples.first());
        assert!(r.checked > 0);
    }

    #[test]
    fn self_loop_fails_weak_respect() {
        let m = Model::new(load_law(FIXTURE_SELF_LOOP).unwrap());
        let u = universe(&m, 4, 2);
        assert_eq!(respects_weak_check(&m, &u, 0, 100).unwrap().verdict, Verdict::Pass);
        let r = respects_weak_check(&m, &u, 2, 100).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        let cx = &r.counterexamples[0];
        assert_eq!(cx.operator, "f");
        assert_eq!(cx.computed, "done");
    }

    #[test]
    fn budget_is_inconclusive() {
        let m = Model::cbn();
        let u = universe(&m, 5, 3);
        let r = respects_weak_check(&m, &u, 3, 0).unwrap();
        assert!(r.counterexamples.is_empty());
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn sn_reports() {
        let m = Model::cbn();
        let u = universe(&m, 5, 3);
        let r = sn_theorem_report(&m, &RankAssignment::standard(m.law()), &u, 3, 1000, 1000).unwrap();
        assert!(r.certified, "{:?}", r.conditions);
        assert_eq!(r.verdict, SN_VERDICT);

        let m = Model::new(load_law(FIXTURE_SELF_LOOP).unwrap());
        let u = universe(&m, 4, 2);
        let r = sn_theorem_report(&m, &RankAssignment::standard(m.law()), &u, 3, 100, 100).unwrap();
        assert!(r.simplicity.accepted);
        assert!(!r.certified);
        assert!(r.diverging_witness.unwrap().starts_with("f("));
    }

    #[test]
    fn nd_is_rejected() {
        let m = Model::new(LawSpec::xtcl_nd());
        let u = Universe::enumerate(m.law().signature(), 2, 2);
        assert!(respects_weak_check(&m, &u, 1, 10).is_err());
    }
}
