mod common;

use proptest::prelude::*;

use hogsos::law::{load_law, LawSpec};
use hogsos::semantics::{Behaviour, GammaN, Model, TraceEnd};
use hogsos::syntax::{enumerate_terms, parse_term, Signature, Term, Universe};
use hogsos::types::{enumerate_types, Ty};

fn t(s: &str) -> Term {
    parse_term(s).unwrap()
}

fn step_target(m: &Model, x: &Term) -> Option<Term> {
    match m.gamma(x).unwrap() {
        Some(Behaviour::Step(y)) => Some(y),
        _ => None,
    }
}

#[test]
fn golden_identity_trace() {
    let tr = Model::cbn().reduce_trace(&t("(app I[unit] e)"), 100).unwrap();
    assert_eq!(tr.to_string(), "(app I[unit] e)\ne ✓\n");
}

#[test]
fn golden_skk_trace_by_hand() {
    // S t s e → S'(t) s e → S''(t,s) e → (t e)(s e) → K'(e) (s e) → e
    let k1 = "K[unit,(-> unit unit)]";
    let k2 = "K[unit,unit]";
    let s = "S[unit,(-> unit unit),unit]";
    let sp = "S'[unit,(-> unit unit),unit]";
    let spp = "S''[unit,(-> unit unit),unit]";
    let expected = [
        format!("(app (app (app {s} {k1}) {k2}) e)"),
        format!("(app (app {sp}({k1}) {k2}) e)"),
        format!("(app {spp}({k1},{k2}) e)"),
        format!("(app (app {k1} e) (app {k2} e))"),
        format!("(app K'[unit,(-> unit unit)](e) (app {k2} e))"),
        "e".to_string(),
    ];
    let tr = Model::cbn().reduce_trace(&t(&expected[0]), 100).unwrap();
    let got: Vec<String> = tr.terms.iter().map(Term::to_string).collect();
    assert_eq!(got, expected);
    assert_eq!(tr.end, TraceEnd::Done);
}

#[test]
fn cbv_reduces_argument_first() {
    let m = Model::new(LawSpec::xtcl_cbv());
    let x = t("(app K[unit,unit] (app I[unit] e))");
    let tr = m.reduce_trace(&x, 10).unwrap();
    let got: Vec<String> = tr.terms.iter().map(Term::to_string).collect();
    assert_eq!(got, ["(app K[unit,unit] (app I[unit] e))", "(app K[unit,unit] e)", "K'[unit,unit](e)"]);
    assert_eq!(tr.end, TraceEnd::Fun);
    let cbn = Model::cbn().reduce_trace(&x, 10).unwrap();
    assert_eq!(cbn.last().to_string(), "K'[unit,unit]((app I[unit] e))");
}

#[test]
fn nd_offers_both_redexes() {
    let m = Model::new(LawSpec::xtcl_nd());
    let x = t("(app (app I[(-> unit unit)] I[unit]) (app I[unit] e))");
    let mut targets: Vec<String> = m
        .gamma_all(&x)
        .unwrap()
        .into_iter()
        .map(|b| match b {
            Behaviour::Step(y) => y.to_string(),
            other => panic!("{other:?}"),
        })
        .collect();
    targets.sort();
    assert_eq!(targets, ["(app (app I[(-> unit unit)] I[unit]) e)", "(app I[unit] (app I[unit] e))"]);
    assert!(m.gamma(&x).is_err());
}

#[test]
fn diverging_fixture_runs_out_of_fuel() {
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/self_loop.law")).unwrap();
    let m = Model::new(load_law(&src).unwrap());
    let x = parse_term_in_law(&m, "f((app I[unit] e))");
    let tr = m.reduce_trace(&x, 50).unwrap();
    assert_eq!(tr.end, TraceEnd::Fuel);
    assert_eq!(tr.steps(), 50);
    assert!(tr.terms.iter().all(|y| *y == x));
    let done = m.reduce_trace(&parse_term_in_law(&m, "f(e)"), 50).unwrap();
    assert_eq!(done.end, TraceEnd::Done);
}

fn parse_term_in_law(m: &Model, s: &str) -> Term {
    hogsos::syntax::parse_term_in(s, &m.law().signature()).unwrap()
}

#[test]
fn deterministic_laws_have_exactly_one_behaviour() {
    for f in [common::cbn(), common::cbv()] {
        for x in f.u.terms() {
            assert_eq!(f.model.gamma_all(x).unwrap().len(), 1, "{x}");
        }
    }
}

#[test]
fn cbn_step_is_among_nd_steps() {
    let nd = common::nd();
    let cbn = Model::cbn();
    for x in nd.u.terms() {
        let all = nd.model.gamma_all(x).unwrap();
        match cbn.gamma(x).unwrap().unwrap() {
            Behaviour::Step(y) => assert!(all.iter().any(|b| matches!(b, Behaviour::Step(z) if *z == y)), "{x}"),
            _ => assert!(all.iter().any(|b| b.is_value()), "{x}"),
        }
    }
}

#[test]
fn trace_follows_gamma() {
    let f = common::cbn();
    for x in f.u.terms().iter().step_by(7) {
        let tr = f.model.reduce_trace(x, 1000).unwrap();
        for w in tr.terms.windows(2) {
            assert_eq!(step_target(&f.model, &w[0]).as_ref(), Some(&w[1]));
        }
        assert!(step_target(&f.model, tr.last()).is_none());
    }
}

#[test]
fn down_n_is_monotone() {
    let f = common::cbn();
    let mut prev = f.model.down_n(&f.u, 0).unwrap();
    assert_eq!(prev.count(), 0);
    for n in 1..12 {
        let next = f.model.down_n(&f.u, n).unwrap();
        assert!(prev.le(&next), "⇓_{} ≰ ⇓_{n}", n - 1);
        prev = next;
    }
    assert!(prev.is_full());
}

#[test]
fn enumeration_is_deterministic_and_well_typed() {
    let sig = Signature::xtcl();
    for ty in enumerate_types(4) {
        let a = enumerate_terms(&sig, &ty, 6, 4);
        assert_eq!(a, enumerate_terms(&sig, &ty, 6, 4));
        assert!(a.iter().all(|x| x.ty() == &ty && x.size() <= 6));
    }
}

#[test]
fn closed_universe_contains_reducts_and_labelled_results() {
    let f = common::cbn();
    for x in f.u.terms() {
        match f.model.gamma(x).unwrap().unwrap() {
            Behaviour::Step(y) => assert!(f.u.contains(&y), "{y}"),
            Behaviour::Fun(g) => {
                for &l in f.u.labels(g.domain()) {
                    assert!(f.u.contains(&g.apply(f.u.term(l)).unwrap()));
                }
            }
            Behaviour::UnitDone => {}
        }
    }
}

#[test]
fn universe_types_respect_bound() {
    let u = Universe::enumerate(Signature::xtcl(), 5, 3);
    assert!(u.terms().iter().all(|x| x.max_node_type_size() <= 3));
    assert!(u.types().iter().all(|ty| ty.size() <= 3));
    assert!(u.types().contains(&Ty::Unit));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn gamma_n_composes(idx in any::<prop::sample::Index>(), m in 0usize..5, n in 0usize..5) {
        let f = common::cbn();
        let x = f.u.term(idx.index(f.u.len()));
        let whole = f.model.gamma_n(x, m + n).unwrap();
        let composed = match f.model.gamma_n(x, m).unwrap() {
            GammaN::Reducing(y) => f.model.gamma_n(&y, n).unwrap(),
            other => other,
        };
        prop_assert_eq!(whole, composed);
    }

    #[test]
    fn cbv_gamma_n_composes(idx in any::<prop::sample::Index>(), m in 0usize..5, n in 0usize..5) {
        let f = common::cbv();
        let x = f.u.term(idx.index(f.u.len()));
        let composed = match f.model.gamma_n(x, m).unwrap() {
            GammaN::Reducing(y) => f.model.gamma_n(&y, n).unwrap(),
            other => other,
        };
        prop_assert_eq!(f.model.gamma_n(x, m + n).unwrap(), composed);
    }

    #[test]
    fn print_parse_roundtrip(idx in any::<prop::sample::Index>()) {
        let f = common::cbn();
        let x = f.u.term(idx.index(f.u.len()));
        prop_assert_eq!(&parse_term(&x.to_string()).unwrap(), x);
    }

    #[test]
    fn type_sizes_grow_under_arrows(n in 1usize..6) {
        let small = enumerate_types(n);
        let big = enumerate_types(n + 1);
        prop_assert!(small.iter().all(|ty| big.contains(ty) && ty.size() <= n && ty.size() >= 1));
        for a in &small {
            for b in &small {
                let ab = Ty::arrow(a.clone(), b.clone());
                prop_assert!(ab.size() > a.size() && ab.size() > b.size());
            }
        }
    }
}
