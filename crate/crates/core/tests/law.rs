mod common;

use proptest::prelude::*;

use hogsos::law::{
    flatness_check, instantiate, load_law, matching_rules, parse_law, simplicity_check, validate_format, LawError,
    LawSpec, RankAssignment, BUILTIN_LAWS,
};
use hogsos::semantics::{Behaviour, Model};
use hogsos::syntax::{close_universe, parse_term, Universe};
use hogsos::wtcheck::{respects_weak_check, Verdict};

fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn small_universe(m: &Model, sb: usize, tb: usize) -> Universe {
    let u = Universe::enumerate(m.law().signature(), sb, tb).with_label_bound(3);
    close_universe(u, &m.step_fn(), 100_000).unwrap()
}

#[test]
fn builtin_laws_are_well_formed_and_simple() {
    for name in BUILTIN_LAWS {
        let law = LawSpec::builtin(name).unwrap();
        assert!(validate_format(&law).accepted, "{name}");
        assert!(simplicity_check(&law).accepted, "{name}");
        assert!(flatness_check(&law, &RankAssignment::standard(&law)).unwrap().accepted, "{name}");
    }
    assert!(LawSpec::builtin("xtcl-lazy").is_none());
}

#[test]
fn self_loop_fixture_loads() {
    let law = load_law(&fixture("self_loop.law")).unwrap();
    assert_eq!(law.name, "self-loop");
    assert_eq!(law.rules.len(), LawSpec::xtcl_cbn().rules.len() + 2);
    assert!(simplicity_check(&law).accepted);
}

#[test]
fn unbound_metavariable_is_rejected() {
    let src = fixture("broken.law");
    assert!(parse_law(&src).is_ok());
    match load_law(&src) {
        Err(LawError::Invalid { name, report }) => {
            assert_eq!(name, "broken");
            assert!(report.summary().contains('Y'), "{}", report.summary());
        }
        other => panic!("expected a validation error, got {other:?}"),
    }
}

#[test]
fn syntax_errors_carry_a_line() {
    let err = load_law("law x\nextends xtcl-cbn\nrule ??\n").unwrap_err();
    assert!(matches!(err, LawError::Syntax { line: 3, .. }), "{err}");
    assert!(matches!(load_law("law x\nextends nowhere\n"), Err(LawError::UnknownBase(_))));
}

#[test]
fn inverted_ranks_break_flatness_at_s_double_prime() {
    let law = LawSpec::xtcl_cbn();
    let rank = RankAssignment::from_json(&fixture("inverted_rank.json")).unwrap();
    let r = flatness_check(&law, &rank).unwrap();
    assert!(!r.accepted);
    assert!(!r.violations.is_empty());
    assert!(r.violations.iter().all(|v| v.rule.starts_with("S''#") && v.rank == 0), "{:?}", r.violations);
}

#[test]
fn missing_rank_is_an_error() {
    let law = load_law(&fixture("self_loop.law")).unwrap();
    let rank = RankAssignment::standard(&LawSpec::xtcl_cbn());
    assert!(matches!(flatness_check(&law, &rank), Err(LawError::MissingRank(op)) if op == "f"));
}

#[test]
fn instantiate_matches_gamma() {
    let f = common::cbn();
    for t in f.u.terms().iter().step_by(5) {
        let mut arg_beh = |i: usize| f.model.gamma_all(&t.args()[i]);
        let bs = instantiate(f.model.law(), t, &mut arg_beh).unwrap();
        assert_eq!(bs.len(), 1, "{t}");
        let arg_behs: Vec<Vec<Behaviour>> = t.args().iter().map(|a| f.model.gamma_all(a).unwrap()).collect();
        assert_eq!(matching_rules(f.model.law(), &t.op().sym(), &arg_behs).len(), 1, "{t}");
        let g = f.model.gamma(t).unwrap().unwrap();
        match (&bs[0], &g) {
            (Behaviour::Step(a), Behaviour::Step(b)) => assert_eq!(a, b),
            (a, b) => assert_eq!(a.is_value(), b.is_value()),
        }
    }
}

#[test]
fn nd_application_fires_both_rules() {
    let m = Model::new(LawSpec::xtcl_nd());
    let t = parse_term("(app (app I[(-> unit unit)] I[unit]) (app I[unit] e))").unwrap();
    let mut arg_beh = |i: usize| m.gamma_all(&t.args()[i]);
    assert_eq!(instantiate(m.law(), &t, &mut arg_beh).unwrap().len(), 2);
}

#[test]
fn weak_respect_is_trivial_at_zero() {
    for law in [LawSpec::xtcl_cbn(), LawSpec::xtcl_cbv(), load_law(&fixture("self_loop.law")).unwrap()] {
        let m = Model::new(law);
        let u = small_universe(&m, 4, 2);
        let r = respects_weak_check(&m, &u, 0, 100).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{}", r.law);
    }
}

#[test]
fn cbn_respects_weak_transitions() {
    let f = common::cbn();
    let r = respects_weak_check(&f.model, &f.u, 2, 100).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{:?}", r.counterexamples.first());
    assert!(r.universe_closed);
}

#[test]
fn cbv_fails_weak_respect_on_a_constant_function() {
    let f = common::cbv();
    let r = respects_weak_check(&f.model, &f.u, 2, 100).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    let cx = &r.counterexamples[0];
    assert_eq!(cx.operator, "app");
    assert_eq!(cx.n, 2);
}

#[test]
fn self_loop_fails_weak_respect() {
    let m = Model::new(load_law(&fixture("self_loop.law")).unwrap());
    let u = small_universe(&m, 4, 2);
    let r = respects_weak_check(&m, &u, 2, 100).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    assert!(r.counterexamples.iter().all(|c| c.operator == "f"));
}

#[test]
fn zero_budget_is_inconclusive() {
    let f = common::cbn();
    let r = respects_weak_check(&f.model, &f.u, 2, 0).unwrap();
    assert_eq!(r.verdict, Verdict::Inconclusive);
    assert!(r.counterexamples.is_empty() && !r.inconclusive.is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Flatness only depends on the order of ranks.
    #[test]
    fn flatness_is_invariant_under_strictly_increasing_remaps(
        ranks in prop::collection::vec(0u32..3, 8),
        scale in 1u32..5,
        shift in 0u32..7,
    ) {
        let law = LawSpec::xtcl_cbn();
        let names: Vec<String> = RankAssignment::standard(&law).0.into_keys().collect();
        let base = RankAssignment(names.iter().cloned().zip(ranks.iter().copied().cycle()).collect());
        let remapped = RankAssignment(base.0.iter().map(|(k, v)| (k.clone(), v * scale + shift)).collect());
        let a = flatness_check(&law, &base).unwrap();
        let b = flatness_check(&law, &remapped).unwrap();
        prop_assert_eq!(a.accepted, b.accepted);
        let ra: Vec<&String> = a.violations.iter().map(|v| &v.rule).collect();
        let rb: Vec<&String> = b.violations.iter().map(|v| &v.rule).collect();
        prop_assert_eq!(ra, rb);
    }
}
