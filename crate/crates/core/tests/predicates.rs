mod common;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use hogsos::henceforth::{henceforth_rel_tab, henceforth_tab, DirectPredicates};
use hogsos::predicates::{
    distance, distance_by_sizes, invariant_violations, predicate_from_json, predicate_to_json, Obs, Predicate,
};
use hogsos::semantics::DEFAULT_FUEL;

/// A random predicate, dense enough that `□P` is usually nonempty.
fn random(seed: u64, n: usize, density: f64) -> Predicate {
    let mut rng = StdRng::seed_from_u64(seed);
    Predicate::from_fn(n, |_| rng.gen_bool(density))
}

/// `Q ≤ P` obtained by dropping members of `P`.
fn below(seed: u64, p: &Predicate) -> Predicate {
    p.and(&random(seed ^ 0xabcd, p.len(), 0.8))
}

/// `c*P` along the step map; elements that do not step keep their bit.
fn reindex(p: &Predicate) -> Predicate {
    let tab = &common::cbn().tab;
    Predicate::from_fn(p.len(), |i| match tab.obs[i].as_slice() {
        [Obs::Step(Some(j))] => p.get(*j),
        _ => p.get(i),
    })
}

#[test]
fn distance_of_disjoint_slices_is_smallest_type() {
    let f = common::cbn();
    let n = f.u.len();
    let d = distance(&Predicate::full(n), &Predicate::empty(n), &f.u);
    assert_eq!(d.exponent, Some(1));
    assert_eq!(d.value(), 0.5);
    assert!(distance(&Predicate::full(n), &Predicate::full(n), &f.u).is_zero());
}

#[test]
fn termination_predicates_agree_with_box_down() {
    let f = common::cbn();
    let down = f.model.down(&f.u, DEFAULT_FUEL).unwrap();
    let boxdown = henceforth_tab(&f.tab, &down).unwrap().result;
    let mut d = DirectPredicates::new(&f.model, &f.u, DEFAULT_FUEL);
    let direct = d.table("box_down").unwrap();
    let plotkin = d.table("plotkin").unwrap();
    let tait = d.table("tait").unwrap();
    assert!(down.is_full());
    assert_eq!(boxdown, direct);
    assert_eq!(direct, plotkin);
    assert_eq!(plotkin, tait);
}

#[test]
fn cbv_box_down_is_full() {
    let f = common::cbv();
    let down = f.model.down(&f.u, DEFAULT_FUEL).unwrap();
    assert!(henceforth_tab(&f.tab, &down).unwrap().result.is_full());
}

#[test]
fn box_of_bottom_is_bottom() {
    let f = common::cbn();
    let r = henceforth_tab(&f.tab, &Predicate::empty(f.u.len())).unwrap();
    assert_eq!(r.result.count(), 0);
    let top = henceforth_tab(&f.tab, &Predicate::full(f.u.len())).unwrap();
    assert!(top.result.is_full());
    assert_eq!(top.iterations_outer, 1);
}

#[test]
fn json_roundtrip() {
    let f = common::cbn();
    let p = random(7, f.u.len(), 0.3);
    let json = predicate_to_json(&p, &f.u).to_string();
    assert_eq!(predicate_from_json(&json, &f.u).unwrap(), p);
    assert!(predicate_from_json(r#"{"unit": ["I[unit]"]}"#, &f.u).is_err());
    assert!(predicate_from_json(r#"{"unit": ["nonsense("]}"#, &f.u).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distance_is_an_ultrametric(a: u64, b: u64, c: u64) {
        let f = common::cbn();
        let n = f.u.len();
        let (p, q, r) = (random(a, n, 0.5), random(b, n, 0.5), random(c, n, 0.5));
        let d = |x: &Predicate, y: &Predicate| distance(x, y, &f.u);
        prop_assert!(d(&p, &p).is_zero());
        prop_assert_eq!(d(&p, &q), d(&q, &p));
        prop_assert!(d(&p, &r) <= d(&p, &q).max(d(&q, &r)));
        prop_assert!(d(&p, &q).value() <= 0.5);
        prop_assert_eq!(d(&p, &q).is_zero(), p == q);
    }

    #[test]
    fn distance_ignores_agreeing_elements(a: u64, flips in prop::collection::vec(any::<prop::sample::Index>(), 1..4)) {
        let f = common::cbn();
        let p = random(a, f.u.len(), 0.5);
        let mut q = p.clone();
        for i in &flips {
            let i = i.index(f.u.len());
            q.set(i, !q.get(i));
        }
        let expected = (0..f.u.len()).filter(|&i| p.get(i) != q.get(i)).map(|i| f.tab.type_sizes[i]).min();
        prop_assert_eq!(distance_by_sizes(&p, &q, &f.tab.type_sizes).exponent, expected);
    }

    #[test]
    fn reindexing_along_steps_is_non_expansive(a: u64, b: u64) {
        let f = common::cbn();
        let (p, q) = (random(a, f.u.len(), 0.5), random(b, f.u.len(), 0.5));
        prop_assert!(distance(&reindex(&p), &reindex(&q), &f.u) <= distance(&p, &q, &f.u));
    }

    #[test]
    fn lifting_is_antitone_in_s_and_monotone_in_p(a: u64, b: u64, idx: prop::sample::Index) {
        let f = common::cbn();
        let n = f.u.len();
        let (s, p) = (random(a, n, 0.7), random(b, n, 0.7));
        let (s_small, p_big) = (below(a, &s), p.or(&random(b ^ 1, n, 0.3)));
        let i = idx.index(n);
        if f.tab.in_lifting(&s, &p, i).holds() {
            prop_assert!(f.tab.in_lifting(&s_small, &p_big, i).holds());
        }
    }

    #[test]
    fn henceforth_is_a_fixed_point_below_p(a: u64, density in prop::sample::select(vec![0.9, 0.99, 0.999])) {
        let f = common::cbn();
        let p = random(a, f.u.len(), density);
        let r = henceforth_tab(&f.tab, &p).unwrap();
        let boxp = &r.result;
        prop_assert!(boxp.le(&p));
        prop_assert_eq!(&henceforth_rel_tab(&f.tab, boxp, &p).0, boxp);
        prop_assert!(invariant_violations(&f.tab, boxp, boxp).is_empty());
        // idempotent: □□P = □P
        prop_assert_eq!(&henceforth_tab(&f.tab, boxp).unwrap().result, boxp);
        for w in r.distances.windows(2) {
            prop_assert!(w[1].at_most_half_of(w[0]));
        }
    }

    #[test]
    fn relative_henceforth_is_antitone_in_s_and_monotone_in_p(a: u64, b: u64) {
        let f = common::cbn();
        let n = f.u.len();
        let (s, p) = (random(a, n, 0.9), random(b, n, 0.95));
        let (s_small, p_small) = (below(a, &s), below(b, &p));
        let g = henceforth_rel_tab(&f.tab, &s, &p).0;
        prop_assert!(henceforth_rel_tab(&f.tab, &s, &p_small).0.le(&g));
        prop_assert!(g.le(&henceforth_rel_tab(&f.tab, &s_small, &p).0));
    }

    #[test]
    fn relative_invariants_below_p_lie_below_box_p(a: u64, b: u64) {
        let f = common::cbn();
        let p = random(a, f.u.len(), 0.99);
        let boxp = henceforth_tab(&f.tab, &p).unwrap().result;
        let (q, _) = henceforth_rel_tab(&f.tab, &boxp, &below(b, &p));
        prop_assert!(invariant_violations(&f.tab, &boxp, &q).is_empty());
        prop_assert!(q.le(&boxp));
    }
}
