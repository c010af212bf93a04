//! Shared universes for the integration tests.

#![allow(dead_code)]

use std::sync::OnceLock;

use hogsos::law::LawSpec;
use hogsos::predicates::Tabulation;
use hogsos::semantics::Model;
use hogsos::syntax::{close_universe, Universe};

pub struct Fixture {
    pub model: Model,
    pub u: Universe,
    pub tab: Tabulation,
}

fn build(law: LawSpec, sb: usize, tb: usize, lb: usize) -> Fixture {
    let model = Model::new(law);
    let u = Universe::enumerate(model.law().signature(), sb, tb).with_label_bound(lb);
    let u = close_universe(u, &model.step_fn(), 1_000_000).expect("closure");
    assert!(u.is_closed());
    let tab = Tabulation::from_universe(&model, &u).expect("tabulation");
    Fixture { model, u, tab }
}

/// CBN at size 6, type bound 4, labels up to size 3.
pub fn cbn() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| build(LawSpec::xtcl_cbn(), 6, 4, 3))
}

pub fn cbv() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| build(LawSpec::xtcl_cbv(), 6, 4, 3))
}

/// ND closes quickly only at small bounds.
pub fn nd() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| build(LawSpec::xtcl_nd(), 5, 3, 3))
}
