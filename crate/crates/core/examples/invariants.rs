//! Checks relative invariants and logical predicates over a closed universe.

use hogsos::predicates::{invariant_check, logical_check, predicate_from_json, Predicate};
use hogsos::semantics::{Model, DEFAULT_FUEL};
use hogsos::syntax::{close_universe, Universe};

fn main() -> anyhow::Result<()> {
    let model = Model::cbn();
    let u = Universe::enumerate(model.law().signature(), 5, 3).with_label_bound(3);
    let u = close_universe(u, &model.step_fn(), 100_000)?;

    let down = model.down(&u, DEFAULT_FUEL)?;
    let r = logical_check(&model, &u, &down)?;
    println!("⇓ is logical: {} ({} members checked)", r.holds, r.checked);

    // a single redex whose reduct is left out
    let p = predicate_from_json(r#"{"unit": ["(app I[unit] e)"]}"#, &u)?;
    let r = invariant_check(&model, &u, &Predicate::full(u.len()), &p)?;
    println!("{{(app I[unit] e)}} is a ⊤-relative invariant: {}", r.holds);
    for v in &r.violations {
        println!("  {} : {} ({:?})", v.term, v.ty, v.reason);
    }
    Ok(())
}
