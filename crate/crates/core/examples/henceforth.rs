//! Computes □P by iterating S ↦ □(S,P) and prints the distance between
//! consecutive approximants.

use hogsos::henceforth::henceforth_tab;
use hogsos::predicates::{Predicate, Tabulation};
use hogsos::semantics::Model;
use hogsos::syntax::{close_universe, Universe};

fn main() -> anyhow::Result<()> {
    let model = Model::cbn();
    let u = Universe::enumerate(model.law().signature(), 6, 4).with_label_bound(3);
    let u = close_universe(u, &model.step_fn(), 1_000_000)?;
    let tab = Tabulation::from_universe(&model, &u)?;

    // P: every member except the identity at unit
    let id = u.id_of(&hogsos::syntax::parse_term("I[unit]")?).expect("I[unit] is enumerated");
    let p = Predicate::from_fn(u.len(), |i| i != id);
    let r = henceforth_tab(&tab, &p)?;
    println!("|P| = {}, |□P| = {} of {}", p.count(), r.result.count(), u.len());
    for (k, d) in r.distances.iter().enumerate() {
        println!("  step {k}: d(S_k, S_k+1) = {d}, inner sweeps {}", r.iterations_inner[k]);
    }
    Ok(())
}
