//! Certifies strong normalization of call-by-name xTCL by induction up to □.

use hogsos::henceforth::up_to_box_check;
use hogsos::law::RankAssignment;
use hogsos::semantics::{Model, DEFAULT_FUEL};
use hogsos::syntax::{close_universe, Universe};

fn main() -> anyhow::Result<()> {
    let model = Model::cbn();
    let u = Universe::enumerate(model.law().signature(), 7, 4).with_label_bound(4);
    let u = close_universe(u, &model.step_fn(), 5_000_000)?;
    let down = model.down(&u, DEFAULT_FUEL)?;
    let r = up_to_box_check(&model, &RankAssignment::standard(model.law()), &u, &down)?;
    println!("universe: {} members, closed: {}", u.len(), u.is_closed());
    println!("flat: {}, |□⇓| = {}, instances checked: {}", r.flat, r.box_count, r.instances_checked);
    println!("certified: {}, ⇓ holds everywhere: {}", r.certified, r.conclusion_confirmed);
    Ok(())
}
