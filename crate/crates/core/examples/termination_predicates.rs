//! Compares □⇓ with the direct termination predicates ⤋ and SN.

use hogsos::henceforth::{henceforth_tab, DirectPredicates};
use hogsos::predicates::Tabulation;
use hogsos::semantics::{Model, DEFAULT_FUEL};
use hogsos::syntax::{close_universe, Universe};

fn main() -> anyhow::Result<()> {
    let model = Model::cbn();
    let u = Universe::enumerate(model.law().signature(), 6, 4).with_label_bound(3);
    let u = close_universe(u, &model.step_fn(), 1_000_000)?;
    let tab = Tabulation::from_universe(&model, &u)?;

    let down = model.down(&u, DEFAULT_FUEL)?;
    let boxdown = henceforth_tab(&tab, &down)?.result;
    let mut direct = DirectPredicates::new(&model, &u, DEFAULT_FUEL);
    for (name, p) in [
        ("⇓", down.clone()),
        ("□⇓", boxdown.clone()),
        ("□⇓ direct", direct.table("box_down")?),
        ("⤋", direct.table("plotkin")?),
        ("SN", direct.table("tait")?),
    ] {
        println!("{name:>10}: {} of {}, equal to □⇓: {}", p.count(), u.len(), p == boxdown);
    }
    println!("SN built {} applications outside the universe", direct.scratch_terms);
    Ok(())
}
