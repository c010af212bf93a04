//! Enumerates a bounded universe of closed xTCL terms and closes it under
//! reduction and labelled application.

use hogsos::semantics::Model;
use hogsos::syntax::{close_universe, Universe};

fn main() -> anyhow::Result<()> {
    let model = Model::cbn();
    let u = Universe::enumerate(model.law().signature(), 6, 4).with_label_bound(3);
    let enumerated = u.len();
    let u = close_universe(u, &model.step_fn(), 1_000_000)?;
    println!("{enumerated} enumerated, {} after closure (closed: {})", u.len(), u.is_closed());
    for ty in u.types() {
        let slice = u.slice(ty);
        println!("{:>36}  {:>5} terms, {:>3} labels, e.g. {}", ty.to_string(), slice.len(), u.labels(ty).len(), u.term(slice[0]));
    }
    Ok(())
}
