//! Assembles the strong normalization theorem's conditions for the
//! call-by-name and call-by-value laws, including weak respect.

use hogsos::law::{LawSpec, RankAssignment};
use hogsos::semantics::{Model, DEFAULT_FUEL};
use hogsos::syntax::{close_universe, Universe};
use hogsos::wtcheck::sn_theorem_report;

fn main() -> anyhow::Result<()> {
    for law in [LawSpec::xtcl_cbn(), LawSpec::xtcl_cbv()] {
        let model = Model::new(law);
        let u = Universe::enumerate(model.law().signature(), 6, 4).with_label_bound(3);
        let u = close_universe(u, &model.step_fn(), 1_000_000)?;
        let rank = RankAssignment::standard(model.law());
        let r = sn_theorem_report(&model, &rank, &u, 2, 100, DEFAULT_FUEL)?;
        println!("{}: {} ({} of {} terminate)", r.law, r.verdict, r.terminating, r.members);
        for c in &r.conditions {
            println!("  {:>2} {:<13} {}", c.id, format!("{:?}", c.status), c.description);
        }
        if let Some(cx) = r.weak_respect.counterexamples.first() {
            println!("  weak respect fails at {}({}), n = {}: {}", cx.operator, cx.args.join(", "), cx.n, cx.reason);
        }
    }
    Ok(())
}
