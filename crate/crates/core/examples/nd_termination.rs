//! Explores every maximal reduction path of the nondeterministic law from
//! each enumerated term.

use hogsos::law::LawSpec;
use hogsos::semantics::Model;
use hogsos::syntax::Universe;

fn main() -> anyhow::Result<()> {
    let model = Model::new(LawSpec::xtcl_nd());
    let u = Universe::enumerate(model.law().signature(), 7, 4);
    let mut explorer = model.nd_explorer();
    let (mut longest, mut branching) = (0, 0);
    for t in u.terms() {
        let o = explorer.explore(t, 1000)?;
        anyhow::ensure!(o.all_terminate, "{t} has a non-terminating path");
        longest = longest.max(o.longest_trace);
        branching += usize::from(model.gamma_all(t)?.len() > 1);
    }
    println!("{} terms, {branching} with a choice of redex", u.len());
    println!("all paths terminate; {} distinct reducts, longest path {longest}", explorer.visited());
    Ok(())
}
