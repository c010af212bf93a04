//! Reduces S K K e under call-by-name and call-by-value and prints both traces.

use hogsos::law::LawSpec;
use hogsos::semantics::Model;
use hogsos::syntax::parse_term;

fn main() -> anyhow::Result<()> {
    let skke = parse_term("(app (app (app S[unit,(-> unit unit),unit] K[unit,(-> unit unit)]) K[unit,unit]) e)")?;
    for law in [LawSpec::xtcl_cbn(), LawSpec::xtcl_cbv()] {
        let name = law.name.clone();
        let trace = Model::new(law).reduce_trace(&skke, 100)?;
        println!("{name}: {} steps", trace.steps());
        print!("{trace}");
    }
    Ok(())
}
