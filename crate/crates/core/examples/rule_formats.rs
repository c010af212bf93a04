//! Flatness under the standard and an inverted rank assignment, and
//! simplicity of the built-in laws.

use hogsos::law::{flatness_check, simplicity_check, LawSpec, RankAssignment, BUILTIN_LAWS};

fn main() -> anyhow::Result<()> {
    let law = LawSpec::xtcl_cbn();
    let standard = RankAssignment::standard(&law);
    println!("standard ranks {:?}: flat = {}", standard.0, flatness_check(&law, &standard)?.accepted);

    let inverted = RankAssignment(standard.0.iter().map(|(k, v)| (k.clone(), 1 - v)).collect());
    let r = flatness_check(&law, &inverted)?;
    println!("inverted ranks: flat = {}", r.accepted);
    for v in &r.violations {
        println!("  {}: {}", v.rule, v.message);
    }

    for name in BUILTIN_LAWS {
        let law = LawSpec::builtin(name).expect("built-in");
        println!("{name}: simple = {}", simplicity_check(&law).accepted);
    }
    Ok(())
}
