//! Extends call-by-name xTCL with a new operator given in the rule-file
//! syntax, then runs it and checks the rule formats.

use hogsos::law::{flatness_check, load_law, simplicity_check, RankAssignment};
use hogsos::semantics::Model;
use hogsos::syntax::parse_term_in;

const TWICE: &str = "\
law twice
extends xtcl-cbn
op twice(unit) : unit
rule twice: arg0 -> X => step twice(X)
rule twice: arg0 val => step arg0
";

fn main() -> anyhow::Result<()> {
    let law = load_law(TWICE)?;
    for rule in law.rules.iter().filter(|r| r.op.name() == "twice") {
        println!("{}: {rule}", law.rule_id(rule));
    }
    let model = Model::new(law);
    let t = parse_term_in("twice((app I[unit] (app I[unit] e)))", &model.law().signature())?;
    print!("{}", model.reduce_trace(&t, 100)?);

    let flat = flatness_check(model.law(), &RankAssignment::standard(model.law()))?;
    let simple = simplicity_check(model.law());
    println!("flat: {}, simple: {}", flat.accepted, simple.accepted);
    for v in &simple.violations {
        println!("  {}: {}", v.rule, v.message);
    }
    Ok(())
}
