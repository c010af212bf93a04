//! Parses, typechecks and reduces λ-terms under call-by-name.

use hogsos::stlc::{ltrace, parse_lterm, substitute, typecheck};
use hogsos::types::Ty;

fn main() -> anyhow::Result<()> {
    let t = parse_lterm(r"((\f:(-> unit unit). \x:unit. (f (f x)) \y:unit. y) ())", &[])?;
    println!("{t} : {}", typecheck(&[], &t)?);
    print!("{}", ltrace(&t, 100));

    // substitution under a binder shifts the substituted term; free
    // variables print as g0, g1, ... innermost first
    let body = parse_lterm(r"\y:unit. g", &["g"])?;
    let r = substitute(&[Ty::Unit], &Ty::Unit, &body, &parse_lterm("h", &["h"])?)?;
    println!("(\\y:unit. g)[g := h] = {r}");
    Ok(())
}
