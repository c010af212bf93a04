//! Certifies type safety of the simply typed λ-calculus by induction up to ■
//! over closed and open terms.

use hogsos::stlc::{safe_pred, up_to_black_check, LUniverse};

fn main() -> anyhow::Result<()> {
    let mut u = LUniverse::enumerate(6, 3, 2, 4);
    u.close(1_000_000);
    let s = u.stats();
    println!("{} terms ({} closed, {} open), closed under reduction: {}", s.members, s.closed_members, s.open_members, s.closed);

    let safe = u.predicate(|_, t| safe_pred(t, 10_000).holds());
    let r = up_to_black_check(&u, "Safe", &safe)?;
    for c in &r.clauses {
        println!("  ({}) {}: {} instances, {} counterexamples", c.clause, c.description, c.checked, c.counterexamples.len());
    }
    println!("certified: {}", r.certified);

    let not_app = u.predicate(|_, t| !t.is_app());
    let r = up_to_black_check(&u, "not-an-application", &not_app)?;
    println!("'not an application' certified: {}, e.g. {}", r.certified, r.clauses[2].counterexamples[0]);
    Ok(())
}
