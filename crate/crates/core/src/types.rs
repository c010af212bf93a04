//! Simple types `unit | τ → τ`, their size measure, and bounded enumeration.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

/// A simple type. Children are shared, so cloning is cheap.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Ty {
    Unit,
    Arrow(Arc<Ty>, Arc<Ty>),
}

impl Ty {
    pub fn arrow(dom: Ty, cod: Ty) -> Ty {
        Ty::Arrow(Arc::new(dom), Arc::new(cod))
    }

    /// Right-nested arrow `t0 → t1 → … → tn`.
    pub fn arrows<I: IntoIterator<Item = Ty>>(tys: I) -> Ty {
        let mut tys: Vec<Ty> = tys.into_iter().collect();
        let mut acc = tys.pop().expect("arrows: empty type list");
        while let Some(t) = tys.pop() {
            acc = Ty::arrow(t, acc);
        }
        acc
    }

    /// `♯τ`: number of `unit` leaves.
    pub fn size(&self) -> usize {
        match self {
            Ty::Unit => 1,
            Ty::Arrow(a, b) => a.size() + b.size(),
        }
    }

    pub fn is_unit(&self) -> bool {
        matches!(self, Ty::Unit)
    }

    pub fn as_arrow(&self) -> Option<(&Ty, &Ty)> {
        match self {
            Ty::Unit => None,
            Ty::Arrow(a, b) => Some((a, b)),
        }
    }

    pub fn domain(&self) -> Option<&Ty> {
        self.as_arrow().map(|(a, _)| a)
    }

    pub fn codomain(&self) -> Option<&Ty> {
        self.as_arrow().map(|(_, b)| b)
    }
}

/// Size first, then `unit` before arrows, then domain, then codomain.
/// This is the order produced by [`enumerate_types`].
impl Ord for Ty {
    fn cmp(&self, other: &Self) -> Ordering {
        self.size().cmp(&other.size()).then_with(|| match (self, other) {
            (Ty::Unit, Ty::Unit) => Ordering::Equal,
            (Ty::Unit, Ty::Arrow(..)) => Ordering::Less,
            (Ty::Arrow(..), Ty::Unit) => Ordering::Greater,
            (Ty::Arrow(a1, b1), Ty::Arrow(a2, b2)) => a1.cmp(a2).then_with(|| b1.cmp(b2)),
        })
    }
}

impl PartialOrd for Ty {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ty::Unit => write!(f, "unit"),
            Ty::Arrow(a, b) => write!(f, "(-> {a} {b})"),
        }
    }
}

impl fmt::Debug for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// All types with `size ≤ max_size`, ascending by size and then structurally.
pub fn enumerate_types(max_size: usize) -> Vec<Ty> {
    let mut by_size: Vec<Vec<Ty>> = vec![Vec::new(); max_size + 1];
    if max_size >= 1 {
        by_size[1].push(Ty::Unit);
    }
    for n in 2..=max_size {
        let mut level = Vec::new();
        for k in 1..n {
            for a in &by_size[k] {
                for b in &by_size[n - k] {
                    level.push(Ty::arrow(a.clone(), b.clone()));
                }
            }
        }
        by_size[n] = level;
    }
    by_size.into_iter().flatten().collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("type syntax error at byte {pos}: {msg}")]
pub struct TyParseError {
    pub pos: usize,
    pub msg: String,
}

impl FromStr for Ty {
    type Err = TyParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = crate::lex::Cursor::new(s);
        let ty = parse_ty(&mut p)?;
        p.skip_ws();
        if !p.at_end() {
            return Err(TyParseError { pos: p.pos(), msg: "trailing input after type".into() });
        }
        Ok(ty)
    }
}

/// Parses `unit` or `(-> A B …)` at the cursor.
pub(crate) fn parse_ty(p: &mut crate::lex::Cursor<'_>) -> Result<Ty, TyParseError> {
    p.skip_ws();
    let start = p.pos();
    if p.eat_keyword("unit") {
        return Ok(Ty::Unit);
    }
    if p.eat('(') {
        p.skip_ws();
        if !p.eat_str("->") {
            return Err(TyParseError { pos: p.pos(), msg: "expected `->` after `(`".into() });
        }
        let mut parts = Vec::new();
        loop {
            p.skip_ws();
            if p.eat(')') {
                break;
            }
            if p.at_end() {
                return Err(TyParseError { pos: p.pos(), msg: "unclosed arrow type".into() });
            }
            parts.push(parse_ty(p)?);
        }
        if parts.len() < 2 {
            return Err(TyParseError { pos: start, msg: "arrow type needs at least two components".into() });
        }
        return Ok(Ty::arrows(parts));
    }
    Err(TyParseError { pos: start, msg: "expected `unit` or `(-> …)`".into() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u() -> Ty {
        Ty::Unit
    }

    #[test]
    fn sizes() {
        assert_eq!(u().size(), 1);
        assert_eq!(Ty::arrow(u(), u()).size(), 2);
        assert_eq!(Ty::arrow(Ty::arrow(u(), u()), u()).size(), 3);
    }

    #[test]
    fn enumeration_small() {
        assert_eq!(enumerate_types(1), vec![u()]);
        assert_eq!(enumerate_types(2), vec![u(), Ty::arrow(u(), u())]);
        let three = enumerate_types(3);
        assert_eq!(three.len(), 4);
        assert!(three.contains(&Ty::arrow(Ty::arrow(u(), u()), u())));
        assert!(three.contains(&Ty::arrow(u(), Ty::arrow(u(), u()))));
    }

    #[test]
    fn enumeration_is_sorted_and_bounded() {
        let tys = enumerate_types(6);
        for w in tys.windows(2) {
            assert!(w[0] < w[1]);
        }
        assert!(tys.iter().all(|t| t.size() <= 6));
        // Catalan numbers 1,1,2,5,14,42
        assert_eq!(tys.len(), 1 + 1 + 2 + 5 + 14 + 42);
    }

    #[test]
    fn parse_and_print() {
        let t: Ty = "(-> unit unit unit)".parse().unwrap();
        assert_eq!(t, Ty::arrow(u(), Ty::arrow(u(), u())));
        assert_eq!(t.to_string(), "(-> unit (-> unit unit))");
        assert_eq!(t.to_string().parse::<Ty>().unwrap(), t);
        let err = "(-> unit)".parse::<Ty>().unwrap_err();
        assert_eq!(err.pos, 0);
        assert!("(=> unit unit)".parse::<Ty>().is_err());
        assert!("unit x".parse::<Ty>().is_err());
    }
}
