//! Higher-order GSOS semantics for typed combinatory logic and the simply
//! typed λ-calculus, with logical predicates computed over finite term
//! universes.

mod lex;

pub mod cli;
pub mod henceforth;
pub mod law;
pub mod predicates;
pub mod semantics;
pub mod stlc;
pub mod syntax;
pub mod types;
pub mod wtcheck;
