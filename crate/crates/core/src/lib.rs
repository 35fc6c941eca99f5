//! Algorithms for finite semigroup morphisms: synthesis of unambiguous
//! universal automata over finite and ultimately periodic words, Ramsey
//! splits, factorization trees, and unambiguous (omega-)rational expressions.
//!
//! The crate is `no_std` + `alloc`; all IO lives in the companion CLI crate.
#![cfg_attr(not(test), no_std)]
#![warn(missing_docs)]

extern crate alloc;

pub mod algebra;
pub mod automaton;
pub mod ramsey;
pub mod rexpr;
pub mod synthesis;
#[cfg(test)]
pub(crate) mod testutil;

pub use algebra::{Elem, FiniteSemigroup, Morphism, PowerProfile};
pub use automaton::{Bounds, GoodnessReport, OrderedAutomaton, RunTrace, UpWord};
pub use ramsey::{FactTree, HeightAssignment, Split};
pub use rexpr::{ElimTable, ExprCheck, ParseTree, RExpr, RExprError};
pub use synthesis::{BuildReport, CaseDecision, CaseKind};
