//! Desk-scale laboratory for budgeted subalgebra closures.
//!
//! The crate provides exact Cantor-normal-form ordinal arithmetic with
//! canonical countable enumerations, a deterministic budgeted closure
//! engine over immutable algebras, a toolbox of algebra constructions
//! (constant covers, singleton covers, uncurried families, witness
//! enrichments, Whaley lifts, stratified glues), Ramsey-style colorings
//! derived from closure enumerations, and reduced words over free
//! amalgams of cyclic groups.
//!
//! Everything is pure value manipulation over `core` + `alloc`; IO, the
//! experiment-file format, and the CLI live in the companion `chainlab`
//! crate.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod algebra;
pub mod amalgam;
pub mod constructions;
pub mod ordinal;
pub mod ramsey;

pub use algebra::{
    chain_from_free, chain_probe, closure, find_free_subset, is_free, member, Algebra,
    AlgebraError, Carrier, ClosureResult, Element, ElementTag, FreeSearch, Freeness, MemberVerdict,
    OpSym,
};
pub use ordinal::Ordinal;
