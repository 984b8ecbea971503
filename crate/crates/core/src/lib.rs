//! Exact-arithmetic workbench for the geometric quantization of symplectic
//! toric quasifolds.
//!
//! The crate computes quantizations of toric quasifolds presented by simple
//! polytopes (rational or not), decomposes equivariant indices over tori and
//! compact Lie groups of type A, and mechanically verifies the quantization
//! identities (invariants commute with reduction, shifting, stages, abelian
//! localization) by exact counting. No floating point is used anywhere in a
//! decision path: irrational inputs live in a user-declared number ring with
//! a closed multiplication table, and order comparisons are settled by exact
//! zero tests plus rational interval refinement.

pub mod algebra;
#[cfg(test)]
pub(crate) mod testutil;
pub mod charring;
pub mod doc;
pub mod lattice;
pub mod localization;
pub mod rootdata;
pub mod runner;
pub mod toric;
pub mod verify;

pub use algebra::{AlgebraContext, AlgebraElement, AlgebraError, AlgebraMatrix, CtxRef};
pub use charring::{CharError, SubalgebraData, TorusCharacter};
