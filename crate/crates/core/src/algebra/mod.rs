//! Exact arithmetic in a user-declared finite-dimensional real algebra over
//! the rationals, plus exact linear algebra over it.
//!
//! A context declares generators `g0 = 1, g1, ..., gm`, a closed symmetric
//! multiplication table expressing every product `ga * gb` back in the basis,
//! and a rational interval enclosure for the real value of each generator.
//! Elements are rational coefficient vectors over one context. Zero tests are
//! exact; order comparisons fall back to enclosure refinement and fail loudly
//! (`Undecidable`) rather than guess.
//!
//! Soundness of the exact zero test rests on the declaration that the
//! generators are Q-linearly independent as real numbers. That assumption is
//! the user's to make; it is the single trust boundary of the crate.

mod context;
mod element;
mod matrix;

pub use context::{AlgebraContext, CtxRef, Enclosure, Interval};
pub use element::AlgebraElement;
pub(crate) use element::rat_solve;
pub use matrix::AlgebraMatrix;

use num::BigRational;
use thiserror::Error;

/// Exact rational scalar used throughout.
pub type Rat = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("multiplication table is not symmetric at ({0}, {1})")]
    TableNotSymmetric(usize, usize),
    #[error("unit row/column of the multiplication table is not the identity at index {0}")]
    UnitRowMissing(usize),
    #[error("enclosure of g{0}*g{1} is inconsistent with the multiplication table")]
    EnclosureInconsistent(usize, usize),
    #[error("malformed context: {0}")]
    MalformedContext(String),
    #[error("operands belong to different algebra contexts")]
    ContextMismatch,
    #[error("element {0} is not invertible in the declared algebra")]
    NotInvertible(String),
    #[error("comparison of {0} against zero is undecidable within the refinement budget; supply tighter enclosures")]
    Undecidable(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}

/// Exact sign of a rational.
pub(crate) fn rat_sign(r: &Rat) -> std::cmp::Ordering {
    use num::Zero;
    if r.is_zero() {
        std::cmp::Ordering::Equal
    } else if r > &Rat::zero() {
        std::cmp::Ordering::Greater
    } else {
        std::cmp::Ordering::Less
    }
}
