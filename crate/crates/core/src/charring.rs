//! Finite character arithmetic for tori: weight-multiplicity maps, products,
//! restriction along lattice maps, and invariant parts under subalgebras or
//! finite abelian subgroups.
//!
//! A character stores a finite map from weights to (possibly negative)
//! integer multiplicities, together with a shared weight offset. The offset
//! carries the non-lattice shift of ambient characters, so the stored
//! weights of a quantization character remain integral while irrationality
//! is confined to the offset.

use std::collections::BTreeMap;

use num::{BigInt, Integer, Zero};
use thiserror::Error;

use super::algebra::{AlgebraElement, AlgebraError, CtxRef};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CharError {
    #[error("characters live over different weight domains")]
    DomainMismatch,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

pub type Weight = Vec<AlgebraElement>;

/// A finitely supported virtual character of a torus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorusCharacter {
    ctx: CtxRef,
    dim: usize,
    offset: Weight,
    terms: BTreeMap<Weight, i64>,
}

impl TorusCharacter {
    pub fn empty(ctx: CtxRef, dim: usize) -> Self {
        let offset = vec![ctx.zero(); dim];
        Self { ctx, dim, offset, terms: BTreeMap::new() }
    }

    /// The unit character {0 -> 1}.
    pub fn unit(ctx: CtxRef, dim: usize) -> Self {
        let mut c = Self::empty(ctx.clone(), dim);
        c.add_term(vec![ctx.zero(); dim], 1);
        c
    }

    pub fn from_entries(
        ctx: CtxRef,
        dim: usize,
        entries: impl IntoIterator<Item = (Weight, i64)>,
    ) -> Result<Self, CharError> {
        let mut c = Self::empty(ctx, dim);
        for (w, m) in entries {
            if w.len() != dim {
                return Err(CharError::ShapeMismatch(format!(
                    "weight of length {} in a rank-{dim} character",
                    w.len()
                )));
            }
            c.add_term(w, m);
        }
        Ok(c)
    }

    /// Convenience constructor over the rational context.
    pub fn from_integer_entries(dim: usize, entries: &[(Vec<i64>, i64)]) -> Self {
        let ctx = crate::algebra::AlgebraContext::rational();
        let mut c = Self::empty(ctx.clone(), dim);
        for (w, m) in entries {
            let weight = w.iter().map(|&x| ctx.from_int(x)).collect();
            c.add_term(weight, *m);
        }
        c
    }

    pub fn with_offset(mut self, offset: Weight) -> Result<Self, CharError> {
        if offset.len() != self.dim {
            return Err(CharError::ShapeMismatch("offset length".into()));
        }
        self.offset = offset;
        Ok(self)
    }

    pub fn context(&self) -> &CtxRef {
        &self.ctx
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn offset(&self) -> &Weight {
        &self.offset
    }

    /// Stored (offset-relative) entries in canonical order.
    pub fn entries(&self) -> impl Iterator<Item = (&Weight, i64)> {
        self.terms.iter().map(|(w, m)| (w, *m))
    }

    pub fn support_len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Signed sum of all multiplicities.
    pub fn total(&self) -> i64 {
        self.terms.values().sum()
    }

    pub fn multiplicity(&self, stored: &Weight) -> i64 {
        self.terms.get(stored).copied().unwrap_or(0)
    }

    /// Absolute weight of a stored entry: offset + stored part.
    pub fn absolute_weight(&self, stored: &Weight) -> Result<Weight, CharError> {
        stored
            .iter()
            .zip(&self.offset)
            .map(|(w, o)| w.add(o).map_err(CharError::from))
            .collect()
    }

    pub fn add_term(&mut self, weight: Weight, mult: i64) {
        if mult == 0 {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(weight) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += mult;
                // No zero-multiplicity entries are stored.
                if *e.get() == 0 {
                    e.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(mult);
            }
        }
    }

    pub fn add_assign(&mut self, other: &TorusCharacter) -> Result<(), CharError> {
        self.check_domain(other)?;
        if self.offset != other.offset {
            return Err(CharError::DomainMismatch);
        }
        for (w, m) in other.entries() {
            self.add_term(w.clone(), m);
        }
        Ok(())
    }

    pub fn scaled(&self, k: i64) -> Self {
        let mut out = Self::empty(self.ctx.clone(), self.dim);
        out.offset = self.offset.clone();
        if k != 0 {
            for (w, m) in self.entries() {
                out.terms.insert(w.clone(), m * k);
            }
        }
        out
    }

    fn check_domain(&self, other: &TorusCharacter) -> Result<(), CharError> {
        if self.dim != other.dim || !self.ctx.as_ref().eq(other.ctx.as_ref()) {
            return Err(CharError::DomainMismatch);
        }
        Ok(())
    }

    /// Product in the character ring: convolution of multiplicity maps.
    /// Offsets add.
    pub fn product(&self, other: &TorusCharacter) -> Result<TorusCharacter, CharError> {
        self.check_domain(other)?;
        let mut out = TorusCharacter::empty(self.ctx.clone(), self.dim);
        out.offset = self
            .offset
            .iter()
            .zip(&other.offset)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_, _>>()?;
        for (w1, m1) in self.entries() {
            for (w2, m2) in other.entries() {
                let w: Weight = w1
                    .iter()
                    .zip(w2)
                    .map(|(a, b)| a.add(b))
                    .collect::<Result<_, _>>()?;
                out.add_term(w, m1 * m2);
            }
        }
        Ok(out)
    }

    /// Keep exactly the weights pairing to zero with every basis vector of
    /// the subalgebra. The pairing is evaluated on absolute weights
    /// (offset included) and decided by the exact zero test.
    pub fn invariant_part(&self, h: &SubalgebraData) -> Result<TorusCharacter, CharError> {
        if h.dim != self.dim || !h.ctx.as_ref().eq(self.ctx.as_ref()) {
            return Err(CharError::DomainMismatch);
        }
        let mut out = TorusCharacter::empty(self.ctx.clone(), self.dim);
        out.offset = self.offset.clone();
        'weights: for (w, m) in self.entries() {
            let abs = self.absolute_weight(w)?;
            for v in &h.basis {
                if !dot(&abs, v)?.is_zero() {
                    continue 'weights;
                }
            }
            out.add_term(w.clone(), m);
        }
        Ok(out)
    }

    /// Push weights along an integer matrix: `w -> A w`, multiplicities
    /// added on collisions. The offset is pushed the same way.
    pub fn restrict_along(&self, a: &[Vec<BigInt>]) -> Result<TorusCharacter, CharError> {
        let new_dim = a.len();
        for row in a {
            if row.len() != self.dim {
                return Err(CharError::ShapeMismatch(format!(
                    "matrix row of length {} against rank {}",
                    row.len(),
                    self.dim
                )));
            }
        }
        let apply = |w: &Weight| -> Result<Weight, CharError> {
            a.iter()
                .map(|row| {
                    let mut acc = self.ctx.zero();
                    for (c, x) in row.iter().zip(w) {
                        if !c.is_zero() {
                            acc = acc.add(&x.scale(&num::BigRational::from_integer(c.clone())))?;
                        }
                    }
                    Ok(acc)
                })
                .collect()
        };
        let mut out = TorusCharacter::empty(self.ctx.clone(), new_dim);
        out.offset = apply(&self.offset)?;
        for (w, m) in self.entries() {
            out.add_term(apply(w)?, m);
        }
        Ok(out)
    }

    /// Invariants under a finite abelian group `prod Z_{k_i}` inside the
    /// torus. Row `i` of the pairing is the weight functional of the `i`-th
    /// generator; a weight is kept when every pairing value is an exact
    /// rational integer divisible by the corresponding order.
    pub fn finite_group_invariants(
        &self,
        orders: &[u64],
        pairing: &[Vec<BigInt>],
    ) -> Result<TorusCharacter, CharError> {
        if orders.len() != pairing.len() {
            return Err(CharError::ShapeMismatch(
                "one pairing row per group generator".into(),
            ));
        }
        for row in pairing {
            if row.len() != self.dim {
                return Err(CharError::ShapeMismatch(format!(
                    "pairing row of length {} against rank {}",
                    row.len(),
                    self.dim
                )));
            }
        }
        let mut out = TorusCharacter::empty(self.ctx.clone(), self.dim);
        out.offset = self.offset.clone();
        'weights: for (w, m) in self.entries() {
            let abs = self.absolute_weight(w)?;
            for (order, row) in orders.iter().zip(pairing) {
                let mut acc = self.ctx.zero();
                for (c, x) in row.iter().zip(&abs) {
                    if !c.is_zero() {
                        acc = acc.add(&x.scale(&num::BigRational::from_integer(c.clone())))?;
                    }
                }
                let Some(value) = acc.to_integer() else {
                    continue 'weights;
                };
                if !value.mod_floor(&BigInt::from(*order)).is_zero() {
                    continue 'weights;
                }
            }
            out.add_term(w.clone(), m);
        }
        Ok(out)
    }

    /// The stored weights as integer vectors, when they all are.
    pub fn integer_support(&self) -> Option<Vec<(Vec<BigInt>, i64)>> {
        let mut out = Vec::with_capacity(self.terms.len());
        for (w, m) in self.entries() {
            let mut iw = Vec::with_capacity(w.len());
            for x in w {
                iw.push(x.to_integer()?);
            }
            out.push((iw, m));
        }
        Some(out)
    }
}

/// A list of vectors spanning a subalgebra of the torus Lie algebra (or a
/// sublattice basis in the rational case).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubalgebraData {
    ctx: CtxRef,
    dim: usize,
    basis: Vec<Weight>,
}

impl SubalgebraData {
    pub fn new(ctx: CtxRef, dim: usize, basis: Vec<Weight>) -> Result<Self, CharError> {
        for v in &basis {
            if v.len() != dim {
                return Err(CharError::ShapeMismatch(format!(
                    "basis vector of length {} in rank {dim}",
                    v.len()
                )));
            }
            if v.iter().all(AlgebraElement::is_zero) {
                return Err(CharError::ShapeMismatch(
                    "zero vector in subalgebra basis".into(),
                ));
            }
        }
        Ok(Self { ctx, dim, basis })
    }

    pub fn trivial(ctx: CtxRef, dim: usize) -> Self {
        Self { ctx, dim, basis: Vec::new() }
    }

    pub fn basis(&self) -> &[Weight] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn context(&self) -> &CtxRef {
        &self.ctx
    }
}

/// Exact pairing of two algebra vectors over an explicit context, so that
/// the empty pairing still lands in the right ring.
pub fn dot_in(
    ctx: &CtxRef,
    a: &[AlgebraElement],
    b: &[AlgebraElement],
) -> Result<AlgebraElement, AlgebraError> {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = ctx.zero();
    for (x, y) in a.iter().zip(b) {
        acc = acc.add(&x.mul(y)?)?;
    }
    Ok(acc)
}

/// Exact pairing of two nonempty algebra vectors.
pub fn dot(a: &[AlgebraElement], b: &[AlgebraElement]) -> Result<AlgebraElement, AlgebraError> {
    let ctx = a
        .first()
        .map(|x| x.context().clone())
        .unwrap_or_else(crate::algebra::AlgebraContext::rational);
    dot_in(&ctx, a, b)
}
