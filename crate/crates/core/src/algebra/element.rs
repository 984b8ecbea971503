use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num::{BigInt, One, Signed, Zero};

use super::{AlgebraError, CtxRef, Rat};

/// An exact real number: a rational coefficient vector over a fixed context.
///
/// Equality and the zero test are exact coefficient tests. The derived `Ord`
/// is the lexicographic order on coefficient vectors; it is a canonical
/// serialization order, *not* the numeric order of the real values. Use
/// [`AlgebraElement::compare`] for numeric comparisons.
#[derive(Clone)]
pub struct AlgebraElement {
    ctx: CtxRef,
    coeffs: Vec<Rat>,
}

impl AlgebraElement {
    pub(crate) fn from_coeffs(ctx: CtxRef, coeffs: Vec<Rat>) -> Self {
        debug_assert_eq!(ctx.dim(), coeffs.len());
        Self { ctx, coeffs }
    }

    pub fn context(&self) -> &CtxRef {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn same_context(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.ctx, &other.ctx) || *self.ctx == *other.ctx
    }

    fn check_context(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.same_context(other) {
            Ok(())
        } else {
            Err(AlgebraError::ContextMismatch)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Rat::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(Rat::is_zero)
    }

    /// True when the element lies in the rational subfield.
    pub fn is_rational(&self) -> bool {
        self.coeffs[1..].iter().all(Rat::is_zero)
    }

    pub fn to_rational(&self) -> Option<Rat> {
        if self.is_rational() {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    /// True when the element is a rational integer.
    pub fn is_integer(&self) -> bool {
        self.is_rational() && self.coeffs[0].is_integer()
    }

    pub fn to_integer(&self) -> Option<BigInt> {
        if self.is_integer() {
            Some(self.coeffs[0].to_integer())
        } else {
            None
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_context(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self::from_coeffs(self.ctx.clone(), coeffs))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_context(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self::from_coeffs(self.ctx.clone(), coeffs))
    }

    pub fn neg(&self) -> Self {
        Self::from_coeffs(self.ctx.clone(), self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn scale(&self, r: &Rat) -> Self {
        Self::from_coeffs(self.ctx.clone(), self.coeffs.iter().map(|c| c * r).collect())
    }

    /// Exact product, expanded bilinearly through the multiplication table.
    pub fn mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_context(other)?;
        let dim = self.ctx.dim();
        let mut out = vec![Rat::zero(); dim];
        for (a, ca) in self.coeffs.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            for (b, cb) in other.coeffs.iter().enumerate() {
                if cb.is_zero() {
                    continue;
                }
                let w = ca * cb;
                for (k, t) in self.ctx.table_entry(a, b).iter().enumerate() {
                    if !t.is_zero() {
                        out[k] += &w * t;
                    }
                }
            }
        }
        Ok(Self::from_coeffs(self.ctx.clone(), out))
    }

    /// Multiplicative inverse, obtained by solving the rational linear
    /// system given by the multiplication-by-`self` matrix. Fails with
    /// `NotInvertible` when the declared algebra is not a field at this
    /// element.
    pub fn invert(&self) -> Result<Self, AlgebraError> {
        let dim = self.ctx.dim();
        if self.is_zero() {
            return Err(AlgebraError::NotInvertible(self.to_string()));
        }
        // m[k][b] = coefficient of gk in self * gb
        let mut m = vec![vec![Rat::zero(); dim]; dim];
        for (a, ca) in self.coeffs.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            for b in 0..dim {
                for (k, t) in self.ctx.table_entry(a, b).iter().enumerate() {
                    if !t.is_zero() {
                        m[k][b] += ca * t;
                    }
                }
            }
        }
        let mut rhs = vec![Rat::zero(); dim];
        rhs[0] = Rat::one();
        match rat_solve(m, rhs) {
            Some(coeffs) => Ok(Self::from_coeffs(self.ctx.clone(), coeffs)),
            None => Err(AlgebraError::NotInvertible(self.to_string())),
        }
    }

    pub fn div(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.mul(&other.invert()?)
    }

    /// Numeric comparison. Equality is decided by the exact zero test on the
    /// difference; a strict sign is decided by interval evaluation with
    /// enclosure refinement up to the context budget.
    pub fn compare(&self, other: &Self) -> Result<Ordering, AlgebraError> {
        let diff = self.sub(other)?;
        diff.sign()
    }

    /// Numeric sign of the element.
    pub fn sign(&self) -> Result<Ordering, AlgebraError> {
        if self.is_zero() {
            return Ok(Ordering::Equal);
        }
        if self.is_rational() {
            return Ok(super::rat_sign(&self.coeffs[0]));
        }
        self.ctx.sign_by_refinement(&self.coeffs)
    }

    pub fn is_nonnegative(&self) -> Result<bool, AlgebraError> {
        Ok(self.sign()? != Ordering::Less)
    }

    /// Largest rational integer `n <= self`, decided exactly.
    pub fn floor_int(&self) -> Result<BigInt, AlgebraError> {
        Ok(-self.neg().ceil_int()?)
    }

    /// Smallest rational integer `n >= self`, decided exactly.
    pub fn ceil_int(&self) -> Result<BigInt, AlgebraError> {
        if let Some(r) = self.to_rational() {
            return Ok(r.ceil().to_integer());
        }
        let iv = self.ctx.interval_of_coeffs(&self.coeffs);
        let mut lo = iv.lo.floor().to_integer();
        let mut hi = iv.hi.ceil().to_integer();
        // smallest n in [lo, hi] with self <= n
        while lo < hi {
            let mid = (&lo + &hi) / BigInt::from(2);
            let m = self.ctx_int(mid.clone());
            if self.compare(&m)? != Ordering::Greater {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Ok(lo)
    }

    fn ctx_int(&self, n: BigInt) -> Self {
        let mut coeffs = vec![Rat::zero(); self.ctx.dim()];
        coeffs[0] = Rat::from_integer(n);
        Self::from_coeffs(self.ctx.clone(), coeffs)
    }
}

impl PartialEq for AlgebraElement {
    fn eq(&self, other: &Self) -> bool {
        self.same_context(other) && self.coeffs == other.coeffs
    }
}

impl Eq for AlgebraElement {}

impl PartialOrd for AlgebraElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic order on coefficient vectors: the canonical serialization
/// order, not the numeric order.
impl Ord for AlgebraElement {
    fn cmp(&self, other: &Self) -> Ordering {
        self.coeffs.cmp(&other.coeffs)
    }
}

impl std::hash::Hash for AlgebraElement {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        for c in &self.coeffs {
            c.numer().hash(state);
            c.denom().hash(state);
        }
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.ctx.names();
        let mut first = true;
        for (c, n) in self.coeffs.iter().zip(names) {
            if c.is_zero() {
                continue;
            }
            let (sign, mag) = if c.is_negative() {
                ("-", -c.clone())
            } else {
                ("+", c.clone())
            };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
                first = false;
            } else {
                write!(f, " {sign} ")?;
            }
            if n == "1" {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{n}")?;
            } else {
                write!(f, "{mag}*{n}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Dense rational Gauss-Jordan solve of `m x = rhs`; `None` when singular or
/// inconsistent.
pub(crate) fn rat_solve(mut m: Vec<Vec<Rat>>, mut rhs: Vec<Rat>) -> Option<Vec<Rat>> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; cols];
    let mut row = 0;
    for col in 0..cols {
        let Some(p) = (row..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        rhs.swap(row, p);
        let inv = {
            let piv = &m[row][col];
            Rat::one() / piv.clone()
        };
        for c in col..cols {
            let v = &m[row][c] * &inv;
            m[row][c] = v;
        }
        rhs[row] = &rhs[row] * &inv;
        for r in 0..rows {
            if r == row || m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].clone();
            for c in col..cols {
                let sub = &factor * &m[row][c];
                m[r][c] = &m[r][c] - &sub;
            }
            let sub = &factor * &rhs[row];
            rhs[r] = &rhs[r] - &sub;
        }
        pivot_of_col[col] = Some(row);
        row += 1;
        if row == rows {
            break;
        }
    }
    // Inconsistent rows?
    for r in row..rows {
        if !rhs[r].is_zero() {
            return None;
        }
    }
    // For inversion we need a unique solution.
    if pivot_of_col.iter().any(Option::is_none) {
        return None;
    }
    let mut x = vec![Rat::zero(); cols];
    for (col, p) in pivot_of_col.iter().enumerate() {
        x[col] = rhs[p.unwrap()].clone();
    }
    Some(x)
}
