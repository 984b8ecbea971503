use std::sync::Arc;

use num::{One, Signed, Zero};

use super::{rat_sign, AlgebraElement, AlgebraError, Rat};

/// Shared handle to an immutable algebra context.
pub type CtxRef = Arc<AlgebraContext>;

/// A closed rational interval `[lo, hi]` with exact endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enclosure {
    pub lo: Rat,
    pub hi: Rat,
}

impl Enclosure {
    pub fn new(lo: Rat, hi: Rat) -> Result<Self, AlgebraError> {
        if lo > hi {
            return Err(AlgebraError::MalformedContext(format!(
                "empty enclosure [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn point(v: Rat) -> Self {
        Self { lo: v.clone(), hi: v }
    }

    pub fn width(&self) -> Rat {
        &self.hi - &self.lo
    }
}

/// Interval arithmetic with exact rational endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: Rat,
    pub hi: Rat,
}

impl Interval {
    pub fn point(v: &Rat) -> Self {
        Self { lo: v.clone(), hi: v.clone() }
    }

    pub fn zero() -> Self {
        Self { lo: Rat::zero(), hi: Rat::zero() }
    }

    pub fn from_enclosure(e: &Enclosure) -> Self {
        Self { lo: e.lo.clone(), hi: e.hi.clone() }
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Interval { lo: &self.lo + &other.lo, hi: &self.hi + &other.hi }
    }

    pub fn sub(&self, other: &Interval) -> Interval {
        Interval { lo: &self.lo - &other.hi, hi: &self.hi - &other.lo }
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        let cands = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = cands.iter().min().unwrap().clone();
        let hi = cands.iter().max().unwrap().clone();
        Interval { lo, hi }
    }

    /// Scale by an exact rational.
    pub fn scale(&self, r: &Rat) -> Interval {
        if r.is_negative() {
            Interval { lo: &self.hi * r, hi: &self.lo * r }
        } else {
            Interval { lo: &self.lo * r, hi: &self.hi * r }
        }
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// Sign of every point of the interval, if uniform.
    pub fn sign(&self) -> Option<std::cmp::Ordering> {
        use std::cmp::Ordering::*;
        if rat_sign(&self.lo) == Greater {
            Some(Greater)
        } else if rat_sign(&self.hi) == Less {
            Some(Less)
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Some(Equal)
        } else {
            None
        }
    }
}

/// A declared number ring: generator names, closed multiplication table and
/// interval enclosures for the generators' real values.
///
/// Index 0 is always the unit generator `1`. The table is indexed
/// `table[a][b]` and stores the coefficient vector of `ga * gb` in the basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraContext {
    names: Vec<String>,
    table: Vec<Vec<Vec<Rat>>>,
    enclosures: Vec<Enclosure>,
    refine_budget: u32,
}

pub const DEFAULT_REFINE_BUDGET: u32 = 64;

impl AlgebraContext {
    /// Validate and build a context. See the module docs for the invariants.
    pub fn new(
        names: Vec<String>,
        table: Vec<Vec<Vec<Rat>>>,
        enclosures: Vec<Enclosure>,
        refine_budget: u32,
    ) -> Result<CtxRef, AlgebraError> {
        let dim = names.len();
        if dim == 0 {
            return Err(AlgebraError::MalformedContext("no generators".into()));
        }
        if table.len() != dim || table.iter().any(|row| row.len() != dim) {
            return Err(AlgebraError::MalformedContext(format!(
                "table must be {dim}x{dim}"
            )));
        }
        for row in &table {
            for cell in row {
                if cell.len() != dim {
                    return Err(AlgebraError::MalformedContext(format!(
                        "table entries must have {dim} coefficients"
                    )));
                }
            }
        }
        if enclosures.len() != dim {
            return Err(AlgebraError::MalformedContext(format!(
                "expected {dim} enclosures"
            )));
        }
        // Unit row and column.
        for b in 0..dim {
            if !is_unit_vector(&table[0][b], b) {
                return Err(AlgebraError::UnitRowMissing(b));
            }
            if !is_unit_vector(&table[b][0], b) {
                return Err(AlgebraError::UnitRowMissing(b));
            }
        }
        // Symmetry.
        for a in 0..dim {
            for b in (a + 1)..dim {
                if table[a][b] != table[b][a] {
                    return Err(AlgebraError::TableNotSymmetric(a, b));
                }
            }
        }
        // The unit must be enclosed by [1, 1].
        if enclosures[0].lo != Rat::one() || enclosures[0].hi != Rat::one() {
            return Err(AlgebraError::MalformedContext(
                "enclosure of the unit generator must be [1, 1]".into(),
            ));
        }
        let ctx = AlgebraContext { names, table, enclosures, refine_budget };
        // Consistency of enclosures with the table, up to interval arithmetic.
        for a in 0..dim {
            for b in a..dim {
                let prod = Interval::from_enclosure(&ctx.enclosures[a])
                    .mul(&Interval::from_enclosure(&ctx.enclosures[b]));
                let combo = ctx.interval_of_coeffs(&ctx.table[a][b]);
                if !prod.intersects(&combo) {
                    return Err(AlgebraError::EnclosureInconsistent(a, b));
                }
            }
        }
        Ok(Arc::new(ctx))
    }

    /// The base field Q, presented with the single generator `1`.
    pub fn rational() -> CtxRef {
        AlgebraContext::new(
            vec!["1".into()],
            vec![vec![vec![Rat::one()]]],
            vec![Enclosure::point(Rat::one())],
            DEFAULT_REFINE_BUDGET,
        )
        .expect("the rational context is valid")
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn refine_budget(&self) -> u32 {
        self.refine_budget
    }

    pub fn enclosures(&self) -> &[Enclosure] {
        &self.enclosures
    }

    pub(crate) fn table_entry(&self, a: usize, b: usize) -> &[Rat] {
        &self.table[a][b]
    }

    /// Interval of a coefficient vector under the current enclosures.
    pub(crate) fn interval_of_coeffs(&self, coeffs: &[Rat]) -> Interval {
        interval_of(coeffs, &self.enclosures)
    }

    /// One round of enclosure refinement applied to every generator, using
    /// the diagonal table relations. Generators whose relation cannot be
    /// used for bisection are left unchanged. The result is a valid context:
    /// refinement never discards the true value of a generator.
    pub fn with_refined_enclosures(self: &CtxRef, steps: u32) -> CtxRef {
        let mut enclosures = self.enclosures.clone();
        for _ in 0..steps {
            for a in 1..self.dim() {
                refine_generator(&self.table, &mut enclosures, a);
            }
        }
        Arc::new(AlgebraContext {
            names: self.names.clone(),
            table: self.table.clone(),
            enclosures,
            refine_budget: self.refine_budget,
        })
    }

    /// Same context with a different refinement budget.
    pub fn with_refine_budget(self: &CtxRef, budget: u32) -> CtxRef {
        Arc::new(AlgebraContext {
            names: self.names.clone(),
            table: self.table.clone(),
            enclosures: self.enclosures.clone(),
            refine_budget: budget,
        })
    }

    pub fn zero(self: &CtxRef) -> AlgebraElement {
        AlgebraElement::from_coeffs(self.clone(), vec![Rat::zero(); self.dim()])
    }

    pub fn one(self: &CtxRef) -> AlgebraElement {
        self.from_rational(Rat::one())
    }

    pub fn from_rational(self: &CtxRef, r: Rat) -> AlgebraElement {
        let mut coeffs = vec![Rat::zero(); self.dim()];
        coeffs[0] = r;
        AlgebraElement::from_coeffs(self.clone(), coeffs)
    }

    pub fn from_int(self: &CtxRef, n: i64) -> AlgebraElement {
        self.from_rational(Rat::from_integer(n.into()))
    }

    pub fn generator(self: &CtxRef, a: usize) -> AlgebraElement {
        let mut coeffs = vec![Rat::zero(); self.dim()];
        coeffs[a] = Rat::one();
        AlgebraElement::from_coeffs(self.clone(), coeffs)
    }

    /// Decide the sign of the exact real number with the given coefficient
    /// vector, refining a working copy of the enclosures up to the budget.
    /// The caller has already ruled out the exact zero.
    pub(crate) fn sign_by_refinement(
        &self,
        coeffs: &[Rat],
    ) -> Result<std::cmp::Ordering, AlgebraError> {
        let mut work = self.enclosures.clone();
        let mut budget = self.refine_budget;
        loop {
            if let Some(sign) = interval_of(coeffs, &work).sign() {
                return Ok(sign);
            }
            let mut progressed = false;
            for a in 1..self.dim() {
                if budget == 0 {
                    break;
                }
                // Only refining generators that actually occur can change
                // the interval of `coeffs`.
                if coeffs[a].is_zero() {
                    continue;
                }
                if refine_generator(&self.table, &mut work, a) {
                    progressed = true;
                    budget -= 1;
                }
            }
            if !progressed || budget == 0 {
                if let Some(sign) = interval_of(coeffs, &work).sign() {
                    return Ok(sign);
                }
                return Err(AlgebraError::Undecidable(pretty_coeffs(coeffs, &self.names)));
            }
        }
    }
}

fn is_unit_vector(v: &[Rat], idx: usize) -> bool {
    v.iter().enumerate().all(|(k, c)| {
        if k == idx {
            c.is_one()
        } else {
            c.is_zero()
        }
    })
}

fn interval_of(coeffs: &[Rat], enclosures: &[Enclosure]) -> Interval {
    let mut acc = Interval::zero();
    for (c, e) in coeffs.iter().zip(enclosures) {
        if c.is_zero() {
            continue;
        }
        acc = acc.add(&Interval::from_enclosure(e).scale(c));
    }
    acc
}

/// Attempt one bisection step on generator `a` using the diagonal relation
/// `ga^2 = sum_k t_k gk`. Writing `phi(x) = x^2 - t_a x - t_0`, the true
/// value satisfies `phi(x) = R` where `R` collects the remaining table terms
/// evaluated over the current enclosures. If `phi` is strictly monotone on
/// the enclosure and `phi(mid)` falls outside the interval of `R`, one half
/// can be discarded without losing the true value.
fn refine_generator(table: &[Vec<Vec<Rat>>], enclosures: &mut [Enclosure], a: usize) -> bool {
    let enc = enclosures[a].clone();
    if enc.lo == enc.hi {
        return false;
    }
    let row = &table[a][a];
    let t_a = row[a].clone();
    let two = Rat::from_integer(2.into());
    let increasing = rat_sign(&(&two * &enc.lo - &t_a)) != std::cmp::Ordering::Less;
    let decreasing = rat_sign(&(&two * &enc.hi - &t_a)) != std::cmp::Ordering::Greater;
    if !increasing && !decreasing {
        return false;
    }
    // Residual interval of the table terms other than the unit and ga.
    let mut residual = Interval::point(&row[0]);
    for (k, c) in row.iter().enumerate() {
        if k == 0 || k == a || c.is_zero() {
            continue;
        }
        residual = residual.add(&Interval::from_enclosure(&enclosures[k]).scale(c));
    }
    let mid = (&enc.lo + &enc.hi) / two;
    let phi_mid = &mid * &mid - &t_a * &mid;
    let phi = Interval::point(&phi_mid);
    let above = phi.lo > residual.hi; // phi(mid) certainly exceeds R
    let below = phi.hi < residual.lo; // phi(mid) certainly undershoots R
    let shrink_hi = (increasing && above) || (decreasing && below);
    let shrink_lo = (increasing && below) || (decreasing && above);
    if shrink_hi {
        enclosures[a].hi = mid;
        true
    } else if shrink_lo {
        enclosures[a].lo = mid;
        true
    } else {
        false
    }
}

fn pretty_coeffs(coeffs: &[Rat], names: &[String]) -> String {
    let mut parts = Vec::new();
    for (c, n) in coeffs.iter().zip(names) {
        if c.is_zero() {
            continue;
        }
        if parts.is_empty() && n == "1" {
            parts.push(format!("{c}"));
        } else if n == "1" {
            parts.push(format!("{c}"));
        } else {
            parts.push(format!("{c}*{n}"));
        }
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn sqrt2_ctx() -> CtxRef {
        // Q(sqrt2): g1^2 = 2, sqrt2 in [7/5, 3/2].
        AlgebraContext::new(
            vec!["1".into(), "sqrt2".into()],
            vec![
                vec![vec![r(1), r(0)], vec![r(0), r(1)]],
                vec![vec![r(0), r(1)], vec![r(2), r(0)]],
            ],
            vec![Enclosure::point(r(1)), Enclosure::new(rr(7, 5), rr(3, 2)).unwrap()],
            DEFAULT_REFINE_BUDGET,
        )
        .unwrap()
    }

    fn r(n: i64) -> Rat {
        Rat::from_integer(n.into())
    }

    fn rr(n: i64, d: i64) -> Rat {
        Rat::new(n.into(), d.into())
    }

    #[test]
    fn rational_context_is_valid() {
        let ctx = AlgebraContext::rational();
        assert_eq!(ctx.dim(), 1);
    }

    #[test]
    fn sqrt2_context_is_valid() {
        // interval of sqrt2*sqrt2 = [49/25, 9/4] contains 2
        let ctx = sqrt2_ctx();
        assert_eq!(ctx.dim(), 2);
    }

    #[test]
    fn golden_ratio_context_is_valid() {
        // phi^2 = 1 + phi, phi in [8/5, 13/8]
        let ctx = AlgebraContext::new(
            vec!["1".into(), "phi".into()],
            vec![
                vec![vec![r(1), r(0)], vec![r(0), r(1)]],
                vec![vec![r(0), r(1)], vec![r(1), r(1)]],
            ],
            vec![Enclosure::point(r(1)), Enclosure::new(rr(8, 5), rr(13, 8)).unwrap()],
            DEFAULT_REFINE_BUDGET,
        );
        assert!(ctx.is_ok());
    }

    #[test]
    fn asymmetric_table_rejected() {
        // a*b = 1 but b*a = 2
        let err = AlgebraContext::new(
            vec!["1".into(), "a".into(), "b".into()],
            vec![
                vec![
                    vec![r(1), r(0), r(0)],
                    vec![r(0), r(1), r(0)],
                    vec![r(0), r(0), r(1)],
                ],
                vec![
                    vec![r(0), r(1), r(0)],
                    vec![r(2), r(0), r(0)],
                    vec![r(1), r(0), r(0)],
                ],
                vec![
                    vec![r(0), r(0), r(1)],
                    vec![r(2), r(0), r(0)],
                    vec![r(3), r(0), r(0)],
                ],
            ],
            vec![
                Enclosure::point(r(1)),
                Enclosure::new(r(1), r(2)).unwrap(),
                Enclosure::new(r(1), r(2)).unwrap(),
            ],
            DEFAULT_REFINE_BUDGET,
        )
        .unwrap_err();
        assert_eq!(err, AlgebraError::TableNotSymmetric(1, 2));
    }

    #[test]
    fn broken_unit_row_rejected() {
        let err = AlgebraContext::new(
            vec!["1".into(), "g".into()],
            vec![
                vec![vec![r(1), r(0)], vec![r(1), r(1)]],
                vec![vec![r(1), r(1)], vec![r(2), r(0)]],
            ],
            vec![Enclosure::point(r(1)), Enclosure::new(r(1), r(2)).unwrap()],
            DEFAULT_REFINE_BUDGET,
        )
        .unwrap_err();
        assert_eq!(err, AlgebraError::UnitRowMissing(1));
    }

    #[test]
    fn inconsistent_enclosure_rejected() {
        // claims sqrt2 in [1/5, 2/5], but then sqrt2^2 in [1/25, 4/25]
        // cannot meet the table value 2
        let err = AlgebraContext::new(
            vec!["1".into(), "sqrt2".into()],
            vec![
                vec![vec![r(1), r(0)], vec![r(0), r(1)]],
                vec![vec![r(0), r(1)], vec![r(2), r(0)]],
            ],
            vec![Enclosure::point(r(1)), Enclosure::new(rr(1, 5), rr(2, 5)).unwrap()],
            DEFAULT_REFINE_BUDGET,
        )
        .unwrap_err();
        assert_eq!(err, AlgebraError::EnclosureInconsistent(1, 1));
    }

    #[test]
    fn refinement_shrinks_sqrt2() {
        let ctx = sqrt2_ctx();
        let refined = ctx.with_refined_enclosures(4);
        let e = &refined.enclosures()[1];
        assert!(e.width() < rr(1, 10));
        // sqrt2 is still inside: lo^2 < 2 < hi^2
        assert!(&e.lo * &e.lo < r(2));
        assert!(&e.hi * &e.hi > r(2));
    }
}
