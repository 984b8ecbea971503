use super::{AlgebraElement, AlgebraError, CtxRef};

/// Dense matrix over one algebra context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraMatrix {
    ctx: CtxRef,
    rows: usize,
    cols: usize,
    data: Vec<AlgebraElement>,
}

impl AlgebraMatrix {
    pub fn from_rows(ctx: CtxRef, rows: Vec<Vec<AlgebraElement>>) -> Result<Self, AlgebraError> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(nrows * ncols);
        for row in rows {
            if row.len() != ncols {
                return Err(AlgebraError::ShapeMismatch("ragged rows".into()));
            }
            for e in row {
                if !e.context().as_ref().eq(ctx.as_ref()) {
                    return Err(AlgebraError::ContextMismatch);
                }
                data.push(e);
            }
        }
        Ok(Self { ctx, rows: nrows, cols: ncols, data })
    }

    pub fn zero(ctx: CtxRef, rows: usize, cols: usize) -> Self {
        let data = vec![ctx.zero(); rows * cols];
        Self { ctx, rows, cols, data }
    }

    pub fn identity(ctx: CtxRef, n: usize) -> Self {
        let mut m = Self::zero(ctx.clone(), n, n);
        for i in 0..n {
            *m.at_mut(i, i) = ctx.one();
        }
        m
    }

    pub fn context(&self) -> &CtxRef {
        &self.ctx
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, r: usize, c: usize) -> &AlgebraElement {
        &self.data[r * self.cols + c]
    }

    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut AlgebraElement {
        &mut self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> Vec<AlgebraElement> {
        (0..self.cols).map(|c| self.at(r, c).clone()).collect()
    }

    pub fn col(&self, c: usize) -> Vec<AlgebraElement> {
        (0..self.rows).map(|r| self.at(r, c).clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zero(self.ctx.clone(), self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                *out.at_mut(c, r) = self.at(r, c).clone();
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[AlgebraElement]) -> Result<Vec<AlgebraElement>, AlgebraError> {
        if v.len() != self.cols {
            return Err(AlgebraError::ShapeMismatch(format!(
                "matrix has {} columns, vector has {} entries",
                self.cols,
                v.len()
            )));
        }
        let mut out = Vec::with_capacity(self.rows);
        for r in 0..self.rows {
            let mut acc = self.ctx.zero();
            for c in 0..self.cols {
                acc = acc.add(&self.at(r, c).mul(&v[c])?)?;
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// Reduced row echelon form with ordered pivoting. Returns the reduced
    /// matrix together with the pivot column of each pivot row.
    pub fn rref(&self) -> Result<(Self, Vec<usize>), AlgebraError> {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            let Some(p) = (row..m.rows).find(|&r| !m.at(r, col).is_zero()) else {
                continue;
            };
            for c in 0..m.cols {
                let tmp = m.at(p, c).clone();
                *m.at_mut(p, c) = m.at(row, c).clone();
                *m.at_mut(row, c) = tmp;
            }
            let inv = m.at(row, col).invert()?;
            for c in 0..m.cols {
                *m.at_mut(row, c) = m.at(row, c).mul(&inv)?;
            }
            for r in 0..m.rows {
                if r == row || m.at(r, col).is_zero() {
                    continue;
                }
                let factor = m.at(r, col).clone();
                for c in 0..m.cols {
                    let sub = factor.mul(m.at(row, c))?;
                    *m.at_mut(r, c) = m.at(r, c).sub(&sub)?;
                }
            }
            pivots.push(col);
            row += 1;
            if row == m.rows {
                break;
            }
        }
        Ok((m, pivots))
    }

    pub fn rank(&self) -> Result<usize, AlgebraError> {
        Ok(self.rref()?.1.len())
    }

    /// Canonical kernel basis. Each basis vector carries a 1 in its free
    /// coordinate and the negated echelon entries in the pivot coordinates,
    /// so the output is reproducible across runs.
    pub fn kernel_basis(&self) -> Result<Vec<Vec<AlgebraElement>>, AlgebraError> {
        let (rref, pivots) = self.rref()?;
        let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set.contains(&free) {
                continue;
            }
            let mut v = vec![self.ctx.zero(); self.cols];
            v[free] = self.ctx.one();
            for (prow, pcol) in pivots.iter().enumerate() {
                v[*pcol] = rref.at(prow, free).neg();
            }
            basis.push(v);
        }
        Ok(basis)
    }

    /// Some solution of `self * x = rhs` over the declared field, with free
    /// coordinates pinned to zero; `None` when the system is inconsistent.
    /// The solution is unique (and the pinning immaterial) when the matrix
    /// is injective.
    pub fn solve(&self, rhs: &[AlgebraElement]) -> Result<Option<Vec<AlgebraElement>>, AlgebraError> {
        if rhs.len() != self.rows {
            return Err(AlgebraError::ShapeMismatch(format!(
                "matrix has {} rows, rhs has {} entries",
                self.rows,
                rhs.len()
            )));
        }
        // Augment and reduce.
        let mut aug = Self::zero(self.ctx.clone(), self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in 0..self.cols {
                *aug.at_mut(r, c) = self.at(r, c).clone();
            }
            *aug.at_mut(r, self.cols) = rhs[r].clone();
        }
        let (red, pivots) = aug.rref()?;
        if pivots.contains(&self.cols) {
            return Ok(None); // pivot in the rhs column: inconsistent
        }
        let mut x = vec![self.ctx.zero(); self.cols];
        for (prow, pcol) in pivots.iter().enumerate() {
            x[*pcol] = red.at(prow, self.cols).clone();
        }
        Ok(Some(x))
    }
}

#[cfg(test)]
mod tests {
    use super::super::context::{AlgebraContext, Enclosure, DEFAULT_REFINE_BUDGET};
    use super::super::Rat;
    use super::*;

    fn r(n: i64) -> Rat {
        Rat::from_integer(n.into())
    }

    fn rr(n: i64, d: i64) -> Rat {
        Rat::new(n.into(), d.into())
    }

    fn sqrt2_ctx() -> CtxRef {
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

    #[test]
    fn kernel_of_interval_map() {
        // pi = [-1, 1] has kernel spanned by (1, 1)
        let ctx = AlgebraContext::rational();
        let m = AlgebraMatrix::from_rows(
            ctx.clone(),
            vec![vec![ctx.from_int(-1), ctx.from_int(1)]],
        )
        .unwrap();
        let k = m.kernel_basis().unwrap();
        assert_eq!(k, vec![vec![ctx.from_int(1), ctx.from_int(1)]]);
    }

    #[test]
    fn kernel_of_quasi_interval_map() {
        // pi = [-1, sqrt2] has kernel spanned by (sqrt2, 1)
        let ctx = sqrt2_ctx();
        let m = AlgebraMatrix::from_rows(
            ctx.clone(),
            vec![vec![ctx.from_int(-1), ctx.generator(1)]],
        )
        .unwrap();
        let k = m.kernel_basis().unwrap();
        assert_eq!(k, vec![vec![ctx.generator(1), ctx.one()]]);
        // exact: -1 * sqrt2 + sqrt2 * 1 = 0
        let image = m.mul_vec(&k[0]).unwrap();
        assert!(image.iter().all(AlgebraElement::is_zero));
    }

    #[test]
    fn kernel_of_identity_is_empty() {
        let ctx = AlgebraContext::rational();
        let m = AlgebraMatrix::identity(ctx, 2);
        assert!(m.kernel_basis().unwrap().is_empty());
    }

    #[test]
    fn preimage_examples() {
        // pi* for the interval: columns (-1; 1); x = (-1, 1) -> xi = 1
        let ctx = AlgebraContext::rational();
        let m = AlgebraMatrix::from_rows(
            ctx.clone(),
            vec![vec![ctx.from_int(-1)], vec![ctx.from_int(1)]],
        )
        .unwrap();
        let x = vec![ctx.from_int(-1), ctx.from_int(1)];
        assert_eq!(m.solve(&x).unwrap(), Some(vec![ctx.from_int(1)]));

        // quasi-interval: columns (-1; sqrt2)
        let ctx = sqrt2_ctx();
        let m = AlgebraMatrix::from_rows(
            ctx.clone(),
            vec![vec![ctx.from_int(-1)], vec![ctx.generator(1)]],
        )
        .unwrap();
        let x = vec![ctx.from_int(-1), ctx.generator(1)];
        assert_eq!(m.solve(&x).unwrap(), Some(vec![ctx.from_int(1)]));
        // (0, 1) is not in the image: it would need sqrt2 * 0 = 1
        let x = vec![ctx.zero(), ctx.one()];
        assert_eq!(m.solve(&x).unwrap(), None);
    }

    #[test]
    fn rank_plus_nullity() {
        let ctx = sqrt2_ctx();
        let s = ctx.generator(1);
        let m = AlgebraMatrix::from_rows(
            ctx.clone(),
            vec![
                vec![ctx.one(), s.clone(), ctx.from_int(3)],
                vec![s.clone(), ctx.from_int(2), s.scale(&r(3))],
            ],
        )
        .unwrap();
        // second row = sqrt2 * first row, so rank 1, nullity 2
        assert_eq!(m.rank().unwrap(), 1);
        let k = m.kernel_basis().unwrap();
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(m.mul_vec(v).unwrap().iter().all(AlgebraElement::is_zero));
        }
    }
}
