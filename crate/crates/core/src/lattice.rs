//! Exact integer and rational lattice machinery: Smith normal form, affine
//! integer systems, and enumeration of the integer points of a bounded
//! rational polyhedron by Fourier-Motzkin elimination.

use num::{BigInt, Integer, One, Signed, Zero};

use super::algebra::Rat;

pub type IntVec = Vec<BigInt>;
pub type IntMat = Vec<Vec<BigInt>>;

pub fn int_identity(n: usize) -> IntMat {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect()
}

pub fn int_mat_mul(a: &IntMat, b: &IntMat) -> IntMat {
    let n = a.len();
    let k = if n == 0 { 0 } else { a[0].len() };
    let m = if b.is_empty() { 0 } else { b[0].len() };
    let mut out = vec![vec![BigInt::zero(); m]; n];
    for i in 0..n {
        for t in 0..k {
            if a[i][t].is_zero() {
                continue;
            }
            for j in 0..m {
                out[i][j] += &a[i][t] * &b[t][j];
            }
        }
    }
    out
}

pub fn int_mat_vec(a: &IntMat, v: &[BigInt]) -> IntVec {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

/// Determinant by cofactor expansion; intended for the small vertex bases.
pub fn int_det(a: &IntMat) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    if n == 1 {
        return a[0][0].clone();
    }
    let mut det = BigInt::zero();
    for j in 0..n {
        if a[0][j].is_zero() {
            continue;
        }
        let minor: IntMat = a[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != j)
                    .map(|(_, v)| v.clone())
                    .collect()
            })
            .collect();
        let term = &a[0][j] * int_det(&minor);
        if j % 2 == 0 {
            det += term;
        } else {
            det -= term;
        }
    }
    det
}

/// Divide out the content, keeping the orientation of the first nonzero
/// entry of the input.
pub fn primitive_vector(v: &[BigInt]) -> IntVec {
    let mut g = BigInt::zero();
    for x in v {
        g = g.gcd(x);
    }
    if g.is_zero() || g.is_one() {
        return v.to_vec();
    }
    v.iter().map(|x| x / &g).collect()
}

/// Smith-style diagonalization `u * a * v = d` with unimodular `u`, `v`.
/// The diagonal is not forced into a divisibility chain; that is not needed
/// for solving linear systems.
pub fn smith_diagonalize(a: &IntMat) -> (IntMat, IntMat, IntMat) {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut d = a.to_vec();
    let mut u = int_identity(rows);
    let mut v = int_identity(cols);
    let steps = rows.min(cols);
    for t in 0..steps {
        loop {
            // Smallest nonzero entry of the trailing submatrix becomes the pivot.
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if d[i][j].is_zero() {
                        continue;
                    }
                    match &best {
                        None => best = Some((i, j)),
                        Some((bi, bj)) => {
                            if d[i][j].abs() < d[*bi][*bj].abs() {
                                best = Some((i, j));
                            }
                        }
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return (u, d, v); // trailing block is zero
            };
            d.swap(t, pi);
            u.swap(t, pi);
            if pj != t {
                for row in d.iter_mut() {
                    row.swap(t, pj);
                }
                for row in v.iter_mut() {
                    row.swap(t, pj);
                }
            }
            let mut clean = true;
            let pivot = d[t][t].clone();
            for i in (t + 1)..rows {
                if d[i][t].is_zero() {
                    continue;
                }
                let q = &d[i][t] / &pivot;
                if !q.is_zero() {
                    for j in 0..cols {
                        let s = &q * &d[t][j];
                        d[i][j] -= s;
                    }
                    for j in 0..rows {
                        let s = &q * &u[t][j];
                        u[i][j] -= s;
                    }
                }
                if !d[i][t].is_zero() {
                    clean = false;
                }
            }
            for j in (t + 1)..cols {
                if d[t][j].is_zero() {
                    continue;
                }
                let q = &d[t][j] / &pivot;
                if !q.is_zero() {
                    for i in 0..rows {
                        let s = &q * &d[i][t];
                        d[i][j] -= s;
                    }
                    for i in 0..cols {
                        let s = &q * &v[i][t];
                        v[i][j] -= s;
                    }
                }
                if !d[t][j].is_zero() {
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
    }
    (u, d, v)
}

/// All integer solutions of `a x = rhs`: a particular solution plus a basis
/// of the homogeneous solution lattice. `None` when no integer solution
/// exists.
pub fn solve_integer_affine(a: &IntMat, rhs: &[BigInt]) -> Option<(IntVec, Vec<IntVec>)> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    if rows == 0 {
        // No constraints: everything solves, the lattice is all of Z^cols.
        return Some((vec![BigInt::zero(); cols], int_identity(cols)));
    }
    let (u, d, v) = smith_diagonalize(a);
    let s = int_mat_vec(&u, rhs);
    let mut z = vec![BigInt::zero(); cols];
    let mut rank = 0;
    for i in 0..rows.min(cols) {
        if d[i][i].is_zero() {
            continue;
        }
        let (q, r) = s[i].div_rem(&d[i][i]);
        if !r.is_zero() {
            return None;
        }
        z[i] = q;
        rank = i + 1;
    }
    for (i, si) in s.iter().enumerate() {
        let diag_zero = i >= cols || d[i][i].is_zero();
        if diag_zero && !si.is_zero() {
            return None;
        }
    }
    let particular = int_mat_vec(&v, &z);
    let basis = (rank..cols)
        .map(|j| v.iter().map(|row| row[j].clone()).collect())
        .collect();
    Some((particular, basis))
}

/// A finite system of rational inequalities `coeffs . x <= bound`.
#[derive(Debug, Clone)]
pub struct InequalitySystem {
    pub nvars: usize,
    pub rows: Vec<(Vec<Rat>, Rat)>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum EnumerationError {
    #[error("polyhedron is unbounded in variable {0}")]
    Unbounded(usize),
}

impl InequalitySystem {
    pub fn new(nvars: usize) -> Self {
        Self { nvars, rows: Vec::new() }
    }

    pub fn push(&mut self, coeffs: Vec<Rat>, bound: Rat) {
        debug_assert_eq!(coeffs.len(), self.nvars);
        self.rows.push((coeffs, bound));
    }

    /// Enumerate every integer point of the (bounded) solution set in
    /// lexicographic order. Fails if some variable is unbounded over the
    /// relaxation; infeasible systems yield the empty list.
    pub fn integer_points(&self) -> Result<Vec<IntVec>, EnumerationError> {
        // Infeasibility visible at depth zero: a constant row 0 <= b with b < 0.
        for (coeffs, bound) in &self.rows {
            if coeffs.iter().all(Rat::is_zero) && bound.is_negative() {
                return Ok(Vec::new());
            }
        }
        if self.nvars == 0 {
            return Ok(vec![Vec::new()]);
        }
        // stages[k] constrains variables 0..k; stages[nvars] is the input.
        let mut stages: Vec<Vec<(Vec<Rat>, Rat)>> = vec![Vec::new(); self.nvars + 1];
        stages[self.nvars] = self.rows.clone();
        for k in (1..=self.nvars).rev() {
            stages[k - 1] = eliminate_last(&stages[k], k);
        }
        let mut out = Vec::new();
        let mut prefix: Vec<BigInt> = Vec::new();
        self.enumerate_level(&stages, 0, &mut prefix, &mut out)?;
        Ok(out)
    }

    fn enumerate_level(
        &self,
        stages: &[Vec<(Vec<Rat>, Rat)>],
        level: usize,
        prefix: &mut Vec<BigInt>,
        out: &mut Vec<IntVec>,
    ) -> Result<(), EnumerationError> {
        let rows = &stages[level + 1];
        let mut lo: Option<BigInt> = None;
        let mut hi: Option<BigInt> = None;
        let mut feasible = true;
        for (coeffs, bound) in rows {
            let a = &coeffs[level];
            let mut rest = bound.clone();
            for (j, c) in coeffs[..level].iter().enumerate() {
                if !c.is_zero() {
                    rest -= c * Rat::from_integer(prefix[j].clone());
                }
            }
            if a.is_zero() {
                if rest.is_negative() {
                    feasible = false;
                    break;
                }
                continue;
            }
            let quot = &rest / a;
            if a.is_positive() {
                let b = quot.floor().to_integer();
                hi = Some(match hi {
                    None => b,
                    Some(h) => h.min(b),
                });
            } else {
                let b = quot.ceil().to_integer();
                lo = Some(match lo {
                    None => b,
                    Some(l) => l.max(b),
                });
            }
        }
        if !feasible {
            return Ok(());
        }
        let (Some(lo), Some(hi)) = (lo, hi) else {
            return Err(EnumerationError::Unbounded(level));
        };
        let mut x = lo;
        while x <= hi {
            prefix.push(x.clone());
            if level + 1 == self.nvars {
                out.push(prefix.clone());
            } else {
                self.enumerate_level(stages, level + 1, prefix, out)?;
            }
            prefix.pop();
            x += 1;
        }
        Ok(())
    }
}

/// Fourier-Motzkin elimination of variable `k - 1` from a system over
/// variables `0..k`.
fn eliminate_last(rows: &[(Vec<Rat>, Rat)], k: usize) -> Vec<(Vec<Rat>, Rat)> {
    let var = k - 1;
    let mut kept = Vec::new();
    let mut uppers = Vec::new(); // coeff > 0
    let mut lowers = Vec::new(); // coeff < 0
    for (coeffs, bound) in rows {
        let c = &coeffs[var];
        if c.is_zero() {
            kept.push((coeffs[..var].to_vec(), bound.clone()));
        } else if c.is_positive() {
            uppers.push((coeffs, bound));
        } else {
            lowers.push((coeffs, bound));
        }
    }
    for (pc, pb) in &uppers {
        for (nc, nb) in &lowers {
            let p = &pc[var];
            let n = &nc[var]; // negative
            let mut coeffs = Vec::with_capacity(var);
            for j in 0..var {
                coeffs.push(&pc[j] * (-n.clone()) + &nc[j] * p.clone());
            }
            let bound = *pb * (-n.clone()) + *nb * p.clone();
            kept.push((coeffs, bound));
        }
    }
    kept
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(n: i64) -> BigInt {
        n.into()
    }

    fn r(n: i64) -> Rat {
        Rat::from_integer(n.into())
    }

    fn mat(rows: &[&[i64]]) -> IntMat {
        rows.iter().map(|r| r.iter().map(|&x| bi(x)).collect()).collect()
    }

    fn is_unimodular(m: &IntMat) -> bool {
        int_det(m).abs().is_one()
    }

    #[test]
    fn smith_reconstructs() {
        let a = mat(&[&[2, 4, 4], &[-6, 6, 12], &[10, 4, 16]]);
        let (u, d, v) = smith_diagonalize(&a);
        assert_eq!(int_mat_mul(&int_mat_mul(&u, &a), &v), d);
        assert!(is_unimodular(&u));
        assert!(is_unimodular(&v));
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!(d[i][j].is_zero());
                }
            }
        }
    }

    #[test]
    fn affine_solve_simple() {
        // x + y = 3 over Z^2
        let a = mat(&[&[1, 1]]);
        let (p, basis) = solve_integer_affine(&a, &[bi(3)]).unwrap();
        assert_eq!(&p[0] + &p[1], bi(3));
        assert_eq!(basis.len(), 1);
        assert_eq!(&basis[0][0] + &basis[0][1], bi(0));
        assert!(!basis[0][0].is_zero());
    }

    #[test]
    fn affine_solve_no_solution() {
        // 2x = 1 has no integer solution
        let a = mat(&[&[2]]);
        assert!(solve_integer_affine(&a, &[bi(1)]).is_none());
    }

    #[test]
    fn affine_solve_inconsistent() {
        // x = 0 and x = 1
        let a = mat(&[&[1], &[1]]);
        assert!(solve_integer_affine(&a, &[bi(0), bi(1)]).is_none());
    }

    #[test]
    fn enumerate_triangle() {
        // x >= 0, y >= 0, x + y <= 2: six lattice points
        let mut sys = InequalitySystem::new(2);
        sys.push(vec![r(-1), r(0)], r(0));
        sys.push(vec![r(0), r(-1)], r(0));
        sys.push(vec![r(1), r(1)], r(2));
        let pts = sys.integer_points().unwrap();
        assert_eq!(pts.len(), 6);
        assert!(pts.contains(&vec![bi(2), bi(0)]));
        assert!(pts.contains(&vec![bi(0), bi(2)]));
        assert!(!pts.contains(&vec![bi(1), bi(2)]));
    }

    #[test]
    fn enumerate_infeasible_and_unbounded() {
        let mut sys = InequalitySystem::new(1);
        sys.push(vec![r(1)], r(0));
        sys.push(vec![r(-1)], r(-1)); // x >= 1 and x <= 0
        assert!(sys.integer_points().unwrap().is_empty());

        let mut sys = InequalitySystem::new(1);
        sys.push(vec![r(-1)], r(0)); // x >= 0 only
        assert_eq!(sys.integer_points(), Err(EnumerationError::Unbounded(0)));
    }

    #[test]
    fn enumerate_empty_dimension() {
        let sys = InequalitySystem::new(0);
        assert_eq!(sys.integer_points().unwrap(), vec![Vec::<BigInt>::new()]);
    }

    #[test]
    fn primitive_vector_examples() {
        assert_eq!(primitive_vector(&[bi(2), bi(-4)]), vec![bi(1), bi(-2)]);
        assert_eq!(primitive_vector(&[bi(0), bi(0)]), vec![bi(0), bi(0)]);
    }
}
