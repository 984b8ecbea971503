//! Abelian localization for rational Delzant data: the quantization
//! character recomputed as a signed sum of shifted-cone lattice counts over
//! the polytope vertices.
//!
//! Each vertex contributes its fixed weight and the primitive generators of
//! the edges leaving it. A generic polarizing vector splits the edges by the
//! sign of the pairing; positively paired edges keep their direction, the
//! others are flipped and offset by one step, each flip costing a sign. The
//! multiplicity of a weight is then an exact integer cone-membership count.
//! The sign convention is pinned by the k = 0 interval: a point contributes
//! +1 at the zero weight.

use num::{BigInt, Integer, One, Signed, Zero};
use thiserror::Error;

use super::algebra::{AlgebraError, Rat};
use super::charring::TorusCharacter;
use super::lattice::{int_det, primitive_vector, IntVec};
use super::toric::{SimplePolytope, ToricError};

#[derive(Debug, Error)]
pub enum LocalizationError {
    #[error("vertex basis at {0} has determinant {1}; the polytope is not Delzant")]
    NotDelzant(String, BigInt),
    #[error("vertex {0} is not a lattice point")]
    NonIntegralVertex(String),
    #[error("polytope data is irrational; localization needs rational Delzant input")]
    IrrationalInput,
    #[error("polarizing vector pairs to zero with an edge weight")]
    NonGenericBeta,
    #[error(transparent)]
    Toric(#[from] ToricError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Fixed-point data of one vertex: the vertex itself as a lattice weight and
/// the primitive integer generators of the edges leaving it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexCone {
    pub apex: IntVec,
    pub edges: Vec<IntVec>,
}

/// Per-vertex fixed-point data of a rational Delzant polytope. Degenerate
/// presentations may carry several cones at the same geometric point, one
/// per active facet basis; the signed sum still counts correctly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexFixedData {
    dim: usize,
    cones: Vec<VertexCone>,
}

impl VertexFixedData {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cones(&self) -> &[VertexCone] {
        &self.cones
    }
}

/// A generic vector pairing nonzero with every edge weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolarizingVector(pub IntVec);

impl PolarizingVector {
    pub fn new(coords: IntVec) -> Self {
        Self(coords)
    }

    pub fn from_i64(coords: &[i64]) -> Self {
        Self(coords.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn is_generic_for(&self, vd: &VertexFixedData) -> bool {
        vd.cones.iter().all(|cone| {
            cone.edges
                .iter()
                .all(|alpha| !int_dot(alpha, &self.0).is_zero())
        })
    }

    /// First generic vector of the form `(1, t, t^2, ...)`; deterministic.
    pub fn deterministic_for(vd: &VertexFixedData) -> Self {
        let mut t = BigInt::one();
        loop {
            let mut coords = Vec::with_capacity(vd.dim);
            let mut power = BigInt::one();
            for _ in 0..vd.dim {
                coords.push(power.clone());
                power *= &t;
            }
            let beta = PolarizingVector(coords);
            if vd.dim == 0 || beta.is_generic_for(vd) {
                return beta;
            }
            t += 1;
        }
    }
}

fn int_dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Extract vertices, integral fixed weights and primitive edge generators
/// from a rational Delzant polytope.
pub fn vertex_data(p: &SimplePolytope) -> Result<VertexFixedData, LocalizationError> {
    let n = p.ambient_rank();
    for (v, c) in p.facets() {
        if !c.is_rational() || v.iter().any(|x| !x.is_rational()) {
            return Err(LocalizationError::IrrationalInput);
        }
    }
    if !p.is_bounded()? {
        return Err(LocalizationError::Toric(ToricError::Unbounded));
    }
    let bases = p.vertex_bases()?;
    if bases.is_empty() {
        return Err(LocalizationError::Toric(ToricError::Empty));
    }
    let normals: Vec<Vec<Rat>> = p
        .facets()
        .iter()
        .map(|(v, _)| v.iter().map(|x| x.to_rational().expect("rational")).collect())
        .collect();
    let mut cones = Vec::new();
    for (point, subset) in bases {
        let mut apex = Vec::with_capacity(n);
        for x in &point {
            let r = x.to_rational().expect("rational");
            if !r.is_integer() {
                let coords: Vec<String> = point.iter().map(|e| e.to_string()).collect();
                return Err(LocalizationError::NonIntegralVertex(format!(
                    "({})",
                    coords.join(", ")
                )));
            }
            apex.push(r.to_integer());
        }
        let mut edges = Vec::with_capacity(n);
        for (slot, &loosened) in subset.iter().enumerate() {
            // the edge leaving through facet `loosened` keeps the other
            // active facets tight and moves into the polytope
            let tight: Vec<&Vec<Rat>> = subset
                .iter()
                .enumerate()
                .filter(|(s, _)| *s != slot)
                .map(|(_, &i)| &normals[i])
                .collect();
            let dir = rational_line_direction(&tight, n);
            let mut edge = rational_to_primitive(&dir);
            let pairing = {
                let r: Rat = edge
                    .iter()
                    .zip(&normals[loosened])
                    .map(|(e, v)| Rat::from_integer(e.clone()) * v)
                    .sum();
                r
            };
            debug_assert!(!pairing.is_zero(), "active basis has full rank");
            if pairing.is_positive() {
                for e in edge.iter_mut() {
                    *e = -e.clone();
                }
            }
            edges.push(edge);
        }
        let det = int_det(&edges);
        if !det.abs().is_one() {
            let coords: Vec<String> = apex.iter().map(|x| x.to_string()).collect();
            return Err(LocalizationError::NotDelzant(
                format!("({})", coords.join(", ")),
                det,
            ));
        }
        cones.push(VertexCone { apex, edges });
    }
    Ok(VertexFixedData { dim: n, cones })
}

/// Spanning direction of the line cut out by `n - 1` independent normals.
fn rational_line_direction(tight: &[&Vec<Rat>], n: usize) -> Vec<Rat> {
    // kernel of the (n-1) x n system by Gauss-Jordan
    let mut m: Vec<Vec<Rat>> = tight.iter().map(|r| (*r).clone()).collect();
    let rows = m.len();
    let mut pivots: Vec<usize> = Vec::new();
    let mut row = 0;
    for col in 0..n {
        let Some(p) = (row..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = Rat::one() / m[row][col].clone();
        for c in 0..n {
            m[row][c] = &m[row][c] * &inv;
        }
        for r in 0..rows {
            if r != row && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in 0..n {
                    let s = &f * &m[row][c];
                    m[r][c] = &m[r][c] - &s;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == rows {
            break;
        }
    }
    let free = (0..n).find(|c| !pivots.contains(c)).expect("rank n-1 leaves one free column");
    let mut dir = vec![Rat::zero(); n];
    dir[free] = Rat::one();
    for (prow, pcol) in pivots.iter().enumerate() {
        dir[*pcol] = -m[prow][free].clone();
    }
    dir
}

fn rational_to_primitive(v: &[Rat]) -> IntVec {
    let mut lcm = BigInt::one();
    for x in v {
        lcm = lcm.lcm(x.denom());
    }
    let ints: IntVec = v
        .iter()
        .map(|x| (x * Rat::from_integer(lcm.clone())).to_integer())
        .collect();
    primitive_vector(&ints)
}

/// The localized multiplicity of a single weight: a signed sum over the
/// vertex cones of exact cone-membership indicators.
pub fn localized_multiplicity(
    vd: &VertexFixedData,
    beta: &PolarizingVector,
    lambda: &[BigInt],
) -> Result<i64, LocalizationError> {
    if !beta.is_generic_for(vd) {
        return Err(LocalizationError::NonGenericBeta);
    }
    let n = vd.dim;
    let mut total = 0i64;
    for cone in &vd.cones {
        let mut apex = cone.apex.clone();
        let mut dirs: Vec<IntVec> = Vec::with_capacity(n);
        let mut flips = 0usize;
        for alpha in &cone.edges {
            if int_dot(alpha, &beta.0).is_positive() {
                dirs.push(alpha.clone());
            } else {
                // flipped edge: direction -alpha, offset one step
                let neg: IntVec = alpha.iter().map(|x| -x.clone()).collect();
                for (a, d) in apex.iter_mut().zip(&neg) {
                    *a += d;
                }
                dirs.push(neg);
                flips += 1;
            }
        }
        // solve lambda - apex in the edge basis; the basis is unimodular so
        // the rational solution is integral exactly when it is a count
        let rhs: Vec<Rat> = lambda
            .iter()
            .zip(&apex)
            .map(|(l, a)| Rat::from_integer(l - a))
            .collect();
        let mut m: Vec<Vec<Rat>> = vec![vec![Rat::zero(); n]; n];
        for (j, d) in dirs.iter().enumerate() {
            for i in 0..n {
                m[i][j] = Rat::from_integer(d[i].clone());
            }
        }
        let sol = crate::algebra::rat_solve(m, rhs).expect("unimodular edge basis");
        let inside = sol.iter().all(|k| k.is_integer() && !k.is_negative());
        if inside {
            total += if flips % 2 == 0 { 1 } else { -1 };
        }
    }
    Ok(total)
}

/// The localized character over an integer box: `lambda ->
/// localized_multiplicity(lambda)` with zeros dropped.
pub fn localized_character(
    vd: &VertexFixedData,
    beta: &PolarizingVector,
    box_: &[(i64, i64)],
) -> Result<TorusCharacter, LocalizationError> {
    let ctx = crate::algebra::AlgebraContext::rational();
    let mut c = TorusCharacter::empty(ctx.clone(), vd.dim);
    if box_.len() != vd.dim || box_.iter().any(|(lo, hi)| lo > hi) {
        return Ok(c);
    }
    let mut cursor: Vec<i64> = box_.iter().map(|(lo, _)| *lo).collect();
    if vd.dim == 0 {
        return Ok(c);
    }
    'scan: loop {
        let lambda: IntVec = cursor.iter().map(|&x| BigInt::from(x)).collect();
        let m = localized_multiplicity(vd, beta, &lambda)?;
        if m != 0 {
            c.add_term(cursor.iter().map(|&x| ctx.from_int(x)).collect(), m);
        }
        for j in 0..vd.dim {
            cursor[j] += 1;
            if cursor[j] <= box_[j].1 {
                continue 'scan;
            }
            cursor[j] = box_[j].0;
        }
        break;
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraContext;
    use crate::toric::SimplePolytope;

    fn bi(n: i64) -> BigInt {
        n.into()
    }

    fn rational_polytope(n: usize, facets: &[(&[i64], i64)]) -> SimplePolytope {
        let ctx = AlgebraContext::rational();
        let fs = facets
            .iter()
            .map(|(v, c)| {
                (
                    v.iter().map(|&x| ctx.from_int(x)).collect(),
                    ctx.from_int(*c),
                )
            })
            .collect();
        SimplePolytope::new(ctx, n, fs).unwrap()
    }

    fn interval(k: i64) -> SimplePolytope {
        rational_polytope(1, &[(&[-1], 0), (&[1], k)])
    }

    fn cp2(k: i64) -> SimplePolytope {
        rational_polytope(2, &[(&[-1, 0], 0), (&[0, -1], 0), (&[1, 1], k)])
    }

    #[test]
    fn interval_vertex_data() {
        let vd = vertex_data(&interval(2)).unwrap();
        assert_eq!(vd.cones().len(), 2);
        assert!(vd
            .cones()
            .contains(&VertexCone { apex: vec![bi(0)], edges: vec![vec![bi(1)]] }));
        assert!(vd
            .cones()
            .contains(&VertexCone { apex: vec![bi(2)], edges: vec![vec![bi(-1)]] }));
    }

    #[test]
    fn cp2_vertex_data() {
        let vd = vertex_data(&cp2(1)).unwrap();
        assert_eq!(vd.cones().len(), 3);
        let find = |apex: &[i64]| {
            vd.cones()
                .iter()
                .find(|c| c.apex == apex.iter().map(|&x| bi(x)).collect::<Vec<_>>())
                .unwrap()
        };
        let origin = find(&[0, 0]);
        assert!(origin.edges.contains(&vec![bi(1), bi(0)]));
        assert!(origin.edges.contains(&vec![bi(0), bi(1)]));
        let right = find(&[1, 0]);
        assert!(right.edges.contains(&vec![bi(-1), bi(0)]));
        assert!(right.edges.contains(&vec![bi(-1), bi(1)]));
        let top = find(&[0, 1]);
        assert!(top.edges.contains(&vec![bi(0), bi(-1)]));
        assert!(top.edges.contains(&vec![bi(1), bi(-1)]));
    }

    #[test]
    fn irrational_input_rejected() {
        let ctx = crate::testutil::sqrt2_ctx();
        let s = ctx.generator(1);
        let p = SimplePolytope::new(
            ctx.clone(),
            1,
            vec![(vec![ctx.from_int(-1)], ctx.from_int(0)), (vec![s.clone()], s)],
        )
        .unwrap();
        assert!(matches!(
            vertex_data(&p),
            Err(LocalizationError::IrrationalInput)
        ));
    }

    #[test]
    fn non_integral_vertex_rejected() {
        let p = rational_polytope(1, &[(&[-1], 0), (&[2], 1)]);
        assert!(matches!(
            vertex_data(&p),
            Err(LocalizationError::NonIntegralVertex(_))
        ));
    }

    #[test]
    fn non_delzant_rejected() {
        // triangle (0,0), (1,0), (0,2): vertex basis determinant 2
        let p = rational_polytope(2, &[(&[-1, 0], 0), (&[0, -1], 0), (&[2, 1], 2)]);
        assert!(matches!(
            vertex_data(&p),
            Err(LocalizationError::NotDelzant(_, _))
        ));
    }

    #[test]
    fn interval_multiplicities() {
        let vd = vertex_data(&interval(2)).unwrap();
        let beta = PolarizingVector::from_i64(&[1]);
        assert_eq!(localized_multiplicity(&vd, &beta, &[bi(1)]).unwrap(), 1);
        assert_eq!(localized_multiplicity(&vd, &beta, &[bi(5)]).unwrap(), 0);
        assert_eq!(localized_multiplicity(&vd, &beta, &[bi(-1)]).unwrap(), 0);
    }

    #[test]
    fn point_interval_pins_sign() {
        // the k = 0 interval is a point; its two cones cancel everywhere
        // except the zero weight, which must come out +1
        let vd = vertex_data(&interval(0)).unwrap();
        let beta = PolarizingVector::from_i64(&[1]);
        assert_eq!(localized_multiplicity(&vd, &beta, &[bi(0)]).unwrap(), 1);
        assert_eq!(localized_multiplicity(&vd, &beta, &[bi(1)]).unwrap(), 0);
        assert_eq!(localized_multiplicity(&vd, &beta, &[bi(-1)]).unwrap(), 0);
    }

    #[test]
    fn non_generic_beta_rejected() {
        let vd = vertex_data(&interval(2)).unwrap();
        let beta = PolarizingVector::from_i64(&[0]);
        assert!(matches!(
            localized_multiplicity(&vd, &beta, &[bi(0)]),
            Err(LocalizationError::NonGenericBeta)
        ));
    }

    #[test]
    fn interval_character_over_box() {
        let vd = vertex_data(&interval(2)).unwrap();
        let beta = PolarizingVector::from_i64(&[1]);
        let c = localized_character(&vd, &beta, &[(-2, 4)]).unwrap();
        assert_eq!(
            c,
            TorusCharacter::from_integer_entries(1, &[(vec![0], 1), (vec![1], 1), (vec![2], 1)])
        );
    }

    #[test]
    fn cp2_character_over_box() {
        let vd = vertex_data(&cp2(1)).unwrap();
        let beta = PolarizingVector::from_i64(&[1, 2]);
        let c = localized_character(&vd, &beta, &[(-1, 2), (-1, 2)]).unwrap();
        assert_eq!(
            c,
            TorusCharacter::from_integer_entries(
                2,
                &[(vec![0, 0], 1), (vec![1, 0], 1), (vec![0, 1], 1)]
            )
        );
    }

    #[test]
    fn empty_box_gives_empty_character() {
        let vd = vertex_data(&interval(2)).unwrap();
        let beta = PolarizingVector::from_i64(&[1]);
        let c = localized_character(&vd, &beta, &[(3, 1)]).unwrap();
        assert!(c.is_empty());
    }

    #[test]
    fn beta_independence_on_full_box() {
        let vd = vertex_data(&cp2(2)).unwrap();
        let b1 = PolarizingVector::from_i64(&[1, 2]);
        let b2 = PolarizingVector::from_i64(&[-3, 1]);
        assert!(b1.is_generic_for(&vd));
        assert!(b2.is_generic_for(&vd));
        let box_ = [(-2, 4), (-2, 4)];
        assert_eq!(
            localized_character(&vd, &b1, &box_).unwrap(),
            localized_character(&vd, &b2, &box_).unwrap()
        );
    }

    #[test]
    fn deterministic_beta_is_generic() {
        for p in [interval(3), cp2(2)] {
            let vd = vertex_data(&p).unwrap();
            let beta = PolarizingVector::deterministic_for(&vd);
            assert!(beta.is_generic_for(&vd));
        }
    }
}
