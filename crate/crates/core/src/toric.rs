//! The Prato construction at the data level: simple polytopes over a
//! declared number ring, the induced quasifold presentation
//! `0 -> h -> R^d -> t -> 0`, exact quantization as a weight count, the
//! shifted Bohr-Sommerfeld test, and reduction in stages.
//!
//! Inequality convention, fixed once and for all: a polytope is
//! `{ xi : <xi, v_i> <= c_i }`. Much of the Delzant literature uses `>=`;
//! every sign in this crate assumes `<=`.

use num::{BigInt, One, Signed, Zero};
use thiserror::Error;

use super::algebra::{AlgebraElement, AlgebraError, AlgebraMatrix, CtxRef, Rat};
use super::charring::{dot_in, CharError, SubalgebraData, TorusCharacter};
use super::lattice::{solve_integer_affine, EnumerationError, InequalitySystem, IntVec};

#[derive(Debug, Error)]
pub enum ToricError {
    #[error("polytope is unbounded")]
    Unbounded,
    #[error("polytope is not simple at vertex {0}")]
    NotSimple(String),
    #[error("polytope is empty")]
    Empty,
    #[error("the facet normals do not span the ambient space")]
    PiNotSurjective,
    #[error("point {0} lies outside the polytope")]
    OutsidePolytope(String),
    #[error("the reduction slice misses the polytope")]
    EmptySlice,
    #[error("subalgebra is not transverse: {0}")]
    NotTransverse(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Char(#[from] CharError),
    #[error("enumeration failed: {0}")]
    Enumeration(#[from] EnumerationError),
}

pub type AlgVec = Vec<AlgebraElement>;

/// A simple polytope `{ xi in t* : <xi, v_i> <= c_i }` with exact facet data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplePolytope {
    ctx: CtxRef,
    ambient_rank: usize,
    facets: Vec<(AlgVec, AlgebraElement)>,
}

impl SimplePolytope {
    pub fn new(
        ctx: CtxRef,
        ambient_rank: usize,
        facets: Vec<(AlgVec, AlgebraElement)>,
    ) -> Result<Self, ToricError> {
        for (v, c) in &facets {
            if v.len() != ambient_rank {
                return Err(ToricError::ShapeMismatch(format!(
                    "facet normal of length {} in rank {ambient_rank}",
                    v.len()
                )));
            }
            for e in v.iter().chain(std::iter::once(c)) {
                if !e.context().as_ref().eq(ctx.as_ref()) {
                    return Err(ToricError::Algebra(AlgebraError::ContextMismatch));
                }
            }
        }
        Ok(Self { ctx, ambient_rank, facets })
    }

    pub fn context(&self) -> &CtxRef {
        &self.ctx
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient_rank
    }

    pub fn facets(&self) -> &[(AlgVec, AlgebraElement)] {
        &self.facets
    }

    pub fn facet_count(&self) -> usize {
        self.facets.len()
    }

    /// Exact membership test.
    pub fn contains(&self, xi: &[AlgebraElement]) -> Result<bool, ToricError> {
        for (v, c) in &self.facets {
            let slack = c.sub(&dot_in(&self.ctx, xi, v)?)?;
            if slack.sign()? == std::cmp::Ordering::Less {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn normals_matrix(&self) -> Result<AlgebraMatrix, ToricError> {
        let rows: Vec<AlgVec> = self.facets.iter().map(|(v, _)| v.clone()).collect();
        if rows.is_empty() {
            return Ok(AlgebraMatrix::zero(self.ctx.clone(), 0, self.ambient_rank));
        }
        Ok(AlgebraMatrix::from_rows(self.ctx.clone(), rows)?)
    }

    /// Boundedness of the recession cone `{ x : <x, v_i> <= 0 }`. The cone
    /// is nonzero exactly when the normals fail to span (lineality) or some
    /// extreme-ray candidate, cut out by n-1 independent normals, satisfies
    /// every inequality.
    pub fn is_bounded(&self) -> Result<bool, ToricError> {
        let n = self.ambient_rank;
        if n == 0 {
            return Ok(true);
        }
        let normals = self.normals_matrix()?;
        if normals.rank()? < n {
            return Ok(false);
        }
        for subset in combinations(self.facets.len(), n - 1) {
            let rows: Vec<AlgVec> = subset.iter().map(|&i| self.facets[i].0.clone()).collect();
            let m = if rows.is_empty() {
                AlgebraMatrix::zero(self.ctx.clone(), 0, n)
            } else {
                AlgebraMatrix::from_rows(self.ctx.clone(), rows)?
            };
            let kernel = m.kernel_basis()?;
            if kernel.len() != 1 {
                continue;
            }
            let u = &kernel[0];
            for dir in [u.clone(), u.iter().map(AlgebraElement::neg).collect::<Vec<_>>()] {
                let mut recessive = true;
                for (v, _) in &self.facets {
                    if dot_in(&self.ctx, &dir, v)?.sign()? == std::cmp::Ordering::Greater {
                        recessive = false;
                        break;
                    }
                }
                if recessive {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// All vertices by exact enumeration over n-subsets of facets:
    /// deduplicated and sorted in the canonical coefficient order.
    pub fn vertices(&self) -> Result<Vec<AlgVec>, ToricError> {
        let mut out: Vec<AlgVec> = self
            .vertex_bases()?
            .into_iter()
            .map(|(point, _)| point)
            .collect();
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// Every feasible pair (point, active n-subset with independent
    /// normals). A vertex of a degenerate presentation can appear once per
    /// cutting subset; the localization sum relies on that.
    pub(crate) fn vertex_bases(&self) -> Result<Vec<(AlgVec, Vec<usize>)>, ToricError> {
        let n = self.ambient_rank;
        let mut out = Vec::new();
        for subset in combinations(self.facets.len(), n) {
            let rows: Vec<AlgVec> = subset.iter().map(|&i| self.facets[i].0.clone()).collect();
            let m = if rows.is_empty() {
                AlgebraMatrix::zero(self.ctx.clone(), 0, n)
            } else {
                AlgebraMatrix::from_rows(self.ctx.clone(), rows)?
            };
            if m.rank()? < n {
                continue;
            }
            let rhs: AlgVec = subset.iter().map(|&i| self.facets[i].1.clone()).collect();
            let point = m.solve(&rhs)?.expect("full-rank square system");
            if self.contains(&point)? {
                out.push((point, subset));
            }
        }
        Ok(out)
    }

    /// Facet indices active at a point, decided by the exact zero test.
    fn active_set(&self, xi: &[AlgebraElement]) -> Result<Vec<usize>, ToricError> {
        let mut active = Vec::new();
        for (i, (v, c)) in self.facets.iter().enumerate() {
            if c.sub(&dot_in(&self.ctx, xi, v)?)?.is_zero() {
                active.push(i);
            }
        }
        Ok(active)
    }

    /// Simplicity relative to the affine hull: every vertex must lie on
    /// exactly `dim` edges, where `dim` is the dimension of the polytope.
    /// This accepts the degenerate point polytopes that arise as k = 0
    /// members of the standard families.
    fn check_simple(&self, vertices: &[AlgVec]) -> Result<(), ToricError> {
        let actives: Vec<Vec<usize>> = vertices
            .iter()
            .map(|v| self.active_set(v))
            .collect::<Result<_, _>>()?;
        // implicit equalities: facets active at every vertex
        let implicit: Vec<usize> = (0..self.facets.len())
            .filter(|i| actives.iter().all(|a| a.contains(i)))
            .collect();
        let implicit_rows: Vec<AlgVec> =
            implicit.iter().map(|&i| self.facets[i].0.clone()).collect();
        let implicit_rank = if implicit_rows.is_empty() {
            0
        } else {
            AlgebraMatrix::from_rows(self.ctx.clone(), implicit_rows)?.rank()?
        };
        let dim = self.ambient_rank - implicit_rank;
        for (vi, v) in vertices.iter().enumerate() {
            let mut edges = 0usize;
            for (wi, _) in vertices.iter().enumerate() {
                if wi == vi {
                    continue;
                }
                let shared: Vec<usize> = actives[vi]
                    .iter()
                    .filter(|i| actives[wi].contains(i))
                    .copied()
                    .collect();
                // the face cut out by the shared facets is an edge exactly
                // when v and w are its only vertices
                let face_vertices = actives
                    .iter()
                    .filter(|a| shared.iter().all(|i| a.contains(i)))
                    .count();
                if face_vertices == 2 {
                    edges += 1;
                }
            }
            if edges != dim {
                let coords: Vec<String> = v.iter().map(|e| e.to_string()).collect();
                return Err(ToricError::NotSimple(format!("({})", coords.join(", "))));
            }
        }
        Ok(())
    }

    /// Per-coordinate bounding box of the vertex set, as exact values.
    pub fn vertex_box(&self) -> Result<Vec<(AlgebraElement, AlgebraElement)>, ToricError> {
        let vertices = self.vertices()?;
        if vertices.is_empty() {
            return Err(ToricError::Empty);
        }
        let mut box_ = Vec::with_capacity(self.ambient_rank);
        for j in 0..self.ambient_rank {
            let mut lo = vertices[0][j].clone();
            let mut hi = vertices[0][j].clone();
            for v in &vertices[1..] {
                if v[j].compare(&lo)? == std::cmp::Ordering::Less {
                    lo = v[j].clone();
                }
                if v[j].compare(&hi)? == std::cmp::Ordering::Greater {
                    hi = v[j].clone();
                }
            }
            box_.push((lo, hi));
        }
        Ok(box_)
    }
}

/// Affine embedding of a (possibly reduced) moment space back into the
/// coordinates of the original ambient `t*`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmbientFrame {
    ctx: CtxRef,
    /// Rank of the original ambient space.
    original_rank: usize,
    offset: AlgVec,
    /// One column per local coordinate, each of length `original_rank`.
    basis: Vec<AlgVec>,
}

impl AmbientFrame {
    pub fn identity(ctx: &CtxRef, rank: usize) -> Self {
        let offset = vec![ctx.zero(); rank];
        let basis = (0..rank)
            .map(|j| {
                (0..rank)
                    .map(|i| if i == j { ctx.one() } else { ctx.zero() })
                    .collect()
            })
            .collect();
        Self { ctx: ctx.clone(), original_rank: rank, offset, basis }
    }

    pub fn local_rank(&self) -> usize {
        self.basis.len()
    }

    /// Map a local point to original coordinates.
    pub fn apply(&self, local: &[AlgebraElement]) -> Result<AlgVec, ToricError> {
        if local.len() != self.basis.len() {
            return Err(ToricError::ShapeMismatch("frame application".into()));
        }
        let mut out = self.offset.clone();
        for (col, x) in self.basis.iter().zip(local) {
            for (o, c) in out.iter_mut().zip(col) {
                *o = o.add(&c.mul(x)?)?;
            }
        }
        Ok(out)
    }

    /// Compose with an inner affine map `local = offset2 + basis2 * inner`.
    fn compose(&self, offset2: &[AlgebraElement], basis2: &[AlgVec]) -> Result<Self, ToricError> {
        let offset = self.apply(offset2)?;
        let mut basis = Vec::with_capacity(basis2.len());
        for col in basis2 {
            if col.len() != self.basis.len() {
                return Err(ToricError::ShapeMismatch("frame composition".into()));
            }
            let mut out = vec![self.ctx.zero(); self.original_rank];
            for (own_col, x) in self.basis.iter().zip(col) {
                for (o, c) in out.iter_mut().zip(own_col) {
                    *o = o.add(&c.mul(x)?)?;
                }
            }
            basis.push(out);
        }
        Ok(Self { ctx: self.ctx.clone(), original_rank: self.original_rank, offset, basis })
    }
}

/// The exact sequence `0 -> h -> R^d -> t -> 0` with constants: the Prato
/// presentation of a toric quasifold.
#[derive(Debug, Clone)]
pub struct PratoQuasifold {
    polytope: SimplePolytope,
    pi: AlgebraMatrix,
    kernel: Vec<AlgVec>,
    constants: AlgVec,
    vertices: Vec<AlgVec>,
    frame: AmbientFrame,
}

/// Build the quasifold presentation of a simple polytope, performing the
/// full invariant checks (bounded, nonempty, simple, surjective).
pub fn build_quasifold(polytope: SimplePolytope) -> Result<PratoQuasifold, ToricError> {
    if !polytope.is_bounded()? {
        return Err(ToricError::Unbounded);
    }
    let vertices = polytope.vertices()?;
    if vertices.is_empty() {
        return Err(ToricError::Empty);
    }
    polytope.check_simple(&vertices)?;
    PratoQuasifold::assemble(polytope, vertices, None)
}

impl PratoQuasifold {
    fn assemble(
        polytope: SimplePolytope,
        vertices: Vec<AlgVec>,
        frame: Option<AmbientFrame>,
    ) -> Result<Self, ToricError> {
        let ctx = polytope.ctx.clone();
        let n = polytope.ambient_rank;
        let d = polytope.facet_count();
        // pi has the facet normals as columns
        let mut pi = AlgebraMatrix::zero(ctx.clone(), n, d);
        for (i, (v, _)) in polytope.facets.iter().enumerate() {
            for (a, x) in v.iter().enumerate() {
                *pi.at_mut(a, i) = x.clone();
            }
        }
        if pi.rank()? < n {
            return Err(ToricError::PiNotSurjective);
        }
        let kernel = pi.kernel_basis()?;
        let constants: AlgVec = polytope.facets.iter().map(|(_, c)| c.clone()).collect();
        // pi composed with the kernel basis must vanish exactly
        for h in &kernel {
            debug_assert!(pi.mul_vec(h)?.iter().all(AlgebraElement::is_zero));
        }
        let frame = frame.unwrap_or_else(|| AmbientFrame::identity(&ctx, n));
        Ok(Self { polytope, pi, kernel, constants, vertices, frame })
    }

    pub fn polytope(&self) -> &SimplePolytope {
        &self.polytope
    }

    pub fn context(&self) -> &CtxRef {
        &self.polytope.ctx
    }

    pub fn ambient_rank(&self) -> usize {
        self.polytope.ambient_rank
    }

    pub fn facet_count(&self) -> usize {
        self.polytope.facet_count()
    }

    pub fn pi(&self) -> &AlgebraMatrix {
        &self.pi
    }

    /// Canonical echelon basis of `h = ker(pi)`.
    pub fn kernel(&self) -> &[AlgVec] {
        &self.kernel
    }

    pub fn constants(&self) -> &AlgVec {
        &self.constants
    }

    pub fn vertices(&self) -> &[AlgVec] {
        &self.vertices
    }

    pub fn frame(&self) -> &AmbientFrame {
        &self.frame
    }

    /// `pi*(xi) = (<xi, v_i>)_i`.
    pub fn pi_star(&self, xi: &[AlgebraElement]) -> Result<AlgVec, ToricError> {
        if xi.len() != self.ambient_rank() {
            return Err(ToricError::ShapeMismatch("pi* argument".into()));
        }
        let mut out = Vec::with_capacity(self.facet_count());
        for (v, _) in self.polytope.facets.iter() {
            out.push(dot_in(self.context(), xi, v)?);
        }
        Ok(out)
    }

    /// Unique preimage of `x` under `pi*` when it exists.
    pub fn pi_star_preimage(&self, x: &[AlgebraElement]) -> Result<Option<AlgVec>, ToricError> {
        Ok(self.pi.transpose().solve(x)?)
    }

    /// The quasifold with constants shifted by `-pi*(xi)`, i.e. the polytope
    /// translated by `-xi`. The frame remembers the translation.
    pub fn shifted_by(&self, xi: &[AlgebraElement]) -> Result<Self, ToricError> {
        let image = self.pi_star(xi)?;
        let facets: Vec<(AlgVec, AlgebraElement)> = self
            .polytope
            .facets
            .iter()
            .zip(&image)
            .map(|((v, c), s)| Ok((v.clone(), c.sub(s)?)))
            .collect::<Result<_, ToricError>>()?;
        let polytope = SimplePolytope::new(self.polytope.ctx.clone(), self.ambient_rank(), facets)?;
        let vertices: Vec<AlgVec> = {
            let mut vs: Vec<AlgVec> = self
                .vertices
                .iter()
                .map(|v| {
                    v.iter()
                        .zip(xi)
                        .map(|(a, b)| a.sub(b))
                        .collect::<Result<AlgVec, _>>()
                })
                .collect::<Result<_, _>>()?;
            vs.sort();
            vs
        };
        let frame = self.frame.compose(xi, &identity_basis(self.context(), self.ambient_rank()))?;
        Self::assemble(polytope, vertices, Some(frame))
    }

    /// The integer box bound `0 <= b_i <= ceil(c_i - min_vertices <xi, v_i>)`
    /// used by the quantization enumeration.
    pub fn b_box_upper(&self) -> Result<Vec<BigInt>, ToricError> {
        let mut out = Vec::with_capacity(self.facet_count());
        for (i, (v, c)) in self.polytope.facets.iter().enumerate() {
            let mut min: Option<AlgebraElement> = None;
            for vertex in &self.vertices {
                let val = dot_in(self.context(), vertex, v)?;
                min = Some(match min {
                    None => val,
                    Some(cur) => {
                        if val.compare(&cur)? == std::cmp::Ordering::Less {
                            val
                        } else {
                            cur
                        }
                    }
                });
            }
            let min = min.ok_or(ToricError::Empty)?;
            let bound = c.sub(&min)?.ceil_int()?;
            debug_assert!(!bound.is_negative(), "facet {i} slack");
            out.push(bound);
        }
        Ok(out)
    }

    /// Integer vectors `b` with `c - b` in the image of `pi*`, restricted to
    /// `lower_i <= b_i <= upper_i`, together with the preimages
    /// `xi = (pi*)^{-1}(c - b)`. Solved exactly: the membership conditions
    /// become an affine integer system, its solution lattice is enumerated
    /// over the box, and each candidate is verified by an exact solve.
    fn b_candidates(
        &self,
        lower: &[BigInt],
        upper: &[BigInt],
    ) -> Result<Vec<(IntVec, AlgVec)>, ToricError> {
        let d = self.facet_count();
        let ctx = self.context();
        let gens = ctx.dim();
        // One rational equation per kernel vector and generator coordinate:
        // sum_i b_i h_i[t] = <c, h>[t]; scaled to integers.
        let mut rows: Vec<IntVec> = Vec::new();
        let mut rhs: Vec<BigInt> = Vec::new();
        for h in &self.kernel {
            let target = dot_in(ctx, &self.constants, h)?;
            for t in 0..gens {
                let mut row_rat: Vec<Rat> = Vec::with_capacity(d);
                for hi in h {
                    row_rat.push(hi.coeffs()[t].clone());
                }
                let mut denom_lcm = BigInt::one();
                for r in row_rat.iter().chain(std::iter::once(&target.coeffs()[t])) {
                    denom_lcm = num::Integer::lcm(&denom_lcm, r.denom());
                }
                let scale = Rat::from_integer(denom_lcm);
                let row: IntVec = row_rat.iter().map(|r| (r * &scale).to_integer()).collect();
                let b = (&target.coeffs()[t] * &scale).to_integer();
                if row.iter().all(BigInt::is_zero) {
                    if !b.is_zero() {
                        return Ok(Vec::new());
                    }
                    continue;
                }
                rows.push(row);
                rhs.push(b);
            }
        }
        let (particular, basis) = if rows.is_empty() {
            (vec![BigInt::zero(); d], super::lattice::int_identity(d))
        } else {
            match solve_integer_affine(&rows, &rhs) {
                Some(sol) => sol,
                None => return Ok(Vec::new()),
            }
        };
        // Box constraints in the lattice coordinates.
        let r = basis.len();
        let mut sys = InequalitySystem::new(r);
        for i in 0..d {
            let coeffs_pos: Vec<Rat> = (0..r)
                .map(|j| Rat::from_integer(basis[j][i].clone()))
                .collect();
            let coeffs_neg: Vec<Rat> = coeffs_pos.iter().map(|x| -x.clone()).collect();
            // b_i <= upper_i  and  -b_i <= -lower_i
            sys.push(
                coeffs_pos,
                Rat::from_integer(&upper[i] - &particular[i]),
            );
            sys.push(
                coeffs_neg,
                Rat::from_integer(&particular[i] - &lower[i]),
            );
        }
        let mut out = Vec::new();
        for k in sys.integer_points()? {
            let mut b = particular.clone();
            for (j, kj) in k.iter().enumerate() {
                for i in 0..d {
                    b[i] += &basis[j][i] * kj;
                }
            }
            let target: AlgVec = self
                .constants
                .iter()
                .zip(&b)
                .map(|(c, bi)| c.sub(&ctx.from_rational(Rat::from_integer(bi.clone()))))
                .collect::<Result<_, _>>()?;
            let xi = self
                .pi_star_preimage(&target)?
                .expect("kernel conditions guarantee membership in im(pi*)");
            out.push((b, xi));
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(out)
    }

    /// The quantization: all `b` in `Z_{>=0}^d` inside the vertex-derived
    /// box with `c - b` in the image of `pi*`, each recorded with its
    /// weight `xi = (pi*)^{-1}(c - b)`. Entries are sorted by `b`.
    pub fn quantize(&self) -> Result<QuantizationResult, ToricError> {
        let upper = self.b_box_upper()?;
        let lower = vec![BigInt::zero(); self.facet_count()];
        let entries = self
            .b_candidates(&lower, &upper)?
            .into_iter()
            .map(|(b, xi)| QuantizationEntry { b, xi })
            .collect();
        Ok(QuantizationResult { entries })
    }

    /// Bohr-Sommerfeld test at a point of the polytope: does `pi*(xi)` lie
    /// on the shifted lattice `c + Z^d`? Each coordinate of `c - pi*(xi)`
    /// must be a rational integer in the algebra.
    pub fn bohr_sommerfeld(&self, xi: &[AlgebraElement]) -> Result<bool, ToricError> {
        if !self.polytope.contains(xi)? {
            let coords: Vec<String> = xi.iter().map(|e| e.to_string()).collect();
            return Err(ToricError::OutsidePolytope(format!("({})", coords.join(", "))));
        }
        let image = self.pi_star(xi)?;
        for (c, a) in self.constants.iter().zip(&image) {
            if !c.sub(a)?.is_integer() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Bohr-Sommerfeld candidates inside the vertex bounding box: solutions
    /// of `pi*(xi) in c + Z^d` regardless of membership in the polytope.
    /// This is the exact candidate grid for the invariants-versus-reduction
    /// check; it is finite because the polytope is bounded.
    pub fn bohr_sommerfeld_candidates(&self) -> Result<Vec<(IntVec, AlgVec)>, ToricError> {
        let box_ = self.polytope.vertex_box()?;
        let d = self.facet_count();
        let mut lower = Vec::with_capacity(d);
        let mut upper = Vec::with_capacity(d);
        for (v, c) in self.polytope.facets.iter() {
            // range of <xi, v> over the coordinate box, split by sign
            let mut lo = self.context().zero();
            let mut hi = self.context().zero();
            for (vj, (bl, bh)) in v.iter().zip(&box_) {
                match vj.sign()? {
                    std::cmp::Ordering::Equal => {}
                    std::cmp::Ordering::Greater => {
                        lo = lo.add(&vj.mul(bl)?)?;
                        hi = hi.add(&vj.mul(bh)?)?;
                    }
                    std::cmp::Ordering::Less => {
                        lo = lo.add(&vj.mul(bh)?)?;
                        hi = hi.add(&vj.mul(bl)?)?;
                    }
                }
            }
            // b = c - <xi, v>
            lower.push(c.sub(&hi)?.floor_int()?);
            upper.push(c.sub(&lo)?.ceil_int()?);
        }
        self.b_candidates(&lower, &upper)
    }

    /// Reduce along a subalgebra `h'` of the residual torus at level `xi'`.
    ///
    /// The composed presentation keeps the ambient `R^d`: the new moment
    /// space is `ann(h')` with its canonical echelon basis `W`, the new
    /// normals are `<W_a, v_i>`, the constants shift by `pi*(xi')`, and the
    /// kernel grows to `pi^{-1}(h')`. The frame records `xi = xi' + W eta`
    /// so reduced weights can be read in the original coordinates.
    pub fn reduce_in_stages(
        &self,
        h_prime: &SubalgebraData,
        xi_prime: &[AlgebraElement],
    ) -> Result<PratoQuasifold, ToricError> {
        let w = self.annihilator_basis(h_prime)?;
        self.reduce_with_complement(h_prime, xi_prime, &w)
    }

    /// Canonical echelon basis of the annihilator of `h'` in `t*`.
    fn annihilator_basis(&self, h_prime: &SubalgebraData) -> Result<Vec<AlgVec>, ToricError> {
        let n = self.ambient_rank();
        if h_prime.dim() != n {
            return Err(ToricError::ShapeMismatch("subalgebra rank".into()));
        }
        let s = h_prime.basis().len();
        if s == 0 {
            return Ok(identity_basis(self.context(), n));
        }
        let m = AlgebraMatrix::from_rows(self.context().clone(), h_prime.basis().to_vec())?;
        if m.rank()? < s {
            return Err(ToricError::NotTransverse(
                "subalgebra basis is linearly dependent".into(),
            ));
        }
        Ok(m.kernel_basis()?)
    }

    /// Reduction with an explicit annihilator basis; the quantization of
    /// the result must not depend on this choice.
    pub fn reduce_with_complement(
        &self,
        h_prime: &SubalgebraData,
        xi_prime: &[AlgebraElement],
        w: &[AlgVec],
    ) -> Result<PratoQuasifold, ToricError> {
        let n = self.ambient_rank();
        if xi_prime.len() != n {
            return Err(ToricError::ShapeMismatch("level vector".into()));
        }
        let s = h_prime.basis().len();
        let new_rank = n - s;
        if w.len() != new_rank {
            return Err(ToricError::NotTransverse(
                "annihilator basis has the wrong rank".into(),
            ));
        }
        let shift = self.pi_star(xi_prime)?;
        let mut facets = Vec::with_capacity(self.facet_count());
        for ((v, c), s_i) in self.polytope.facets.iter().zip(&shift) {
            let normal: AlgVec = w
                .iter()
                .map(|wa| dot_in(self.context(), wa, v))
                .collect::<Result<_, _>>()?;
            facets.push((normal, c.sub(s_i)?));
        }
        let polytope = SimplePolytope::new(self.context().clone(), new_rank, facets)?;
        if !polytope.is_bounded()? {
            return Err(ToricError::Unbounded);
        }
        let vertices = polytope.vertices()?;
        if vertices.is_empty() {
            return Err(ToricError::EmptySlice);
        }
        let frame = self.frame.compose(xi_prime, w)?;
        PratoQuasifold::assemble(polytope, vertices, Some(frame))
    }
}

fn identity_basis(ctx: &CtxRef, n: usize) -> Vec<AlgVec> {
    (0..n)
        .map(|j| {
            (0..n)
                .map(|i| if i == j { ctx.one() } else { ctx.zero() })
                .collect()
        })
        .collect()
}

/// One weight of the quantization: the ambient exponent `b` and the moment
/// coordinate `xi` with `c - b = pi*(xi)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizationEntry {
    pub b: IntVec,
    pub xi: AlgVec,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizationResult {
    pub entries: Vec<QuantizationEntry>,
}

impl QuantizationResult {
    pub fn dimension(&self) -> usize {
        self.entries.len()
    }

    pub fn xi_weights(&self) -> Vec<AlgVec> {
        self.entries.iter().map(|e| e.xi.clone()).collect()
    }

    /// The weights in the coordinates of the original ambient space,
    /// through the quasifold's frame.
    pub fn xi_weights_in(&self, frame: &AmbientFrame) -> Result<Vec<AlgVec>, ToricError> {
        self.entries.iter().map(|e| frame.apply(&e.xi)).collect()
    }

    /// The ambient character: offset `c`, one unit of multiplicity at `-b`
    /// per entry.
    pub fn ambient_character(&self, q: &PratoQuasifold) -> Result<TorusCharacter, ToricError> {
        let ctx = q.context().clone();
        let mut c = TorusCharacter::empty(ctx.clone(), q.facet_count());
        for e in &self.entries {
            let w: AlgVec = e
                .b
                .iter()
                .map(|bi| ctx.from_rational(Rat::from_integer(-bi.clone())))
                .collect();
            c.add_term(w, 1);
        }
        Ok(c.with_offset(q.constants().clone())?)
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        // advance
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraContext;

    fn r(n: i64) -> Rat {
        Rat::from_integer(n.into())
    }

    fn rr(n: i64, d: i64) -> Rat {
        Rat::new(n.into(), d.into())
    }

    use crate::testutil::{cp2, interval, quasi_interval};

    fn int_point(q: &PratoQuasifold, coords: &[i64]) -> AlgVec {
        coords.iter().map(|&x| q.context().from_int(x)).collect()
    }

    #[test]
    fn interval_kernel() {
        let q = interval(2);
        let ctx = q.context().clone();
        assert_eq!(q.kernel(), &[vec![ctx.from_int(1), ctx.from_int(1)]]);
    }

    #[test]
    fn cp2_kernel() {
        let q = cp2(2);
        let ctx = q.context().clone();
        assert_eq!(
            q.kernel(),
            &[vec![ctx.from_int(1), ctx.from_int(1), ctx.from_int(1)]]
        );
    }

    #[test]
    fn quasi_interval_kernel() {
        let q = quasi_interval();
        let ctx = q.context().clone();
        assert_eq!(q.kernel(), &[vec![ctx.generator(1), ctx.one()]]);
    }

    #[test]
    fn interval_vertices() {
        let q = interval(2);
        assert_eq!(
            q.vertices(),
            &[int_point(&q, &[0]), int_point(&q, &[2])]
        );
    }

    #[test]
    fn cp2_vertices() {
        let q = cp2(1);
        let vs = q.vertices();
        assert_eq!(vs.len(), 3);
        assert!(vs.contains(&int_point(&q, &[0, 0])));
        assert!(vs.contains(&int_point(&q, &[1, 0])));
        assert!(vs.contains(&int_point(&q, &[0, 1])));
    }

    #[test]
    fn quasi_interval_vertices() {
        let q = quasi_interval();
        assert_eq!(q.vertices(), &[int_point(&q, &[0]), int_point(&q, &[1])]);
    }

    #[test]
    fn unbounded_rejected() {
        let ctx = AlgebraContext::rational();
        let p = SimplePolytope::new(
            ctx.clone(),
            1,
            vec![(vec![ctx.from_int(-1)], ctx.from_int(0))],
        )
        .unwrap();
        assert!(matches!(build_quasifold(p), Err(ToricError::Unbounded)));
    }

    #[test]
    fn empty_rejected() {
        let ctx = AlgebraContext::rational();
        let p = SimplePolytope::new(
            ctx.clone(),
            1,
            vec![
                (vec![ctx.from_int(-1)], ctx.from_int(-2)), // xi >= 2
                (vec![ctx.from_int(1)], ctx.from_int(0)),   // xi <= 0
            ],
        )
        .unwrap();
        assert!(matches!(build_quasifold(p), Err(ToricError::Empty)));
    }

    #[test]
    fn octahedron_not_simple() {
        let ctx = AlgebraContext::rational();
        let mut facets = Vec::new();
        for sx in [-1i64, 1] {
            for sy in [-1i64, 1] {
                for sz in [-1i64, 1] {
                    facets.push((
                        vec![ctx.from_int(sx), ctx.from_int(sy), ctx.from_int(sz)],
                        ctx.from_int(1),
                    ));
                }
            }
        }
        let p = SimplePolytope::new(ctx, 3, facets).unwrap();
        assert!(matches!(build_quasifold(p), Err(ToricError::NotSimple(_))));
    }

    #[test]
    fn degenerate_point_families_accepted() {
        // k = 0 members collapse to points and must still build
        let q = interval(0);
        assert_eq!(q.vertices().len(), 1);
        let q = cp2(0);
        assert_eq!(q.vertices().len(), 1);
    }

    #[test]
    fn quantize_interval() {
        let q = interval(2);
        let result = q.quantize().unwrap();
        assert_eq!(result.dimension(), 3);
        let xis: Vec<AlgVec> = result.xi_weights();
        assert_eq!(
            xis,
            vec![int_point(&q, &[0]), int_point(&q, &[1]), int_point(&q, &[2])]
        );
        // entries carry b1 + b2 = 2
        for e in &result.entries {
            assert_eq!(&e.b[0] + &e.b[1], BigInt::from(2));
        }
    }

    #[test]
    fn quantize_cp2() {
        let q = cp2(2);
        let result = q.quantize().unwrap();
        assert_eq!(result.dimension(), 6);
        for e in &result.entries {
            // xi = (b1, b2) with b1 + b2 <= 2
            assert_eq!(e.xi[0].to_integer().unwrap(), e.b[0]);
            assert_eq!(e.xi[1].to_integer().unwrap(), e.b[1]);
            assert!(&e.b[0] + &e.b[1] <= BigInt::from(2));
        }
    }

    #[test]
    fn quantize_quasi_interval() {
        let q = quasi_interval();
        let result = q.quantize().unwrap();
        assert_eq!(result.dimension(), 1);
        assert_eq!(result.xi_weights(), vec![int_point(&q, &[1])]);
        assert_eq!(result.entries[0].b, vec![BigInt::from(1), BigInt::from(0)]);
    }

    #[test]
    fn quantize_entries_verify_invariants() {
        for q in [interval(3), cp2(2), quasi_interval()] {
            let result = q.quantize().unwrap();
            for e in &result.entries {
                // c - b = pi*(xi) exactly, and xi satisfies the inequalities
                let image = q.pi_star(&e.xi).unwrap();
                for ((c, b), im) in q.constants().iter().zip(&e.b).zip(&image) {
                    let expected = c
                        .sub(&q.context().from_rational(Rat::from_integer(b.clone())))
                        .unwrap();
                    assert_eq!(&expected, im);
                }
                assert!(q.polytope().contains(&e.xi).unwrap());
            }
        }
    }

    #[test]
    fn bohr_sommerfeld_examples() {
        let q = interval(2);
        assert!(q.bohr_sommerfeld(&int_point(&q, &[1])).unwrap());
        let half = vec![q.context().from_rational(rr(1, 2))];
        assert!(!q.bohr_sommerfeld(&half).unwrap());
        let q = quasi_interval();
        assert!(!q.bohr_sommerfeld(&int_point(&q, &[0])).unwrap());
        assert!(q.bohr_sommerfeld(&int_point(&q, &[1])).unwrap());
        let outside = vec![q.context().from_int(7)];
        assert!(matches!(
            q.bohr_sommerfeld(&outside),
            Err(ToricError::OutsidePolytope(_))
        ));
    }

    #[test]
    fn reduce_cp2_along_antidiagonal() {
        let q = cp2(2);
        let ctx = q.context().clone();
        let h = SubalgebraData::new(
            ctx.clone(),
            2,
            vec![vec![ctx.from_int(1), ctx.from_int(-1)]],
        )
        .unwrap();
        let level = vec![ctx.zero(), ctx.zero()];
        let reduced = q.reduce_in_stages(&h, &level).unwrap();
        let result = reduced.quantize().unwrap();
        assert_eq!(result.dimension(), 2);
        let mapped = result.xi_weights_in(reduced.frame()).unwrap();
        assert!(mapped.contains(&int_point(&q, &[0, 0])));
        assert!(mapped.contains(&int_point(&q, &[1, 1])));
    }

    #[test]
    fn reduce_by_zero_subalgebra_shifts_constants() {
        let q = interval(2);
        let ctx = q.context().clone();
        let h = SubalgebraData::trivial(ctx.clone(), 1);
        let xi = vec![ctx.from_int(1)];
        let reduced = q.reduce_in_stages(&h, &xi).unwrap();
        // constants shift by pi*(xi) = (-1, 1)
        assert_eq!(
            reduced.constants(),
            &vec![ctx.from_int(1), ctx.from_int(1)]
        );
        assert_eq!(reduced.quantize().unwrap().dimension(), 3);
        // weights map back to the original coordinates 0, 1, 2
        let mapped = reduced
            .quantize()
            .unwrap()
            .xi_weights_in(reduced.frame())
            .unwrap();
        assert_eq!(
            mapped,
            vec![int_point(&q, &[0]), int_point(&q, &[1]), int_point(&q, &[2])]
        );
    }

    #[test]
    fn reduce_to_point_reproduces_bohr_sommerfeld() {
        let q = interval(2);
        let ctx = q.context().clone();
        let h = SubalgebraData::new(ctx.clone(), 1, vec![vec![ctx.one()]]).unwrap();
        let reduced = q.reduce_in_stages(&h, &[ctx.from_int(1)]).unwrap();
        assert_eq!(reduced.ambient_rank(), 0);
        assert_eq!(reduced.quantize().unwrap().dimension(), 1);
        // at a non-lattice level the point quasifold quantizes to zero
        let reduced = q
            .reduce_in_stages(&h, &[ctx.from_rational(rr(1, 2))])
            .unwrap();
        assert_eq!(reduced.quantize().unwrap().dimension(), 0);
    }

    #[test]
    fn reduce_empty_slice_detected() {
        let q = cp2(2);
        let ctx = q.context().clone();
        let h = SubalgebraData::new(
            ctx.clone(),
            2,
            vec![vec![ctx.from_int(1), ctx.from_int(-1)]],
        )
        .unwrap();
        // slice xi1 - xi2 = 5 misses the simplex
        let level = vec![ctx.from_int(5), ctx.zero()];
        assert!(matches!(
            q.reduce_in_stages(&h, &level),
            Err(ToricError::EmptySlice)
        ));
    }

    #[test]
    fn quantize_dimension_matches_lattice_count_for_rational_input() {
        // brute-force oracle: integer points of the polytope
        for (q, n) in [(interval(5), 1usize), (cp2(3), 2)] {
            let box_ = q.polytope().vertex_box().unwrap();
            let mut count = 0usize;
            let lo: Vec<i64> = box_
                .iter()
                .map(|(l, _)| i64::try_from(l.to_rational().unwrap().floor().to_integer()).unwrap())
                .collect();
            let hi: Vec<i64> = box_
                .iter()
                .map(|(_, h)| i64::try_from(h.to_rational().unwrap().ceil().to_integer()).unwrap())
                .collect();
            let mut cursor = lo.clone();
            'scan: loop {
                let point: AlgVec = cursor.iter().map(|&x| q.context().from_int(x)).collect();
                if q.polytope().contains(&point).unwrap() {
                    count += 1;
                }
                for j in 0..n {
                    cursor[j] += 1;
                    if cursor[j] <= hi[j] {
                        continue 'scan;
                    }
                    cursor[j] = lo[j];
                }
                break;
            }
            assert_eq!(q.quantize().unwrap().dimension(), count);
        }
    }

    #[test]
    fn shifting_preserves_bohr_sommerfeld() {
        let q = interval(2);
        let ctx = q.context().clone();
        for xi in [vec![ctx.from_int(1)], vec![ctx.from_rational(rr(1, 2))]] {
            let direct = q.bohr_sommerfeld(&xi).unwrap();
            let shifted = q.shifted_by(&xi).unwrap();
            let zero = vec![ctx.zero()];
            assert_eq!(direct, shifted.bohr_sommerfeld(&zero).unwrap());
        }
    }

    #[test]
    fn stage_associativity_on_cp2() {
        let q = cp2(2);
        let ctx = q.context().clone();
        let h1 = SubalgebraData::new(ctx.clone(), 2, vec![vec![ctx.from_int(1), ctx.from_int(-1)]])
            .unwrap();
        let zero2 = vec![ctx.zero(), ctx.zero()];
        let first = q.reduce_in_stages(&h1, &zero2).unwrap();
        // second stage: quotient the remaining 1-dimensional torus
        let h2 = SubalgebraData::new(ctx.clone(), 1, vec![vec![ctx.one()]]).unwrap();
        let second = first.reduce_in_stages(&h2, &[ctx.zero()]).unwrap();
        // all at once
        let h_both = SubalgebraData::new(
            ctx.clone(),
            2,
            vec![
                vec![ctx.from_int(1), ctx.from_int(-1)],
                vec![ctx.from_int(0), ctx.from_int(1)],
            ],
        )
        .unwrap();
        let at_once = q.reduce_in_stages(&h_both, &zero2).unwrap();
        let mut staged = second
            .quantize()
            .unwrap()
            .xi_weights_in(second.frame())
            .unwrap();
        let mut direct = at_once
            .quantize()
            .unwrap()
            .xi_weights_in(at_once.frame())
            .unwrap();
        staged.sort();
        direct.sort();
        assert_eq!(staged, direct);
    }

    #[test]
    fn reduction_independent_of_complement_choice() {
        let q = cp2(2);
        let ctx = q.context().clone();
        let h = SubalgebraData::new(ctx.clone(), 2, vec![vec![ctx.from_int(1), ctx.from_int(-1)]])
            .unwrap();
        let level = vec![ctx.zero(), ctx.zero()];
        let canonical = q.reduce_in_stages(&h, &level).unwrap();
        // a different annihilator basis: scale the canonical one by 2
        let scaled: Vec<AlgVec> = canonical_ann(&q, &h)
            .iter()
            .map(|w| w.iter().map(|x| x.scale(&r(2))).collect())
            .collect();
        let alt = q.reduce_with_complement(&h, &level, &scaled).unwrap();
        let mut a = canonical
            .quantize()
            .unwrap()
            .xi_weights_in(canonical.frame())
            .unwrap();
        let mut b = alt.quantize().unwrap().xi_weights_in(alt.frame()).unwrap();
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }

    fn canonical_ann(q: &PratoQuasifold, h: &SubalgebraData) -> Vec<AlgVec> {
        q.annihilator_basis(h).unwrap()
    }

    #[test]
    fn combinations_enumerate() {
        assert_eq!(combinations(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(combinations(2, 0), vec![Vec::<usize>::new()]);
        assert_eq!(combinations(1, 2), Vec::<Vec<usize>>::new());
    }
}
