//! Root systems, Weyl groups and weight multiplicities for compact groups of
//! type A, together with the passage between torus characters and full
//! irreducible decompositions.
//!
//! All weights are written in fundamental-weight coordinates. An optional
//! block of central coordinates can be appended; the Weyl group acts as the
//! identity there. Multiplicities come from the Freudenthal recursion and
//! are cross-checked against the Weyl dimension formula on construction.

use std::collections::{BTreeMap, BTreeSet};

use num::{BigInt, One, Signed, Zero};
use thiserror::Error;

use super::algebra::{AlgebraContext, CtxRef, Rat};
use super::charring::{CharError, TorusCharacter, Weight};
use super::lattice::{int_det, int_identity, int_mat_mul, IntMat, IntVec};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RootDatumError {
    #[error("unsupported Cartan type {0}{1}")]
    UnsupportedType(String, usize),
    #[error("irrep label is not dominant: {0:?}")]
    NotDominant(Vec<i64>),
    #[error("character is not symmetric under the Weyl group")]
    NotWeylSymmetric,
    #[error("internal reconstruction of the input character failed; this is a bug")]
    ReconstructionMismatch,
    #[error("weight multiplicity total {0} disagrees with the Weyl dimension formula value {1}")]
    DimensionMismatch(BigInt, BigInt),
    #[error("character weights must be integral in fundamental-weight coordinates")]
    NonIntegralWeights,
    #[error(transparent)]
    Char(#[from] CharError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CartanType {
    A,
}

/// Label of an irreducible representation: a dominant weight in
/// fundamental-weight coordinates plus an optional central block.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct IrrepLabel {
    pub weight: Vec<i64>,
    pub central: Vec<Rat>,
}

impl IrrepLabel {
    pub fn new(weight: Vec<i64>) -> Self {
        Self { weight, central: Vec::new() }
    }

    pub fn with_central(weight: Vec<i64>, central: Vec<Rat>) -> Self {
        Self { weight, central }
    }
}

#[derive(Debug, Clone)]
pub struct RootDatum {
    cartan: CartanType,
    rank: usize,
    central_rank: usize,
    simple_roots: Vec<IntVec>,
    positive_roots: Vec<IntVec>,
    rho: IntVec,
    weyl: Vec<IntMat>,
    gram: Vec<Vec<Rat>>,
    ctx: CtxRef,
}

impl RootDatum {
    /// Validated datum for the supported Cartan types (type A, rank >= 1).
    pub fn build(cartan: CartanType, rank: usize) -> Result<Self, RootDatumError> {
        match cartan {
            CartanType::A if rank >= 1 => Ok(Self::type_a(rank)),
            CartanType::A => Err(RootDatumError::UnsupportedType("A".into(), rank)),
        }
    }

    /// The datum of a torus factor alone: no roots, trivial Weyl group.
    pub fn torus(central_rank: usize) -> Self {
        RootDatum {
            cartan: CartanType::A,
            rank: 0,
            central_rank,
            simple_roots: Vec::new(),
            positive_roots: Vec::new(),
            rho: Vec::new(),
            weyl: vec![int_identity(central_rank)],
            gram: Vec::new(),
            ctx: AlgebraContext::rational(),
        }
    }

    /// Append `z` central coordinates on which the Weyl group acts trivially.
    pub fn with_central_rank(&self, z: usize) -> Self {
        let total = self.rank + z;
        let pad = |v: &IntVec| -> IntVec {
            let mut out = v.clone();
            out.resize(total, BigInt::zero());
            out
        };
        let weyl = self
            .weyl
            .iter()
            .map(|m| {
                let mut out = int_identity(total);
                for i in 0..self.rank {
                    for j in 0..self.rank {
                        out[i][j] = m[i][j].clone();
                    }
                }
                out
            })
            .collect();
        RootDatum {
            cartan: self.cartan,
            rank: self.rank,
            central_rank: z,
            simple_roots: self.simple_roots.iter().map(&pad).collect(),
            positive_roots: self.positive_roots.iter().map(&pad).collect(),
            rho: pad(&self.rho),
            weyl,
            gram: self.gram.clone(),
            ctx: self.ctx.clone(),
        }
    }

    fn type_a(rank: usize) -> Self {
        // Cartan matrix rows are the simple roots in fundamental-weight
        // coordinates; positive roots are the interval sums
        // alpha_i + ... + alpha_j.
        let mut cartan_matrix = vec![vec![BigInt::zero(); rank]; rank];
        for i in 0..rank {
            cartan_matrix[i][i] = BigInt::from(2);
            if i + 1 < rank {
                cartan_matrix[i][i + 1] = BigInt::from(-1);
                cartan_matrix[i + 1][i] = BigInt::from(-1);
            }
        }
        let simple_roots: Vec<IntVec> = cartan_matrix.clone();
        let mut positive_roots = Vec::new();
        for i in 0..rank {
            for j in i..rank {
                let mut root = vec![BigInt::zero(); rank];
                for k in i..=j {
                    for (c, s) in root.iter_mut().zip(&simple_roots[k]) {
                        *c += s;
                    }
                }
                positive_roots.push(root);
            }
        }
        let rho = vec![BigInt::one(); rank];
        // Weyl generators: s_i(v) = v - v_i * alpha_i.
        let mut gens = Vec::new();
        for i in 0..rank {
            let mut m = int_identity(rank);
            for k in 0..rank {
                m[k][i] -= &simple_roots[i][k];
            }
            gens.push(m);
        }
        let weyl = generate_group(&gens, rank);
        let gram = invert_rational_matrix(&cartan_matrix);
        RootDatum {
            cartan: CartanType::A,
            rank,
            central_rank: 0,
            simple_roots,
            positive_roots,
            rho,
            weyl,
            gram,
            ctx: AlgebraContext::rational(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn central_rank(&self) -> usize {
        self.central_rank
    }

    /// Total number of weight coordinates.
    pub fn weight_len(&self) -> usize {
        self.rank + self.central_rank
    }

    pub fn simple_roots(&self) -> &[IntVec] {
        &self.simple_roots
    }

    pub fn positive_roots(&self) -> &[IntVec] {
        &self.positive_roots
    }

    pub fn rho(&self) -> &IntVec {
        &self.rho
    }

    pub fn weyl_order(&self) -> usize {
        self.weyl.len()
    }

    pub fn context(&self) -> &CtxRef {
        &self.ctx
    }

    /// Invariant pairing of the semisimple parts of two weights.
    fn pair_int(&self, a: &[BigInt], b: &[BigInt]) -> Rat {
        let mut acc = Rat::zero();
        for i in 0..self.rank {
            if a[i].is_zero() {
                continue;
            }
            for j in 0..self.rank {
                if self.gram[i][j].is_zero() || b[j].is_zero() {
                    continue;
                }
                acc += Rat::from_integer(a[i].clone()) * &self.gram[i][j]
                    * Rat::from_integer(b[j].clone());
            }
        }
        acc
    }

    fn is_dominant(&self, v: &[BigInt]) -> bool {
        v[..self.rank].iter().all(|x| !x.is_negative())
    }

    fn dominant_conjugate(&self, v: &[BigInt]) -> IntVec {
        let mut cur = v.to_vec();
        'outer: loop {
            for i in 0..self.rank {
                if cur[i].is_negative() {
                    let coeff = cur[i].clone();
                    for (c, a) in cur.iter_mut().zip(&self.simple_roots[i]) {
                        *c -= &coeff * a;
                    }
                    continue 'outer;
                }
            }
            return cur;
        }
    }

    /// Dimension of the irrep with highest weight `label` by the Weyl
    /// formula.
    pub fn weyl_dimension(&self, label: &IrrepLabel) -> Result<BigInt, RootDatumError> {
        let lam = self.label_weight(label)?;
        let mut num = Rat::one();
        let mut den = Rat::one();
        let lam_rho: IntVec = lam.iter().zip(&self.rho).map(|(a, b)| a + b).collect();
        for alpha in &self.positive_roots {
            num *= self.pair_int(&lam_rho, alpha);
            den *= self.pair_int(&self.rho, alpha);
        }
        let q = num / den;
        debug_assert!(q.is_integer());
        Ok(q.to_integer())
    }

    fn label_weight(&self, label: &IrrepLabel) -> Result<IntVec, RootDatumError> {
        if label.weight.len() != self.rank || label.central.len() != self.central_rank {
            return Err(RootDatumError::NotDominant(label.weight.clone()));
        }
        if label.weight.iter().any(|&x| x < 0) {
            return Err(RootDatumError::NotDominant(label.weight.clone()));
        }
        Ok(label.weight.iter().map(|&x| BigInt::from(x)).collect())
    }

    /// Dominant weights of V_lam with their Freudenthal multiplicities.
    fn dominant_multiplicities(&self, lam: &IntVec) -> Vec<(IntVec, i64)> {
        // Candidate dominant weights mu = lam - C c over the exact box
        // 0 <= c <= C^{-1} lam; both C^{-1} and dominant mu are entrywise
        // nonnegative in type A, so nothing is missed.
        let mut bound = vec![BigInt::zero(); self.rank];
        for i in 0..self.rank {
            let mut acc = Rat::zero();
            for (j, lam_j) in lam.iter().enumerate().take(self.rank) {
                acc += &self.gram[i][j] * Rat::from_integer(lam_j.clone());
            }
            bound[i] = acc.floor().to_integer();
        }
        let mut dominants: Vec<(IntVec, IntVec)> = Vec::new();
        let mut c = vec![BigInt::zero(); self.rank];
        enumerate_box(&bound, 0, &mut c, &mut |c| {
            let mut mu = lam.clone();
            for (i, ci) in c.iter().enumerate() {
                if ci.is_zero() {
                    continue;
                }
                for (m, a) in mu.iter_mut().zip(&self.simple_roots[i]) {
                    *m -= ci * a;
                }
            }
            if self.is_dominant(&mu) {
                dominants.push((c.clone(), mu));
            }
        });
        // Increasing height of lam - mu.
        dominants.sort_by_key(|(c, _)| c.iter().sum::<BigInt>());
        let lam_rho: IntVec = lam.iter().zip(&self.rho).map(|(a, b)| a + b).collect();
        let lam_rho_norm = self.pair_int(&lam_rho, &lam_rho);
        let lam_norm = self.pair_int(lam, lam);
        let mut mults: BTreeMap<IntVec, i64> = BTreeMap::new();
        for (_, mu) in &dominants {
            if mu == lam {
                mults.insert(mu.clone(), 1);
                continue;
            }
            let mu_rho: IntVec = mu.iter().zip(&self.rho).map(|(a, b)| a + b).collect();
            let denom = &lam_rho_norm - self.pair_int(&mu_rho, &mu_rho);
            let mut rhs = Rat::zero();
            for alpha in &self.positive_roots {
                let mut k = BigInt::one();
                loop {
                    let shifted: IntVec =
                        mu.iter().zip(alpha).map(|(m, a)| m + &k * a).collect();
                    if self.pair_int(&shifted, &shifted) > lam_norm {
                        break;
                    }
                    let conj = self.dominant_conjugate(&shifted);
                    let m = mults.get(&conj).copied().unwrap_or(0);
                    if m != 0 {
                        rhs += self.pair_int(&shifted, alpha) * Rat::from_integer(m.into());
                    }
                    k += 1;
                }
            }
            let value = Rat::from_integer(2.into()) * rhs / denom;
            debug_assert!(value.is_integer());
            let value = i64::try_from(value.to_integer()).expect("desk-scale multiplicity");
            if value != 0 {
                mults.insert(mu.clone(), value);
            }
        }
        mults.into_iter().collect()
    }

    /// Full weight-multiplicity map of the irrep V_label. The total
    /// dimension is checked against the Weyl dimension formula.
    pub fn irrep_weight_multiplicities(
        &self,
        label: &IrrepLabel,
    ) -> Result<TorusCharacter, RootDatumError> {
        let lam = self.label_weight(label)?;
        let dominant = self.dominant_multiplicities(&lam);
        let mut full: BTreeMap<IntVec, i64> = BTreeMap::new();
        for (mu, m) in &dominant {
            let mut orbit: BTreeSet<IntVec> = BTreeSet::new();
            for w in &self.weyl {
                orbit.insert(self.apply_semisimple(w, mu));
            }
            for o in orbit {
                full.insert(o, *m);
            }
        }
        let total: BigInt = full.values().map(|&m| BigInt::from(m)).sum();
        let expected = self.weyl_dimension(label)?;
        if total != expected {
            return Err(RootDatumError::DimensionMismatch(total, expected));
        }
        let mut c = TorusCharacter::empty(self.ctx.clone(), self.weight_len());
        for (mu, m) in full {
            c.add_term(self.int_weight_with_central(&mu, &label.central), m);
        }
        Ok(c)
    }

    fn apply_semisimple(&self, w: &IntMat, v: &[BigInt]) -> IntVec {
        if w.len() == v.len() {
            super::lattice::int_mat_vec(w, v)
        } else {
            let mut out = super::lattice::int_mat_vec(w, &v[..self.rank]);
            out.extend_from_slice(&v[self.rank..]);
            out
        }
    }

    fn int_weight_with_central(&self, v: &[BigInt], central: &[Rat]) -> Weight {
        let mut out: Weight = v[..self.rank]
            .iter()
            .map(|x| self.ctx.from_rational(Rat::from_integer(x.clone())))
            .collect();
        for z in central {
            out.push(self.ctx.from_rational(z.clone()));
        }
        out
    }

    /// The virtual character `prod_{alpha > 0} (1 - e^{-alpha})` expanded as
    /// a finite signed weight map.
    pub fn wedge_n_minus(&self) -> TorusCharacter {
        let mut c = TorusCharacter::unit(self.ctx.clone(), self.weight_len());
        for alpha in &self.positive_roots {
            let mut factor = TorusCharacter::unit(self.ctx.clone(), self.weight_len());
            let mut neg: IntVec = alpha.iter().map(|x| -x.clone()).collect();
            neg.resize(self.weight_len(), BigInt::zero());
            factor.add_term(
                neg.iter()
                    .map(|x| self.ctx.from_rational(Rat::from_integer(x.clone())))
                    .collect(),
                -1,
            );
            c = c.product(&factor).expect("same domain");
        }
        c
    }

    /// Integer weight support of a character in this datum's coordinates.
    fn integer_weights(&self, c: &TorusCharacter) -> Result<Vec<(IntVec, i64)>, RootDatumError> {
        if c.dim() != self.weight_len() {
            return Err(RootDatumError::Char(CharError::ShapeMismatch(format!(
                "character rank {} against weight length {}",
                c.dim(),
                self.weight_len()
            ))));
        }
        let mut out = Vec::new();
        for (w, m) in c.entries() {
            let abs = c.absolute_weight(w)?;
            let mut iw = Vec::with_capacity(abs.len());
            for x in &abs {
                iw.push(x.to_integer().ok_or(RootDatumError::NonIntegralWeights)?);
            }
            out.push((iw, m));
        }
        Ok(out)
    }

    /// Invariance of a character under the full Weyl group.
    pub fn is_weyl_symmetric(&self, c: &TorusCharacter) -> Result<bool, RootDatumError> {
        let support = self.integer_weights(c)?;
        let lookup: BTreeMap<IntVec, i64> = support.iter().cloned().collect();
        for (w, m) in &support {
            for sigma in &self.weyl {
                let img = self.apply_semisimple(sigma, w);
                if lookup.get(&img).copied().unwrap_or(0) != *m {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Multiplicity of the trivial representation in the virtual
    /// g-representation restricting to `c` on the maximal torus: the zero
    /// weight of `c * wedge_n_minus`.
    pub fn g_invariant_multiplicity(&self, c: &TorusCharacter) -> Result<i64, RootDatumError> {
        if !self.is_weyl_symmetric(c)? {
            return Err(RootDatumError::NotWeylSymmetric);
        }
        let p = c.product(&self.wedge_n_minus())?;
        let zero: Weight = (0..self.weight_len()).map(|_| self.ctx.zero()).collect();
        Ok(p.multiplicity(&zero))
    }

    /// Decompose a Weyl-symmetric torus character into irreducibles.
    ///
    /// Multiplies by the alternating character of the negative root spaces,
    /// reads the dominant coefficients, verifies that the non-dominant part
    /// is the rho-shifted antisymmetrization of the dominant one, and
    /// replays the decomposition through `irrep_weight_multiplicities` to
    /// confirm it reconstructs the input exactly.
    pub fn decompose_into_irreps(
        &self,
        c: &TorusCharacter,
    ) -> Result<BTreeMap<IrrepLabel, i64>, RootDatumError> {
        if !self.is_weyl_symmetric(c)? {
            return Err(RootDatumError::NotWeylSymmetric);
        }
        let p = c.product(&self.wedge_n_minus())?;
        let support = self.integer_weights(&p)?;
        let lookup: BTreeMap<IntVec, i64> = support.iter().cloned().collect();
        for (w, m) in &support {
            for sigma in &self.weyl {
                let shifted: IntVec = w
                    .iter()
                    .enumerate()
                    .map(|(i, a)| if i < self.rank { a + &self.rho[i] } else { a.clone() })
                    .collect();
                let moved = self.apply_semisimple(sigma, &shifted);
                let img: IntVec = moved
                    .iter()
                    .enumerate()
                    .map(|(i, a)| if i < self.rank { a - &self.rho[i] } else { a.clone() })
                    .collect();
                let det = int_det(sigma);
                let expected = if det.is_one() { *m } else { -*m };
                if lookup.get(&img).copied().unwrap_or(0) != expected {
                    return Err(RootDatumError::NotWeylSymmetric);
                }
            }
        }
        let mut decomposition: BTreeMap<IrrepLabel, i64> = BTreeMap::new();
        for (w, m) in &support {
            if !self.is_dominant(w) {
                continue;
            }
            let weight: Vec<i64> = w[..self.rank]
                .iter()
                .map(|x| i64::try_from(x).expect("desk-scale weight"))
                .collect();
            let central: Vec<Rat> = w[self.rank..]
                .iter()
                .map(|x| Rat::from_integer(x.clone()))
                .collect();
            decomposition.insert(IrrepLabel::with_central(weight, central), *m);
        }
        // The decomposition must reproduce the input character exactly.
        let mut rebuilt = TorusCharacter::empty(self.ctx.clone(), self.weight_len());
        for (label, mult) in &decomposition {
            let irrep = self.irrep_weight_multiplicities(label)?;
            rebuilt.add_assign(&irrep.scaled(*mult))?;
        }
        if rebuilt != normalize_offset(c)? {
            return Err(RootDatumError::ReconstructionMismatch);
        }
        Ok(decomposition)
    }
}

/// Fold a character's offset into its stored weights.
fn normalize_offset(c: &TorusCharacter) -> Result<TorusCharacter, CharError> {
    let mut out = TorusCharacter::empty(c.context().clone(), c.dim());
    for (w, m) in c.entries() {
        out.add_term(c.absolute_weight(w)?, m);
    }
    Ok(out)
}

fn enumerate_box(bound: &[BigInt], level: usize, cur: &mut IntVec, f: &mut impl FnMut(&IntVec)) {
    if level == bound.len() {
        f(cur);
        return;
    }
    let mut x = BigInt::zero();
    while x <= bound[level] {
        cur[level] = x.clone();
        enumerate_box(bound, level + 1, cur, f);
        x += 1;
    }
    cur[level] = BigInt::zero();
}

fn generate_group(gens: &[IntMat], rank: usize) -> Vec<IntMat> {
    let mut seen: BTreeSet<IntMat> = BTreeSet::new();
    let mut frontier = vec![int_identity(rank)];
    seen.insert(int_identity(rank));
    while let Some(m) = frontier.pop() {
        for g in gens {
            let next = int_mat_mul(g, &m);
            if seen.insert(next.clone()) {
                frontier.push(next);
            }
        }
    }
    seen.into_iter().collect()
}

fn invert_rational_matrix(m: &IntMat) -> Vec<Vec<Rat>> {
    let n = m.len();
    let mut aug: Vec<Vec<Rat>> = (0..n)
        .map(|i| {
            (0..2 * n)
                .map(|j| {
                    if j < n {
                        Rat::from_integer(m[i][j].clone())
                    } else if j - n == i {
                        Rat::one()
                    } else {
                        Rat::zero()
                    }
                })
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !aug[r][col].is_zero()).expect("invertible");
        aug.swap(col, pivot);
        let inv = Rat::one() / aug[col][col].clone();
        for j in 0..2 * n {
            aug[col][j] = &aug[col][j] * &inv;
        }
        for r in 0..n {
            if r == col || aug[r][col].is_zero() {
                continue;
            }
            let f = aug[r][col].clone();
            for j in 0..2 * n {
                let s = &f * &aug[col][j];
                aug[r][j] = &aug[r][j] - &s;
            }
        }
    }
    aug.into_iter().map(|row| row[n..].to_vec()).collect()
}
