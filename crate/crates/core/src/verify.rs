//! The theorem-checking harness: brute-force oracles and cross-path
//! comparisons that turn the quantization identities into pass/fail
//! reports with per-weight comparison tables.

use std::collections::BTreeMap;

use num::BigInt;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::algebra::AlgebraElement;
use super::charring::{CharError, SubalgebraData, TorusCharacter};
use super::lattice::IntVec;
use super::localization::{
    localized_multiplicity, vertex_data, LocalizationError, PolarizingVector,
};
use super::rootdata::{IrrepLabel, RootDatum, RootDatumError};
use super::toric::{build_quasifold, AlgVec, PratoQuasifold, SimplePolytope, ToricError};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Toric(#[from] ToricError),
    #[error(transparent)]
    Localization(#[from] LocalizationError),
    #[error(transparent)]
    RootDatum(#[from] RootDatumError),
    #[error(transparent)]
    Char(#[from] CharError),
    #[error("check requires {0}")]
    BadInput(String),
}

/// One line of a comparison table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComparisonRow {
    pub weight: String,
    pub expected: i64,
    pub actual: i64,
}

/// Outcome of one check: the verdict is pass exactly when the
/// counterexample list (the first ten mismatching rows) is empty.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: String,
    pub inputs_digest: String,
    pub rows: Vec<ComparisonRow>,
    pub counterexamples: Vec<ComparisonRow>,
    pub pass: bool,
    pub seed: Option<u64>,
}

impl CheckReport {
    fn new(name: &str, digest: String, rows: Vec<ComparisonRow>, seed: Option<u64>) -> Self {
        let counterexamples: Vec<ComparisonRow> = rows
            .iter()
            .filter(|r| r.expected != r.actual)
            .take(10)
            .cloned()
            .collect();
        let pass = rows.iter().all(|r| r.expected == r.actual);
        Self {
            name: name.to_string(),
            inputs_digest: digest,
            rows,
            counterexamples,
            pass,
            seed,
        }
    }
}

fn fingerprint(parts: &[String]) -> String {
    let mut hasher = Sha256::new();
    for p in parts {
        hasher.update(p.as_bytes());
        hasher.update([0u8]);
    }
    let out = hasher.finalize();
    let hex: String = out.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

fn polytope_fingerprint(p: &SimplePolytope) -> String {
    let mut parts = vec![format!("rank {}", p.ambient_rank())];
    for (v, c) in p.facets() {
        let coords: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        parts.push(format!("facet ({}) <= {}", coords.join(", "), c));
    }
    fingerprint(&parts)
}

fn quasifold_fingerprint(q: &PratoQuasifold) -> String {
    polytope_fingerprint(q.polytope())
}

fn render_weight(w: &[AlgebraElement]) -> String {
    let coords: Vec<String> = w.iter().map(|x| x.to_string()).collect();
    format!("({})", coords.join(", "))
}

fn render_int_weight(w: &[BigInt]) -> String {
    let coords: Vec<String> = w.iter().map(|x| x.to_string()).collect();
    format!("({})", coords.join(", "))
}

/// Quantization equals the Bohr-Sommerfeld count, weight by weight: every
/// candidate of `pi*(xi) in c + Z^d` inside the vertex box carries
/// multiplicity one exactly when it satisfies the polytope inequalities.
pub fn qr0_check(q: &PratoQuasifold) -> Result<CheckReport, VerifyError> {
    let quant = q.quantize()?;
    let arising: BTreeMap<IntVec, AlgVec> = quant
        .entries
        .iter()
        .map(|e| (e.b.clone(), e.xi.clone()))
        .collect();
    let mut rows = Vec::new();
    let mut seen = 0usize;
    for (b, xi) in q.bohr_sommerfeld_candidates()? {
        let actual = i64::from(arising.contains_key(&b));
        let expected = if q.polytope().contains(&xi)? {
            i64::from(q.bohr_sommerfeld(&xi)?)
        } else {
            0
        };
        if arising.contains_key(&b) {
            seen += 1;
        }
        rows.push(ComparisonRow { weight: render_weight(&xi), expected, actual });
    }
    // every quantization entry must have shown up among the candidates
    rows.push(ComparisonRow {
        weight: "coverage of the candidate grid".into(),
        expected: quant.dimension() as i64,
        actual: seen as i64,
    });
    Ok(CheckReport::new("qr0", quasifold_fingerprint(q), rows, None))
}

/// The shifting trick at the data level: the Bohr-Sommerfeld indicator at
/// `xi` equals the indicator at zero after shifting the constants by
/// `-pi*(xi)`, and the shifted quantization carries the same multiplicity
/// at the zero weight.
pub fn shift_check(q: &PratoQuasifold, xi: &[AlgebraElement]) -> Result<CheckReport, VerifyError> {
    let direct = i64::from(q.bohr_sommerfeld(xi)?);
    let shifted = q.shifted_by(xi)?;
    let zero: AlgVec = (0..q.ambient_rank()).map(|_| q.context().zero()).collect();
    let at_zero = i64::from(shifted.bohr_sommerfeld(&zero)?);
    let mult_zero = shifted
        .quantize()?
        .entries
        .iter()
        .filter(|e| e.xi == zero)
        .count() as i64;
    let digest = fingerprint(&[quasifold_fingerprint(q), render_weight(xi)]);
    let rows = vec![
        ComparisonRow {
            weight: format!("indicator at {}", render_weight(xi)),
            expected: direct,
            actual: at_zero,
        },
        ComparisonRow {
            weight: "multiplicity of the zero weight after the shift".into(),
            expected: direct,
            actual: mult_zero,
        },
    ];
    Ok(CheckReport::new("shift", digest, rows, None))
}

/// Reduction in stages: the quantization of the reduced presentation equals
/// the slice of the original quantization, as weight multisets in the
/// original coordinates.
pub fn stages_check(
    q: &PratoQuasifold,
    h_prime: &SubalgebraData,
    xi_prime: &[AlgebraElement],
) -> Result<CheckReport, VerifyError> {
    let reduced = q.reduce_in_stages(h_prime, xi_prime)?;
    let lhs = reduced.quantize()?.xi_weights_in(reduced.frame())?;
    let mut rhs = Vec::new();
    for e in q.quantize()?.entries {
        let mut on_slice = true;
        for h in h_prime.basis() {
            let diff: AlgVec = e
                .xi
                .iter()
                .zip(xi_prime)
                .map(|(a, b)| a.sub(b))
                .collect::<Result<_, _>>()
                .map_err(ToricError::from)?;
            if !super::charring::dot_in(q.context(), &diff, h)
                .map_err(ToricError::from)?
                .is_zero()
            {
                on_slice = false;
                break;
            }
        }
        if on_slice {
            rhs.push(q.frame().apply(&e.xi)?);
        }
    }
    let digest = fingerprint(&[
        quasifold_fingerprint(q),
        format!("{} subalgebra vectors", h_prime.basis().len()),
        render_weight(xi_prime),
    ]);
    Ok(CheckReport::new("stages", digest, multiset_rows(&rhs, &lhs), None))
}

fn multiset_rows(expected: &[AlgVec], actual: &[AlgVec]) -> Vec<ComparisonRow> {
    let mut table: BTreeMap<Vec<AlgebraElement>, (i64, i64)> = BTreeMap::new();
    for w in expected {
        table.entry(w.clone()).or_default().0 += 1;
    }
    for w in actual {
        table.entry(w.clone()).or_default().1 += 1;
    }
    table
        .into_iter()
        .map(|(w, (e, a))| ComparisonRow { weight: render_weight(&w), expected: e, actual: a })
        .collect()
}

/// Abelian localization against the lattice-membership oracle: random
/// weights in the inflated vertex box, two random generic polarizing
/// vectors, exact agreement required for each.
pub fn localization_check(
    p: &SimplePolytope,
    trials: u32,
    seed: u64,
) -> Result<CheckReport, VerifyError> {
    let vd = vertex_data(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = p.ambient_rank();
    let box_ = p.vertex_box()?;
    let mut lo = Vec::with_capacity(n);
    let mut hi = Vec::with_capacity(n);
    for (l, h) in &box_ {
        lo.push(l.floor_int().map_err(ToricError::from)? - 2);
        hi.push(h.ceil_int().map_err(ToricError::from)? + 2);
    }
    let mut betas = Vec::new();
    if n == 0 {
        betas.push(PolarizingVector::new(Vec::new()));
        betas.push(PolarizingVector::new(Vec::new()));
    }
    while betas.len() < 2 {
        let cand = PolarizingVector::new(
            (0..n).map(|_| BigInt::from(rng.random_range(-9i64..=9))).collect(),
        );
        if cand.is_generic_for(&vd) && !betas.contains(&cand) {
            betas.push(cand);
        }
    }
    let mut rows = Vec::new();
    for _ in 0..trials {
        let lambda: IntVec = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| {
                let span = i64::try_from(h - l).expect("desk-scale box");
                l + BigInt::from(rng.random_range(0..=span))
            })
            .collect();
        let point: AlgVec = lambda
            .iter()
            .map(|x| p.context().from_rational(num::BigRational::from_integer(x.clone())))
            .collect();
        let oracle = i64::from(p.contains(&point)?);
        for (bi, beta) in betas.iter().enumerate() {
            let actual = localized_multiplicity(&vd, beta, &lambda)?;
            rows.push(ComparisonRow {
                weight: format!("{} beta{}", render_int_weight(&lambda), bi + 1),
                expected: oracle,
                actual,
            });
        }
    }
    let digest = fingerprint(&[polytope_fingerprint(p), format!("trials {trials}")]);
    Ok(CheckReport::new("localization", digest, rows, Some(seed)))
}

/// Finite-subgroup invariants commute with reduction: taking the
/// Gamma-invariant part of the quantization and then slicing equals
/// quantizing the reduced presentation and then taking invariants.
pub fn suspension_check(
    q: &PratoQuasifold,
    orders: &[u64],
    pairing: &[Vec<BigInt>],
    h_prime: &SubalgebraData,
    xi_prime: &[AlgebraElement],
) -> Result<CheckReport, VerifyError> {
    let gamma_invariant = |weights: Vec<AlgVec>| -> Result<Vec<AlgVec>, VerifyError> {
        if weights.is_empty() {
            return Ok(weights);
        }
        let dim = weights[0].len();
        let ctx = weights[0][0].context().clone();
        let mut c = TorusCharacter::empty(ctx, dim);
        for w in &weights {
            c.add_term(w.clone(), 1);
        }
        let inv = c.finite_group_invariants(orders, pairing)?;
        let mut out = Vec::new();
        for (w, m) in inv.entries() {
            for _ in 0..m {
                out.push(w.clone());
            }
        }
        Ok(out)
    };
    // invariants first, then the slice
    let all = q.quantize()?;
    let mut invariant_weights = Vec::new();
    for (mapped, e) in all
        .xi_weights_in(q.frame())?
        .into_iter()
        .zip(&all.entries)
    {
        invariant_weights.push((mapped, e.xi.clone()));
    }
    let kept: Vec<AlgVec> = gamma_invariant(
        invariant_weights.iter().map(|(m, _)| m.clone()).collect(),
    )?;
    let mut lhs = Vec::new();
    for (mapped, local) in &invariant_weights {
        if !kept.contains(mapped) {
            continue;
        }
        let mut on_slice = true;
        for h in h_prime.basis() {
            let diff: AlgVec = local
                .iter()
                .zip(xi_prime)
                .map(|(a, b)| a.sub(b))
                .collect::<Result<_, _>>()
                .map_err(ToricError::from)?;
            if !super::charring::dot_in(q.context(), &diff, h)
                .map_err(ToricError::from)?
                .is_zero()
            {
                on_slice = false;
                break;
            }
        }
        if on_slice {
            lhs.push(mapped.clone());
        }
    }
    // reduce first, then invariants
    let reduced = q.reduce_in_stages(h_prime, xi_prime)?;
    let mapped = reduced.quantize()?.xi_weights_in(reduced.frame())?;
    let rhs = gamma_invariant(mapped)?;
    let digest = fingerprint(&[
        quasifold_fingerprint(q),
        format!("orders {orders:?}"),
        render_weight(xi_prime),
    ]);
    Ok(CheckReport::new("suspension", digest, multiset_rows(&lhs, &rhs), None))
}

/// The coadjoint-orbit demonstration: the level-k weight string of the
/// projective line decomposes as exactly one copy of the k-th irreducible.
pub fn coadjoint_demo(d: &RootDatum, k: i64) -> Result<CheckReport, VerifyError> {
    if d.rank() != 1 || d.central_rank() != 0 {
        return Err(VerifyError::BadInput(
            "the coadjoint demonstration runs on the rank-one datum".into(),
        ));
    }
    if k < 0 {
        return Err(VerifyError::BadInput("a nonnegative level".into()));
    }
    let entries: Vec<(Vec<i64>, i64)> = (0..=k).map(|j| (vec![k - 2 * j], 1)).collect();
    let c = TorusCharacter::from_integer_entries(1, &entries);
    let dec = d.decompose_into_irreps(&c)?;
    let mut rows = Vec::new();
    let target = IrrepLabel::new(vec![k]);
    for (label, mult) in &dec {
        rows.push(ComparisonRow {
            weight: format!("V{:?}", label.weight),
            expected: i64::from(*label == target),
            actual: *mult,
        });
    }
    if !dec.contains_key(&target) {
        rows.push(ComparisonRow {
            weight: format!("V{:?}", target.weight),
            expected: 1,
            actual: 0,
        });
    }
    let digest = fingerprint(&[format!("coadjoint level {k}")]);
    Ok(CheckReport::new("coadjoint", digest, rows, None))
}

/// Pseudo-random rational simple polytopes for the property suite:
/// rejection sampling with ambient rank <= 3, at most 7 facets and entries
/// bounded by 5, filtered for boundedness, nonemptiness and simplicity.
pub fn random_rational_quasifold(rng: &mut ChaCha8Rng) -> PratoQuasifold {
    let ctx = crate::algebra::AlgebraContext::rational();
    loop {
        let n = rng.random_range(1usize..=3);
        let d = rng.random_range((n + 1).max(2)..=7usize);
        let mut facets = Vec::with_capacity(d);
        for _ in 0..d {
            let normal: AlgVec = (0..n)
                .map(|_| ctx.from_int(rng.random_range(-5i64..=5)))
                .collect();
            if normal.iter().all(AlgebraElement::is_zero) {
                continue;
            }
            let c = ctx.from_int(rng.random_range(-5i64..=5));
            facets.push((normal, c));
        }
        if facets.len() < n + 1 {
            continue;
        }
        let Ok(p) = SimplePolytope::new(ctx.clone(), n, facets) else {
            continue;
        };
        if let Ok(q) = build_quasifold(p) {
            return q;
        }
    }
}
