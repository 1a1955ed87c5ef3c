//! Psi-class intersection numbers and the semisimple assembly of total
//! ancestor potentials at toy truncations.
//!
//! Intersection numbers come from the Virasoro-type recursion on the
//! largest insertion, seeded by the two stable base cases; string and
//! dilaton behaviour then fall out and are used as oracles in the test
//! suite. The assembly takes user-supplied semisimple data (canonical
//! values, metric factors, a rational transition whose columns are the
//! idempotent directions, and an upper-triangular symplectic series)
//! and produces a potential in the flat frame: per-axis point potentials
//! rescaled by the metric factors, the quantized series action, then the
//! frame substitution.
//!
//! All intermediate data lives in the coordinates of the idempotent
//! frame, where the pairing is diag(1/Δ_i) and the unit is (1, …, 1).
//! The orthonormal normalization of that frame divides each direction by
//! a square root of Δ_i, but every appearance of those roots comes in
//! squares once the per-axis variables are bundled with their √Δ_i
//! prefactor, so coefficients stay rational; the one place a bare half
//! power could enter (the ħ-rescaling of the genus grading) is tracked
//! as an integer half-exponent and asserted even.

use std::collections::HashMap;

use givental_fock::{quantized_r_apply, reframe, FockError, TamePotential, UpperTriangularR};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use series_core::{rat, BigRational, QMatrix};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum AncestorError {
    #[error("metric factor {0} must be nonzero")]
    ZeroDelta(usize),
    #[error("canonical values must be pairwise distinct")]
    RepeatedCanonicalValue,
    #[error("transition matrix is singular")]
    SingularTransition,
    #[error("data dimensions do not match the declared rank")]
    Mismatch,
    #[error("symplectic series must use the idempotent-frame pairing diag(1/Δ)")]
    WrongPairing,
    #[error(transparent)]
    Fock(#[from] FockError),
}

/// (2k − 1)!! with the usual convention (−1)!! = 1.
fn odd_double_factorial(k: i64) -> BigRational {
    let mut out = BigInt::one();
    let mut m = 2 * k - 1;
    while m >= 2 {
        out *= m;
        m -= 2;
    }
    BigRational::from_integer(out)
}

fn binomial(n: u32, k: u32) -> BigRational {
    let mut out = BigRational::one();
    for j in 0..k {
        out *= rat((n - j) as i64, (j + 1) as i64);
    }
    out
}

type Cache = HashMap<(u32, Vec<u32>), BigRational>;

/// ⟨τ_{k_1}⋯τ_{k_m}⟩_g. Zero outside the stable range or off the
/// dimension constraint Σk = 3g − 3 + m.
pub fn psi_intersections(g: u32, ks: &[u32]) -> BigRational {
    let mut cache = Cache::new();
    let mut sorted = ks.to_vec();
    sorted.sort_unstable();
    correlator(g, sorted, &mut cache)
}

fn correlator(g: u32, ks: Vec<u32>, cache: &mut Cache) -> BigRational {
    let m = ks.len() as i64;
    if 2 * g as i64 - 2 + m <= 0 {
        return BigRational::zero();
    }
    let dim = 3 * g as i64 - 3 + m;
    if ks.iter().map(|&k| k as i64).sum::<i64>() != dim {
        return BigRational::zero();
    }
    if g == 0 && ks == [0, 0, 0] {
        return BigRational::one();
    }
    if g == 1 && ks == [1] {
        return rat(1, 24);
    }
    if let Some(v) = cache.get(&(g, ks.clone())) {
        return v.clone();
    }
    // recurse on the largest insertion; write it as τ_{m0+1}
    let kmax = *ks.last().expect("stable correlators are nonempty");
    assert!(kmax >= 1, "all-zero stable keys are handled above");
    let m0 = (kmax - 1) as i64;
    let rest: Vec<u32> = ks[..ks.len() - 1].to_vec();
    let mut acc = BigRational::zero();
    for (j, &kj) in rest.iter().enumerate() {
        let mut reduced = rest.clone();
        reduced[j] = kj + m0 as u32;
        reduced.sort_unstable();
        let weight = odd_double_factorial(kj as i64 + m0 + 1) / odd_double_factorial(kj as i64);
        acc += weight * correlator(g, reduced, cache);
    }
    if m0 >= 1 {
        for a in 0..=(m0 - 1) {
            let b = m0 - 1 - a;
            let w = odd_double_factorial(a + 1) * odd_double_factorial(b + 1) * rat(1, 2);
            if g >= 1 {
                let mut joined = rest.clone();
                joined.push(a as u32);
                joined.push(b as u32);
                joined.sort_unstable();
                acc += &w * correlator(g - 1, joined, cache);
            }
            // splittings into two stable factors, insertions labeled
            let mut mults: Vec<(u32, u32)> = Vec::new();
            for &k in &rest {
                match mults.last_mut() {
                    Some((v, c)) if *v == k => *c += 1,
                    _ => mults.push((k, 1)),
                }
            }
            let mut picks = vec![0u32; mults.len()];
            loop {
                let mut left: Vec<u32> = vec![a as u32];
                let mut right: Vec<u32> = vec![b as u32];
                let mut count = BigRational::one();
                for (slot, &(v, c)) in mults.iter().enumerate() {
                    for _ in 0..picks[slot] {
                        left.push(v);
                    }
                    for _ in 0..(c - picks[slot]) {
                        right.push(v);
                    }
                    count *= binomial(c, picks[slot]);
                }
                left.sort_unstable();
                right.sort_unstable();
                for g1 in 0..=g {
                    let l = correlator(g1, left.clone(), cache);
                    if l.is_zero() {
                        continue;
                    }
                    acc += &w * &count * l * correlator(g - g1, right.clone(), cache);
                }
                let mut slot = 0;
                loop {
                    if slot == picks.len() {
                        break;
                    }
                    if picks[slot] < mults[slot].1 {
                        picks[slot] += 1;
                        break;
                    }
                    picks[slot] = 0;
                    slot += 1;
                }
                if slot == picks.len() {
                    break;
                }
            }
        }
    }
    let value = acc / odd_double_factorial(m0 + 2);
    cache.insert((g, ks), value.clone());
    value
}

fn sorted_keys(len: usize, total: i64, min: u32, cap: u32, out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>) {
    if len == 0 {
        if total == 0 {
            out.push(cur.clone());
        }
        return;
    }
    for v in min..=cap {
        let v64 = v as i64;
        if v64 * len as i64 > total {
            break;
        }
        cur.push(v);
        sorted_keys(len - 1, total - v64, v, cap, out, cur);
        cur.pop();
    }
}

/// The point potential truncated to the given genus cap, at most
/// `jet_cap` insertions per monomial, and jet orders up to `jet_cap`;
/// stored in the dilaton-shifted rank-one variables.
pub fn kontsevich_witten_potential(genus_cap: u32, jet_cap: u32) -> TamePotential {
    let mut f = TamePotential::new(1, genus_cap, QMatrix::identity(1), vec![rat(1, 1)])
        .expect("rank-one frame is valid");
    let mut cache = Cache::new();
    for g in 0..=genus_cap {
        for m in 1..=jet_cap as i64 {
            if 2 * g as i64 - 2 + m <= 0 {
                continue;
            }
            let dim = 3 * g as i64 - 3 + m;
            if dim < 0 {
                continue;
            }
            let mut keys = Vec::new();
            sorted_keys(m as usize, dim, 0, jet_cap, &mut keys, &mut Vec::new());
            for key in keys {
                let value = correlator(g, key.clone(), &mut cache);
                if value.is_zero() {
                    continue;
                }
                // symmetrization: the 1/n! against the n!/∏mult! orderings
                let mut sym = BigRational::one();
                let mut run = 1u64;
                for w in key.windows(2) {
                    if w[0] == w[1] {
                        run += 1;
                        sym *= rat(run as i64, 1);
                    } else {
                        run = 1;
                    }
                }
                let monomial: Vec<(u32, usize)> = key.iter().map(|&k| (k, 0)).collect();
                f.add_term(g, monomial, value / sym).expect("indices in range");
            }
        }
    }
    f
}

/// Semisimple input data: canonical values, metric factors Δ_i, the
/// rational transition whose columns are the idempotent directions in
/// the flat basis, and the symplectic series expressed as a matrix on
/// the idempotent frame (pairing diag(1/Δ)). The orthonormal-frame
/// matrix of the same operator is the diag(√Δ)-conjugate; the
/// idempotent-frame presentation is the square-root-free one.
#[derive(Clone, Debug)]
pub struct SemisimpleData {
    pub rank: usize,
    pub u: Vec<BigRational>,
    pub delta: Vec<BigRational>,
    pub psi: QMatrix,
    pub r: UpperTriangularR,
}

/// diag(1/Δ_1, …, 1/Δ_N), the pairing of the idempotent frame.
pub fn canonical_gram(delta: &[BigRational]) -> QMatrix {
    let n = delta.len();
    let mut g = QMatrix::zeros(n, n);
    for i in 0..n {
        g[(i, i)] = delta[i].recip();
    }
    g
}

impl SemisimpleData {
    pub fn new(
        u: Vec<BigRational>,
        delta: Vec<BigRational>,
        psi: QMatrix,
        r: UpperTriangularR,
    ) -> Result<Self, AncestorError> {
        let rank = delta.len();
        if u.len() != rank || psi.rows != rank || psi.cols != rank || r.rank() != rank {
            return Err(AncestorError::Mismatch);
        }
        for (i, d) in delta.iter().enumerate() {
            if d.is_zero() {
                return Err(AncestorError::ZeroDelta(i));
            }
        }
        for i in 0..rank {
            for j in 0..i {
                if u[i] == u[j] {
                    return Err(AncestorError::RepeatedCanonicalValue);
                }
            }
        }
        if psi.inverse().is_none() {
            return Err(AncestorError::SingularTransition);
        }
        if *r.gram() != canonical_gram(&delta) {
            return Err(AncestorError::WrongPairing);
        }
        Ok(SemisimpleData { rank, u, delta, psi, r })
    }

    /// The flat-frame Gram matrix induced by (∂_{u_i}, ∂_{u_j}) = δ_{ij}/Δ_i.
    pub fn flat_gram(&self) -> QMatrix {
        let inv = self.psi.inverse().expect("validated invertible");
        inv.transpose().matmul(&canonical_gram(&self.delta)).matmul(&inv)
    }

    /// Flat coordinates of the identity direction Σ_i ∂_{u_i}.
    pub fn flat_unit(&self) -> Vec<BigRational> {
        self.psi.matvec(&vec![BigRational::one(); self.rank])
    }
}

fn delta_power(d: &BigRational, e: i64) -> BigRational {
    let base = if e < 0 { d.recip() } else { d.clone() };
    let mut out = BigRational::one();
    for _ in 0..e.unsigned_abs() {
        out *= &base;
    }
    out
}

/// Assembles the ancestor potential: per-axis point potentials with the
/// ħ-rescaling by the metric factors, the quantized series action in the
/// idempotent frame, then the substitution to flat variables.
///
/// The point factor on axis i takes ħ·Δ_i and per-insertion variables
/// carrying one √Δ_i each; bundling the root with the variable makes the
/// bundled variable exactly the idempotent-frame coordinate and shifts
/// all of the Δ-dependence into the ħ-rescaling, whose √Δ_i exponent
/// 2(g − 1) is even. The assert below keeps that bookkeeping honest.
pub fn assemble_ancestor(
    d: &SemisimpleData,
    genus_cap: u32,
    jet_cap: u32,
) -> Result<TamePotential, AncestorError> {
    let wk = kontsevich_witten_potential(genus_cap, jet_cap);
    let mut canonical = TamePotential::new(
        d.rank,
        genus_cap,
        canonical_gram(&d.delta),
        vec![BigRational::one(); d.rank],
    )?;
    for ((g, key), c) in wk.iter() {
        for axis in 0..d.rank {
            let half_exponent = 2 * (*g as i64 - 1);
            assert!(half_exponent % 2 == 0, "uncancelled square root of a metric factor");
            let scaled = c * delta_power(&d.delta[axis], half_exponent / 2);
            let monomial: Vec<(u32, usize)> = key.iter().map(|&(k, _)| (k, axis)).collect();
            canonical.add_term(*g, monomial, scaled)?;
        }
    }
    let acted = quantized_r_apply(&d.r, &canonical)?;
    let psi_inv = d.psi.inverse().expect("validated invertible");
    Ok(reframe(&acted, &psi_inv, d.flat_gram(), d.flat_unit())?)
}
