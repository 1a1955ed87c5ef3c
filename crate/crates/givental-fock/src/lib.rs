//! Quantization formalism on truncated tame potentials.
//!
//! A potential stores per-genus coefficients of monomials in the
//! dilaton-shifted jet variables t_{k,i} = q_{k,i} + δ_{k,1}·unit_i; the
//! hbar-power is implicit (genus g carries hbar^{g-1}). The quantized
//! action of an upper-triangular symplectic series R(z) = 1 + R_1 z + …
//! is the Wick-type formula: apply exp((ħ/2)·V_R) as a second-order
//! differential operator, then substitute q ↦ R(z)q. The V-matrices come
//! from the closed sum over R-coefficients; the generating-function
//! division (1 − R(z)Rᵗ(w))/(z + w) is kept as an independent check in
//! the test suite.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use series_core::{rat, BigRational, QMatrix};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum FockError {
    #[error("matrix must be {want}x{want}, got {rows}x{cols}")]
    BadShape { want: usize, rows: usize, cols: usize },
    #[error("leading z^0 coefficient is not the identity")]
    NotIdentityLeading,
    #[error("symplectic condition fails at z^{0}")]
    SymplecticViolation(usize),
    #[error("operation needs R-coefficients up to z^{needed}, only {available} available")]
    OrderError { needed: usize, available: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("rescaling constant must be nonzero")]
    ZeroScale,
    #[error("ranks or pairings of the operands do not match")]
    Mismatch,
    #[error("potential violates the jet constraint")]
    NotTame,
    #[error("jet index {0} out of range for rank {1}")]
    BadIndex(usize, usize),
}

/// Monomial key: genus plus a sorted multiset of (jet order k, basis
/// index i) factors.
pub type MonomialKey = (u32, Vec<(u32, usize)>);

/// A truncated potential: finitely many monomials in the dilaton-shifted
/// variables, graded by genus, over a rank-N space with a fixed pairing.
#[derive(Clone, Debug, PartialEq)]
pub struct TamePotential {
    rank: usize,
    genus_cap: u32,
    gram: QMatrix,
    unit: Vec<BigRational>,
    terms: BTreeMap<MonomialKey, BigRational>,
}

impl TamePotential {
    pub fn new(
        rank: usize,
        genus_cap: u32,
        gram: QMatrix,
        unit: Vec<BigRational>,
    ) -> Result<Self, FockError> {
        if gram.rows != rank || gram.cols != rank {
            return Err(FockError::BadShape { want: rank, rows: gram.rows, cols: gram.cols });
        }
        if gram.inverse().is_none() {
            return Err(FockError::Singular);
        }
        if unit.len() != rank {
            return Err(FockError::Mismatch);
        }
        Ok(TamePotential { rank, genus_cap, gram, unit, terms: BTreeMap::new() })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn genus_cap(&self) -> u32 {
        self.genus_cap
    }

    pub fn gram(&self) -> &QMatrix {
        &self.gram
    }

    pub fn unit(&self) -> &[BigRational] {
        &self.unit
    }

    /// Accumulates a coefficient; the key is sorted, genera beyond the
    /// cap are dropped, cancelled entries are removed.
    pub fn add_term(
        &mut self,
        genus: u32,
        mut key: Vec<(u32, usize)>,
        c: BigRational,
    ) -> Result<(), FockError> {
        for &(_, i) in &key {
            if i >= self.rank {
                return Err(FockError::BadIndex(i, self.rank));
            }
        }
        if genus > self.genus_cap || c.is_zero() {
            return Ok(());
        }
        key.sort();
        let full_key = (genus, key);
        let slot = self.terms.entry(full_key.clone()).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&full_key);
        }
        Ok(())
    }

    pub fn coeff(&self, genus: u32, key: &[(u32, usize)]) -> BigRational {
        let mut sorted = key.to_vec();
        sorted.sort();
        self.terms
            .get(&(genus, sorted))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MonomialKey, &BigRational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Keys breaking the jet constraint k_1 + … + k_r ≤ 3g − 3 + r.
    pub fn tame_violations(&self) -> Vec<MonomialKey> {
        self.terms
            .keys()
            .filter(|(g, key)| !key_is_tame(*g, key))
            .cloned()
            .collect()
    }

    pub fn is_tame(&self) -> bool {
        self.tame_violations().is_empty()
    }

    fn with_terms(&self, terms: BTreeMap<MonomialKey, BigRational>) -> Self {
        let mut out = self.clone();
        out.terms = terms;
        out
    }
}

fn key_is_tame(g: u32, key: &[(u32, usize)]) -> bool {
    let total: i64 = key.iter().map(|&(k, _)| k as i64).sum();
    total <= 3 * g as i64 - 3 + key.len() as i64
}

/// An upper-triangular symplectic z-series 1 + R_1 z + … + R_m z^m; the
/// symplectic condition R(z)Rᵗ(−z) = 1 is verified through z^m, where the
/// transpose is taken with respect to the stored pairing.
#[derive(Clone, Debug, PartialEq)]
pub struct UpperTriangularR {
    gram: QMatrix,
    gram_inv: QMatrix,
    mats: Vec<QMatrix>,
}

impl UpperTriangularR {
    pub fn new(gram: QMatrix, mats: Vec<QMatrix>) -> Result<Self, FockError> {
        let n = gram.rows;
        if gram.cols != n {
            return Err(FockError::BadShape { want: n, rows: gram.rows, cols: gram.cols });
        }
        let gram_inv = gram.inverse().ok_or(FockError::Singular)?;
        for m in &mats {
            if m.rows != n || m.cols != n {
                return Err(FockError::BadShape { want: n, rows: m.rows, cols: m.cols });
            }
        }
        if mats.is_empty() || mats[0] != QMatrix::identity(n) {
            return Err(FockError::NotIdentityLeading);
        }
        let r = UpperTriangularR { gram, gram_inv, mats };
        for p in 1..=r.order() {
            let mut acc = QMatrix::zeros(n, n);
            for a in 0..=p {
                let b = p - a;
                let sign = if b % 2 == 0 { rat(1, 1) } else { rat(-1, 1) };
                acc = acc.add(&r.mat(a).matmul(&r.t_mat(b)).scale(&sign));
            }
            if !acc.is_zero() {
                return Err(FockError::SymplecticViolation(p));
            }
        }
        Ok(r)
    }

    pub fn rank(&self) -> usize {
        self.gram.rows
    }

    pub fn order(&self) -> usize {
        self.mats.len() - 1
    }

    pub fn gram(&self) -> &QMatrix {
        &self.gram
    }

    /// Coefficient of z^k; zero beyond the stored order.
    pub fn mat(&self, k: usize) -> QMatrix {
        if k < self.mats.len() {
            self.mats[k].clone()
        } else {
            QMatrix::zeros(self.rank(), self.rank())
        }
    }

    /// Transpose of the z^k coefficient with respect to the pairing.
    pub fn t_mat(&self, k: usize) -> QMatrix {
        if k < self.mats.len() {
            self.gram_inv.matmul(&self.mats[k].transpose()).matmul(&self.gram)
        } else {
            QMatrix::zeros(self.rank(), self.rank())
        }
    }

    /// V_{kℓ} by the closed sum over R-coefficients; the z-order must
    /// reach k + ℓ + 1.
    pub fn v_matrix(&self, k: usize, l: usize) -> Result<QMatrix, FockError> {
        if k + l + 1 > self.order() {
            return Err(FockError::OrderError { needed: k + l + 1, available: self.order() });
        }
        let n = self.rank();
        let mut acc = QMatrix::zeros(n, n);
        // solving (z + w)·V(z, w) = 1 − R(z)Rᵗ(w) coefficientwise gives
        // the alternating sum below; the recursion is re-derived
        // independently in the tests
        for a in 0..=l {
            let sign = if a % 2 == 1 { rat(1, 1) } else { rat(-1, 1) };
            acc = acc.add(&self.mat(k + 1 + a).matmul(&self.t_mat(l - a)).scale(&sign));
        }
        Ok(acc)
    }

    /// The inverse series Rᵗ(−z), which is again of the stored order.
    pub fn inverse(&self) -> Result<Self, FockError> {
        let mats = (0..self.mats.len())
            .map(|k| {
                let t = self.t_mat(k);
                if k % 2 == 0 {
                    t
                } else {
                    t.scale(&rat(-1, 1))
                }
            })
            .collect();
        UpperTriangularR::new(self.gram.clone(), mats)
    }

    /// Series product truncated at the smaller stored order.
    pub fn product(&self, other: &Self) -> Result<Self, FockError> {
        if self.gram != other.gram || self.rank() != other.rank() {
            return Err(FockError::Mismatch);
        }
        let order = self.order().min(other.order());
        let n = self.rank();
        let mats = (0..=order)
            .map(|p| {
                let mut acc = QMatrix::zeros(n, n);
                for a in 0..=p {
                    acc = acc.add(&self.mat(a).matmul(&other.mat(p - a)));
                }
                acc
            })
            .collect();
        UpperTriangularR::new(self.gram.clone(), mats)
    }
}

/// Truncated exponential of an infinitesimal generator A(z) = A_1 z + …;
/// `a_mats[k]` is the z^{k+1} coefficient. The result is validated
/// against the symplectic condition, so a generator that is not
/// infinitesimally symplectic is rejected.
pub fn exp_upper_triangular(
    gram: &QMatrix,
    a_mats: &[QMatrix],
    order: usize,
) -> Result<UpperTriangularR, FockError> {
    let n = gram.rows;
    let a_of = |k: usize| -> QMatrix {
        if k >= 1 && k <= a_mats.len() {
            a_mats[k - 1].clone()
        } else {
            QMatrix::zeros(n, n)
        }
    };
    let mut mats: Vec<QMatrix> = (0..=order)
        .map(|k| if k == 0 { QMatrix::identity(n) } else { QMatrix::zeros(n, n) })
        .collect();
    // A^j contributes only to z^{>= j}, so the sum below is finite
    let mut power: Vec<QMatrix> = mats.clone();
    let mut fact = BigRational::one();
    for j in 1..=order {
        fact *= rat(j as i64, 1);
        let mut next: Vec<QMatrix> = (0..=order).map(|_| QMatrix::zeros(n, n)).collect();
        for (p, entry) in next.iter_mut().enumerate() {
            for a in 1..=p {
                *entry = entry.add(&power[p - a].matmul(&a_of(a)));
            }
        }
        power = next;
        let inv_fact = fact.recip();
        for (p, entry) in power.iter().enumerate() {
            mats[p] = mats[p].add(&entry.scale(&inv_fact));
        }
    }
    UpperTriangularR::new(gram.clone(), mats)
}

fn cpow(c: &BigRational, e: i64) -> BigRational {
    let base = if e < 0 { c.recip() } else { c.clone() };
    let mut out = BigRational::one();
    for _ in 0..e.unsigned_abs() {
        out *= &base;
    }
    out
}

/// Substitutes each jet variable by an affine-linear expression,
/// expanding monomials distributively; genus is untouched.
fn substitute_terms(
    terms: &BTreeMap<MonomialKey, BigRational>,
    image: &dyn Fn(u32, usize) -> (Vec<((u32, usize), BigRational)>, BigRational),
) -> BTreeMap<MonomialKey, BigRational> {
    let mut out: BTreeMap<MonomialKey, BigRational> = BTreeMap::new();
    for ((g, key), c) in terms {
        let mut expanded: Vec<(Vec<(u32, usize)>, BigRational)> = vec![(Vec::new(), c.clone())];
        for &(k, i) in key {
            let (linear, constant) = image(k, i);
            let mut next = Vec::new();
            for (prefix, w) in &expanded {
                for (var, a) in &linear {
                    let mut nk = prefix.clone();
                    nk.push(*var);
                    next.push((nk, w * a));
                }
                if !constant.is_zero() {
                    next.push((prefix.clone(), w * &constant));
                }
            }
            expanded = next;
        }
        for (mut nk, w) in expanded {
            if w.is_zero() {
                continue;
            }
            nk.sort();
            let slot = out.entry((*g, nk)).or_insert_with(BigRational::zero);
            *slot += w;
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// The quantized action of R as displayed by the Wick formula: apply
/// exp((ħ/2)·V_R) with V_R the second-order operator built from the
/// V-matrices, then substitute q ↦ R(z)q. In the dilaton-shifted
/// variables the substitution picks up the affine tail
/// t_{k,·} ↦ R(z)t + (1 − R(z))·unit·z.
pub fn quantized_r_apply(
    r: &UpperTriangularR,
    f: &TamePotential,
) -> Result<TamePotential, FockError> {
    if r.rank() != f.rank || r.gram != f.gram {
        return Err(FockError::Mismatch);
    }
    if !f.is_tame() {
        return Err(FockError::NotTame);
    }
    let kmax = f
        .terms
        .keys()
        .flat_map(|(_, key)| key.iter().map(|&(k, _)| k as usize))
        .max()
        .unwrap_or(0);
    if !f.terms.is_empty() && 2 * kmax + 1 > r.order() {
        return Err(FockError::OrderError { needed: 2 * kmax + 1, available: r.order() });
    }
    // weight of ∂²/∂q_{k,i}∂q_{ℓ,j} in the quadratic operator: the
    // (i,j)-entry of V_{kℓ}·gram⁻¹ (pairing the duals of the basis)
    let mut weights: Vec<Vec<QMatrix>> = Vec::with_capacity(kmax + 1);
    for k in 0..=kmax {
        let mut row = Vec::with_capacity(kmax + 1);
        for l in 0..=kmax {
            row.push(r.v_matrix(k, l)?.matmul(&r.gram_inv));
        }
        weights.push(row);
    }
    let apply_half_v = |terms: &BTreeMap<MonomialKey, BigRational>| {
        let mut out: BTreeMap<MonomialKey, BigRational> = BTreeMap::new();
        for ((g, key), c) in terms {
            if *g + 1 > f.genus_cap || key.len() < 2 {
                continue;
            }
            for p in 0..key.len() {
                for q in 0..key.len() {
                    if p == q {
                        continue;
                    }
                    let (kp, ip) = key[p];
                    let (kq, iq) = key[q];
                    let w = weights[kp as usize][kq as usize][(ip, iq)].clone();
                    if w.is_zero() {
                        continue;
                    }
                    let mut nk: Vec<(u32, usize)> = key
                        .iter()
                        .enumerate()
                        .filter(|(m, _)| *m != p && *m != q)
                        .map(|(_, &x)| x)
                        .collect();
                    nk.sort();
                    let slot = out.entry((*g + 1, nk)).or_insert_with(BigRational::zero);
                    *slot += c * w * rat(1, 2);
                }
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    };
    let mut acc = f.terms.clone();
    let mut cur = f.terms.clone();
    let mut step = 0i64;
    while !cur.is_empty() {
        step += 1;
        let mut next = apply_half_v(&cur);
        let scale = rat(1, step);
        for v in next.values_mut() {
            *v *= &scale;
        }
        for (k, v) in &next {
            let slot = acc.entry(k.clone()).or_insert_with(BigRational::zero);
            *slot += v;
        }
        cur = next;
    }
    acc.retain(|_, v| !v.is_zero());
    // q ↦ R(z)q, written on the shifted variables; the unit-tail shift
    // cancels at k = 1 and contributes −(R_{k−1}·unit) for k ≥ 2
    let substituted = substitute_terms(&acc, &|k, i| {
        let mut linear = Vec::new();
        for a in 0..=(k as usize).min(r.order()) {
            let ra = r.mat(a);
            for j in 0..f.rank {
                let coeff = ra[(i, j)].clone();
                if !coeff.is_zero() {
                    linear.push(((k - a as u32, j), coeff));
                }
            }
        }
        let constant = if k >= 2 {
            let shifted = r.mat(k as usize - 1).matvec(&f.unit);
            -shifted[i].clone()
        } else {
            BigRational::zero()
        };
        (linear, constant)
    });
    Ok(f.with_terms(substituted))
}

/// Re-expresses a potential in a new coordinate frame: the old shifted
/// variables are read as t_{k,i} ↦ (B·t_k)_i plus the dilaton mismatch
/// δ_{k,1}·(old_unit − B·new_unit), and the declared pairing and unit are
/// replaced. With new_unit = B⁻¹·old_unit the affine tail vanishes and
/// this is the pure substitution q ↦ B·q carried to the new frame.
pub fn reframe(
    f: &TamePotential,
    b: &QMatrix,
    new_gram: QMatrix,
    new_unit: Vec<BigRational>,
) -> Result<TamePotential, FockError> {
    if b.rows != f.rank || b.cols != f.rank {
        return Err(FockError::BadShape { want: f.rank, rows: b.rows, cols: b.cols });
    }
    if b.inverse().is_none() {
        return Err(FockError::Singular);
    }
    let mut out = TamePotential::new(f.rank, f.genus_cap, new_gram, new_unit)?;
    let shifted = b.matvec(&out.unit);
    out.terms = substitute_terms(&f.terms, &|k, i| {
        let linear = (0..f.rank)
            .filter_map(|j| {
                let coeff = b[(i, j)].clone();
                (!coeff.is_zero()).then_some(((k, j), coeff))
            })
            .collect();
        let constant = if k == 1 {
            &f.unit[i] - &shifted[i]
        } else {
            BigRational::zero()
        };
        (linear, constant)
    });
    Ok(out)
}

/// Change of basis and rescaling: q_k ↦ c⁻¹·B·q_k together with
/// ħ ↦ ħ·c⁻², applied on the shifted variables (the dilaton tail moves
/// by (1 − c⁻¹B)·unit at jet order one).
pub fn linear_change_apply(
    f: &TamePotential,
    b: &QMatrix,
    c: &BigRational,
) -> Result<TamePotential, FockError> {
    if b.rows != f.rank || b.cols != f.rank {
        return Err(FockError::BadShape { want: f.rank, rows: b.rows, cols: b.cols });
    }
    if b.inverse().is_none() {
        return Err(FockError::Singular);
    }
    if c.is_zero() {
        return Err(FockError::ZeroScale);
    }
    let bc = b.scale(&c.recip());
    let shifted_unit = bc.matvec(&f.unit);
    let mut rescaled = f.terms.clone();
    for ((g, _), v) in rescaled.iter_mut() {
        *v *= cpow(c, 2 - 2 * (*g as i64));
    }
    let substituted = substitute_terms(&rescaled, &|k, i| {
        let linear = (0..f.rank)
            .filter_map(|j| {
                let coeff = bc[(i, j)].clone();
                (!coeff.is_zero()).then_some(((k, j), coeff))
            })
            .collect();
        let constant = if k == 1 {
            &f.unit[i] - &shifted_unit[i]
        } else {
            BigRational::zero()
        };
        (linear, constant)
    });
    Ok(f.with_terms(substituted))
}
