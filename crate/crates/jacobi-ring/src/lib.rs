//! Jacobi rings of the Fermat polynomial W = Σ x_i^{d_i} and of the
//! one-parameter family f = Σ x_i^{d_i} − Q^{-1} x_1⋯x_n.
//!
//! Normal forms are computed per weighted-degree slice by exact linear
//! algebra: every slice splits as (span of reduced monomials) ⊕ (gradient
//! ideal slice), and the projection is obtained from one row reduction per
//! degree. The residue pairing is calibrated so that det Hess(f) has
//! residue equal to the Milnor number; Q→0 limits of Q-dependent residues
//! are recovered exactly by rational-function reconstruction from samples.

mod poly;

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use fermat_weights::WeightSystem;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use series_core::{BigRational, QMatrix};

pub use poly::{parse_poly, Poly};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum JacobiError {
    #[error("deformation parameter Q must be nonzero")]
    ZeroDeformation,
    #[error("the deformed family requires a Calabi-Yau weight system")]
    DeformationRequiresCalabiYau,
    #[error("degreewise reduction system at weighted degree {0}/D is singular")]
    SingularSlice(u64),
    #[error("polynomial degree {degree}/D exceeds the reduction cap {cap}/D")]
    DegreeCapExceeded { degree: u64, cap: u64 },
    #[error("polynomial has {got} variables, weight system has {want}")]
    VariableCountMismatch { got: usize, want: usize },
    #[error("residue calibration failed: det Hess has no socle component")]
    DegenerateCalibration,
    #[error("rational reconstruction in Q failed: {0}")]
    ReconstructionFailed(String),
}

/// Reduction data for one weighted-degree slice: the monomials of that
/// degree, the reduced (basis) monomials among them, and the projection
/// of the slice onto the basis part along the gradient-ideal part.
struct Slice {
    index: BTreeMap<Vec<u32>, usize>,
    basis_exps: Vec<Vec<u32>>,
    projection: QMatrix,
}

pub struct JacobiRing {
    ws: WeightSystem,
    q: Option<BigRational>,
    weights: Vec<u64>,
    lcm_degree: u64,
    cap_units: u64,
    slices: Mutex<BTreeMap<u64, Arc<Slice>>>,
    socle_residue: Mutex<Option<BigRational>>,
}

impl std::fmt::Debug for JacobiRing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("JacobiRing")
            .field("ws", &self.ws)
            .field("q", &self.q)
            .field("cap_units", &self.cap_units)
            .finish()
    }
}

impl JacobiRing {
    /// A ring for the pure Fermat polynomial (`q = None`) or the deformed
    /// family at a fixed nonzero Q.
    pub fn new(ws: &WeightSystem, q: Option<BigRational>) -> Result<Self, JacobiError> {
        if let Some(q) = &q {
            if q.is_zero() {
                return Err(JacobiError::ZeroDeformation);
            }
            if !ws.is_calabi_yau() {
                return Err(JacobiError::DeformationRequiresCalabiYau);
            }
        }
        let (lcm_degree, weights) = ws.derived_degrees();
        let socle_units: u64 = ws
            .exponents()
            .iter()
            .zip(&weights)
            .map(|(&d, &w)| (d - 2) * w)
            .sum();
        Ok(JacobiRing {
            ws: ws.clone(),
            q,
            weights,
            lcm_degree,
            cap_units: 2 * socle_units,
            slices: Mutex::new(BTreeMap::new()),
            socle_residue: Mutex::new(None),
        })
    }

    /// Overrides the default reduction cap (twice the socle degree), in
    /// units of 1/D of weighted degree.
    pub fn with_degree_cap(mut self, cap_units: u64) -> Self {
        self.cap_units = cap_units;
        self
    }

    pub fn ws(&self) -> &WeightSystem {
        &self.ws
    }

    pub fn q(&self) -> Option<&BigRational> {
        self.q.as_ref()
    }

    pub fn n(&self) -> usize {
        self.ws.n()
    }

    /// Weighted degree of a monomial in units of 1/D (lcm of the d_i).
    pub fn weighted_degree_units(&self, exp: &[u32]) -> u64 {
        exp.iter()
            .zip(&self.weights)
            .map(|(&e, &w)| e as u64 * w)
            .sum()
    }

    /// Weighted degree of the socle monomial x^{d-2}, in units of 1/D
    /// (equals (n−2)·D for Calabi-Yau weights).
    pub fn socle_units(&self) -> u64 {
        self.weighted_degree_units(&self.socle_exp())
    }

    pub fn socle_exp(&self) -> Vec<u32> {
        self.ws.exponents().iter().map(|&d| (d - 2) as u32).collect()
    }

    /// The defining polynomial: W, or f = W − Q^{-1} x_1⋯x_n.
    pub fn family_polynomial(&self) -> Poly {
        let n = self.n();
        let mut f = Poly::zero(n);
        for (i, &d) in self.ws.exponents().iter().enumerate() {
            let mut exp = vec![0u32; n];
            exp[i] = d as u32;
            f.add_term(exp, BigRational::one());
        }
        if let Some(q) = &self.q {
            f.add_term(vec![1; n], -q.recip());
        }
        f
    }

    pub fn partial(&self, i: usize) -> Poly {
        self.family_polynomial().derivative(i)
    }

    fn check_vars(&self, p: &Poly) -> Result<(), JacobiError> {
        if p.n() != self.n() {
            return Err(JacobiError::VariableCountMismatch { got: p.n(), want: self.n() });
        }
        Ok(())
    }

    fn monomials_of_degree(&self, delta: u64) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; self.n()];
        self.enumerate_rec(delta, 0, &mut cur, &mut out);
        out
    }

    fn enumerate_rec(&self, rem: u64, i: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == self.n() {
            if rem == 0 {
                out.push(cur.clone());
            }
            return;
        }
        if i + 1 == self.n() {
            let w = self.weights[i];
            if rem % w == 0 && rem / w <= u32::MAX as u64 {
                cur[i] = (rem / w) as u32;
                out.push(cur.clone());
                cur[i] = 0;
            }
            return;
        }
        let w = self.weights[i];
        for e in 0..=(rem / w) {
            cur[i] = e as u32;
            self.enumerate_rec(rem - e * w, i + 1, cur, out);
        }
        cur[i] = 0;
    }

    fn is_reduced(&self, exp: &[u32]) -> bool {
        exp.iter()
            .zip(self.ws.exponents())
            .all(|(&e, &d)| (e as u64) + 2 <= d)
    }

    fn slice(&self, delta: u64) -> Result<Arc<Slice>, JacobiError> {
        if let Some(s) = self.slices.lock().unwrap().get(&delta) {
            return Ok(s.clone());
        }
        let s = Arc::new(self.build_slice(delta)?);
        self.slices
            .lock()
            .unwrap()
            .entry(delta)
            .or_insert_with(|| s.clone());
        Ok(s)
    }

    fn build_slice(&self, delta: u64) -> Result<Slice, JacobiError> {
        let mons = self.monomials_of_degree(delta);
        let rows = mons.len();
        let index: BTreeMap<Vec<u32>, usize> =
            mons.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        let basis_idx: Vec<usize> =
            (0..rows).filter(|&i| self.is_reduced(&mons[i])).collect();
        let nb = basis_idx.len();

        let mut columns: Vec<Vec<BigRational>> = Vec::new();
        for &bi in &basis_idx {
            let mut col = vec![BigRational::zero(); rows];
            col[bi] = BigRational::one();
            columns.push(col);
        }
        for i in 0..self.n() {
            let gen_units = self.weights[i] * (self.ws.exponents()[i] - 1);
            if delta < gen_units {
                continue;
            }
            let partial = self.partial(i);
            for m in self.monomials_of_degree(delta - gen_units) {
                let product = Poly::monomial(m, BigRational::one()).mul(&partial);
                let mut col = vec![BigRational::zero(); rows];
                for (e, c) in product.iter() {
                    col[index[e]] = c.clone();
                }
                columns.push(col);
            }
        }

        let ncols = columns.len();
        let mut aug = QMatrix::zeros(rows, ncols + rows);
        for (j, col) in columns.iter().enumerate() {
            for (i, c) in col.iter().enumerate() {
                if !c.is_zero() {
                    aug[(i, j)] = c.clone();
                }
            }
        }
        for i in 0..rows {
            aug[(i, ncols + i)] = BigRational::one();
        }
        let (r, pivots) = aug.rref();
        if pivots.len() != rows || pivots.iter().any(|&p| p >= ncols) {
            return Err(JacobiError::SingularSlice(delta));
        }
        // the basis unit columns come first and are mutually independent,
        // so they are exactly the first nb pivots
        debug_assert!(pivots.iter().take(nb).copied().eq(0..nb));
        let mut projection = QMatrix::zeros(nb, rows);
        for bj in 0..nb {
            for k in 0..rows {
                projection[(bj, k)] = r[(bj, ncols + k)].clone();
            }
        }
        Ok(Slice {
            index,
            basis_exps: basis_idx.iter().map(|&i| mons[i].clone()).collect(),
            projection,
        })
    }

    /// The unique representative of `p` modulo the gradient ideal lying in
    /// the span of the reduced monomials (exponents ≤ d_i − 2).
    pub fn normal_form(&self, p: &Poly) -> Result<Poly, JacobiError> {
        self.check_vars(p)?;
        if self.q.is_none() {
            // gradient ideal of W is the monomial ideal (x_i^{d_i−1})
            let mut out = Poly::zero(self.n());
            for (e, c) in p.iter() {
                if self.is_reduced(e) {
                    out.add_term(e.clone(), c.clone());
                }
            }
            return Ok(out);
        }
        self.normal_form_degreewise(p)
    }

    /// Normal form via the degreewise linear-algebra path regardless of
    /// deformation (cross-checks the monomial fast path on pure W).
    pub fn normal_form_degreewise(&self, p: &Poly) -> Result<Poly, JacobiError> {
        self.check_vars(p)?;
        let mut by_degree: BTreeMap<u64, Vec<(&Vec<u32>, &BigRational)>> = BTreeMap::new();
        for (e, c) in p.iter() {
            by_degree
                .entry(self.weighted_degree_units(e))
                .or_default()
                .push((e, c));
        }
        let mut out = Poly::zero(self.n());
        for (delta, terms) in by_degree {
            if delta > self.cap_units {
                return Err(JacobiError::DegreeCapExceeded { degree: delta, cap: self.cap_units });
            }
            let slice = self.slice(delta)?;
            let mut v = vec![BigRational::zero(); slice.index.len()];
            for (e, c) in terms {
                v[slice.index[e]] = c.clone();
            }
            let coords = slice.projection.matvec(&v);
            for (exp, c) in slice.basis_exps.iter().zip(coords) {
                out.add_term(exp.clone(), c);
            }
        }
        Ok(out)
    }

    /// Coordinates of `normal_form(p)` in the reduced-monomial basis,
    /// ordered like `WeightSystem::ghost_box`.
    pub fn basis_coordinates(&self, p: &Poly) -> Result<Vec<BigRational>, JacobiError> {
        let nf = self.normal_form(p)?;
        Ok(self
            .ws
            .ghost_box()
            .iter()
            .map(|b| {
                let exp: Vec<u32> = b.iter().map(|&x| x as u32).collect();
                nf.coeff(&exp)
            })
            .collect())
    }

    pub fn det_hessian(&self) -> Poly {
        let n = self.n();
        let f = self.family_polynomial();
        let partials: Vec<Poly> = (0..n).map(|i| f.derivative(i)).collect();
        let hess: Vec<Vec<Poly>> = (0..n)
            .map(|i| (0..n).map(|j| partials[i].derivative(j)).collect())
            .collect();
        let mut det = Poly::zero(n);
        let mut perm: Vec<usize> = (0..n).collect();
        permute(&mut perm, 0, 1, &mut |sigma, sign| {
            let mut term = Poly::constant(n, BigRational::from_integer(sign.into()));
            for (i, &j) in sigma.iter().enumerate() {
                term = term.mul(&hess[i][j]);
            }
            det = det.add(&term);
        });
        det
    }

    /// The residue of the socle monomial x^{d−2}, calibrated so that
    /// det Hess(f) has residue equal to the Milnor number.
    pub fn socle_residue(&self) -> Result<BigRational, JacobiError> {
        if let Some(v) = self.socle_residue.lock().unwrap().as_ref() {
            return Ok(v.clone());
        }
        let socle = self.socle_exp();
        let hess_coeff = self
            .normal_form(&self.det_hessian())?
            .coeff(&socle);
        if hess_coeff.is_zero() {
            return Err(JacobiError::DegenerateCalibration);
        }
        let milnor = BigRational::from_integer(BigInt::from(self.ws.milnor_number()));
        let v = milnor / hess_coeff;
        *self.socle_residue.lock().unwrap() = Some(v.clone());
        Ok(v)
    }

    /// The residue pairing K^{(0)}(a, b): socle coefficient of the normal
    /// form of a·b, scaled by the calibrated socle residue.
    pub fn residue_pairing(&self, a: &Poly, b: &Poly) -> Result<BigRational, JacobiError> {
        self.check_vars(a)?;
        self.check_vars(b)?;
        let product = a.mul(b);
        // the residue functional vanishes off the socle degree
        let socle_units = self.socle_units();
        let mut top = Poly::zero(self.n());
        for (e, c) in product.iter() {
            if self.weighted_degree_units(e) == socle_units {
                top.add_term(e.clone(), c.clone());
            }
        }
        if top.is_zero() {
            return Ok(BigRational::zero());
        }
        let coeff = self.normal_form(&top)?.coeff(&self.socle_exp());
        Ok(coeff * self.socle_residue()?)
    }

    /// Gram matrix of the residue pairing on the reduced monomials, in
    /// `ghost_box` order.
    pub fn good_basis_gram(&self) -> Result<QMatrix, JacobiError> {
        let basis: Vec<Poly> = self
            .ws
            .ghost_box()
            .iter()
            .map(|b| {
                Poly::monomial(b.iter().map(|&x| x as u32).collect(), BigRational::one())
            })
            .collect();
        let n = basis.len();
        let mut g = QMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                g[(i, j)] = self.residue_pairing(&basis[i], &basis[j])?;
            }
        }
        Ok(g)
    }

    /// The Gram matrix divided by the socle residue, so that for the pure
    /// Fermat ring the antidiagonal entries become 1. For the deformed
    /// family the raw Gram carries an overall Q-dependent socle scalar;
    /// this view removes it (no silent rescaling happens elsewhere: the
    /// scalar itself is `socle_residue`).
    pub fn gram_delta_normalized(&self) -> Result<QMatrix, JacobiError> {
        let g = self.good_basis_gram()?;
        Ok(g.scale(&self.socle_residue()?.recip()))
    }

    /// Builds every reduction slice up to the socle degree and returns
    /// the total count of reduced monomials, which must equal the Milnor
    /// number. Errors if any slice fails the rank check (basis part ⊕
    /// ideal part = full slice).
    pub fn verify_graded_dimensions(&self) -> Result<u128, JacobiError> {
        let mut total: u128 = 0;
        for delta in 0..=self.socle_units() {
            let slice = self.slice(delta)?;
            total += slice
                .basis_exps
                .iter()
                .filter(|e| self.weighted_degree_units(e) == delta)
                .count() as u128;
        }
        Ok(total)
    }

    /// Number of reduced monomials in each weighted-degree slice,
    /// 0 ..= socle degree (the graded dimensions of the quotient).
    pub fn graded_dimensions(&self) -> Vec<u64> {
        let socle_units = self.socle_units();
        let mut dims = vec![0u64; socle_units as usize + 1];
        for b in self.ws.ghost_box() {
            let exp: Vec<u32> = b.iter().map(|&x| x as u32).collect();
            dims[self.weighted_degree_units(&exp) as usize] += 1;
        }
        dims
    }

    pub fn degree_lcm(&self) -> u64 {
        self.lcm_degree
    }
}

fn permute<F: FnMut(&[usize], i64)>(perm: &mut Vec<usize>, i: usize, sign: i64, f: &mut F) {
    if i + 1 >= perm.len() {
        f(perm, sign);
        return;
    }
    permute(perm, i + 1, sign, f);
    for j in (i + 1)..perm.len() {
        perm.swap(i, j);
        permute(perm, i + 1, -sign, f);
        perm.swap(i, j);
    }
}

fn rat_pow(q: &BigRational, e: i32) -> BigRational {
    let base = if e < 0 { q.recip() } else { q.clone() };
    let mut out = BigRational::one();
    for _ in 0..e.unsigned_abs() {
        out *= &base;
    }
    out
}

/// Exact Q→0 limit of Q^{q_power}·K^{(0)}_Q(a, b) over the deformed
/// family, recovered by sampling integer Q and reconstructing the value
/// as a rational function of Q.
pub fn residue_q0_limit(
    ws: &WeightSystem,
    a: &Poly,
    b: &Poly,
    q_power: i32,
) -> Result<BigRational, JacobiError> {
    let mut points: Vec<(BigRational, BigRational)> = Vec::new();
    for target in [12usize, 20, 32] {
        while points.len() < target {
            let j = points.len() as i64 + 1;
            let q = BigRational::from_integer(j.into());
            let ring = JacobiRing::new(ws, Some(q.clone()))?;
            let value = ring.residue_pairing(a, b)? * rat_pow(&q, q_power);
            points.push((q, value));
        }
        if let Some(v) = rational_value_at_zero(&points) {
            return Ok(v);
        }
    }
    Err(JacobiError::ReconstructionFailed(format!(
        "no rational function of Q fits {} samples",
        points.len()
    )))
}

/// Q→0 limit of the residue Q^{-n}·K^{(0)}((x_1⋯x_n)^{n−2}, 1) for the
/// deformed family; equals −1 for every Calabi-Yau weight system.
pub fn product_power_residue_limit(ws: &WeightSystem) -> Result<BigRational, JacobiError> {
    let n = ws.n();
    let sigma = Poly::monomial(vec![1; n], BigRational::one());
    residue_q0_limit(ws, &sigma.pow(n as u32 - 2), &Poly::one(n), -(n as i32))
}

/// Taylor coefficients at Q = 0, up to `order` inclusive, of the function
/// Q ↦ Q^{q_power}·K^{(0)}_Q(a, b), reconstructed the same way as
/// `residue_q0_limit`.
pub fn residue_q_series(
    ws: &WeightSystem,
    a: &Poly,
    b: &Poly,
    q_power: i32,
    order: usize,
) -> Result<Vec<BigRational>, JacobiError> {
    let mut points: Vec<(BigRational, BigRational)> = Vec::new();
    for target in [12usize, 20, 32] {
        while points.len() < target {
            let j = points.len() as i64 + 1;
            let q = BigRational::from_integer(j.into());
            let ring = JacobiRing::new(ws, Some(q.clone()))?;
            let value = ring.residue_pairing(a, b)? * rat_pow(&q, q_power);
            points.push((q, value));
        }
        if let Some((num, den)) = fit_rational(&points) {
            return Ok(expand_rational(&num, &den, order));
        }
    }
    Err(JacobiError::ReconstructionFailed(format!(
        "no rational function of Q fits {} samples",
        points.len()
    )))
}

/// Power-series expansion of num(Q)/den(Q) at Q = 0, assuming den(0) = 1.
fn expand_rational(num: &[BigRational], den: &[BigRational], order: usize) -> Vec<BigRational> {
    let mut out = Vec::with_capacity(order + 1);
    for k in 0..=order {
        let mut c = num.get(k).cloned().unwrap_or_else(BigRational::zero);
        for j in 1..=k.min(den.len().saturating_sub(1)) {
            c -= &den[j] * &out[k - j];
        }
        out.push(c);
    }
    out
}

/// Fits a rational function through the sample points (last samples are
/// held out for verification) and evaluates it at zero.
fn rational_value_at_zero(points: &[(BigRational, BigRational)]) -> Option<BigRational> {
    fit_rational(points).map(|(num, _)| num[0].clone())
}

/// Fits num(Q)/den(Q) with den(0) = 1 through the sample points by
/// adaptive degree search; all points must be matched exactly.
fn fit_rational(
    points: &[(BigRational, BigRational)],
) -> Option<(Vec<BigRational>, Vec<BigRational>)> {
    let k = points.len();
    for total in 0..k.saturating_sub(2) {
        let unknowns = total + 1;
        if unknowns + 2 > k {
            break;
        }
        for num_deg in 0..=total {
            let den_deg = total - num_deg;
            // p(q) − v·(s_1 q + … + s_b q^b) = v, normalizing s_0 = 1
            let mut m = QMatrix::zeros(unknowns, unknowns);
            let mut rhs = Vec::with_capacity(unknowns);
            for (row, (q, v)) in points.iter().take(unknowns).enumerate() {
                let mut qp = BigRational::one();
                for t in 0..=num_deg {
                    m[(row, t)] = qp.clone();
                    if t < num_deg {
                        qp *= q;
                    }
                }
                let mut qp = q.clone();
                for t in 1..=den_deg {
                    m[(row, num_deg + t)] = -v * &qp;
                    qp *= q;
                }
                rhs.push(v.clone());
            }
            let Some(x) = m.solve(&rhs) else { continue };
            let fits = points.iter().all(|(q, v)| {
                let mut num = BigRational::zero();
                let mut den = BigRational::one();
                let mut qp = BigRational::one();
                for t in 0..=num_deg.max(den_deg) {
                    if t <= num_deg {
                        num += &x[t] * &qp;
                    }
                    if t >= 1 && t <= den_deg {
                        den += &x[num_deg + t] * &qp;
                    }
                    qp *= q;
                }
                !den.is_zero() && num == v * den
            });
            if fits {
                let num = x[..=num_deg].to_vec();
                let mut den = vec![BigRational::one()];
                den.extend_from_slice(&x[num_deg + 1..]);
                return Some((num, den));
            }
        }
    }
    None
}

/// Σ over all index subsets S of ∏_{i∈S}(d_i−1) · (1 − n + |S|);
/// vanishes identically.
pub fn hessian_expansion_sum(ws: &WeightSystem) -> BigRational {
    subset_sum(ws, ws.n())
}

/// The same sum truncated to |S| ≤ n − 2; equals −N.
pub fn hessian_expansion_partial_sum(ws: &WeightSystem) -> BigRational {
    subset_sum(ws, ws.n() - 2)
}

fn subset_sum(ws: &WeightSystem, max_size: usize) -> BigRational {
    let n = ws.n();
    let d = ws.exponents();
    let mut total = BigRational::zero();
    for mask in 0u32..(1 << n) {
        let m = mask.count_ones() as usize;
        if m > max_size {
            continue;
        }
        let mut prod = BigRational::one();
        for i in 0..n {
            if mask & (1 << i) != 0 {
                prod *= BigRational::from_integer((d[i] - 1).into());
            }
        }
        total += prod * BigRational::from_integer((1 + m as i64 - n as i64).into());
    }
    total
}
