//! The two A-model state spaces.
//!
//! Chen–Ruan cohomology of the CY hypersurface: basis p^k·1_c over twisted
//! sectors c with 0 ≤ k ≤ dim Y_c, orbifold Poincaré pairing, degree, and
//! the classical monomial product. FJRW state space: narrow generators 1_γ
//! with deg_W and the pairing η_W.

use std::collections::BTreeMap;

use fermat_weights::{Narrow, Sector, WeightSystem};
use num_traits::{One, Zero};
use series_core::{rat, BigRational, QMatrix};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum StateError {
    #[error("classes belong to different weight systems")]
    MismatchedWeights,
    #[error("class is not homogeneous; degrees present: {0:?}")]
    NotHomogeneous(Vec<BigRational>),
    #[error("weight system is not Calabi-Yau")]
    NotCalabiYau,
}

/// A Chen–Ruan cohomology class Σ a_{k,c} p^k 1_c.
#[derive(Clone, PartialEq, Debug)]
pub struct CRClass {
    ws: WeightSystem,
    terms: BTreeMap<(Sector, u32), BigRational>,
}

impl CRClass {
    pub fn zero(ws: &WeightSystem) -> Self {
        CRClass { ws: ws.clone(), terms: BTreeMap::new() }
    }

    /// The untwisted unit 1_0.
    pub fn unit(ws: &WeightSystem) -> Self {
        let c = Sector { nums: vec![0; ws.n()] };
        Self::from_term(ws, &c, 0, BigRational::one())
    }

    pub fn from_term(ws: &WeightSystem, c: &Sector, k: u32, a: BigRational) -> Self {
        let mut s = Self::zero(ws);
        s.add_term(c, k, a);
        s
    }

    /// Adds a·p^k 1_c; silently zero when c is not a sector label or k
    /// exceeds dim Y_c (p is nilpotent sectorwise).
    pub fn add_term(&mut self, c: &Sector, k: u32, a: BigRational) {
        if a.is_zero() || c.zeros() < 2 || (k as usize) > c.dim() {
            return;
        }
        let key = (c.clone(), k);
        let e = self.terms.entry(key).or_insert_with(BigRational::zero);
        *e += a;
        if e.is_zero() {
            self.terms.remove(&(c.clone(), k));
        }
    }

    pub fn ws(&self) -> &WeightSystem {
        &self.ws
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(Sector, u32), &BigRational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, c: &Sector, k: u32) -> BigRational {
        self.terms
            .get(&(c.clone(), k))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.ws, other.ws);
        let mut out = self.clone();
        for ((c, k), a) in &other.terms {
            out.add_term(c, *k, a.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        CRClass {
            ws: self.ws.clone(),
            terms: self.terms.iter().map(|(k, a)| (k.clone(), -a)).collect(),
        }
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        let mut out = Self::zero(&self.ws);
        for ((c, k), a) in &self.terms {
            out.add_term(c, *k, a * s);
        }
        out
    }

    /// Cup product with p (shifts k by one, truncating at dim Y_c).
    pub fn mul_p(&self) -> Self {
        let mut out = Self::zero(&self.ws);
        for ((c, k), a) in &self.terms {
            out.add_term(c, *k + 1, a.clone());
        }
        out
    }

    /// deg_CR of a homogeneous class: k + Σ c_i.
    pub fn degree(&self) -> Result<BigRational, StateError> {
        let mut degrees: Vec<BigRational> = Vec::new();
        for ((c, k), _) in &self.terms {
            let d = BigRational::from_integer((*k).into()) + c.age(&self.ws);
            if !degrees.contains(&d) {
                degrees.push(d);
            }
        }
        match degrees.len() {
            0 => Ok(BigRational::zero()),
            1 => Ok(degrees.pop().unwrap()),
            _ => Err(StateError::NotHomogeneous(degrees)),
        }
    }
}

/// Orbifold Poincaré pairing: (p^k 1_c, p^k' 1_c') = 1/|G_c| iff
/// k + k' = dim Y_c and c + c' ≡ 0 mod 1.
pub fn cr_pairing(a: &CRClass, b: &CRClass) -> Result<BigRational, StateError> {
    if a.ws != b.ws {
        return Err(StateError::MismatchedWeights);
    }
    let mut s = BigRational::zero();
    for ((c, k), x) in &a.terms {
        for ((c2, k2), y) in &b.terms {
            if *c2 == c.dual(&a.ws) && (*k + *k2) as usize == c.dim() {
                s += x * y * rat(1, c.stabilizer_order(&a.ws) as i64);
            }
        }
    }
    Ok(s)
}

/// The Chen–Ruan monomial φ_1^{β_1}⋯φ_n^{β_n} = (∏ d_i^{−ℓ_i}) p^ℓ 1_c
/// where β^(i)/d_i = ℓ_i + c_i with 0 ≤ c_i < 1.
pub fn cr_product_monomial(ws: &WeightSystem, beta: &[u64]) -> Result<CRClass, StateError> {
    if !ws.is_calabi_yau() {
        return Err(StateError::NotCalabiYau);
    }
    assert_eq!(beta.len(), ws.n());
    let mut ell_total = 0u32;
    let mut coeff = BigRational::one();
    let mut nums = Vec::with_capacity(ws.n());
    for (i, (&b, &d)) in beta.iter().zip(ws.exponents()).enumerate() {
        let _ = i;
        let ell = b / d;
        nums.push(b % d);
        ell_total += ell as u32;
        for _ in 0..ell {
            coeff *= rat(1, d as i64);
        }
    }
    let c = Sector { nums };
    Ok(CRClass::from_term(ws, &c, ell_total, coeff))
}

/// deg_CR as a formula on labels: k + Σ a_i/d_i, defined for any phase
/// vector (no sector-membership requirement).
pub fn cr_degree_formula(ws: &WeightSystem, nums: &[u64], k: u32) -> BigRational {
    nums.iter()
        .zip(ws.exponents())
        .map(|(&a, &d)| rat(a as i64, d as i64))
        .fold(BigRational::from_integer(k.into()), |s, x| s + x)
}

/// The deformation direction class φ_i = 1 at sector e_i/d_i.
pub fn cr_phi(ws: &WeightSystem, i: usize) -> CRClass {
    let mut beta = vec![0u64; ws.n()];
    beta[i] = 1;
    cr_product_monomial(ws, &beta).expect("CY checked by caller")
}

/// Canonical Chen–Ruan basis: (sector, k) pairs with sectors in
/// lexicographic numerator order and k ascending. Length = Milnor number.
pub fn cr_basis(ws: &WeightSystem) -> Result<Vec<(Sector, u32)>, StateError> {
    let sectors = ws.sectors().map_err(|_| StateError::NotCalabiYau)?;
    let mut basis = Vec::new();
    for c in sectors {
        for k in 0..=(c.dim() as u32) {
            basis.push((c.clone(), k));
        }
    }
    Ok(basis)
}

/// Gram matrix of the orbifold Poincaré pairing on `cr_basis`.
pub fn cr_gram(ws: &WeightSystem) -> Result<QMatrix, StateError> {
    let basis = cr_basis(ws)?;
    let n = basis.len();
    let mut g = QMatrix::zeros(n, n);
    for (i, (c, k)) in basis.iter().enumerate() {
        let a = CRClass::from_term(ws, c, *k, BigRational::one());
        for (j, (c2, k2)) in basis.iter().enumerate() {
            let b = CRClass::from_term(ws, c2, *k2, BigRational::one());
            g[(i, j)] = cr_pairing(&a, &b)?;
        }
    }
    Ok(g)
}

/// An FJRW state-space element Σ a_γ 1_γ over narrow γ.
#[derive(Clone, PartialEq, Debug)]
pub struct FJRWClass {
    ws: WeightSystem,
    terms: BTreeMap<Narrow, BigRational>,
}

impl FJRWClass {
    pub fn zero(ws: &WeightSystem) -> Self {
        FJRWClass { ws: ws.clone(), terms: BTreeMap::new() }
    }

    /// The unit 1 = 1_{j_W}.
    pub fn unit(ws: &WeightSystem) -> Self {
        Self::from_term(ws, &ws.exponential_element(), BigRational::one())
    }

    pub fn from_term(ws: &WeightSystem, g: &Narrow, a: BigRational) -> Self {
        let mut s = Self::zero(ws);
        s.add_term(g, a);
        s
    }

    pub fn add_term(&mut self, g: &Narrow, a: BigRational) {
        assert!(self.ws.is_narrow(&g.nums), "non-narrow generator");
        if a.is_zero() {
            return;
        }
        let e = self.terms.entry(g.clone()).or_insert_with(BigRational::zero);
        *e += a;
        if e.is_zero() {
            self.terms.remove(g);
        }
    }

    pub fn ws(&self) -> &WeightSystem {
        &self.ws
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Narrow, &BigRational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, g: &Narrow) -> BigRational {
        self.terms.get(g).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.ws, other.ws);
        let mut out = self.clone();
        for (g, a) in &other.terms {
            out.add_term(g, a.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        FJRWClass {
            ws: self.ws.clone(),
            terms: self.terms.iter().map(|(g, a)| (g.clone(), -a)).collect(),
        }
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        let mut out = Self::zero(&self.ws);
        for (g, a) in &self.terms {
            out.add_term(g, a * s);
        }
        out
    }

    /// deg_W of a homogeneous class: Σ_j (Θ^(j) − 1/d_j).
    pub fn degree(&self) -> Result<BigRational, StateError> {
        let mut degrees: Vec<BigRational> = Vec::new();
        for (g, _) in &self.terms {
            let d = g.degree(&self.ws);
            if !degrees.contains(&d) {
                degrees.push(d);
            }
        }
        match degrees.len() {
            0 => Ok(BigRational::zero()),
            1 => Ok(degrees.pop().unwrap()),
            _ => Err(StateError::NotHomogeneous(degrees)),
        }
    }
}

/// η_W(1_α, 1_β) = 1 iff Θ_β = 1 − Θ_α componentwise.
pub fn fjrw_pairing(a: &FJRWClass, b: &FJRWClass) -> Result<BigRational, StateError> {
    if a.ws != b.ws {
        return Err(StateError::MismatchedWeights);
    }
    let mut s = BigRational::zero();
    for (g, x) in &a.terms {
        let dual = a.ws.narrow_involution(g);
        s += x * b.coeff(&dual);
    }
    Ok(s)
}

/// Gram matrix of η_W over the narrow set in ghost-box order.
pub fn fjrw_gram(ws: &WeightSystem) -> QMatrix {
    let narrows = ws.narrow_set();
    let n = narrows.len();
    let mut g = QMatrix::zeros(n, n);
    for (i, a) in narrows.iter().enumerate() {
        for (j, b) in narrows.iter().enumerate() {
            if ws.narrow_involution(a) == *b {
                g[(i, j)] = BigRational::one();
            }
        }
    }
    g
}
