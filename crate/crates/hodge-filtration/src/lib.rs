//! Weight filtrations of nilpotent operators over exact rationals.
//!
//! A nilpotent endomorphism N with a chosen central weight m carries a
//! unique increasing filtration W_0 ⊆ … ⊆ W_{2m} with N(W_ℓ) ⊂ W_{ℓ−2}
//! such that N^ℓ induces isomorphisms Gr_{m+ℓ} → Gr_{m−ℓ}. We build it by
//! the standard kernel/image formula and re-verify both axioms on the
//! result. On top of that sit the sectorwise filtrations of the orbifold
//! state space (nilpotent = cup product with the hyperplane class p),
//! their direct sum U_ℓ, degree/spectrum bookkeeping for ghost monomials,
//! and the pairing constants C(α).

use fermat_weights::{GhostElement, Sector, WeightSystem};
use num_traits::{One, Signed, ToPrimitive, Zero};
use series_core::{rat, BigRational, QMatrix};
use state_spaces::{cr_basis, CRClass};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum FiltrationError {
    #[error("matrix must be square, got {0}x{1}")]
    NotSquare(usize, usize),
    #[error("operator is not nilpotent")]
    NotNilpotent,
    #[error("weight {weight} too small: operator needs central weight at least {needed}")]
    WeightTooSmall { weight: u32, needed: u32 },
    #[error("weight system is not Calabi-Yau")]
    NotCalabiYau,
}

/// A linear subspace of Q^n, stored as a reduced row-echelon basis so that
/// equal subspaces compare equal.
#[derive(Clone, PartialEq, Debug)]
pub struct Subspace {
    ambient: usize,
    rows: Vec<Vec<BigRational>>,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Subspace { ambient, rows: Vec::new() }
    }

    pub fn full(ambient: usize) -> Self {
        let id = QMatrix::identity(ambient);
        Subspace {
            ambient,
            rows: (0..ambient).map(|i| id.row(i).to_vec()).collect(),
        }
    }

    pub fn span(ambient: usize, vectors: Vec<Vec<BigRational>>) -> Self {
        let vectors: Vec<_> = vectors
            .into_iter()
            .inspect(|v| assert_eq!(v.len(), ambient))
            .filter(|v| v.iter().any(|x| !x.is_zero()))
            .collect();
        if vectors.is_empty() {
            return Self::zero(ambient);
        }
        let (r, pivots) = QMatrix::from_rows(vectors).rref();
        let rows = (0..pivots.len()).map(|i| r.row(i).to_vec()).collect();
        Subspace { ambient, rows }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn basis(&self) -> &[Vec<BigRational>] {
        &self.rows
    }

    pub fn contains(&self, v: &[BigRational]) -> bool {
        assert_eq!(v.len(), self.ambient);
        if v.iter().all(|x| x.is_zero()) {
            return true;
        }
        if self.rows.is_empty() {
            return false;
        }
        let mut stacked = self.rows.clone();
        stacked.push(v.to_vec());
        QMatrix::from_rows(stacked).rank() == self.dim()
    }

    pub fn contains_space(&self, other: &Self) -> bool {
        other.rows.iter().all(|v| self.contains(v))
    }

    pub fn sum(&self, other: &Self) -> Self {
        assert_eq!(self.ambient, other.ambient);
        let mut vs = self.rows.clone();
        vs.extend(other.rows.iter().cloned());
        Self::span(self.ambient, vs)
    }

    pub fn intersect(&self, other: &Self) -> Self {
        assert_eq!(self.ambient, other.ambient);
        let (a, b) = (self.dim(), other.dim());
        if a == 0 || b == 0 {
            return Self::zero(self.ambient);
        }
        // Solve x·A = y·B by finding the kernel of the n×(a+b) matrix
        // [Aᵀ | −Bᵀ]; each solution contributes the common vector x·A.
        let mut m = QMatrix::zeros(self.ambient, a + b);
        for (j, row) in self.rows.iter().enumerate() {
            for i in 0..self.ambient {
                m[(i, j)] = row[i].clone();
            }
        }
        for (j, row) in other.rows.iter().enumerate() {
            for i in 0..self.ambient {
                m[(i, a + j)] = -row[i].clone();
            }
        }
        let vectors = m
            .kernel()
            .into_iter()
            .map(|z| {
                let mut v = vec![BigRational::zero(); self.ambient];
                for (j, row) in self.rows.iter().enumerate() {
                    for i in 0..self.ambient {
                        v[i] += &z[j] * &row[i];
                    }
                }
                v
            })
            .collect();
        Self::span(self.ambient, vectors)
    }

    /// The image of this subspace under the linear map `m` (acting on
    /// column vectors).
    pub fn image_under(&self, m: &QMatrix) -> Self {
        assert_eq!(m.cols, self.ambient);
        let vectors = self.rows.iter().map(|v| m.matvec(v)).collect();
        Self::span(m.rows, vectors)
    }
}

/// A square rational nilpotent operator with a chosen central weight m.
#[derive(Clone, Debug)]
pub struct NilpotentWithWeight {
    matrix: QMatrix,
    weight: u32,
    dimension: usize,
    index: u32,
}

impl NilpotentWithWeight {
    /// Validates squareness and nilpotency (some power vanishes) and that
    /// the weight is large enough to center the filtration.
    pub fn new(matrix: QMatrix, weight: u32) -> Result<Self, FiltrationError> {
        if matrix.rows != matrix.cols {
            return Err(FiltrationError::NotSquare(matrix.rows, matrix.cols));
        }
        let n = matrix.rows;
        let mut pow = QMatrix::identity(n);
        let mut index = None;
        for j in 0..=n as u32 {
            if pow.is_zero() {
                index = Some(j.saturating_sub(1));
                break;
            }
            pow = matrix.matmul(&pow);
        }
        let index = match index {
            Some(j) => j,
            None => {
                if pow.is_zero() {
                    n as u32
                } else {
                    return Err(FiltrationError::NotNilpotent);
                }
            }
        };
        if index > weight {
            return Err(FiltrationError::WeightTooSmall { weight, needed: index });
        }
        Ok(NilpotentWithWeight { matrix, weight, dimension: n, index })
    }

    pub fn matrix(&self) -> &QMatrix {
        &self.matrix
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Largest j with N^j ≠ 0.
    pub fn nilpotency_index(&self) -> u32 {
        self.index
    }
}

/// The increasing flag W_0 ⊆ … ⊆ W_{2m} attached to a nilpotent operator
/// of central weight m.
#[derive(Clone, PartialEq, Debug)]
pub struct WeightFiltration {
    weight: u32,
    spaces: Vec<Subspace>,
}

impl WeightFiltration {
    pub fn from_spaces(weight: u32, spaces: Vec<Subspace>) -> Self {
        assert_eq!(spaces.len(), 2 * weight as usize + 1);
        WeightFiltration { weight, spaces }
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    /// W_ℓ, extended by zero below 0 and by the full space above 2m.
    pub fn space(&self, level: i64) -> &Subspace {
        let top = self.spaces.len() as i64 - 1;
        &self.spaces[level.clamp(0, top).max(0) as usize]
    }

    pub fn spaces(&self) -> &[Subspace] {
        &self.spaces
    }

    /// dim Gr_ℓ = dim W_ℓ − dim W_{ℓ−1} for ℓ = 0,…,2m.
    pub fn graded_dims(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.spaces.len());
        let mut prev = 0usize;
        for s in &self.spaces {
            out.push(s.dim() - prev);
            prev = s.dim();
        }
        out
    }

    /// Checks both defining axioms against the operator: the flag is
    /// increasing and exhaustive, N(W_ℓ) ⊂ W_{ℓ−2}, and N^ℓ induces an
    /// isomorphism Gr_{m+ℓ} → Gr_{m−ℓ} for every ℓ ≥ 0.
    pub fn satisfies_axioms(&self, n: &QMatrix) -> bool {
        let m = self.weight as i64;
        let dim = n.rows;
        if n.cols != dim || self.spaces.iter().any(|s| s.ambient() != dim) {
            return false;
        }
        if self.spaces.last().map(|s| s.dim()) != Some(dim) {
            return false;
        }
        for w in self.spaces.windows(2) {
            if !w[1].contains_space(&w[0]) {
                return false;
            }
        }
        let zero = Subspace::zero(dim);
        for level in 0..=2 * m {
            let image = self.space(level).image_under(n);
            let target = if level >= 2 { self.space(level - 2) } else { &zero };
            if !target.contains_space(&image) {
                return false;
            }
        }
        let mut pow = QMatrix::identity(dim);
        for l in 0..=m {
            let upper = self.space(m + l);
            let lower = self.space(m - l);
            let lower_prev = if m - l >= 1 { self.space(m - l - 1) } else { &zero };
            let upper_prev = if m + l >= 1 { self.space(m + l - 1) } else { &zero };
            if upper.dim() - upper_prev.dim() != lower.dim() - lower_prev.dim() {
                return false;
            }
            // Equal graded dimensions plus surjectivity of the induced map
            // give the isomorphism.
            if !upper.image_under(&pow).sum(lower_prev).contains_space(lower) {
                return false;
            }
            pow = n.matmul(&pow);
        }
        true
    }
}

/// The unique filtration with N(W_ℓ) ⊂ W_{ℓ−2} and N^ℓ: Gr_{m+ℓ} ≅ Gr_{m−ℓ},
/// built as W_{m+ℓ} = Σ_a ker(N^{a+1}) ∩ im(N^{a−ℓ}) and re-verified.
pub fn weight_filtration(d: &NilpotentWithWeight) -> Result<WeightFiltration, FiltrationError> {
    let n = d.dimension;
    let m = d.weight as i64;
    let k = d.index as i64;

    let mut pows = vec![QMatrix::identity(n)];
    for _ in 0..=k {
        pows.push(d.matrix.matmul(pows.last().unwrap()));
    }
    let kernels: Vec<Subspace> = (0..=k)
        .map(|a| Subspace::span(n, pows[(a + 1) as usize].kernel()))
        .collect();
    let images: Vec<Subspace> = (0..=k + 1)
        .map(|b| Subspace::full(n).image_under(&pows[b as usize]))
        .collect();

    let mut spaces = Vec::with_capacity(2 * m as usize + 1);
    for level in -m..=m {
        let mut w = Subspace::zero(n);
        for a in 0..=k {
            let b = a - level;
            let piece = if b <= 0 {
                kernels[a as usize].clone()
            } else if b > k {
                continue;
            } else {
                kernels[a as usize].intersect(&images[b as usize])
            };
            w = w.sum(&piece);
        }
        spaces.push(w);
    }
    let filtration = WeightFiltration { weight: d.weight, spaces };
    assert!(
        filtration.satisfies_axioms(&d.matrix),
        "constructed filtration failed its defining axioms"
    );
    Ok(filtration)
}

/// The central weight attached to a phase-numerator vector (a_1,…,a_n)
/// over exponents (d_1,…,d_n): m = n + #{i : a_i ≠ 0} − 2⌈Σ a_i/d_i⌉.
pub fn sector_weight(ws: &WeightSystem, nums: &[u64]) -> i64 {
    assert_eq!(nums.len(), ws.n());
    let moving = nums.iter().filter(|&&a| a != 0).count() as i64;
    let deg: BigRational = nums
        .iter()
        .zip(ws.exponents())
        .map(|(&a, &d)| rat(a as i64, d as i64))
        .fold(BigRational::zero(), |s, x| s + x);
    let ceil = deg.ceil().to_integer().to_i64().expect("small ceiling");
    ws.n() as i64 + moving - 2 * ceil
}

/// The weight filtration of one twisted sector: nilpotent = cup product
/// with p on the span of p^k·1_c, centered at the sector's weight.
#[derive(Clone, Debug)]
pub struct SectorFiltration {
    pub sector: Sector,
    pub weight: u32,
    pub filtration: WeightFiltration,
    /// Position of this sector's p^0 class in the global basis.
    pub basis_start: usize,
}

/// Sectorwise weight filtrations and their direct sum U_ℓ = ⊕ W^c_{2ℓ}
/// inside the full orbifold state space.
#[derive(Clone, Debug)]
pub struct AModelOpposite {
    pub basis: Vec<(Sector, u32)>,
    pub sectors: Vec<SectorFiltration>,
    /// U_ℓ for ℓ = 0,…,max weight; increasing and exhaustive.
    pub u: Vec<Subspace>,
}

pub fn a_model_opposite(ws: &WeightSystem) -> Result<AModelOpposite, FiltrationError> {
    if !ws.is_calabi_yau() {
        return Err(FiltrationError::NotCalabiYau);
    }
    let basis = cr_basis(ws).map_err(|_| FiltrationError::NotCalabiYau)?;
    let total = basis.len();

    let mut sectors = Vec::new();
    let mut start = 0usize;
    while start < total {
        let sector = basis[start].0.clone();
        let local = sector.dim() + 1;
        debug_assert!((0..local).all(|k| basis[start + k] == (sector.clone(), k as u32)));

        let mut nmat = QMatrix::zeros(local, local);
        for k in 0..local {
            let shifted = CRClass::from_term(ws, &sector, k as u32, BigRational::one()).mul_p();
            for k2 in 0..local {
                nmat[(k2, k)] = shifted.coeff(&sector, k2 as u32);
            }
        }
        let m = sector_weight(ws, &sector.nums);
        assert!(m >= 0, "sector weight is nonnegative for Calabi-Yau data");
        let filtration = weight_filtration(&NilpotentWithWeight::new(nmat, m as u32)?)?;
        sectors.push(SectorFiltration {
            sector,
            weight: m as u32,
            filtration,
            basis_start: start,
        });
        start += local;
    }

    let max_weight = sectors.iter().map(|s| s.weight).max().unwrap_or(0);
    let mut u = Vec::with_capacity(max_weight as usize + 1);
    for level in 0..=max_weight as i64 {
        let mut vectors = Vec::new();
        for s in &sectors {
            for v in s.filtration.space(2 * level).basis() {
                let mut g = vec![BigRational::zero(); total];
                g[s.basis_start..s.basis_start + v.len()].clone_from_slice(v);
                vectors.push(g);
            }
        }
        u.push(Subspace::span(total, vectors));
    }
    Ok(AModelOpposite { basis, sectors, u })
}

/// One ghost monomial with its degree and derived indices.
#[derive(Clone, PartialEq, Debug)]
pub struct SpectrumRow {
    pub monomial: GhostElement,
    /// deg ω_b = Σ (b^(i) + 1)/d_i.
    pub degree: BigRational,
    /// ⌈n − deg⌉.
    pub hodge_index: i64,
    /// Fractional part of −deg, in [0,1).
    pub phase: BigRational,
}

/// Degrees, Hodge indices, and phases of all ghost monomials.
#[derive(Clone, PartialEq, Debug)]
pub struct SpectrumTable {
    pub variables: usize,
    pub rows: Vec<SpectrumRow>,
}

pub fn spectrum_table(ws: &WeightSystem) -> SpectrumTable {
    let n = ws.n();
    let rows = ws
        .ghost_box()
        .into_iter()
        .map(|b| {
            let degree: BigRational = b
                .iter()
                .zip(ws.exponents())
                .map(|(&bi, &d)| rat(bi as i64 + 1, d as i64))
                .fold(BigRational::zero(), |s, x| s + x);
            let shifted = BigRational::from_integer(n.into()) - &degree;
            let hodge_index = shifted.ceil().to_integer().to_i64().expect("small index");
            let neg = -&degree;
            let phase = &neg - neg.floor();
            SpectrumRow { monomial: b, degree, hodge_index, phase }
        })
        .collect();
    SpectrumTable { variables: n, rows }
}

impl SpectrumTable {
    /// Whether the multiset of degrees is invariant under deg ↦ n − deg.
    pub fn degree_symmetry_holds(&self) -> bool {
        let n = BigRational::from_integer(self.variables.into());
        let mut degrees: Vec<BigRational> = self.rows.iter().map(|r| r.degree.clone()).collect();
        let mut reflected: Vec<BigRational> = degrees.iter().map(|d| &n - d).collect();
        degrees.sort();
        reflected.sort();
        degrees == reflected
    }
}

/// The normalization constant attached to a phase α ∈ [0,1): 1 at α = 0
/// and the symbolic value 2·sin(πα) otherwise.
#[derive(Clone, PartialEq, Debug)]
pub enum PairingConstant {
    One,
    TwoSinPi(BigRational),
}

pub fn pairing_constant(alpha: &BigRational) -> PairingConstant {
    assert!(
        !alpha.is_negative() && *alpha < BigRational::one(),
        "phase must lie in [0,1)"
    );
    if alpha.is_zero() {
        PairingConstant::One
    } else {
        PairingConstant::TwoSinPi(alpha.clone())
    }
}

impl PairingConstant {
    /// Exact rational value when 2·sin(πα) is rational (α ∈ {0, 1/6, 1/2, 5/6}).
    pub fn exact_value(&self) -> Option<BigRational> {
        match self {
            PairingConstant::One => Some(BigRational::one()),
            PairingConstant::TwoSinPi(a) => {
                if *a == rat(1, 6) || *a == rat(5, 6) {
                    Some(BigRational::one())
                } else if *a == rat(1, 2) {
                    Some(rat(2, 1))
                } else {
                    None
                }
            }
        }
    }

    pub fn numeric(&self) -> f64 {
        match self {
            PairingConstant::One => 1.0,
            PairingConstant::TwoSinPi(a) => {
                2.0 * (std::f64::consts::PI * a.to_f64().expect("finite phase")).sin()
            }
        }
    }
}

impl std::fmt::Display for PairingConstant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PairingConstant::One => write!(f, "1"),
            PairingConstant::TwoSinPi(a) => write!(f, "2*sin(pi*{a})"),
        }
    }
}
