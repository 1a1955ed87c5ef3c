//! Hypergeometric I-function with values in Chen-Ruan cohomology.
//!
//! Assembles the truncated double series Σ I_{d,ν}(z) Q^d t^ν/ν! and its
//! (z∂_t)^β derivative family, componentwise over the sector basis. The
//! multiplicative prefactor exp(p·log Q/z) is kept symbolic throughout:
//! every series here is the log-free part, which is all that the mirror
//! map, the Birkhoff calibration, and the pairing comparisons consume.

mod coefficient;

use std::collections::BTreeMap;

use birkhoff::{factorize, LoopMatrix};
use fermat_weights::{Sector, WeightSystem};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use series_core::{BigRational, QMatrix, Series, ZLaurent};
use state_spaces::{cr_gram, StateError};

pub use coefficient::{i_coefficient, GWICoefficient};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GWError {
    #[error("weight system is not Calabi-Yau")]
    NotCalabiYau,
    #[error("index has {got} entries, weight system has {want}")]
    VariableCountMismatch { got: usize, want: usize },
    #[error("inverted Gamma factor with zero constant part at d={d}, nu={nu:?}, axis {axis}")]
    IllFormedCoefficient { d: u64, nu: Vec<u64>, axis: usize },
    #[error("z^0 unit part is not invertible: constant term is not 1")]
    NonUnitLeading,
    #[error("z^0 unit part has a Q^{0} term, not a multiple of lcm(d_i)")]
    UnexpectedDegree(u32),
    #[error("mirror image of beta={beta:?} keeps z^{z_exp} at series exponent {var_exp:?}")]
    NegativeZPowers { beta: Vec<u64>, var_exp: Vec<u32>, z_exp: i64 },
    #[error("loop matrix of I-derivatives is z-dependent or singular at t=Q=0")]
    DegenerateLeadingMatrix,
    #[error(transparent)]
    State(#[from] StateError),
    #[error("birkhoff step failed: {0}")]
    Birkhoff(String),
}

impl From<birkhoff::BirkhoffError> for GWError {
    fn from(e: birkhoff::BirkhoffError) -> Self {
        GWError::Birkhoff(e.to_string())
    }
}

/// The truncated series Ĩ^β(t,Q,z) = Σ_{d,ν} I_{d,ν+β}(z) z^{|β|} Q^d t^ν/ν!,
/// stored componentwise over the Chen-Ruan sector basis. Terms with
/// 0 ≤ ν_i ≤ t_order and 0 ≤ d ≤ q_order are kept.
#[derive(Clone, Debug, PartialEq)]
pub struct GWIFunction {
    ws: WeightSystem,
    beta: Vec<u64>,
    t_order: u32,
    q_order: u32,
    basis: Vec<(Sector, u32)>,
    comp: Vec<Series<ZLaurent<BigRational>>>,
}

fn frame(ws: &WeightSystem, t_order: u32, q_order: u32) -> (Vec<String>, Vec<u32>) {
    let mut vars: Vec<String> = (1..=ws.n()).map(|i| format!("t{i}")).collect();
    vars.push("Q".to_string());
    let mut orders = vec![t_order + 1; ws.n()];
    orders.push(q_order + 1);
    (vars, orders)
}

fn for_each_nu(t_order: u32, n: usize, f: &mut impl FnMut(&[u64])) {
    let mut nu = vec![0u64; n];
    loop {
        f(&nu);
        let mut i = 0;
        loop {
            if i == n {
                return;
            }
            if nu[i] < t_order as u64 {
                nu[i] += 1;
                break;
            }
            nu[i] = 0;
            i += 1;
        }
    }
}

fn factorial(m: u64) -> BigInt {
    (1..=m).map(BigInt::from).product::<BigInt>().max(BigInt::one())
}

/// Assembles Ĩ^β to the given truncation orders (inclusive in every
/// variable). The β-derivative is taken termwise via the index shift
/// ν ↦ ν + β and the factor z^{|β|}.
pub fn i_function(
    ws: &WeightSystem,
    beta: &[u64],
    t_order: u32,
    q_order: u32,
) -> Result<GWIFunction, GWError> {
    if beta.len() != ws.n() {
        return Err(GWError::VariableCountMismatch { got: beta.len(), want: ws.n() });
    }
    let basis = state_spaces::cr_basis(ws)?;
    let index: BTreeMap<(Sector, u32), usize> =
        basis.iter().cloned().enumerate().map(|(i, b)| (b, i)).collect();
    let (vars, orders) = frame(ws, t_order, q_order);
    let var_refs: Vec<&str> = vars.iter().map(|s| s.as_str()).collect();
    let mut comp = vec![Series::zero(&var_refs, &orders); basis.len()];
    let abs_beta: i64 = beta.iter().sum::<u64>() as i64;
    let mut failure: Option<GWError> = None;
    for d in 0..=q_order as u64 {
        for_each_nu(t_order, ws.n(), &mut |nu| {
            if failure.is_some() {
                return;
            }
            let shifted: Vec<u64> = nu.iter().zip(beta).map(|(a, b)| a + b).collect();
            let co = match i_coefficient(ws, d, &shifted) {
                Ok(co) => co,
                Err(e) => {
                    failure = Some(e);
                    return;
                }
            };
            let weight: BigRational = BigRational::new(
                BigInt::one(),
                nu.iter().map(|&m| factorial(m)).product(),
            );
            let mut exp: Vec<u32> = nu.iter().map(|&m| m as u32).collect();
            exp.push(d as u32);
            for (zexp, class) in co.terms(ws) {
                for ((c, k), a) in class.iter() {
                    comp[index[&(c.clone(), *k)]].add_term(
                        exp.clone(),
                        ZLaurent::monomial(a * &weight, zexp + abs_beta),
                    );
                }
            }
        });
    }
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(GWIFunction { ws: ws.clone(), beta: beta.to_vec(), t_order, q_order, basis, comp })
}

impl GWIFunction {
    pub fn ws(&self) -> &WeightSystem {
        &self.ws
    }

    pub fn beta(&self) -> &[u64] {
        &self.beta
    }

    pub fn t_order(&self) -> u32 {
        self.t_order
    }

    pub fn q_order(&self) -> u32 {
        self.q_order
    }

    /// The sector basis indexing the components.
    pub fn basis(&self) -> &[(Sector, u32)] {
        &self.basis
    }

    pub fn component(&self, i: usize) -> &Series<ZLaurent<BigRational>> {
        &self.comp[i]
    }

    pub fn components(&self) -> &[Series<ZLaurent<BigRational>>] {
        &self.comp
    }

    /// The z^k coefficient of component `i` as a plain series.
    pub fn z_coefficient(&self, i: usize, k: i64) -> Series<BigRational> {
        self.comp[i].map_coeffs(|zl| zl.coeff(k))
    }

    /// The full z^0 part, checked to be supported on the untwisted unit
    /// and independent of t: this is f_0(Q)·1 for β = 0.
    pub fn unit_z0_series(&self) -> Result<Series<BigRational>, GWError> {
        let unit = (Sector { nums: vec![0; self.ws.n()] }, 0u32);
        let mut out = None;
        for (i, b) in self.basis.iter().enumerate() {
            let part = self.z_coefficient(i, 0);
            if *b == unit {
                for (exp, _) in part.iter() {
                    if exp[..self.ws.n()].iter().any(|&e| e != 0) {
                        return Err(GWError::DegenerateLeadingMatrix);
                    }
                }
                out = Some(part);
            } else if !part.is_zero() {
                return Err(GWError::DegenerateLeadingMatrix);
            }
        }
        Ok(out.expect("unit sector is always in the basis"))
    }

    /// f_0 in the effective-degree normalization of the closed product
    /// formula: the z^0 unit part lives only on Q-powers divisible by
    /// D = lcm(d_i), and entry k here is the Q^{kD} coefficient.
    pub fn f0_effective(&self) -> Result<Vec<BigRational>, GWError> {
        let f0 = self.unit_z0_series()?;
        let (big_d, _) = self.ws.derived_degrees();
        let big_d = big_d as u32;
        let mut out = vec![BigRational::zero(); (self.q_order / big_d) as usize + 1];
        for (exp, c) in f0.iter() {
            let d = exp[self.ws.n()];
            if d % big_d != 0 {
                return Err(GWError::UnexpectedDegree(d));
            }
            out[(d / big_d) as usize] = c.clone();
        }
        Ok(out)
    }
}

/// f_0(Q) coefficients from the closed product formula
/// (dD)!/((dw_1)!⋯(dw_n)!), where D = lcm(d_i) and w_i = D/d_i.
pub fn f0_closed(ws: &WeightSystem, q_order: u32) -> Vec<BigRational> {
    let (big_d, w) = ws.derived_degrees();
    (0..=q_order as u64)
        .map(|d| {
            let num = factorial(d * big_d);
            let den: BigInt = w.iter().map(|&wi| factorial(d * wi)).product();
            BigRational::new(num, den)
        })
        .collect()
}

/// The mirror map τ(t,Q) = f_1(t,Q)/f_0(Q), componentwise over the sector
/// basis of the β = 0 function. The p·log Q summand of the full mirror map
/// belongs to the symbolic prefactor and is not included here.
pub fn mirror_map_gw(i0: &GWIFunction) -> Result<Vec<Series<BigRational>>, GWError> {
    assert!(i0.beta.iter().all(|&b| b == 0), "mirror map reads the underived function");
    let f0 = i0.unit_z0_series()?;
    if f0.constant_term() != BigRational::one() {
        return Err(GWError::NonUnitLeading);
    }
    let f0_inv = f0.invert().map_err(|_| GWError::NonUnitLeading)?;
    Ok((0..i0.basis.len())
        .map(|i| i0.z_coefficient(i, -1).mul(&f0_inv))
        .collect())
}

/// Lifts a scalar series into the z-Laurent coefficient ring.
fn lift(s: &Series<BigRational>) -> Series<ZLaurent<BigRational>> {
    s.map_coeffs(|c| ZLaurent::monomial(c.clone(), 0))
}

/// One β-index per sector basis element p^k 1_c, chosen so that
/// Ĩ^β(0,0,0) = d_1^{-k} p^k 1_c: the first entry is k·d_1 + c_1·d_1, the
/// others are c_i·d_i.
pub fn spanning_betas(ws: &WeightSystem) -> Result<Vec<Vec<u64>>, GWError> {
    let basis = state_spaces::cr_basis(ws)?;
    let d1 = ws.exponents()[0];
    Ok(basis
        .iter()
        .map(|(c, k)| {
            let mut beta = c.nums.clone();
            beta[0] += *k as u64 * d1;
            beta
        })
        .collect())
}

/// The normalized loop matrix of I-derivatives together with the data
/// needed to undo its basis normalization.
pub struct MirData {
    pub betas: Vec<Vec<u64>>,
    pub i_functions: Vec<GWIFunction>,
    pub f0_inverse: Series<BigRational>,
    /// Ĩ^β(0,0,0) coordinates columnwise: the z- and deformation-free
    /// leading matrix C such that the loop matrix is C^{-1}·(Ĩ^β/f_0).
    pub leading: QMatrix,
    pub loop_matrix: LoopMatrix,
}

/// Builds the square matrix with columns Ĩ^β/f_0 over the spanning β-set
/// and normalizes its deformation-order-0 part to the identity.
pub fn loop_matrix_of_derivatives(
    ws: &WeightSystem,
    t_order: u32,
    q_order: u32,
) -> Result<MirData, GWError> {
    let betas = spanning_betas(ws)?;
    let n = betas.len();
    let mut i_functions = Vec::with_capacity(n);
    for beta in &betas {
        i_functions.push(i_function(ws, beta, t_order, q_order)?);
    }
    let f0 = i_functions[0].unit_z0_series()?;
    if f0.constant_term() != BigRational::one() {
        return Err(GWError::NonUnitLeading);
    }
    let f0_inverse = f0.invert().map_err(|_| GWError::NonUnitLeading)?;
    let f0_lift = lift(&f0_inverse);
    let (vars, orders) = frame(ws, t_order, q_order);
    let var_refs: Vec<&str> = vars.iter().map(|s| s.as_str()).collect();
    let mut raw = LoopMatrix::zero(&var_refs, &orders, n, n);
    let mut leading = QMatrix::zeros(n, n);
    let origin = vec![0u32; ws.n() + 1];
    for (col, f) in i_functions.iter().enumerate() {
        for row in 0..n {
            let entry = f.component(row).mul(&f0_lift);
            let head = entry.coeff(&origin);
            if head != ZLaurent::monomial(head.coeff(0), 0) {
                return Err(GWError::DegenerateLeadingMatrix);
            }
            leading[(row, col)] = head.coeff(0);
            raw.set(row, col, entry);
        }
    }
    let leading_inv = leading.inverse().ok_or(GWError::DegenerateLeadingMatrix)?;
    let loop_matrix = constant_matrix(&leading_inv, &var_refs, &orders).mul(&raw);
    Ok(MirData { betas, i_functions, f0_inverse, leading, loop_matrix })
}

fn constant_matrix(m: &QMatrix, vars: &[&str], orders: &[u32]) -> LoopMatrix {
    let mut out = LoopMatrix::zero(vars, orders, m.rows, m.cols);
    for i in 0..m.rows {
        for j in 0..m.cols {
            out.set(i, j, Series::constant(vars, orders, ZLaurent::monomial(m[(i, j)].clone(), 0)));
        }
    }
    out
}

/// The Birkhoff outputs in the original sector basis: the calibration
/// S(τ,1,−z) and the inverse plus-factor encoding the operators P_i.
pub struct GWCalibration {
    pub s_minus_z: LoopMatrix,
    pub p_table: LoopMatrix,
    pub data: MirData,
}

pub fn calibration(ws: &WeightSystem, t_order: u32, q_order: u32) -> Result<GWCalibration, GWError> {
    let data = loop_matrix_of_derivatives(ws, t_order, q_order)?;
    let (a_minus, a_plus) = factorize(&data.loop_matrix)?;
    let vars: Vec<&str> = data.loop_matrix.vars().iter().map(|s| s.as_str()).collect();
    let orders = data.loop_matrix.orders().to_vec();
    let c = constant_matrix(&data.leading, &vars, &orders);
    let c_inv = constant_matrix(
        &data.leading.inverse().ok_or(GWError::DegenerateLeadingMatrix)?,
        &vars,
        &orders,
    );
    // A = C·A'_−·A'_+ with A'_0 = 1, so A_− = C·A'_−·C^{-1} keeps the
    // 1 + O(z^{-1}) shape and S(τ,1,−z) = A_−^{-1}
    let s_minus_z = c.mul(&a_minus.inverse_unipotent()?).mul(&c_inv);
    let p_table = a_plus.inverse_unipotent()?;
    Ok(GWCalibration { s_minus_z, p_table, data })
}

/// Applies the D-module mirror map to ω_β = x^β dx/Q: the image is
/// S(τ,1,−z)·Ĩ^β/f_0 componentwise, and the defining positivity
/// property (no surviving negative z-powers) is asserted, not assumed.
pub fn mir_gw(
    cal: &GWCalibration,
    i_beta: &GWIFunction,
) -> Result<Vec<Series<ZLaurent<BigRational>>>, GWError> {
    let n = cal.s_minus_z.rows();
    let f0_lift = lift(&cal.data.f0_inverse);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = Series::zero(
            &i_beta.comp[0].vars().iter().map(|s| s.as_str()).collect::<Vec<_>>(),
            i_beta.comp[0].orders(),
        );
        for j in 0..n {
            acc = acc.add(&cal.s_minus_z.get(i, j).mul(&i_beta.comp[j]).mul(&f0_lift));
        }
        for (exp, zl) in acc.iter() {
            if let Some(min) = zl.min_exp() {
                if min < 0 {
                    return Err(GWError::NegativeZPowers {
                        beta: i_beta.beta.clone(),
                        var_exp: exp.clone(),
                        z_exp: min,
                    });
                }
            }
        }
        out.push(acc);
    }
    Ok(out)
}

/// The pairing K̃(ω_β', ω_β'') = −(Mir ω_β', (Mir ω_β'')^*) where * sends
/// z to −z. The calibration preserves the Poincaré pairing and the
/// symbolic prefactor is self-adjoint, so both cancel and the pairing is
/// computed directly from the bare series: −(Ĩ^β'(z), Ĩ^β''(−z)).
pub fn ktilde_pairing(
    a: &GWIFunction,
    b: &GWIFunction,
) -> Result<Series<ZLaurent<BigRational>>, GWError> {
    assert_eq!(a.ws, b.ws);
    let gram = cr_gram(&a.ws)?;
    let vars: Vec<&str> = a.comp[0].vars().iter().map(|s| s.as_str()).collect();
    let mut acc = Series::zero(&vars, a.comp[0].orders());
    for i in 0..a.basis.len() {
        if a.comp[i].is_zero() {
            continue;
        }
        for j in 0..b.basis.len() {
            if gram[(i, j)].is_zero() || b.comp[j].is_zero() {
                continue;
            }
            let flipped = b.comp[j].map_coeffs(|zl| zl.z_negate());
            let g = ZLaurent::monomial(-&gram[(i, j)], 0);
            acc = acc.add(&a.comp[i].mul(&flipped).scale(&g));
        }
    }
    Ok(acc)
}

type ZClassTerms = BTreeMap<i64, state_spaces::CRClass>;

fn zclass(ws: &WeightSystem, co: &GWICoefficient, z_shift: i64) -> ZClassTerms {
    let mut out = ZClassTerms::new();
    for (zexp, class) in co.terms(ws) {
        out.insert(zexp + z_shift, class);
    }
    out
}

/// Multiplies a z-Laurent class by (a + p·z^{-1}).
fn apply_linear(ws: &WeightSystem, v: &ZClassTerms, a: &BigRational) -> ZClassTerms {
    let mut out = ZClassTerms::new();
    let mut push = |zexp: i64, class: state_spaces::CRClass| {
        if class.is_zero() {
            return;
        }
        let entry = out.entry(zexp).or_insert_with(|| state_spaces::CRClass::zero(ws));
        *entry = entry.add(&class);
        if entry.is_zero() {
            out.remove(&zexp);
        }
    };
    for (zexp, class) in v {
        push(*zexp, class.scale(a));
        push(zexp - 1, class.mul_p());
    }
    out
}

/// The degree-raising identity: shifting (d, ν) by (1, (1,…,1)) agrees
/// with multiplication by (1 + d + p·z^{-1}) after matching z-powers.
pub fn shift_identity_full(
    ws: &WeightSystem,
    d: u64,
    nu: &[u64],
    beta: &[u64],
) -> Result<bool, GWError> {
    let n = ws.n();
    let shifted: Vec<u64> = nu.iter().zip(beta).map(|(a, b)| a + b).collect();
    let bumped: Vec<u64> = shifted.iter().map(|a| a + 1).collect();
    let abs_beta: i64 = beta.iter().sum::<u64>() as i64;
    let lhs = zclass(ws, &i_coefficient(ws, d + 1, &bumped)?, abs_beta + n as i64);
    let rhs = apply_linear(
        ws,
        &zclass(ws, &i_coefficient(ws, d, &shifted)?, abs_beta + 1),
        &BigRational::from_integer((1 + d).into()),
    );
    Ok(lhs == rhs)
}

/// The coordinatewise identity: shifting ν_i by d_i agrees with
/// d_i^{-1}(d − ν_i − β^{(i)} + p·z^{-1}) times a z^{1−d_i} shift.
pub fn shift_identity_axis(
    ws: &WeightSystem,
    d: u64,
    nu: &[u64],
    beta: &[u64],
    axis: usize,
) -> Result<bool, GWError> {
    let di = ws.exponents()[axis];
    let shifted: Vec<u64> = nu.iter().zip(beta).map(|(a, b)| a + b).collect();
    let mut bumped = shifted.clone();
    bumped[axis] += di;
    let lhs = zclass(ws, &i_coefficient(ws, d, &bumped)?, 0);
    let a = BigRational::from_integer(
        BigInt::from(d as i64 - nu[axis] as i64 - beta[axis] as i64),
    );
    let scale = BigRational::new(BigInt::one(), BigInt::from(di));
    let rhs: ZClassTerms = apply_linear(
        ws,
        &zclass(ws, &i_coefficient(ws, d, &shifted)?, 1 - di as i64),
        &a,
    )
    .into_iter()
    .map(|(zexp, class)| (zexp, class.scale(&scale)))
    .collect();
    Ok(lhs == rhs)
}
