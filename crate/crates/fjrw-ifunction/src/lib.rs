//! The Landau-Ginzburg side I-function on the narrow state space.
//!
//! Terms are indexed by ghost multiplicities ν_b; each carries a box
//! element, a single z-monomial whose numerator runs over the floors of
//! the derived negative indices ν_j and whose denominator is ∏ ν_b!·z^{ν_b}.
//! Integer ν_j kills the term, so every survivor lands on a narrow group
//! element. The series is truncated by total ghost weight Σ ν_b, which is
//! also the shape of the ε-weighted variant's cap.

use std::collections::BTreeMap;

use birkhoff::{factorize, LoopMatrix};
use fermat_weights::{Narrow, WeightSystem};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use series_core::{rat, BigRational, QMatrix, Series, ZLaurent};
use state_spaces::fjrw_gram;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum LGError {
    #[error("weight system is not Calabi-Yau")]
    NotCalabiYau,
    #[error("ambient vector has {got} entries, weight system has {want}")]
    VariableCountMismatch { got: usize, want: usize },
    #[error("vector {0:?} is not a ghost-box element")]
    NotAGhost(Vec<u64>),
    #[error("birkhoff step failed: {0}")]
    Birkhoff(String),
    #[error("pairing keeps nonconstant z-powers at t=0")]
    ZLeakage,
}

impl From<birkhoff::BirkhoffError> for LGError {
    fn from(e: birkhoff::BirkhoffError) -> Self {
        LGError::Birkhoff(e.to_string())
    }
}

/// A lattice index: ghost multiplicities ν_b plus the derived negative
/// rationals ν_j = −(e^{(j)} + 1 + Σ_b ν_b b^{(j)})/d_j.
#[derive(Clone, Debug, PartialEq)]
pub struct LGIndex {
    pub e: Vec<u64>,
    pub nu_b: Vec<u64>,
    pub nu_j: Vec<BigRational>,
}

pub fn lg_index(ws: &WeightSystem, e: &[u64], nu_b: &[u64]) -> Result<LGIndex, LGError> {
    if e.len() != ws.n() {
        return Err(LGError::VariableCountMismatch { got: e.len(), want: ws.n() });
    }
    let ghosts = ws.ghost_box();
    assert_eq!(nu_b.len(), ghosts.len(), "one multiplicity per ghost");
    let nu_j = (0..ws.n())
        .map(|j| {
            let num = e[j] as i64
                + 1
                + nu_b
                    .iter()
                    .zip(&ghosts)
                    .map(|(&m, b)| m as i64 * b[j] as i64)
                    .sum::<i64>();
            -rat(num, ws.exponents()[j] as i64)
        })
        .collect();
    Ok(LGIndex { e: e.to_vec(), nu_b: nu_b.to_vec(), nu_j })
}

impl LGIndex {
    /// Numerators of the group element phases ⟨−ν_j⟩ over d_j.
    pub fn gamma_nums(&self, ws: &WeightSystem) -> Vec<u64> {
        self.nu_j
            .iter()
            .zip(ws.exponents())
            .map(|(nu, &d)| {
                let num = (-nu * rat(d as i64, 1)).to_integer();
                (num % BigInt::from(d)).to_u64().unwrap()
            })
            .collect()
    }
}

fn factorial(m: u64) -> BigInt {
    (1..=m).map(BigInt::from).product::<BigInt>().max(BigInt::one())
}

/// The box element of an index: a single z-monomial
/// ∏_j ∏_{k=1}^{⌊−ν_j⌋}(ν_j+k)z over ∏_b ∏_{k=1}^{ν_b} kz; zero exactly
/// when some −ν_j is a positive integer.
pub fn box_element(idx: &LGIndex) -> ZLaurent<BigRational> {
    let mut coeff = BigRational::one();
    let mut z_exp: i64 = 0;
    for nu in &idx.nu_j {
        debug_assert!(nu.is_negative());
        // ⌊−ν_j⌋ for −ν_j > 0: to_integer truncates toward zero, which
        // is the floor for positive rationals
        let floor = (-nu).to_integer().to_i64().unwrap();
        for k in 1..=floor {
            coeff *= nu + rat(k, 1);
        }
        z_exp += floor;
    }
    if coeff.is_zero() {
        return ZLaurent::zero();
    }
    let mut den = BigInt::one();
    for &m in &idx.nu_b {
        den *= factorial(m);
        z_exp -= m as i64;
    }
    ZLaurent::monomial(coeff / BigRational::from_integer(den), z_exp)
}

/// The assembled I-function for ambient vector e, componentwise over an
/// active subset of ghost directions.
#[derive(Clone, Debug, PartialEq)]
pub struct LGIFunction {
    ws: WeightSystem,
    e: Vec<u64>,
    order: u32,
    ghosts: Vec<Vec<u64>>,
    active: Vec<usize>,
    narrows: Vec<Narrow>,
    comp: Vec<Series<ZLaurent<BigRational>>>,
}

/// Variable name for the ghost direction b.
pub fn ghost_var_name(b: &[u64]) -> String {
    let digits: Vec<String> = b.iter().map(|x| x.to_string()).collect();
    format!("t{}", digits.join("_"))
}

/// Assembles I^e over all ghost directions to total weight Σν_b ≤ order.
pub fn i_lg(ws: &WeightSystem, e: &[u64], order: u32) -> Result<LGIFunction, LGError> {
    let all: Vec<usize> = (0..ws.ghost_box().len()).collect();
    i_lg_restricted(ws, e, order, &all)
}

/// The ε-weighted variant: the cap Σν_b ≤ ⌊1/ε⌋ intersected with the
/// order cap; ε = 0 means no extra cap.
pub fn i_lg_weighted(
    ws: &WeightSystem,
    e: &[u64],
    order: u32,
    epsilon: &BigRational,
) -> Result<LGIFunction, LGError> {
    let cap = if epsilon.is_zero() {
        order
    } else {
        let inv = epsilon.recip();
        let floor: u32 = inv.to_integer().to_string().parse().unwrap_or(0);
        order.min(floor)
    };
    i_lg(ws, e, cap)
}

/// Assembly restricted to a sub-plane: only the listed ghost directions
/// are active (the others' variables are set to zero), which commutes
/// with every identity here because it is a coefficientwise restriction.
pub fn i_lg_restricted(
    ws: &WeightSystem,
    e: &[u64],
    order: u32,
    active: &[usize],
) -> Result<LGIFunction, LGError> {
    if !ws.is_calabi_yau() {
        return Err(LGError::NotCalabiYau);
    }
    if e.len() != ws.n() {
        return Err(LGError::VariableCountMismatch { got: e.len(), want: ws.n() });
    }
    let ghosts = ws.ghost_box();
    let narrows: Vec<Narrow> = ghosts.iter().map(|b| ws.shift(b)).collect();
    let var_names: Vec<String> = active.iter().map(|&i| ghost_var_name(&ghosts[i])).collect();
    let var_refs: Vec<&str> = var_names.iter().map(|s| s.as_str()).collect();
    let orders = vec![order + 1; active.len()];
    let mut comp = vec![Series::zero(&var_refs, &orders); narrows.len()];
    let narrow_index: BTreeMap<Vec<u64>, usize> = narrows
        .iter()
        .enumerate()
        .map(|(i, g)| (g.nums.clone(), i))
        .collect();
    let mut nu_active = vec![0u64; active.len()];
    enumerate_weights(order as u64, 0, &mut nu_active, &mut |nu_active| {
        let mut nu_b = vec![0u64; ghosts.len()];
        for (slot, &gi) in active.iter().enumerate() {
            nu_b[gi] = nu_active[slot];
        }
        let idx = lg_index(ws, e, &nu_b).expect("validated above");
        let z = box_element(&idx);
        if z.is_zero() {
            return;
        }
        let gamma = idx.gamma_nums(ws);
        // a vanishing phase would mean a broad target, but the box
        // element is zero there; narrowness is automatic
        assert!(ws.is_narrow(&gamma), "nonzero box element on a broad sector");
        let slot = narrow_index[&gamma];
        let exp: Vec<u32> = nu_active.iter().map(|&m| m as u32).collect();
        comp[slot].add_term(exp, z);
    });
    Ok(LGIFunction {
        ws: ws.clone(),
        e: e.to_vec(),
        order,
        ghosts,
        active: active.to_vec(),
        narrows,
        comp,
    })
}

fn enumerate_weights(budget: u64, pos: usize, nu: &mut Vec<u64>, f: &mut impl FnMut(&[u64])) {
    if pos == nu.len() {
        f(nu);
        return;
    }
    for m in 0..=budget {
        nu[pos] = m;
        enumerate_weights(budget - m, pos + 1, nu, f);
    }
    nu[pos] = 0;
}

impl LGIFunction {
    pub fn ws(&self) -> &WeightSystem {
        &self.ws
    }

    pub fn e(&self) -> &[u64] {
        &self.e
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn ghosts(&self) -> &[Vec<u64>] {
        &self.ghosts
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    /// Narrow targets, aligned with `ghosts` through the shifting map.
    pub fn narrows(&self) -> &[Narrow] {
        &self.narrows
    }

    pub fn component(&self, i: usize) -> &Series<ZLaurent<BigRational>> {
        &self.comp[i]
    }

    pub fn components(&self) -> &[Series<ZLaurent<BigRational>>] {
        &self.comp
    }

    /// Adds a raw term to one component; diagnostic support for residual
    /// detectors.
    pub fn add_component_term(&mut self, slot: usize, exp: Vec<u32>, z: ZLaurent<BigRational>) {
        self.comp[slot].add_term(exp, z);
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.comp.iter_mut() {
            *c = c.neg();
        }
        out
    }

    /// Value at t = 0 as (narrow slot, z-monomial) pairs.
    pub fn constant_term(&self) -> Vec<(usize, ZLaurent<BigRational>)> {
        let zero = vec![0u32; self.active.len()];
        (0..self.comp.len())
            .filter_map(|i| {
                let z = self.comp[i].coeff(&zero);
                (!z.is_zero()).then_some((i, z))
            })
            .collect()
    }
}

/// The image of [x^e dx] under the D-module mirror map: −I^e.
pub fn mir_lg(ws: &WeightSystem, e: &[u64], order: u32) -> Result<LGIFunction, LGError> {
    Ok(i_lg(ws, e, order)?.neg())
}

/// deg_W of the ghost variable t_b: 1 − Σ_j b^{(j)}/d_j.
pub fn ghost_degree(ws: &WeightSystem, b: &[u64]) -> BigRational {
    b.iter()
        .zip(ws.exponents())
        .fold(BigRational::one(), |acc, (&x, &d)| acc - rat(x as i64, d as i64))
}

/// Relevant (positive degree), marginal (zero degree), and irrelevant
/// (negative degree) ghost directions, as indices into the ghost box.
pub fn ghost_split(ws: &WeightSystem) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let mut rel = Vec::new();
    let mut mar = Vec::new();
    let mut irr = Vec::new();
    for (i, b) in ws.ghost_box().iter().enumerate() {
        let deg = ghost_degree(ws, b);
        if deg.is_positive() {
            rel.push(i);
        } else if deg.is_zero() {
            mar.push(i);
        } else {
            irr.push(i);
        }
    }
    (rel, mar, irr)
}

/// Residual of the shift relation z·∂_{t_b} I^e − I^{e+b}, truncated to
/// the total ghost weight both inputs determine reliably.
pub fn gkz_shift_residual(
    ie: &LGIFunction,
    ie_plus_b: &LGIFunction,
    active_slot: usize,
) -> Vec<Series<ZLaurent<BigRational>>> {
    assert_eq!(ie.active, ie_plus_b.active);
    let cap = ie.order.min(ie_plus_b.order + 1) - 1;
    ie.comp
        .iter()
        .zip(&ie_plus_b.comp)
        .map(|(a, b)| {
            let da = a
                .derivative(active_slot)
                .map_coeffs(|z| z.shift(1));
            da.sub(b).truncate_total_degree(cap)
        })
        .collect()
}

/// Residual of the Euler-type relation
/// z(e^{(i)}+1)·I^e + Σ_b b^{(i)} t_b·I^{e+b} + d_i·I^{e+d_i·e_i} = 0.
/// `shifted[k]` must be I^{e+b} for the k-th active ghost b and
/// `axis_shifted` must be I^{e + d_i e_i}.
pub fn gkz_euler_residual(
    ie: &LGIFunction,
    shifted: &[LGIFunction],
    axis_shifted: &LGIFunction,
    axis: usize,
) -> Vec<Series<ZLaurent<BigRational>>> {
    let d_i = ie.ws.exponents()[axis];
    let scalar = |c: i64| ZLaurent::monomial(rat(c, 1), 0);
    let cap = ie.order;
    (0..ie.comp.len())
        .map(|slot| {
            let mut acc = ie.comp[slot]
                .map_coeffs(|z| z.shift(1))
                .scale(&scalar(ie.e[axis] as i64 + 1));
            for (k, &gi) in ie.active.iter().enumerate() {
                let b = &ie.ghosts[gi];
                if b[axis] == 0 {
                    continue;
                }
                let var = Series::var(
                    &ie.comp[slot].vars().iter().map(|s| s.as_str()).collect::<Vec<_>>(),
                    ie.comp[slot].orders(),
                    k,
                );
                acc = acc.add(
                    &var.mul(&shifted[k].comp[slot]).scale(&scalar(b[axis] as i64)),
                );
            }
            acc = acc.add(&axis_shifted.comp[slot].scale(&scalar(d_i as i64)));
            acc.truncate_total_degree(cap)
        })
        .collect()
}

/// The Birkhoff data of the column family {I^b}_{b ∈ 𝔅}: the lower
/// factor 𝔏, the plus-parts Υ^b, and the mirror map τ = 𝔏_1(1).
pub struct LGMirror {
    /// Active ghost order shared by rows (via the shifting map) and
    /// columns of the loop matrix.
    pub ghosts: Vec<Vec<u64>>,
    pub l_minus: LoopMatrix,
    /// Columns of the plus factor; column j is Υ^{b_j}, so column 0 of
    /// the full set (b = 0) is the Υ of the e = 0 function.
    pub upsilon: LoopMatrix,
    /// τ components over the narrow basis in ghost-shift order.
    pub tau: Vec<Series<BigRational>>,
}

/// Factorizes the matrix whose column b is I^b in the narrow basis
/// (rows in ghost-shift order, so the matrix is the identity at t = 0).
pub fn mirror_map_lg(
    ws: &WeightSystem,
    order: u32,
    active: &[usize],
) -> Result<LGMirror, LGError> {
    let ghosts = ws.ghost_box();
    let n = ghosts.len();
    let mut columns = Vec::with_capacity(n);
    for b in &ghosts {
        columns.push(i_lg_restricted(ws, b, order, active)?);
    }
    let vars_owned: Vec<String> = columns[0].comp[0].vars().to_vec();
    let vars: Vec<&str> = vars_owned.iter().map(|s| s.as_str()).collect();
    let orders = columns[0].comp[0].orders().to_vec();
    // row r holds the 1_{Sh(b_r)} component, making the t = 0 part the
    // identity matrix
    let mut a = LoopMatrix::zero(&vars, &orders, n, n);
    for (col, f) in columns.iter().enumerate() {
        for row in 0..n {
            a.set(row, col, f.comp[row].clone());
        }
    }
    let (l_minus, upsilon) = factorize(&a)?;
    let truncate =
        |m: &LoopMatrix| m.map_entries(|s| s.truncate_total_degree(order));
    let l_minus = truncate(&l_minus);
    let upsilon = truncate(&upsilon);
    let unit_col = ghosts
        .iter()
        .position(|b| b.iter().all(|&x| x == 0))
        .expect("zero vector is always a ghost");
    let tau = (0..n)
        .map(|row| l_minus.get(row, unit_col).map_coeffs(|z| z.coeff(-1)))
        .collect();
    Ok(LGMirror { ghosts, l_minus, upsilon, tau })
}

/// Closed form of f_0^W(σ): 1 + Σ_m σ^{mD}/(mD)! ∏_j ∏_{k=1}^{mD/d_j}
/// (k − (mD+1)/d_j); entry m of the result is the σ^{mD} coefficient.
pub fn f0_w_closed(ws: &WeightSystem, m_order: u32) -> Vec<BigRational> {
    let (big_d, _) = ws.derived_degrees();
    (0..=m_order as u64)
        .map(|m| {
            let md = m * big_d;
            let mut c = BigRational::new(BigInt::one(), factorial(md));
            for &d in ws.exponents() {
                for k in 1..=(md / d) {
                    c *= rat(k as i64, 1) - rat(md as i64 + 1, d as i64);
                }
            }
            c
        })
        .collect()
}

/// Gram matrix of η_W(Mir x^b, (Mir x^c)^*), entrywise as t-series; the
/// z-constant parts at t = 0 must reproduce the involution-pairs matrix.
pub fn pairing_series(
    a: &LGIFunction,
    b: &LGIFunction,
) -> Series<ZLaurent<BigRational>> {
    assert_eq!(a.ws, b.ws);
    let gram: QMatrix = fjrw_gram(&a.ws);
    let vars: Vec<&str> = a.comp[0].vars().iter().map(|s| s.as_str()).collect();
    let mut acc = Series::zero(&vars, a.comp[0].orders());
    for i in 0..a.comp.len() {
        if a.comp[i].is_zero() {
            continue;
        }
        for j in 0..b.comp.len() {
            if gram[(i, j)].is_zero() || b.comp[j].is_zero() {
                continue;
            }
            let flipped = b.comp[j].map_coeffs(|z| z.z_negate());
            acc = acc.add(
                &a.comp[i].mul(&flipped).scale(&ZLaurent::monomial(gram[(i, j)].clone(), 0)),
            );
        }
    }
    acc
}

/// Gram of the mirror pairing at t = 0 over the ghost box; the defining
/// positivity statement says this is the involution-pairs matrix.
pub fn pairing_check(ws: &WeightSystem, order: u32) -> Result<QMatrix, LGError> {
    let ghosts = ws.ghost_box();
    let n = ghosts.len();
    let funcs: Vec<LGIFunction> = ghosts
        .iter()
        .map(|b| mir_lg(ws, b, order))
        .collect::<Result<_, _>>()?;
    let mut out = QMatrix::zeros(n, n);
    let zero_exp = vec![0u32; funcs[0].active.len()];
    for i in 0..n {
        for j in 0..n {
            let s = pairing_series(&funcs[i], &funcs[j]);
            let z = s.coeff(&zero_exp);
            if !z.is_zero() && z != ZLaurent::monomial(z.coeff(0), 0) {
                return Err(LGError::ZLeakage);
            }
            out[(i, j)] = z.coeff(0);
        }
    }
    Ok(out)
}
