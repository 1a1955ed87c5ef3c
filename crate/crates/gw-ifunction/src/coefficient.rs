//! Single hypergeometric coefficients I_{d,ν}(z).
//!
//! Each coefficient is a Gamma-ratio product expanded exactly in the
//! nilpotent class u = p·z^{-1}: the ratio Γ(1+d+u)/Γ(1+u) contributes the
//! factors (m+u) for 1 ≤ m ≤ d, and for each coordinate the ratio
//! Γ(1−c_i+u/d_i)/Γ(1−c_i+k_i+u/d_i) contributes k_i linear factors, taken
//! inverted when k_i > 0 (legitimate because u is nilpotent and the
//! constant parts 1−c_i+j never vanish for j ≥ 0).

use fermat_weights::{Sector, WeightSystem};
use num_traits::{One, Zero};
use series_core::{rat, BigRational};
use state_spaces::CRClass;

use crate::GWError;

/// One coefficient I_{d,ν}(z): a z-monomial z^{d−|ν|−|k|} times a
/// polynomial in u = p·z^{-1} supported on the sector with phases c_i
/// determined by (ν_i − d)/d_i = −k_i + c_i, 0 ≤ c_i < 1.
#[derive(Clone, Debug, PartialEq)]
pub struct GWICoefficient {
    d: u64,
    nu: Vec<u64>,
    k: Vec<i64>,
    c_nums: Vec<u64>,
    z_base: i64,
    u_coeffs: Vec<BigRational>,
}

impl GWICoefficient {
    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn nu(&self) -> &[u64] {
        &self.nu
    }

    /// The integer parts k_i of (d − ν_i)/d_i, rounded up.
    pub fn k(&self) -> &[i64] {
        &self.k
    }

    /// The target sector, as phase numerators over the exponents d_i.
    pub fn sector(&self) -> Sector {
        Sector { nums: self.c_nums.clone() }
    }

    /// Exponent of the overall z-monomial: d − |ν| − |k|.
    pub fn z_base(&self) -> i64 {
        self.z_base
    }

    /// Coefficient of u^j in the expanded Gamma-ratio product.
    pub fn u_coeffs(&self) -> &[BigRational] {
        &self.u_coeffs
    }

    /// The coefficient as a sector-supported z-Laurent class: pairs of a
    /// z-exponent and the class living there. Classes that the state
    /// space annihilates (empty sectors, p beyond the sector dimension)
    /// are dropped here, matching the nilpotency of p.
    pub fn terms(&self, ws: &WeightSystem) -> Vec<(i64, CRClass)> {
        let sector = self.sector();
        let mut out = Vec::new();
        for (j, a) in self.u_coeffs.iter().enumerate() {
            let class = CRClass::from_term(ws, &sector, j as u32, a.clone());
            if !class.is_zero() {
                out.push((self.z_base - j as i64, class));
            }
        }
        out
    }
}

/// Multiplies a u-truncated polynomial by (a + b·u) in place.
fn mul_linear(poly: &mut [BigRational], a: &BigRational, b: &BigRational) {
    for j in (0..poly.len()).rev() {
        let mut c = &poly[j] * a;
        if j > 0 {
            c += &poly[j - 1] * b;
        }
        poly[j] = c;
    }
}

/// Divides a u-truncated polynomial by (a + b·u) in place; requires a ≠ 0.
fn div_linear(poly: &mut [BigRational], a: &BigRational, b: &BigRational) {
    let ainv = a.recip();
    let ratio = -b * &ainv;
    for j in 0..poly.len() {
        let mut c = &poly[j] * &ainv;
        if j > 0 {
            c += &poly[j - 1] * &ratio;
        }
        poly[j] = c;
    }
}

/// Computes I_{d,ν}(z) for a Calabi-Yau weight system, expanding every
/// Gamma ratio into linear factors in the nilpotent u = p·z^{-1}.
pub fn i_coefficient(ws: &WeightSystem, d: u64, nu: &[u64]) -> Result<GWICoefficient, GWError> {
    if !ws.is_calabi_yau() {
        return Err(GWError::NotCalabiYau);
    }
    if nu.len() != ws.n() {
        return Err(GWError::VariableCountMismatch { got: nu.len(), want: ws.n() });
    }
    let n = ws.n();
    // p is nilpotent: p^j = 0 on every sector once j exceeds n − 2
    let mut u_coeffs = vec![BigRational::zero(); n.max(2) - 1];
    u_coeffs[0] = BigRational::one();
    for m in 1..=d {
        mul_linear(&mut u_coeffs, &BigRational::from_integer(m.into()), &BigRational::one());
    }
    let mut k = Vec::with_capacity(n);
    let mut c_nums = Vec::with_capacity(n);
    for (i, (&nui, &di)) in nu.iter().zip(ws.exponents()).enumerate() {
        let di_i = di as i64;
        let num = d as i64 - nui as i64;
        let c_num = (-num).rem_euclid(di_i);
        let ki = (num + c_num) / di_i;
        k.push(ki);
        c_nums.push(c_num as u64);
        let slope = rat(1, di_i);
        if ki > 0 {
            // inverted factors (1 − c_i + j + u/d_i), j = 0 .. k_i − 1
            for j in 0..ki {
                let a = rat(di_i * (1 + j) - c_num, di_i);
                if a.is_zero() {
                    return Err(GWError::IllFormedCoefficient { d, nu: nu.to_vec(), axis: i });
                }
                div_linear(&mut u_coeffs, &a, &slope);
            }
        } else {
            // direct factors (1 − c_i − j + u/d_i), j = 1 .. −k_i
            for j in 1..=(-ki) {
                let a = rat(di_i * (1 - j) - c_num, di_i);
                mul_linear(&mut u_coeffs, &a, &slope);
            }
        }
    }
    let z_base = d as i64 - nu.iter().sum::<u64>() as i64 - k.iter().sum::<i64>();
    Ok(GWICoefficient { d, nu: nu.to_vec(), k, c_nums, z_base, u_coeffs })
}
