//! Weight systems for Fermat polynomials W = x_1^{d_1} + … + x_n^{d_n}:
//! charges, Calabi-Yau test, Milnor number, and the index sets used by the
//! rest of the pipeline (ghost box, narrow set, twisted-sector box).

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::Zero;
use series_core::{rat, BigRational};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum WeightError {
    #[error("all exponents must be at least 2, got {0}")]
    ExponentTooSmall(u64),
    #[error("empty exponent list")]
    Empty,
    #[error("weight system ({0}) is not Calabi-Yau: sum of charges is not 1")]
    NotCalabiYau(String),
}

/// Exponents (d_1,…,d_n) with derived charges c_i = 1/d_i.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WeightSystem {
    d: Vec<u64>,
    calabi_yau: bool,
}

/// An element of the ghost box 𝔅: integer vector with 0 ≤ b^(j) ≤ d_j − 2.
pub type GhostElement = Vec<u64>;

/// A narrow group element, stored by the numerators a_j = d_j·Θ^(j)
/// with 1 ≤ a_j ≤ d_j − 1.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct Narrow {
    pub nums: Vec<u64>,
}

/// A Chen–Ruan twisted-sector label: c = (a_1/d_1,…,a_n/d_n) with
/// 0 ≤ a_i ≤ d_i − 1 and at least two zero entries.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct Sector {
    pub nums: Vec<u64>,
}

impl WeightSystem {
    pub fn new(exponents: &[u64]) -> Result<Self, WeightError> {
        if exponents.is_empty() {
            return Err(WeightError::Empty);
        }
        for &d in exponents {
            if d < 2 {
                return Err(WeightError::ExponentTooSmall(d));
            }
        }
        let charge_sum: Rational64 = exponents
            .iter()
            .map(|&d| Rational64::new(1, d as i64))
            .sum();
        Ok(WeightSystem {
            d: exponents.to_vec(),
            calabi_yau: charge_sum == Rational64::new(1, 1),
        })
    }

    /// Like `new` but fails unless Σ 1/d_i = 1.
    pub fn new_calabi_yau(exponents: &[u64]) -> Result<Self, WeightError> {
        let w = Self::new(exponents)?;
        if !w.calabi_yau {
            let desc = exponents
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(",");
            return Err(WeightError::NotCalabiYau(desc));
        }
        Ok(w)
    }

    pub fn n(&self) -> usize {
        self.d.len()
    }

    pub fn exponents(&self) -> &[u64] {
        &self.d
    }

    pub fn is_calabi_yau(&self) -> bool {
        self.calabi_yau
    }

    pub fn charge(&self, i: usize) -> BigRational {
        rat(1, self.d[i] as i64)
    }

    pub fn charges(&self) -> Vec<BigRational> {
        (0..self.n()).map(|i| self.charge(i)).collect()
    }

    /// Milnor number N = ∏(d_i − 1) = (1−c_1)⋯(1−c_n)/(c_1⋯c_n).
    pub fn milnor_number(&self) -> u128 {
        self.d.iter().map(|&d| (d - 1) as u128).product()
    }

    /// (D, w) with D = lcm(d_1,…,d_n) and w_i = D/d_i.
    pub fn derived_degrees(&self) -> (u64, Vec<u64>) {
        let dd = self.d.iter().fold(1u64, |a, &b| a.lcm(&b));
        let w = self.d.iter().map(|&di| dd / di).collect();
        (dd, w)
    }

    /// All b with 0 ≤ b^(j) ≤ d_j − 2, in lexicographic order.
    pub fn ghost_box(&self) -> Vec<GhostElement> {
        cartesian(&self.d.iter().map(|&d| d - 1).collect::<Vec<_>>())
    }

    /// All narrow elements, as images of the ghost box under the shift map,
    /// in the ghost box's lexicographic order.
    pub fn narrow_set(&self) -> Vec<Narrow> {
        self.ghost_box().iter().map(|b| self.shift(b)).collect()
    }

    /// Sh(b): Θ^(j) = (b^(j) + 1)/d_j.
    pub fn shift(&self, b: &GhostElement) -> Narrow {
        assert_eq!(b.len(), self.n());
        for (j, &bj) in b.iter().enumerate() {
            assert!(bj <= self.d[j] - 2, "ghost element out of range");
        }
        Narrow { nums: b.iter().map(|&bj| bj + 1).collect() }
    }

    /// Inverse of the shift map.
    pub fn unshift(&self, g: &Narrow) -> GhostElement {
        g.nums.iter().map(|&a| a - 1).collect()
    }

    /// The involution Θ ↦ 1 − Θ on narrow elements.
    pub fn narrow_involution(&self, g: &Narrow) -> Narrow {
        Narrow {
            nums: g
                .nums
                .iter()
                .zip(&self.d)
                .map(|(&a, &d)| d - a)
                .collect(),
        }
    }

    /// The exponential grading element j_W = Sh(0), Θ = (1/d_1,…,1/d_n).
    pub fn exponential_element(&self) -> Narrow {
        self.shift(&vec![0; self.n()])
    }

    /// Whether a phase-numerator vector (a_j over d_j) is narrow.
    pub fn is_narrow(&self, nums: &[u64]) -> bool {
        nums.iter()
            .zip(&self.d)
            .all(|(&a, &d)| a >= 1 && a <= d - 1)
    }

    /// Twisted-sector labels of the CY hypersurface: c = (a_i/d_i) with
    /// 0 ≤ a_i ≤ d_i − 1 and at least two zero entries, lexicographic.
    pub fn sectors(&self) -> Result<Vec<Sector>, WeightError> {
        if !self.calabi_yau {
            let desc = self
                .d
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(",");
            return Err(WeightError::NotCalabiYau(desc));
        }
        Ok(cartesian(&self.d)
            .into_iter()
            .filter(|a| a.iter().filter(|&&x| x == 0).count() >= 2)
            .map(|nums| Sector { nums })
            .collect())
    }
}

impl Narrow {
    pub fn phases(&self, w: &WeightSystem) -> Vec<BigRational> {
        self.nums
            .iter()
            .zip(w.exponents())
            .map(|(&a, &d)| rat(a as i64, d as i64))
            .collect()
    }

    /// deg_W 1_γ = Σ_j (Θ^(j) − 1/d_j).
    pub fn degree(&self, w: &WeightSystem) -> BigRational {
        self.nums
            .iter()
            .zip(w.exponents())
            .map(|(&a, &d)| rat(a as i64 - 1, d as i64))
            .fold(BigRational::zero(), |s, x| s + x)
    }
}

impl Sector {
    pub fn zeros(&self) -> usize {
        self.nums.iter().filter(|&&x| x == 0).count()
    }

    /// dim Y_c = #{zero entries} − 2.
    pub fn dim(&self) -> usize {
        self.zeros() - 2
    }

    /// |G_c| = ∏_{c_i ≠ 0} d_i.
    pub fn stabilizer_order(&self, w: &WeightSystem) -> u64 {
        self.nums
            .iter()
            .zip(w.exponents())
            .filter(|(&a, _)| a != 0)
            .map(|(_, &d)| d)
            .product()
    }

    /// Σ_i c_i (the age of the sector).
    pub fn age(&self, w: &WeightSystem) -> BigRational {
        self.nums
            .iter()
            .zip(w.exponents())
            .map(|(&a, &d)| rat(a as i64, d as i64))
            .fold(BigRational::zero(), |s, x| s + x)
    }

    /// The dual sector with c_i + c'_i ≡ 0 mod 1.
    pub fn dual(&self, w: &WeightSystem) -> Sector {
        Sector {
            nums: self
                .nums
                .iter()
                .zip(w.exponents())
                .map(|(&a, &d)| if a == 0 { 0 } else { d - a })
                .collect(),
        }
    }
}

/// All integer vectors v with 0 ≤ v_i < limits_i, lexicographic order.
pub fn cartesian(limits: &[u64]) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for &l in limits {
        let mut next = Vec::with_capacity(out.len() * l as usize);
        for v in &out {
            for x in 0..l {
                let mut w = v.clone();
                w.push(x);
                next.push(w);
            }
        }
        out = next;
    }
    out
}
