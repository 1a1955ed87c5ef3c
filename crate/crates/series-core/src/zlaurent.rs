//! Finite Laurent objects in the distinguished variable z.

use crate::coeff::Coeff;

/// A finitely supported Laurent polynomial in z over a coefficient ring.
///
/// Invariant: `coeffs` is empty iff the object is zero, and otherwise its
/// first and last entries are nonzero.
#[derive(Clone, PartialEq, Debug)]
pub struct ZLaurent<C> {
    min: i64,
    coeffs: Vec<C>,
}

impl<C: Coeff> ZLaurent<C> {
    pub fn zero() -> Self {
        ZLaurent { min: 0, coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::monomial(C::one(), 0)
    }

    /// c · z^exp
    pub fn monomial(c: C, exp: i64) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            ZLaurent { min: exp, coeffs: vec![c] }
        }
    }

    pub fn from_range(min: i64, coeffs: Vec<C>) -> Self {
        let mut z = ZLaurent { min, coeffs };
        z.normalize();
        z
    }

    fn normalize(&mut self) {
        while self.coeffs.last().map_or(false, |c| c.is_zero()) {
            self.coeffs.pop();
        }
        let lead_zeros = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead_zeros > 0 {
            self.coeffs.drain(..lead_zeros);
            self.min += lead_zeros as i64;
        }
        if self.coeffs.is_empty() {
            self.min = 0;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn min_exp(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.min)
        }
    }

    pub fn max_exp(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.min + self.coeffs.len() as i64 - 1)
        }
    }

    pub fn coeff(&self, exp: i64) -> C {
        if self.is_zero() || exp < self.min || exp > self.max_exp().unwrap() {
            C::zero()
        } else {
            self.coeffs[(exp - self.min) as usize].clone()
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &C)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (self.min + i as i64, c))
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let min = self.min.min(other.min);
        let max = self.max_exp().unwrap().max(other.max_exp().unwrap());
        let mut coeffs = Vec::with_capacity((max - min + 1) as usize);
        for e in min..=max {
            coeffs.push(self.coeff(e).add_ref(&other.coeff(e)));
        }
        Self::from_range(min, coeffs)
    }

    pub fn neg(&self) -> Self {
        ZLaurent { min: self.min, coeffs: self.coeffs.iter().map(|c| c.neg_ref()).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let min = self.min + other.min;
        let len = self.coeffs.len() + other.coeffs.len() - 1;
        let mut coeffs = vec![C::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                coeffs[i + j] = coeffs[i + j].add_ref(&a.mul_ref(b));
            }
        }
        Self::from_range(min, coeffs)
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut z = ZLaurent {
            min: self.min,
            coeffs: self.coeffs.iter().map(|a| a.mul_ref(c)).collect(),
        };
        z.normalize();
        z
    }

    /// Multiply by z^k.
    pub fn shift(&self, k: i64) -> Self {
        if self.is_zero() {
            Self::zero()
        } else {
            ZLaurent { min: self.min + k, coeffs: self.coeffs.clone() }
        }
    }

    /// The involution z ↦ −z: coefficient at exponent k picks up (−1)^k.
    pub fn z_negate(&self) -> Self {
        ZLaurent {
            min: self.min,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    if (self.min + i as i64).rem_euclid(2) == 1 {
                        c.neg_ref()
                    } else {
                        c.clone()
                    }
                })
                .collect(),
        }
    }

    /// Split into (strictly negative z-powers, nonnegative z-powers).
    pub fn split_at_zero(&self) -> (Self, Self) {
        let mut neg = Self::zero();
        let mut pos = Self::zero();
        for (e, c) in self.iter() {
            let m = Self::monomial(c.clone(), e);
            if e < 0 {
                neg = neg.add(&m);
            } else {
                pos = pos.add(&m);
            }
        }
        (neg, pos)
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> ZLaurent<D> {
        ZLaurent::from_range(self.min, self.coeffs.iter().map(|c| f(c)).collect())
    }
}

impl<C: Coeff> Coeff for ZLaurent<C> {
    fn zero() -> Self {
        ZLaurent::zero()
    }
    fn one() -> Self {
        ZLaurent::one()
    }
    fn is_zero(&self) -> bool {
        ZLaurent::is_zero(self)
    }
    fn add_ref(&self, other: &Self) -> Self {
        self.add(other)
    }
    fn neg_ref(&self) -> Self {
        self.neg()
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self.mul(other)
    }
}
