//! Truncated multivariate formal series with per-variable exclusive orders.

use std::collections::BTreeMap;

use crate::coeff::{Coeff, FieldCoeff};
use crate::SeriesError;

/// A sparse truncated series: terms below the per-variable truncation
/// orders, zero coefficients never stored.
#[derive(Clone, PartialEq, Debug)]
pub struct Series<C> {
    vars: Vec<String>,
    orders: Vec<u32>,
    terms: BTreeMap<Vec<u32>, C>,
}

impl<C: Coeff> Series<C> {
    pub fn zero(vars: &[&str], orders: &[u32]) -> Self {
        assert_eq!(vars.len(), orders.len());
        Series {
            vars: vars.iter().map(|s| s.to_string()).collect(),
            orders: orders.to_vec(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &[&str], orders: &[u32], c: C) -> Self {
        let mut s = Self::zero(vars, orders);
        s.add_term(vec![0; vars.len()], c);
        s
    }

    pub fn one(vars: &[&str], orders: &[u32]) -> Self {
        Self::constant(vars, orders, C::one())
    }

    /// The series `x_idx` (zero if truncated away).
    pub fn var(vars: &[&str], orders: &[u32], idx: usize) -> Self {
        let mut s = Self::zero(vars, orders);
        let mut e = vec![0; vars.len()];
        e[idx] = 1;
        s.add_term(e, C::one());
        s
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn orders(&self) -> &[u32] {
        &self.orders
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    fn within(&self, exp: &[u32]) -> bool {
        exp.iter().zip(&self.orders).all(|(e, o)| e < o)
    }

    /// Add `c` to the coefficient at `exp`; silently drops exponents at or
    /// beyond truncation.
    pub fn add_term(&mut self, exp: Vec<u32>, c: C) {
        assert_eq!(exp.len(), self.vars.len());
        if c.is_zero() || !self.within(&exp) {
            return;
        }
        let entry = self.terms.entry(exp);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().add_ref(&c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn coeff(&self, exp: &[u32]) -> C {
        self.terms.get(exp).cloned().unwrap_or_else(C::zero)
    }

    pub fn constant_term(&self) -> C {
        self.coeff(&vec![0; self.vars.len()])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<u32>, &C)> {
        self.terms.iter()
    }

    /// Merge two variable frames: union by name, shared variables take the
    /// componentwise minimum order.
    fn merged_frame(&self, other: &Self) -> (Vec<String>, Vec<u32>) {
        let mut vars = self.vars.clone();
        let mut orders = self.orders.clone();
        for (v, o) in other.vars.iter().zip(&other.orders) {
            match vars.iter().position(|w| w == v) {
                Some(i) => orders[i] = orders[i].min(*o),
                None => {
                    vars.push(v.clone());
                    orders.push(*o);
                }
            }
        }
        (vars, orders)
    }

    fn reframe(&self, vars: &[String], orders: &[u32]) -> Self {
        let map: Vec<usize> = self
            .vars
            .iter()
            .map(|v| vars.iter().position(|w| w == v).unwrap())
            .collect();
        let mut out = Series {
            vars: vars.to_vec(),
            orders: orders.to_vec(),
            terms: BTreeMap::new(),
        };
        for (exp, c) in &self.terms {
            let mut e = vec![0u32; vars.len()];
            for (i, &x) in exp.iter().enumerate() {
                e[map[i]] = x;
            }
            out.add_term(e, c.clone());
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let (vars, orders) = self.merged_frame(other);
        let mut out = self.reframe(&vars, &orders);
        let o = other.reframe(&vars, &orders);
        for (exp, c) in o.terms {
            out.add_term(exp, c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        Series {
            vars: self.vars.clone(),
            orders: self.orders.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.neg_ref())).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (vars, orders) = self.merged_frame(other);
        let a = self.reframe(&vars, &orders);
        let b = other.reframe(&vars, &orders);
        let mut out = Series {
            vars: vars.clone(),
            orders: orders.clone(),
            terms: BTreeMap::new(),
        };
        for (ea, ca) in &a.terms {
            for (eb, cb) in &b.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                if out.within(&e) {
                    out.add_term(e, ca.mul_ref(cb));
                }
            }
        }
        out
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Series {
            vars: self.vars.clone(),
            orders: self.orders.clone(),
            terms: BTreeMap::new(),
        };
        for (e, a) in &self.terms {
            out.add_term(e.clone(), a.mul_ref(c));
        }
        out
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Series<D> {
        let mut out = Series {
            vars: self.vars.clone(),
            orders: self.orders.clone(),
            terms: BTreeMap::new(),
        };
        for (e, a) in &self.terms {
            out.add_term(e.clone(), f(a));
        }
        out
    }

    /// Formal derivative in variable `idx`.
    pub fn derivative(&self, idx: usize) -> Self
    where
        C: Coeff,
    {
        let mut out = Series {
            vars: self.vars.clone(),
            orders: self.orders.clone(),
            terms: BTreeMap::new(),
        };
        for (e, a) in &self.terms {
            if e[idx] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[idx] -= 1;
            let mut k = C::zero();
            for _ in 0..e[idx] {
                k = k.add_ref(&C::one());
            }
            out.add_term(d, a.mul_ref(&k));
        }
        out
    }

    /// Restrict a variable to zero (keeps the variable in the frame).
    pub fn set_var_zero(&self, idx: usize) -> Self {
        let mut out = Series {
            vars: self.vars.clone(),
            orders: self.orders.clone(),
            terms: BTreeMap::new(),
        };
        for (e, a) in &self.terms {
            if e[idx] == 0 {
                out.add_term(e.clone(), a.clone());
            }
        }
        out
    }

    /// Coefficient extraction in one variable: the series in the remaining
    /// frame multiplying `x_idx^k`.
    pub fn coeff_of(&self, idx: usize, k: u32) -> Self {
        let mut out = Series {
            vars: self.vars.clone(),
            orders: self.orders.clone(),
            terms: BTreeMap::new(),
        };
        for (e, a) in &self.terms {
            if e[idx] == k {
                let mut d = e.clone();
                d[idx] = 0;
                out.add_term(d, a.clone());
            }
        }
        out
    }

    /// Drop all terms of total degree exceeding `cap`.
    pub fn truncate_total_degree(&self, cap: u32) -> Self {
        let mut out = Series {
            vars: self.vars.clone(),
            orders: self.orders.clone(),
            terms: BTreeMap::new(),
        };
        for (e, a) in &self.terms {
            if e.iter().sum::<u32>() <= cap {
                out.add_term(e.clone(), a.clone());
            }
        }
        out
    }

    /// Multiplicative inverse to truncation; requires a unit constant term.
    pub fn invert(&self) -> Result<Self, SeriesError>
    where
        C: FieldCoeff,
    {
        let c0 = self.constant_term();
        let c0_inv = c0.inv().ok_or(SeriesError::NonUnit)?;
        // u := 1 − a/c0 has zero constant term, so its powers terminate
        // below the truncation orders.
        let scaled = self.scale(&c0_inv);
        let u = Series::one(
            &self.vars.iter().map(|s| s.as_str()).collect::<Vec<_>>(),
            &self.orders,
        )
        .sub(&scaled);
        let mut acc = Series::one(
            &self.vars.iter().map(|s| s.as_str()).collect::<Vec<_>>(),
            &self.orders,
        );
        let mut pow = u.clone();
        while !pow.is_zero() {
            acc = acc.add(&pow);
            pow = pow.mul(&u);
        }
        Ok(acc.scale(&c0_inv))
    }
}
