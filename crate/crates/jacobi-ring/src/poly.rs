//! Sparse multivariate polynomials over exact rationals, with a small
//! parser for command-line input like `3*x1^2*x2 - 1/2*x3`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use series_core::BigRational;

/// A polynomial in variables x1..xn with rational coefficients, stored as
/// exponent vector -> coefficient with zero coefficients pruned.
#[derive(Clone, PartialEq, Debug)]
pub struct Poly {
    n: usize,
    terms: BTreeMap<Vec<u32>, BigRational>,
}

impl Poly {
    pub fn zero(n: usize) -> Self {
        Poly { n, terms: BTreeMap::new() }
    }

    pub fn one(n: usize) -> Self {
        Self::monomial(vec![0; n], BigRational::one())
    }

    pub fn constant(n: usize, c: BigRational) -> Self {
        Self::monomial(vec![0; n], c)
    }

    pub fn monomial(exp: Vec<u32>, c: BigRational) -> Self {
        let mut p = Poly { n: exp.len(), terms: BTreeMap::new() };
        p.add_term(exp, c);
        p
    }

    /// The variable x_{i+1}.
    pub fn var(n: usize, i: usize) -> Self {
        assert!(i < n);
        let mut exp = vec![0; n];
        exp[i] = 1;
        Self::monomial(exp, BigRational::one())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, exp: Vec<u32>, c: BigRational) {
        assert_eq!(exp.len(), self.n);
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(exp.clone()).or_insert_with(BigRational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&exp);
        }
    }

    pub fn coeff(&self, exp: &[u32]) -> BigRational {
        self.terms.get(exp).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<u32>, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Poly {
            n: self.n,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        let mut out = Self::zero(self.n);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * s);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = Self::zero(self.n);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let exp: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(exp, c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one(self.n);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn derivative(&self, i: usize) -> Self {
        assert!(i < self.n);
        let mut out = Self::zero(self.n);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut exp = e.clone();
            exp[i] -= 1;
            out.add_term(exp, c * BigRational::from_integer(e[i].into()));
        }
        out
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (idx, (e, c)) in self.terms.iter().enumerate() {
            if idx > 0 {
                write!(f, " + ")?;
            }
            let vars: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0)
                .map(|(i, &p)| {
                    if p == 1 {
                        format!("x{}", i + 1)
                    } else {
                        format!("x{}^{}", i + 1, p)
                    }
                })
                .collect();
            if vars.is_empty() {
                write!(f, "{}", c)?;
            } else if c.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{}*{}", c, vars.join("*"))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, PartialEq)]
enum Token {
    Int(u64),
    Var(usize),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
}

fn tokenize(s: &str) -> Result<Vec<Token>, String> {
    let mut out = Vec::new();
    let mut it = s.chars().peekable();
    while let Some(&ch) = it.peek() {
        match ch {
            ' ' | '\t' => {
                it.next();
            }
            '+' => {
                it.next();
                out.push(Token::Plus);
            }
            '-' => {
                it.next();
                out.push(Token::Minus);
            }
            '*' => {
                it.next();
                out.push(Token::Star);
            }
            '^' => {
                it.next();
                out.push(Token::Caret);
            }
            '/' => {
                it.next();
                out.push(Token::Slash);
            }
            '0'..='9' => {
                let mut v: u64 = 0;
                while let Some(d) = it.peek().and_then(|c| c.to_digit(10)) {
                    v = v
                        .checked_mul(10)
                        .and_then(|v| v.checked_add(d as u64))
                        .ok_or("integer literal too large")?;
                    it.next();
                }
                out.push(Token::Int(v));
            }
            'x' => {
                it.next();
                if it.peek() == Some(&'_') {
                    it.next();
                }
                let mut v: usize = 0;
                let mut seen = false;
                while let Some(d) = it.peek().and_then(|c| c.to_digit(10)) {
                    v = v * 10 + d as usize;
                    seen = true;
                    it.next();
                }
                if !seen || v == 0 {
                    return Err("expected variable index after 'x'".into());
                }
                out.push(Token::Var(v - 1));
            }
            _ => return Err(format!("unexpected character '{ch}'")),
        }
    }
    Ok(out)
}

/// Parses expressions like `x1^2*x2 + 3/2*x3 - 1` into a polynomial in
/// n variables. Variables are `x1`..`xn` (or `x_1`..`x_n`); `*` between
/// factors is optional.
pub fn parse_poly(s: &str, n: usize) -> Result<Poly, String> {
    let tokens = tokenize(s)?;
    let mut out = Poly::zero(n);
    let mut pos = 0;

    while pos < tokens.len() {
        let mut sign = BigRational::one();
        loop {
            match tokens.get(pos) {
                Some(Token::Plus) => pos += 1,
                Some(Token::Minus) => {
                    sign = -sign;
                    pos += 1;
                }
                _ => break,
            }
        }
        if pos >= tokens.len() {
            return Err("trailing sign without a term".into());
        }
        let mut coeff = sign;
        let mut exp = vec![0u32; n];
        let mut any = false;
        loop {
            match tokens.get(pos) {
                Some(Token::Int(v)) => {
                    pos += 1;
                    let mut r = BigRational::from_integer((*v).into());
                    if tokens.get(pos) == Some(&Token::Slash) {
                        pos += 1;
                        match tokens.get(pos) {
                            Some(Token::Int(d)) if *d != 0 => {
                                pos += 1;
                                r /= BigRational::from_integer((*d).into());
                            }
                            _ => return Err("expected nonzero integer denominator".into()),
                        }
                    }
                    coeff *= r;
                    any = true;
                }
                Some(Token::Var(i)) => {
                    if *i >= n {
                        return Err(format!("variable x{} out of range (n = {n})", i + 1));
                    }
                    let i = *i;
                    pos += 1;
                    let mut power = 1u32;
                    if tokens.get(pos) == Some(&Token::Caret) {
                        pos += 1;
                        match tokens.get(pos) {
                            Some(Token::Int(v)) if *v <= u32::MAX as u64 => {
                                power = *v as u32;
                                pos += 1;
                            }
                            _ => return Err("expected integer exponent after '^'".into()),
                        }
                    }
                    exp[i] += power;
                    any = true;
                }
                Some(Token::Star) => {
                    pos += 1;
                }
                _ => break,
            }
        }
        if !any {
            return Err("expected a term".into());
        }
        out.add_term(exp, coeff);
        if pos < tokens.len()
            && !matches!(tokens[pos], Token::Plus | Token::Minus)
        {
            return Err("expected '+' or '-' between terms".into());
        }
    }
    Ok(out)
}
