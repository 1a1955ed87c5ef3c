//! Birkhoff factorization of loop matrices, purely formally: entries are
//! truncated series in deformation variables whose coefficients are finite
//! z-Laurent polynomials, and the deformation-order-0 part is the identity.
//!
//! The factorization A = A_−·A_+ (A_− = 1 + strictly negative z-powers,
//! A_+ with nonnegative z-powers only) is computed by induction on total
//! deformation order: at each order the unknown parts appear as a sum
//! split uniquely by z-sign, so the factorization exists, is unique, and
//! is exact to the truncation.

use series_core::{BigRational, QMatrix, Series, ZLaurent};

pub type LoopEntry = Series<ZLaurent<BigRational>>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BirkhoffError {
    #[error("loop matrix must be square for factorization, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("entry at ({0}, {1}) uses variables outside the matrix frame")]
    FrameMismatch(usize, usize),
    #[error("deformation-order-0 part is not the identity")]
    NonIdentityLeadingTerm,
}

/// A matrix of truncated deformation series with z-Laurent coefficients,
/// all entries sharing one variable frame.
#[derive(Clone, PartialEq, Debug)]
pub struct LoopMatrix {
    rows: usize,
    cols: usize,
    vars: Vec<String>,
    orders: Vec<u32>,
    data: Vec<LoopEntry>,
}

impl LoopMatrix {
    pub fn zero(vars: &[&str], orders: &[u32], rows: usize, cols: usize) -> Self {
        LoopMatrix {
            rows,
            cols,
            vars: vars.iter().map(|s| s.to_string()).collect(),
            orders: orders.to_vec(),
            data: vec![Series::zero(vars, orders); rows * cols],
        }
    }

    pub fn identity(vars: &[&str], orders: &[u32], n: usize) -> Self {
        let mut m = Self::zero(vars, orders, n, n);
        for i in 0..n {
            m.set(i, i, Series::one(vars, orders));
        }
        m
    }

    pub fn from_entries(
        vars: &[&str],
        orders: &[u32],
        entries: Vec<Vec<LoopEntry>>,
    ) -> Result<Self, BirkhoffError> {
        let rows = entries.len();
        let cols = entries.first().map_or(0, |r| r.len());
        let mut m = Self::zero(vars, orders, rows, cols);
        for (i, row) in entries.into_iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged entry rows");
            for (j, e) in row.into_iter().enumerate() {
                let framed = Series::zero(vars, orders).add(&e);
                if framed.vars() != m.vars.as_slice() {
                    return Err(BirkhoffError::FrameMismatch(i, j));
                }
                m.set(i, j, framed);
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn orders(&self) -> &[u32] {
        &self.orders
    }

    pub fn get(&self, i: usize, j: usize) -> &LoopEntry {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, e: LoopEntry) {
        self.data[i * self.cols + j] = e;
    }

    /// Largest total deformation degree representable in the frame.
    pub fn max_total_degree(&self) -> u32 {
        self.orders.iter().map(|&o| o.saturating_sub(1)).sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_entries(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_entries(other, |a, b| a.sub(b))
    }

    fn zip_entries(&self, other: &Self, f: impl Fn(&LoopEntry, &LoopEntry) -> LoopEntry) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a = f(a, b);
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a = a.neg();
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let vars: Vec<&str> = self.vars.iter().map(|s| s.as_str()).collect();
        let mut out = Self::zero(&vars, &self.orders, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let s = out.get(i, j).add(&a.mul(b));
                        out.set(i, j, s);
                    }
                }
            }
        }
        out
    }

    pub fn map_entries(&self, f: impl Fn(&LoopEntry) -> LoopEntry) -> Self {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a = f(a);
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let vars: Vec<&str> = self.vars.iter().map(|s| s.as_str()).collect();
        let mut out = Self::zero(&vars, &self.orders, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    /// The involution z ↦ −z applied entrywise.
    pub fn z_negate(&self) -> Self {
        self.map_entries(|e| e.map_coeffs(|c| c.z_negate()))
    }

    /// Part of total deformation degree exactly `m`.
    pub fn total_degree_part(&self, m: u32) -> Self {
        self.map_entries(|e| {
            let mut out = Series::zero(
                &self.vars.iter().map(|s| s.as_str()).collect::<Vec<_>>(),
                &self.orders,
            );
            for (exp, c) in e.iter() {
                if exp.iter().sum::<u32>() == m {
                    out.add_term(exp.clone(), c.clone());
                }
            }
            out
        })
    }

    /// Split every coefficient by z-sign into (strictly negative part,
    /// nonnegative part).
    pub fn split_z(&self) -> (Self, Self) {
        let neg = self.map_entries(|e| e.map_coeffs(|c| c.split_at_zero().0));
        let pos = self.map_entries(|e| e.map_coeffs(|c| c.split_at_zero().1));
        (neg, pos)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|e| e.is_zero())
    }

    fn is_identity_at_order_zero(&self) -> bool {
        if self.rows != self.cols {
            return false;
        }
        let zero_part = self.total_degree_part(0);
        let vars: Vec<&str> = self.vars.iter().map(|s| s.as_str()).collect();
        zero_part == Self::identity(&vars, &self.orders, self.rows)
    }

    /// Inverse of a matrix whose deformation-order-0 part is the identity,
    /// by the terminating geometric series in (self − 1).
    pub fn inverse_unipotent(&self) -> Result<Self, BirkhoffError> {
        if self.rows != self.cols {
            return Err(BirkhoffError::NotSquare { rows: self.rows, cols: self.cols });
        }
        if !self.is_identity_at_order_zero() {
            return Err(BirkhoffError::NonIdentityLeadingTerm);
        }
        let vars: Vec<&str> = self.vars.iter().map(|s| s.as_str()).collect();
        let id = Self::identity(&vars, &self.orders, self.rows);
        let n = self.sub(&id);
        let mut acc = id.clone();
        let mut pow = n.neg();
        for _ in 0..self.max_total_degree() {
            if pow.is_zero() {
                break;
            }
            acc = acc.add(&pow);
            pow = pow.mul(&n.neg());
        }
        Ok(acc)
    }
}

/// Factorizes A = A_−·A_+ with A_− = 1 + strictly negative z-powers and
/// A_+ carrying only nonnegative z-powers, by induction on total
/// deformation order. The result is unique and exact to the truncation.
pub fn factorize(a: &LoopMatrix) -> Result<(LoopMatrix, LoopMatrix), BirkhoffError> {
    if a.rows() != a.cols() {
        return Err(BirkhoffError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    if !a.is_identity_at_order_zero() {
        return Err(BirkhoffError::NonIdentityLeadingTerm);
    }
    let vars: Vec<&str> = a.vars().iter().map(|s| s.as_str()).collect();
    let mut a_minus = LoopMatrix::identity(&vars, a.orders(), a.rows());
    let mut a_plus = a_minus.clone();
    for m in 1..=a.max_total_degree() {
        let residual = a.sub(&a_minus.mul(&a_plus)).total_degree_part(m);
        let (neg, pos) = residual.split_z();
        a_minus = a_minus.add(&neg);
        a_plus = a_plus.add(&pos);
    }
    Ok((a_minus, a_plus))
}

/// The two exports of the factorization of a column matrix of normalized
/// I-function derivatives: the calibration S(τ,1,−z) = A_−^{-1} and the
/// table A_+^{-1} whose i-th column encodes the differential operator P_i.
#[derive(Clone, Debug)]
pub struct Calibration {
    pub s_minus_z: LoopMatrix,
    pub p_table: LoopMatrix,
}

pub fn calibration_and_p_ops(a: &LoopMatrix) -> Result<Calibration, BirkhoffError> {
    let (a_minus, a_plus) = factorize(a)?;
    Ok(Calibration {
        s_minus_z: a_minus.inverse_unipotent()?,
        p_table: a_plus.inverse_unipotent()?,
    })
}

/// S(z)^T·G·S(−z) − G: vanishes exactly when S preserves the pairing with
/// Gram matrix G (the coordinate form of S^t(z)S(−z) = 1).
pub fn pairing_adjoint_residual(s: &LoopMatrix, gram: &QMatrix) -> LoopMatrix {
    let vars: Vec<&str> = s.vars().iter().map(|v| v.as_str()).collect();
    let mut g = LoopMatrix::zero(&vars, s.orders(), gram.rows, gram.cols);
    for i in 0..gram.rows {
        for j in 0..gram.cols {
            g.set(
                i,
                j,
                Series::constant(&vars, s.orders(), ZLaurent::monomial(gram[(i, j)].clone(), 0)),
            );
        }
    }
    s.transpose().mul(&g).mul(&s.z_negate()).sub(&g)
}
