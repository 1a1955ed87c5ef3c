//! The one-parameter cubic family x1^3 + x2^3 + x3^3 - x1 x2 x3 / Q.
//!
//! Around Q = 0 the periods of this family are spanned by the
//! hypergeometric series f0 and its logarithmic partner
//! f1 = log Q * f0 + f1_regular, both annihilated by the Fuchsian
//! operator th^2 - 27 Q^3 (th + 1)(th + 2) with th = Q d/dQ. The series
//! layer here is exact over the rationals, including the operator
//! residuals and the Wronskian. Floating point enters only in three
//! places, each with a stated tolerance: sampling the mirror coordinate
//! tau(Q) = 3 f1 / (2 pi i f0), evaluating the completion matrices
//! R and B at a point, and continuing the equation along a path with an
//! adaptive Dormand-Prince integrator to read off monodromy. Monodromy
//! results can be snapped to integer matrices and checked against the
//! level-three principal congruence subgroup.

use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};
use series_core::{rat, BigRational};

/// Largest |27 Q^3| at which truncated series evaluation is accepted.
pub const SERIES_TRUST_BOUND: f64 = 0.5;
/// Continuation aborts when |1 - 27 Q^3| drops below this margin.
pub const SINGULAR_MARGIN: f64 = 1e-3;
/// Continuation and sampling abort when |Q| drops below this margin.
pub const ORIGIN_MARGIN: f64 = 1e-4;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum E6Error {
    #[error("|27 Q^3| = {magnitude:.3} at Q = {q} exceeds the series trust bound")]
    OutsideSeriesDomain { q: Complex64, magnitude: f64 },
    #[error("Q = {q} is too close to a singular point of the equation")]
    NearSingularity { q: Complex64 },
    #[error("completion matrices are singular at Q = {q}: t + conj(t) vanishes")]
    SingularCompletion { q: Complex64 },
    #[error("continuation stalled near Q = {location}: step size fell to {step:.3e}")]
    StepUnderflow { location: Complex64, step: f64 },
    #[error("a path needs at least two waypoints")]
    ShortPath,
}

pub fn harmonic_number(l: u64) -> BigRational {
    (1..=l).fold(BigRational::zero(), |acc, k| acc + rat(1, k as i64))
}

/// Exact truncations of the two period series.
#[derive(Clone, Debug)]
pub struct E6Data {
    order: u32,
    f0: Vec<BigRational>,
    f1_regular: Vec<BigRational>,
    f0_num: Vec<f64>,
    f1r_num: Vec<f64>,
}

/// Builds f0 and the non-log part of f1 up to and including Q^order.
pub fn picard_fuchs_solutions(order: u32) -> E6Data {
    assert!(order >= 1, "order must be at least 1");
    let len = order as usize + 1;
    let mut f0 = vec![BigRational::zero(); len];
    let mut f1r = vec![BigRational::zero(); len];
    f0[0] = BigRational::one();
    let mut coeff = BigRational::one();
    let mut k: u64 = 0;
    while 3 * (k + 1) <= order as u64 {
        k += 1;
        let kk = k as i64;
        // (3k)! / (k!)^3 via the ratio 3 (3k-1)(3k-2) / k^2
        coeff *= rat(3 * (3 * kk - 1) * (3 * kk - 2), kk * kk);
        f0[3 * k as usize] = coeff.clone();
        f1r[3 * k as usize] = &coeff * (harmonic_number(3 * k) - harmonic_number(k));
    }
    let to_f64 = |v: &[BigRational]| v.iter().map(|c| c.to_f64().unwrap()).collect();
    let f0_num = to_f64(&f0);
    let f1r_num = to_f64(&f1r);
    E6Data { order, f0, f1_regular: f1r, f0_num, f1r_num }
}

fn theta(v: &[BigRational]) -> Vec<BigRational> {
    v.iter()
        .enumerate()
        .map(|(i, c)| c * rat(i as i64, 1))
        .collect()
}

fn mul_trunc(a: &[BigRational], b: &[BigRational], len: usize) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); len];
    for (i, ai) in a.iter().enumerate().take(len) {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate().take(len - i) {
            if !bj.is_zero() {
                out[i + j] += ai * bj;
            }
        }
    }
    out
}

/// Adds 27 Q^3 * g into `acc` with the scalar weight `w`.
fn add_shifted(acc: &mut [BigRational], g: &[BigRational], w: &BigRational) {
    for i in 3..acc.len() {
        if !g[i - 3].is_zero() {
            acc[i] += w * &rat(27, 1) * &g[i - 3];
        }
    }
}

/// th^2 v - 27 Q^3 (th^2 + 3 th + 2) v.
fn apply_operator(v: &[BigRational]) -> Vec<BigRational> {
    let th = theta(v);
    let mut res = theta(&th);
    let mut poly = res.clone();
    for (p, t) in poly.iter_mut().zip(&th) {
        *p += t * rat(3, 1);
    }
    for (p, f) in poly.iter_mut().zip(v) {
        *p += f * rat(2, 1);
    }
    add_shifted(&mut res, &poly, &rat(-1, 1));
    res
}

impl E6Data {
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn f0_coefficients(&self) -> &[BigRational] {
        &self.f0
    }

    pub fn f1_regular_coefficients(&self) -> &[BigRational] {
        &self.f1_regular
    }

    /// th^2 f0 - 27 Q^3 (th + 1)(th + 2) f0, exact; zero to the order.
    pub fn fuchsian_residual_f0(&self) -> Vec<BigRational> {
        apply_operator(&self.f0)
    }

    /// The non-log part of the operator applied to f1. Writing
    /// f1 = log Q * f0 + f1_regular, the log part reproduces the f0
    /// residual, and what remains is
    /// L f1_regular + 2 th f0 - 27 Q^3 (2 th + 3) f0. Exact; zero to
    /// the order.
    pub fn fuchsian_residual_f1(&self) -> Vec<BigRational> {
        let mut res = apply_operator(&self.f1_regular);
        for (r, t) in res.iter_mut().zip(theta(&self.f0)) {
            *r += t * rat(2, 1);
        }
        let mut cross: Vec<BigRational> = theta(&self.f0)
            .into_iter()
            .map(|t| t * rat(2, 1))
            .collect();
        for (c, f) in cross.iter_mut().zip(&self.f0) {
            *c += f * rat(3, 1);
        }
        add_shifted(&mut res, &cross, &rat(-1, 1));
        res
    }

    /// f0 * th f1 - f1 * th f0 as an exact series: the log terms cancel
    /// and the result is f0^2 + f0 * th f1_regular - f1_regular * th f0.
    /// Multiplying by (1 - 27 Q^3) gives 1.
    pub fn wronskian_determinant(&self) -> Vec<BigRational> {
        let len = self.order as usize + 1;
        let mut w = mul_trunc(&self.f0, &self.f0, len);
        for (wi, c) in w
            .iter_mut()
            .zip(mul_trunc(&self.f0, &theta(&self.f1_regular), len))
        {
            *wi += c;
        }
        for (wi, c) in w
            .iter_mut()
            .zip(mul_trunc(&self.f1_regular, &theta(&self.f0), len))
        {
            *wi -= c;
        }
        w
    }

    fn check_domain(&self, q: Complex64) -> Result<(), E6Error> {
        if q.norm() < ORIGIN_MARGIN {
            return Err(E6Error::NearSingularity { q });
        }
        let magnitude = 27.0 * q.norm().powi(3);
        if magnitude > SERIES_TRUST_BOUND {
            return Err(E6Error::OutsideSeriesDomain { q, magnitude });
        }
        Ok(())
    }

    fn eval(coeffs: &[f64], q: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in coeffs.iter().rev() {
            acc = acc * q + c;
        }
        acc
    }

    fn eval_theta(coeffs: &[f64], q: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, &c) in coeffs.iter().enumerate().rev() {
            acc = acc * q;
            acc += c * i as f64;
        }
        acc
    }

    pub fn f0_at(&self, q: Complex64) -> Result<Complex64, E6Error> {
        self.check_domain(q)?;
        Ok(Self::eval(&self.f0_num, q))
    }

    pub fn f1_at(&self, q: Complex64) -> Result<Complex64, E6Error> {
        self.check_domain(q)?;
        Ok(q.ln() * Self::eval(&self.f0_num, q) + Self::eval(&self.f1r_num, q))
    }

    /// The mirror coordinate tau(Q) = 3 f1 / (2 pi i f0); its imaginary
    /// part is positive on the series domain.
    pub fn tau(&self, q: Complex64) -> Result<Complex64, E6Error> {
        let f0 = self.f0_at(q)?;
        let f1 = self.f1_at(q)?;
        Ok(3.0 * f1 / (Complex64::new(0.0, 2.0 * std::f64::consts::PI) * f0))
    }

    /// The frame [[f0, f1], [th f0, th f1]]; columns are solutions.
    pub fn solution_frame(&self, q: Complex64) -> Result<[[Complex64; 2]; 2], E6Error> {
        self.check_domain(q)?;
        let f0 = Self::eval(&self.f0_num, q);
        let th_f0 = Self::eval_theta(&self.f0_num, q);
        let f1 = q.ln() * f0 + Self::eval(&self.f1r_num, q);
        let th_f1 = f0 + q.ln() * th_f0 + Self::eval_theta(&self.f1r_num, q);
        Ok([[f0, f1], [th_f0, th_f1]])
    }
}

fn det2(m: &[[Complex64; 2]; 2]) -> Complex64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

fn inv2(m: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let d = det2(m);
    [[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]
}

fn mul2(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for (k, bk) in b.iter().enumerate() {
                out[i][j] += a[i][k] * bk[j];
            }
        }
    }
    out
}

/// The result of continuing (f0, f1) along a path, expressed on the
/// principal branches at the endpoints.
#[derive(Clone, Copy, Debug)]
pub struct PathMatrix {
    /// Acts on the column (f0, f1): row i gives the image of f_i.
    pub on_solutions: [[Complex64; 2]; 2],
}

impl PathMatrix {
    /// The induced Moebius action on tau = 3 f1 / (2 pi i f0), as the
    /// 2x2 matrix [[a, b], [c, d]] with tau -> (a tau + b)/(c tau + d).
    pub fn tau_action(&self) -> [[Complex64; 2]; 2] {
        let n = &self.on_solutions;
        let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
        [
            [n[1][1], 3.0 * n[1][0] / two_pi_i],
            [two_pi_i * n[0][1] / 3.0, n[0][0]],
        ]
    }

    /// Rounds the tau action to an integer matrix of determinant one,
    /// with the sign normalized to a nonnegative trace. Returns None if
    /// any entry is farther than `tol` from an integer.
    pub fn snapped_tau_action(&self, tol: f64) -> Option<[[i64; 2]; 2]> {
        let m = self.tau_action();
        let mut out = [[0i64; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let re = m[i][j].re;
                let snapped = re.round();
                if (re - snapped).abs() > tol || m[i][j].im.abs() > tol {
                    return None;
                }
                out[i][j] = snapped as i64;
            }
        }
        if out[0][0] + out[1][1] < 0 {
            for row in &mut out {
                for e in row {
                    *e = -*e;
                }
            }
        }
        if out[0][0] * out[1][1] - out[0][1] * out[1][0] != 1 {
            return None;
        }
        Some(out)
    }

    /// The matrix of `self` followed by `next`, on the same convention.
    pub fn then(&self, next: &PathMatrix) -> PathMatrix {
        PathMatrix { on_solutions: mul2(&self.on_solutions, &next.on_solutions) }
    }
}

/// Whether an integer Moebius matrix lies in the principal congruence
/// subgroup of level three (up to overall sign).
pub fn is_level_three(g: [[i64; 2]; 2]) -> bool {
    if g[0][0] * g[1][1] - g[0][1] * g[1][0] != 1 {
        return false;
    }
    let sign = if g[0][0].rem_euclid(3) == 1 { 1 } else { -1 };
    (sign * g[0][0]).rem_euclid(3) == 1
        && (sign * g[1][1]).rem_euclid(3) == 1
        && (sign * g[0][1]).rem_euclid(3) == 0
        && (sign * g[1][0]).rem_euclid(3) == 0
}

/// Right-hand side of the first-order system in the variable log Q:
/// d/dlogQ (f, u) = (u, 27 Q^3 (3u + 2f) / (1 - 27 Q^3)).
fn rhs(q: Complex64, y: &[Complex64; 4]) -> Result<[Complex64; 4], E6Error> {
    if q.norm() < ORIGIN_MARGIN {
        return Err(E6Error::NearSingularity { q });
    }
    let q3 = 27.0 * q * q * q;
    let denom = Complex64::new(1.0, 0.0) - q3;
    if denom.norm() < SINGULAR_MARGIN {
        return Err(E6Error::NearSingularity { q });
    }
    let mut out = [Complex64::new(0.0, 0.0); 4];
    for col in 0..2 {
        let f = y[2 * col];
        let u = y[2 * col + 1];
        out[2 * col] = u;
        out[2 * col + 1] = q3 * (3.0 * u + 2.0 * f) / denom;
    }
    Ok(out)
}

/// One segment of adaptive Dormand-Prince integration from Q = a to
/// Q = b along the straight chord.
fn integrate_segment(
    y: &mut [Complex64; 4],
    a: Complex64,
    b: Complex64,
) -> Result<(), E6Error> {
    const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    const TOL: f64 = 1e-12;

    let q_at = |s: f64| a + s * (b - a);
    let deriv = |s: f64, y: &[Complex64; 4]| -> Result<[Complex64; 4], E6Error> {
        let q = q_at(s);
        let f = rhs(q, y)?;
        let scale = (b - a) / q;
        Ok([f[0] * scale, f[1] * scale, f[2] * scale, f[3] * scale])
    };

    let mut s = 0.0;
    let mut h = 0.05_f64;
    while s < 1.0 - 1e-12 {
        h = h.min(1.0 - s);
        let mut k = [[Complex64::new(0.0, 0.0); 4]; 7];
        k[0] = deriv(s, y)?;
        for i in 1..7 {
            let mut yi = *y;
            for (j, kj) in k.iter().enumerate().take(i) {
                for (c, kc) in yi.iter_mut().zip(kj) {
                    *c += h * A[i][j] * kc;
                }
            }
            k[i] = deriv(s + C[i] * h, &yi)?;
        }
        // k[6] was evaluated at the 5th-order solution point, so the
        // A[6] row doubles as the 5th-order weights.
        let mut y5 = *y;
        let mut y4 = *y;
        for (j, kj) in k.iter().enumerate() {
            for c in 0..4 {
                if j < 6 {
                    y5[c] += h * A[6][j] * kj[c];
                }
                y4[c] += h * B4[j] * kj[c];
            }
        }
        let mut err: f64 = 0.0;
        for c in 0..4 {
            let scale = TOL + TOL * y5[c].norm();
            err = err.max((y5[c] - y4[c]).norm() / scale);
        }
        if err <= 1.0 {
            s += h;
            *y = y5;
        }
        let factor = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 5.0 };
        h *= factor.clamp(0.2, 5.0);
        if h < 1e-12 && s < 1.0 {
            return Err(E6Error::StepUnderflow { location: q_at(s), step: h });
        }
    }
    Ok(())
}

/// Continues the basis (f0, f1) along the polyline `path` and expresses
/// the result on the principal branch at the final waypoint. For a
/// closed loop this is the monodromy matrix; matrices of consecutive
/// paths compose with [PathMatrix::then].
pub fn monodromy(data: &E6Data, path: &[Complex64]) -> Result<PathMatrix, E6Error> {
    if path.len() < 2 {
        return Err(E6Error::ShortPath);
    }
    let start = data.solution_frame(path[0])?;
    let end = data.solution_frame(*path.last().unwrap())?;
    let mut y = [start[0][0], start[1][0], start[0][1], start[1][1]];
    for pair in path.windows(2) {
        integrate_segment(&mut y, pair[0], pair[1])?;
    }
    let continued = [[y[0], y[2]], [y[1], y[3]]];
    let m = mul2(&inv2(&end), &continued);
    Ok(PathMatrix { on_solutions: [[m[0][0], m[1][0]], [m[0][1], m[1][1]]] })
}

/// Numeric values of the basis-change blocks between the two good bases
/// at a sample point, with Q-bar taken as the complex conjugate.
#[derive(Clone, Copy, Debug)]
pub struct CompletionData {
    pub g: Complex64,
    /// Each block is R(z) = I + z * N; these are the four N blocks
    /// (only the first is nonzero).
    pub r_nilpotent: [[[Complex64; 2]; 2]; 4],
    pub b_blocks: [[[Complex64; 2]; 2]; 4],
}

pub fn completion_matrices(data: &E6Data, q: Complex64) -> Result<CompletionData, E6Error> {
    let frame = data.solution_frame(q)?;
    let (f0, f1, th_f0, th_f1) = (frame[0][0], frame[0][1], frame[1][0], frame[1][1]);
    // D = Q d/dQ Q, so D f = Q (f + th f)
    let d_f0 = q * (f0 + th_f0);
    let d_f1 = q * (f1 + th_f1);
    let (cf0, cf1) = (f0.conj(), f1.conj());

    let pairing = f1 * cf0 + f0 * cf1;
    let t_plus = (f1 / f0) + (f1 / f0).conj();
    if t_plus.norm() < 1e-12 {
        return Err(E6Error::SingularCompletion { q });
    }
    let g = -(d_f1 * cf0 + d_f0 * cf1) / pairing;

    let zero = Complex64::new(0.0, 0.0);
    let mut r_nilpotent = [[[zero; 2]; 2]; 4];
    r_nilpotent[0][0][1] = 1.0 / t_plus;

    let minus_i = Complex64::new(0.0, -1.0);
    let det_i0 = f0 * th_f1 - f1 * th_f0;
    let q3 = Complex64::new(1.0, 0.0) - 27.0 * q * q * q;
    let outer = [
        [minus_i * q3.powf(-1.0 / 3.0), zero],
        [zero, minus_i * q3.powf(-2.0 / 3.0)],
    ];
    let b_blocks = [
        [[minus_i * f0, zero], [zero, minus_i * det_i0 / f0]],
        outer,
        outer,
        outer,
    ];
    Ok(CompletionData { g, r_nilpotent, b_blocks })
}

impl CompletionData {
    /// The i-th R block evaluated at a value of z.
    pub fn r_block(&self, i: usize, z: Complex64) -> [[Complex64; 2]; 2] {
        let n = &self.r_nilpotent[i];
        let one = Complex64::new(1.0, 0.0);
        [[one + z * n[0][0], z * n[0][1]], [z * n[1][0], one + z * n[1][1]]]
    }
}

/// The diagonal automorphy factor Diag(1, (c tau + d)^2, c tau + d, ...,
/// c tau + d) attached to an integer Moebius matrix.
pub fn automorphy_factor(g: [[i64; 2]; 2], tau: Complex64) -> [Complex64; 8] {
    let cd = Complex64::new(g[1][0] as f64, 0.0) * tau + Complex64::new(g[1][1] as f64, 0.0);
    let mut out = [cd; 8];
    out[0] = Complex64::new(1.0, 0.0);
    out[1] = cd * cd;
    out
}
