use birkhoff::{
    calibration_and_p_ops, factorize, pairing_adjoint_residual, BirkhoffError, LoopEntry,
    LoopMatrix,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use series_core::{rat, rint, QMatrix, Series, ZLaurent};

const VARS: [&str; 2] = ["t", "Q"];
const ORDERS: [u32; 2] = [4, 4];

fn entry_zero() -> LoopEntry {
    Series::zero(&VARS, &ORDERS)
}

fn entry_term(texp: u32, qexp: u32, z: &[(i64, i64)]) -> LoopEntry {
    let mut zl = ZLaurent::zero();
    for &(e, c) in z {
        zl = zl.add(&ZLaurent::monomial(rint(c), e));
    }
    let mut s = entry_zero();
    s.add_term(vec![texp, qexp], zl);
    s
}

#[test]
fn identity_factorizes_trivially() {
    let id = LoopMatrix::identity(&VARS, &ORDERS, 3);
    let (m, p) = factorize(&id).unwrap();
    assert_eq!(m, id);
    assert_eq!(p, id);
}

#[test]
fn purely_negative_input_is_its_own_minus_part() {
    // A = I + t·M·z^{-1}
    let mut a = LoopMatrix::identity(&VARS, &ORDERS, 2);
    a.set(0, 1, entry_term(1, 0, &[(-1, 5)]));
    let (m, p) = factorize(&a).unwrap();
    assert_eq!(m, a);
    assert_eq!(p, LoopMatrix::identity(&VARS, &ORDERS, 2));
}

#[test]
fn mixed_input_produces_the_expected_cross_term() {
    // A = I + t(N z^{-1} + P z) with N = E_{01}, P = E_{10}:
    // order t gives A_- = I + tNz^{-1}, A_+ = I + tPz; at order t^2 the
    // residual is −NP z^0, all of which lands in the plus part
    let mut a = LoopMatrix::identity(&VARS, &ORDERS, 2);
    a.set(0, 1, entry_term(1, 0, &[(-1, 1)]));
    a.set(1, 0, entry_term(1, 0, &[(1, 1)]));
    let (m, p) = factorize(&a).unwrap();
    assert_eq!(m.mul(&p), a);

    assert_eq!(m.get(0, 1).coeff(&[1, 0]), ZLaurent::monomial(rint(1), -1));
    assert_eq!(p.get(1, 0).coeff(&[1, 0]), ZLaurent::monomial(rint(1), 1));
    // N·P = E_{00}, so the t^2 part of A_+ is −E_{00} at z^0
    assert_eq!(p.get(0, 0).coeff(&[2, 0]), ZLaurent::monomial(rint(-1), 0));
    assert!(m.get(0, 0).coeff(&[2, 0]).is_zero());
}

fn random_loop_matrix(rng: &mut ChaCha8Rng, n: usize) -> LoopMatrix {
    let mut a = LoopMatrix::identity(&VARS, &ORDERS, n);
    for i in 0..n {
        for j in 0..n {
            let mut s = if i == j { Series::one(&VARS, &ORDERS) } else { entry_zero() };
            for texp in 0..4u32 {
                for qexp in 0..4u32 {
                    if texp + qexp == 0 || texp + qexp > 3 {
                        continue;
                    }
                    let mut zl = ZLaurent::zero();
                    for ze in -2i64..=2 {
                        if rng.gen_range(0..3) == 0 {
                            let num = rng.gen_range(-9i64..10);
                            let den = rng.gen_range(1i64..5);
                            zl = zl.add(&ZLaurent::monomial(rat(num, den), ze));
                        }
                    }
                    let mut term = entry_zero();
                    term.add_term(vec![texp, qexp], zl);
                    s = s.add(&term);
                }
            }
            a.set(i, j, s);
        }
    }
    a
}

#[test]
fn factorize_then_multiply_is_identity_on_random_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9b1f);
    for trial in 0..50 {
        let n = rng.gen_range(1..=3);
        let a = random_loop_matrix(&mut rng, n);
        let (m, p) = factorize(&a).unwrap();
        assert_eq!(m.mul(&p), a, "trial {trial}");
        // normalization: minus part strictly negative, plus part nonnegative
        let (m_neg, m_pos) = m.sub(&LoopMatrix::identity(&VARS, &ORDERS, n)).split_z();
        assert!(m_pos.is_zero());
        assert_eq!(m_neg.add(&LoopMatrix::identity(&VARS, &ORDERS, n)), m);
        let (p_neg, _) = p.split_z();
        assert!(p_neg.is_zero());
        // uniqueness under re-factorization
        let (m2, p2) = factorize(&m.mul(&p)).unwrap();
        assert_eq!(m2, m);
        assert_eq!(p2, p);
    }
}

#[test]
fn unipotent_inverse_is_a_two_sided_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x51e2);
    let a = random_loop_matrix(&mut rng, 3);
    let inv = a.inverse_unipotent().unwrap();
    let id = LoopMatrix::identity(&VARS, &ORDERS, 3);
    assert_eq!(a.mul(&inv), id);
    assert_eq!(inv.mul(&a), id);
}

#[test]
fn calibration_inverts_both_factors() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0de);
    let a = random_loop_matrix(&mut rng, 2);
    let (m, p) = factorize(&a).unwrap();
    let cal = calibration_and_p_ops(&a).unwrap();
    let id = LoopMatrix::identity(&VARS, &ORDERS, 2);
    assert_eq!(cal.s_minus_z.mul(&m), id);
    assert_eq!(cal.p_table.mul(&p), id);
}

#[test]
fn non_identity_leading_term_is_rejected() {
    let mut a = LoopMatrix::identity(&VARS, &ORDERS, 2);
    a.set(0, 1, Series::one(&VARS, &ORDERS));
    assert_eq!(factorize(&a).unwrap_err(), BirkhoffError::NonIdentityLeadingTerm);
    let rect = LoopMatrix::zero(&VARS, &ORDERS, 2, 3);
    assert!(matches!(factorize(&rect), Err(BirkhoffError::NotSquare { .. })));
}

#[test]
fn pairing_residual_vanishes_for_symmetric_exponential() {
    // S = exp(t·C·z^{-1}) with C symmetric satisfies S(z)^T S(−z) = 1,
    // since S(z)^T = exp(t·C·z^{-1}) and S(−z) = exp(−t·C·z^{-1}) commute
    let c = [[rint(2), rint(3)], [rint(3), rat(-1, 2)]];
    let n = 2;
    let mut nilp = LoopMatrix::zero(&VARS, &ORDERS, n, n);
    for i in 0..n {
        for j in 0..n {
            let mut s = entry_zero();
            s.add_term(vec![1, 0], ZLaurent::monomial(c[i][j].clone(), -1));
            nilp.set(i, j, s);
        }
    }
    let mut s = LoopMatrix::identity(&VARS, &ORDERS, n);
    let mut pow = nilp.clone();
    let mut factorial = rint(1);
    for k in 1..=3u32 {
        factorial = factorial * rint(k as i64);
        s = s.add(&pow.map_entries(|e| e.scale(&ZLaurent::monomial(factorial.recip(), 0))));
        pow = pow.mul(&nilp);
    }
    let residual = pairing_adjoint_residual(&s, &QMatrix::identity(n));
    assert!(residual.is_zero());

    // a non-symmetric generator leaks at first order
    let mut bad = LoopMatrix::identity(&VARS, &ORDERS, n);
    let mut e01 = entry_zero();
    e01.add_term(vec![1, 0], ZLaurent::monomial(rint(1), -1));
    bad.set(0, 1, e01);
    assert!(!pairing_adjoint_residual(&bad, &QMatrix::identity(n)).is_zero());
}
