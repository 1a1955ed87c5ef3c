use fermat_weights::WeightSystem;
use jacobi_ring::{
    hessian_expansion_partial_sum, hessian_expansion_sum, parse_poly,
    product_power_residue_limit, residue_q0_limit, JacobiError, JacobiRing, Poly,
};
use num_traits::Zero;
use proptest::prelude::*;
use series_core::{rat, rint, BigRational};
use state_spaces::{cr_pairing, cr_product_monomial};

fn ws(d: &[u64]) -> WeightSystem {
    WeightSystem::new(d).unwrap()
}

fn mono(exp: &[u32]) -> Poly {
    Poly::monomial(exp.to_vec(), rint(1))
}

fn fermat(d: &[u64]) -> JacobiRing {
    JacobiRing::new(&ws(d), None).unwrap()
}

fn deformed(d: &[u64], q: BigRational) -> JacobiRing {
    JacobiRing::new(&ws(d), Some(q)).unwrap()
}

#[test]
fn normal_form_fermat_basics() {
    let r = fermat(&[3, 3, 3]);
    let x1 = mono(&[1, 0, 0]);
    assert_eq!(r.normal_form(&x1).unwrap(), x1);
    // x1^2 generates the gradient ideal component (∂_1 W = 3 x1^2), so it
    // and every multiple of it reduce to zero
    assert!(r.normal_form(&mono(&[2, 0, 0])).unwrap().is_zero());
    assert!(r.normal_form(&mono(&[3, 0, 0])).unwrap().is_zero());
    let r44 = fermat(&[4, 4, 4, 4]);
    let x1sq = mono(&[2, 0, 0, 0]);
    assert_eq!(r44.normal_form(&x1sq).unwrap(), x1sq);
}

#[test]
fn normal_form_deformed_cube_rewrites_to_product() {
    // x_1^3 = x_1 x_2 x_3 / (3Q) modulo the gradient ideal of f
    for (q, c) in [(rint(1), rat(1, 3)), (rint(2), rat(1, 6))] {
        let r = deformed(&[3, 3, 3], q);
        let nf = r.normal_form(&mono(&[3, 0, 0])).unwrap();
        assert_eq!(nf, mono(&[1, 1, 1]).scale(&c));
    }
}

#[test]
fn normal_form_agrees_with_degreewise_solver_on_fermat() {
    for d in [vec![3u64, 3, 3], vec![2, 3, 6]] {
        let r = fermat(&d);
        let cap = 2 * r.socle_units();
        for delta in 0..=cap {
            for exp in all_monomials_of_units(&r, delta) {
                let m = mono(&exp);
                assert_eq!(
                    r.normal_form(&m).unwrap(),
                    r.normal_form_degreewise(&m).unwrap(),
                    "mismatch at {exp:?}"
                );
            }
        }
    }
}

fn all_monomials_of_units(r: &JacobiRing, delta: u64) -> Vec<Vec<u32>> {
    // brute-force enumeration independent of the ring's internals
    let mut out = Vec::new();
    let n = r.n();
    let mut cur = vec![0u32; n];
    fn rec(
        r: &JacobiRing,
        delta: u64,
        i: usize,
        cur: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        if i == cur.len() {
            if r.weighted_degree_units(cur) == delta {
                out.push(cur.clone());
            }
            return;
        }
        for e in 0..=(delta as u32) {
            cur[i] = e;
            if r.weighted_degree_units(&cur[..=i]) > delta {
                cur[i] = 0;
                break;
            }
            rec(r, delta, i + 1, cur, out);
        }
        cur[i] = 0;
    }
    rec(r, delta, 0, &mut cur, &mut out);
    out
}

#[test]
fn residue_diagonal_oracle_on_fermat() {
    // K^{(0)}(x^b, x^c) = ∏ 1/d_i exactly when b + c = (d_1−2, …, d_n−2)
    for d in [vec![3u64, 3, 3], vec![2, 3, 6], vec![4, 4, 4, 4]] {
        let w = ws(&d);
        let r = fermat(&d);
        let prod_inv: BigRational = d
            .iter()
            .map(|&di| rat(1, di as i64))
            .product();
        let box_ = w.ghost_box();
        for b in &box_ {
            for c in &box_ {
                let pb = mono(&b.iter().map(|&x| x as u32).collect::<Vec<_>>());
                let pc = mono(&c.iter().map(|&x| x as u32).collect::<Vec<_>>());
                let k = r.residue_pairing(&pb, &pc).unwrap();
                let paired = b
                    .iter()
                    .zip(c)
                    .zip(&d)
                    .all(|((&bi, &ci), &di)| bi + ci == di - 2);
                if paired {
                    assert_eq!(k, prod_inv);
                } else {
                    assert!(k.is_zero());
                }
            }
        }
    }
}

#[test]
fn hessian_determinant_has_residue_milnor() {
    for d in [
        vec![3u64, 3, 3],
        vec![2, 3, 6],
        vec![4, 4, 4, 4],
        vec![5, 5, 5, 5, 5],
    ] {
        let r = fermat(&d);
        let n = rint(ws(&d).milnor_number() as i64);
        assert_eq!(
            r.residue_pairing(&r.det_hessian(), &Poly::one(d.len())).unwrap(),
            n
        );
        // independent content of the calibration: the normal form of
        // det Hess(W) is ∏ d_i(d_i−1) times the socle monomial
        let expected: BigRational = d
            .iter()
            .map(|&di| rint((di * (di - 1)) as i64))
            .product();
        assert_eq!(
            r.normal_form(&r.det_hessian()).unwrap().coeff(&r.socle_exp()),
            expected
        );
    }
    for d in [vec![3u64, 3, 3], vec![2, 3, 6]] {
        let r = deformed(&d, rint(1));
        let n = rint(ws(&d).milnor_number() as i64);
        assert_eq!(
            r.residue_pairing(&r.det_hessian(), &Poly::one(d.len())).unwrap(),
            n
        );
    }
}

#[test]
fn socle_residue_values() {
    // hand-computed for the cubic family: det Hess(f) reduces to
    // (216 − 8/Q^3)·x1x2x3, so the socle residue is Q^3/(27Q^3 − 1)
    assert_eq!(fermat(&[3, 3, 3]).socle_residue().unwrap(), rat(1, 27));
    assert_eq!(deformed(&[3, 3, 3], rint(1)).socle_residue().unwrap(), rat(1, 26));
    assert_eq!(deformed(&[3, 3, 3], rint(2)).socle_residue().unwrap(), rat(8, 215));
}

#[test]
fn normalized_product_residue_at_fixed_q() {
    // Q^{-3}·K^{(0)}(x1x2x3, 1) = 1/(27Q^3 − 1) for the cubic family
    for (q, expected) in [(1i64, rat(1, 26)), (2, rat(1, 215))] {
        let r = deformed(&[3, 3, 3], rint(q));
        let sigma = mono(&[1, 1, 1]);
        let v = r.residue_pairing(&sigma, &Poly::one(3)).unwrap() * rat(1, q.pow(3));
        assert_eq!(v, expected);
    }
}

#[test]
fn normalized_product_residue_limit_is_minus_one() {
    assert_eq!(product_power_residue_limit(&ws(&[3, 3, 3])).unwrap(), rint(-1));
    assert_eq!(product_power_residue_limit(&ws(&[2, 3, 6])).unwrap(), rint(-1));
}

#[test]
fn hessian_expansion_sums() {
    for d in [
        vec![3u64, 3, 3],
        vec![2, 3, 6],
        vec![4, 4, 4, 4],
        vec![5, 5, 5, 5, 5],
    ] {
        let w = ws(&d);
        assert!(hessian_expansion_sum(&w).is_zero());
        assert_eq!(
            hessian_expansion_partial_sum(&w),
            -rint(w.milnor_number() as i64)
        );
    }
}

#[test]
fn gram_fermat_cubic_is_antidiagonal() {
    let w = ws(&[3, 3, 3]);
    let g = fermat(&[3, 3, 3]).good_basis_gram().unwrap();
    let box_ = w.ghost_box();
    for (i, b) in box_.iter().enumerate() {
        for (j, c) in box_.iter().enumerate() {
            let paired = b.iter().zip(c).all(|(&bi, &ci)| bi + ci == 1);
            let expected = if paired { rat(1, 27) } else { rint(0) };
            assert_eq!(g[(i, j)], expected);
        }
    }
}

#[test]
fn gram_nondegenerate() {
    assert!(!fermat(&[2, 3, 6]).good_basis_gram().unwrap().det().is_zero());
    assert!(!deformed(&[2, 3, 6], rint(1)).good_basis_gram().unwrap().det().is_zero());
}

#[test]
fn deformed_gram_is_q_independent_after_normalization() {
    let g1 = deformed(&[3, 3, 3], rint(1));
    let g2 = deformed(&[3, 3, 3], rint(2));
    let n1 = g1.gram_delta_normalized().unwrap();
    let n2 = g2.gram_delta_normalized().unwrap();
    assert_eq!(n1, n2);
    assert_eq!(n1, fermat(&[3, 3, 3]).gram_delta_normalized().unwrap());
    // the raw Grams differ exactly by the ratio of socle residues
    let raw1 = g1.good_basis_gram().unwrap();
    let raw2 = g2.good_basis_gram().unwrap();
    let ratio = g2.socle_residue().unwrap() / g1.socle_residue().unwrap();
    assert_eq!(raw1.scale(&ratio), raw2);
}

#[test]
fn residue_limit_matches_negative_poincare_pairing() {
    // lim_{Q→0} Q^{-2} K^{(0)}(x^{β'}, x^{β''}) = −(φ_{β'}, φ_{β''})
    // over a spanning family of exponent vectors for the cubic
    let w = ws(&[3, 3, 3]);
    let betas: Vec<Vec<u64>> = vec![
        vec![0, 0, 0],
        vec![3, 0, 0],
        vec![1, 0, 0],
        vec![2, 0, 0],
        vec![0, 1, 0],
        vec![0, 2, 0],
        vec![0, 0, 1],
        vec![0, 0, 2],
    ];
    for b in &betas {
        for c in &betas {
            let pb = mono(&b.iter().map(|&x| x as u32).collect::<Vec<_>>());
            let pc = mono(&c.iter().map(|&x| x as u32).collect::<Vec<_>>());
            let lhs = residue_q0_limit(&w, &pb, &pc, -2).unwrap();
            let phi_b = cr_product_monomial(&w, b).unwrap();
            let phi_c = cr_product_monomial(&w, c).unwrap();
            let rhs = -cr_pairing(&phi_b, &phi_c).unwrap();
            assert_eq!(lhs, rhs, "mismatch at β'={b:?}, β''={c:?}");
        }
    }
}

#[test]
fn graded_dimensions_match_poincare_polynomial() {
    for d in [vec![3u64, 3, 3], vec![2, 3, 6], vec![4, 4, 4, 4]] {
        let w = ws(&d);
        let (_, weights) = w.derived_degrees();
        let r = fermat(&d);
        // independent generating-function count: ∏ (1 + s^{w_i} + … + s^{(d_i−2)w_i})
        let socle = r.socle_units() as usize;
        let mut gen = vec![0u64; socle + 1];
        gen[0] = 1;
        for (&di, &wi) in d.iter().zip(&weights) {
            let mut next = vec![0u64; socle + 1];
            for (deg, &count) in gen.iter().enumerate() {
                if count == 0 {
                    continue;
                }
                for k in 0..=(di - 2) {
                    let shifted = deg + (k * wi) as usize;
                    if shifted <= socle {
                        next[shifted] += count;
                    }
                }
            }
            gen = next;
        }
        assert_eq!(r.graded_dimensions(), gen);
    }
}

#[test]
fn degreewise_rank_checks_give_milnor_dimension() {
    for d in [vec![3u64, 3, 3], vec![2, 3, 6]] {
        let w = ws(&d);
        assert_eq!(
            deformed(&d, rint(1)).verify_graded_dimensions().unwrap(),
            w.milnor_number()
        );
        assert_eq!(fermat(&d).verify_graded_dimensions().unwrap(), w.milnor_number());
    }
}

#[test]
fn constructor_errors() {
    assert_eq!(
        JacobiRing::new(&ws(&[3, 3, 3]), Some(rint(0))).unwrap_err(),
        JacobiError::ZeroDeformation
    );
    let non_cy = WeightSystem::new(&[3, 3]).unwrap();
    assert_eq!(
        JacobiRing::new(&non_cy, Some(rint(1))).unwrap_err(),
        JacobiError::DeformationRequiresCalabiYau
    );
    // non-CY weights are fine without deformation
    let r = JacobiRing::new(&non_cy, None).unwrap();
    assert_eq!(
        r.residue_pairing(&r.det_hessian(), &Poly::one(2)).unwrap(),
        rint(non_cy.milnor_number() as i64)
    );
    let r333 = fermat(&[3, 3, 3]);
    assert!(matches!(
        r333.normal_form(&Poly::one(2)),
        Err(JacobiError::VariableCountMismatch { .. })
    ));
}

#[test]
fn degree_cap_is_enforced_on_the_solver_path() {
    let r = deformed(&[3, 3, 3], rint(1)).with_degree_cap(3);
    assert!(matches!(
        r.normal_form(&mono(&[2, 2, 0])),
        Err(JacobiError::DegreeCapExceeded { .. })
    ));
    assert!(r.normal_form(&mono(&[1, 1, 1])).is_ok());
}

#[test]
fn poly_parser() {
    let p = parse_poly("3*x1^2*x2 - 1/2*x3 + 1", 3).unwrap();
    assert_eq!(p.coeff(&[2, 1, 0]), rint(3));
    assert_eq!(p.coeff(&[0, 0, 1]), rat(-1, 2));
    assert_eq!(p.coeff(&[0, 0, 0]), rint(1));
    assert_eq!(p.num_terms(), 3);
    // implicit multiplication and underscores
    assert_eq!(parse_poly("2x_1x_2^3", 2).unwrap(), parse_poly("2*x1*x2^3", 2).unwrap());
    assert!(parse_poly("x4", 3).is_err());
    assert!(parse_poly("1/0", 1).is_err());
    assert!(parse_poly("x1 +", 1).is_err());
    assert!(parse_poly("", 3).unwrap().is_zero());
}

fn arb_poly(n: usize, max_units: u32) -> impl Strategy<Value = Poly> {
    proptest::collection::vec(
        (proptest::collection::vec(0u32..=max_units, n), -6i64..7),
        0..5,
    )
    .prop_map(move |terms| {
        let mut p = Poly::zero(n);
        for (exp, c) in terms {
            p.add_term(exp, rint(c));
        }
        p
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn normal_form_is_idempotent_and_linear(
        a in arb_poly(3, 2),
        b in arb_poly(3, 2),
    ) {
        let r = deformed(&[3, 3, 3], rint(1));
        let nf_a = r.normal_form(&a).unwrap();
        prop_assert_eq!(r.normal_form(&nf_a).unwrap(), nf_a.clone());
        let sum_nf = r.normal_form(&a.add(&b)).unwrap();
        prop_assert_eq!(sum_nf, nf_a.add(&r.normal_form(&b).unwrap()));
    }

    #[test]
    fn gradient_multiples_reduce_to_zero(
        exp in proptest::collection::vec(0u32..=1, 3),
        i in 0usize..3,
    ) {
        let r = deformed(&[3, 3, 3], rint(1));
        let m = Poly::monomial(exp, rint(1));
        let p = m.mul(&r.partial(i));
        prop_assert!(r.normal_form(&p).unwrap().is_zero());
    }

    #[test]
    fn residue_pairing_is_symmetric(
        a in arb_poly(3, 2),
        b in arb_poly(3, 2),
    ) {
        let r = deformed(&[3, 3, 3], rint(1));
        prop_assert_eq!(
            r.residue_pairing(&a, &b).unwrap(),
            r.residue_pairing(&b, &a).unwrap()
        );
    }
}
