use ancestor::{
    assemble_ancestor, canonical_gram, kontsevich_witten_potential, psi_intersections,
    AncestorError, SemisimpleData,
};
use givental_fock::{
    exp_upper_triangular, linear_change_apply, quantized_r_apply, reframe, TamePotential,
    UpperTriangularR,
};
use num_traits::{One, Zero};
use series_core::{rat, BigRational, QMatrix};
use std::collections::BTreeMap;

fn mat(rows: &[&[i64]]) -> QMatrix {
    QMatrix::from_rows(
        rows.iter()
            .map(|r| r.iter().map(|&v| rat(v, 1)).collect::<Vec<_>>())
            .collect(),
    )
}

fn qmat(rows: &[&[BigRational]]) -> QMatrix {
    QMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect())
}

fn padded_identity(n: usize, order: usize, gram: QMatrix) -> UpperTriangularR {
    let mut mats = vec![QMatrix::identity(n)];
    for _ in 0..order {
        mats.push(QMatrix::zeros(n, n));
    }
    UpperTriangularR::new(gram, mats).unwrap()
}

/// Projects a seed onto the z^k-generator symmetry type for the pairing:
/// self-adjoint at odd k, anti-self-adjoint at even k.
fn generator_part(gram: &QMatrix, seed: &QMatrix, k: usize) -> QMatrix {
    let gram_inv = gram.inverse().unwrap();
    let t = gram_inv.matmul(&seed.transpose()).matmul(gram);
    let sig = if k % 2 == 1 { rat(1, 2) } else { rat(-1, 2) };
    seed.scale(&rat(1, 2)).add(&t.scale(&sig))
}

fn sample_r(gram: &QMatrix, seeds: &[QMatrix], order: usize) -> UpperTriangularR {
    let a_mats: Vec<QMatrix> = seeds
        .iter()
        .enumerate()
        .map(|(j, s)| generator_part(gram, s, j + 1))
        .collect();
    exp_upper_triangular(gram, &a_mats, order).unwrap()
}

fn terms_of(f: &TamePotential) -> BTreeMap<(u32, Vec<(u32, usize)>), BigRational> {
    f.iter().map(|(k, v)| (k.clone(), v.clone())).collect()
}

fn sorted_tuples(len: usize, min: u32, cap: u32, out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>) {
    if len == 0 {
        out.push(cur.clone());
        return;
    }
    for v in min..=cap {
        cur.push(v);
        sorted_tuples(len - 1, v, cap, out, cur);
        cur.pop();
    }
}

#[test]
fn base_cases_and_known_values() {
    assert_eq!(psi_intersections(0, &[0, 0, 0]), rat(1, 1));
    assert_eq!(psi_intersections(1, &[1]), rat(1, 24));
    assert_eq!(psi_intersections(0, &[0, 0, 0, 1]), rat(1, 1));
    assert_eq!(psi_intersections(0, &[0, 0, 0, 0, 2]), rat(1, 1));
    assert_eq!(psi_intersections(0, &[0, 0, 0, 1, 1]), rat(2, 1));
    // off the dimension constraint even though every index is small
    assert!(psi_intersections(0, &[0, 0, 1]).is_zero());
    assert_eq!(psi_intersections(1, &[0, 2]), rat(1, 24));
    assert_eq!(psi_intersections(2, &[2, 3]), rat(29, 5760));
    // unstable or off the dimension constraint
    assert!(psi_intersections(0, &[0, 0]).is_zero());
    assert!(psi_intersections(0, &[5]).is_zero());
    assert!(psi_intersections(1, &[2]).is_zero());
    assert!(psi_intersections(2, &[]).is_zero());
}

#[test]
fn one_point_values_follow_the_closed_genus_formula() {
    let mut expected = BigRational::one();
    for g in 1..=3u32 {
        expected /= rat(24 * g as i64, 1);
        assert_eq!(psi_intersections(g, &[3 * g - 2]), expected, "genus {g}");
    }
}

#[test]
fn string_equation_holds_across_a_sweep() {
    for g in 0..=3u32 {
        for n in 1..=5usize {
            let mut keys = Vec::new();
            sorted_tuples(n, 0, 5, &mut keys, &mut Vec::new());
            for ks in keys {
                // the reduced correlator must be stable for the identity
                if 2 * g as i64 - 2 + n as i64 <= 0 {
                    continue;
                }
                let mut with_zero = ks.clone();
                with_zero.push(0);
                let lhs = psi_intersections(g, &with_zero);
                let mut rhs = BigRational::zero();
                for j in 0..ks.len() {
                    if ks[j] == 0 {
                        continue;
                    }
                    let mut lowered = ks.clone();
                    lowered[j] -= 1;
                    rhs += psi_intersections(g, &lowered);
                }
                assert_eq!(lhs, rhs, "g={g} ks={ks:?}");
            }
        }
    }
}

#[test]
fn dilaton_equation_holds_across_a_sweep() {
    for g in 0..=3u32 {
        for n in 1..=5usize {
            let mut keys = Vec::new();
            sorted_tuples(n, 0, 5, &mut keys, &mut Vec::new());
            for ks in keys {
                let mut with_one = ks.clone();
                with_one.push(1);
                let lhs = psi_intersections(g, &with_one);
                let factor = rat(2 * g as i64 - 2 + n as i64, 1);
                let rhs = factor * psi_intersections(g, &ks);
                assert_eq!(lhs, rhs, "g={g} ks={ks:?}");
            }
        }
    }
}

#[test]
fn point_potential_truncation_and_tameness() {
    let f = kontsevich_witten_potential(2, 4);
    assert!(f.is_tame());
    assert_eq!(f.rank(), 1);
    assert_eq!(f.coeff(0, &[(0, 0), (0, 0), (0, 0)]), rat(1, 6));
    assert_eq!(f.coeff(1, &[(1, 0)]), rat(1, 24));
    assert_eq!(f.coeff(2, &[(4, 0)]), rat(1, 1152));
    assert_eq!(f.coeff(2, &[(2, 0), (3, 0)]), rat(29, 5760));
    for ((g, key), _) in f.iter() {
        assert!(key.len() <= 4);
        assert!(key.iter().all(|&(k, _)| k <= 4));
        if *g == 0 {
            assert!(key.len() >= 3);
        }
        let total: i64 = key.iter().map(|&(k, _)| k as i64).sum();
        assert_eq!(total, 3 * *g as i64 - 3 + key.len() as i64);
    }
}

#[test]
fn identity_assembly_returns_the_point_potential() {
    let gram = canonical_gram(&[rat(1, 1)]);
    let d = SemisimpleData::new(
        vec![rat(0, 1)],
        vec![rat(1, 1)],
        QMatrix::identity(1),
        padded_identity(1, 9, gram),
    )
    .unwrap();
    let assembled = assemble_ancestor(&d, 2, 4).unwrap();
    assert_eq!(assembled, kontsevich_witten_potential(2, 4));
}

#[test]
fn metric_rescaling_scales_each_genus_sector() {
    let delta = rat(5, 1);
    let gram = canonical_gram(&[delta.clone()]);
    let d = SemisimpleData::new(
        vec![rat(0, 1)],
        vec![delta.clone()],
        QMatrix::identity(1),
        padded_identity(1, 9, gram),
    )
    .unwrap();
    let assembled = assemble_ancestor(&d, 2, 4).unwrap();
    let wk = kontsevich_witten_potential(2, 4);
    assert_eq!(assembled.gram()[(0, 0)], delta.recip());
    assert_eq!(assembled.unit()[0], rat(1, 1));
    let mut seen = 0;
    for ((g, key), c) in wk.iter() {
        let mut scale = BigRational::one();
        for _ in 0..*g {
            scale *= &delta;
        }
        scale /= &delta;
        assert_eq!(assembled.coeff(*g, key), c * scale);
        seen += 1;
    }
    assert!(seen > 10);
    assert_eq!(terms_of(&assembled).len(), seen);
}

fn sample_rank2_data(delta: Vec<BigRational>, psi: QMatrix, order: usize) -> SemisimpleData {
    let gram = canonical_gram(&delta);
    let seeds = [mat(&[&[1, 2], &[-1, 3]]), mat(&[&[0, 1], &[2, -1]])];
    let r = sample_r(&gram, &seeds, order);
    SemisimpleData::new(vec![rat(0, 1), rat(1, 1)], delta, psi, r).unwrap()
}

#[test]
fn assembled_potentials_are_tame() {
    let d = sample_rank2_data(vec![rat(2, 1), rat(-3, 1)], mat(&[&[1, 1], &[0, 2]]), 9);
    for jet in 1..=4u32 {
        let f = assemble_ancestor(&d, 2, jet).unwrap();
        assert!(f.is_tame(), "jet cap {jet}");
        assert!(!f.is_zero());
    }
}

#[test]
fn scaling_the_volume_datum_acts_on_hbar_and_the_variables() {
    let psi = mat(&[&[1, 1], &[0, 2]]);
    let base = sample_rank2_data(vec![rat(2, 1), rat(-3, 1)], psi.clone(), 9);
    let assembled = assemble_ancestor(&base, 2, 3).unwrap();
    for c in [rat(2, 1), rat(-1, 1), rat(1, 3)] {
        let c2 = &c * &c;
        let delta_c: Vec<BigRational> =
            base.delta.iter().map(|d| d / &c2).collect();
        let gram_c = canonical_gram(&delta_c);
        let scaled = SemisimpleData::new(
            base.u.clone(),
            delta_c,
            psi.scale(&c),
            UpperTriangularR::new(
                gram_c,
                (0..=9).map(|k| base.r.mat(k)).collect(),
            )
            .unwrap(),
        )
        .unwrap();
        let lhs = assemble_ancestor(&scaled, 2, 3).unwrap();
        // align the dilaton storage before comparing: the rescaled datum
        // declares the unit c·Ψ·1
        let aligned = reframe(
            &lhs,
            &QMatrix::identity(2),
            assembled.gram().clone(),
            assembled.unit().to_vec(),
        )
        .unwrap();
        let rhs = linear_change_apply(&assembled, &QMatrix::identity(2), &c).unwrap();
        assert_eq!(aligned, rhs, "c = {c}");
    }
}

#[test]
fn pure_volume_rescaling_multiplies_genus_sectors() {
    // keeping the flat sections attached to the volume leaves the
    // variables alone: only the hbar-grading feels the rescale
    let psi = mat(&[&[1, 1], &[0, 2]]);
    let base = sample_rank2_data(vec![rat(2, 1), rat(-3, 1)], psi.clone(), 9);
    let assembled = assemble_ancestor(&base, 2, 3).unwrap();
    let c = rat(2, 1);
    let c2 = &c * &c;
    let delta_c: Vec<BigRational> = base.delta.iter().map(|d| d / &c2).collect();
    let gram_c = canonical_gram(&delta_c);
    let scaled = SemisimpleData::new(
        base.u.clone(),
        delta_c,
        psi,
        UpperTriangularR::new(gram_c, (0..=9).map(|k| base.r.mat(k)).collect()).unwrap(),
    )
    .unwrap();
    let lhs = assemble_ancestor(&scaled, 2, 3).unwrap();
    assert_eq!(lhs.unit(), assembled.unit());
    let lhs_terms = terms_of(&lhs);
    let rhs_terms = terms_of(&assembled);
    assert_eq!(lhs_terms.len(), rhs_terms.len());
    for ((g, key), v) in &rhs_terms {
        let mut scale = &c2 / &c2;
        for _ in 0..2 {
            scale *= &c;
        }
        for _ in 0..2 * g {
            scale /= &c;
        }
        assert_eq!(lhs_terms.get(&(*g, key.clone())).unwrap(), &(v * scale));
    }
}

#[test]
fn changing_the_flat_basis_is_a_linear_change_of_the_potential() {
    let psi = mat(&[&[1, 1], &[0, 2]]);
    let base = sample_rank2_data(vec![rat(2, 1), rat(-3, 1)], psi.clone(), 9);
    let assembled = assemble_ancestor(&base, 2, 3).unwrap();
    let b = mat(&[&[2, 1], &[1, 1]]);
    let b_inv = b.inverse().unwrap();
    let moved = SemisimpleData::new(
        base.u.clone(),
        base.delta.clone(),
        b_inv.matmul(&psi),
        base.r.clone(),
    )
    .unwrap();
    let lhs = assemble_ancestor(&moved, 2, 3).unwrap();
    let aligned = reframe(
        &lhs,
        &QMatrix::identity(2),
        assembled.gram().clone(),
        assembled.unit().to_vec(),
    )
    .unwrap();
    let rhs = linear_change_apply(&assembled, &b, &rat(1, 1)).unwrap();
    assert_eq!(aligned, rhs);
}

#[test]
fn composing_the_series_matches_quantized_post_action() {
    let psi = mat(&[&[1, 1], &[0, 2]]);
    let delta = vec![rat(2, 1), rat(-3, 1)];
    let gram = canonical_gram(&delta);
    let base = sample_rank2_data(delta.clone(), psi.clone(), 9);
    let extra = sample_r(&gram, &[mat(&[&[3, -1], &[2, 2]])], 9);
    // sequential quantized application composes through the series
    // product with the first-applied factor on the left
    let composed = SemisimpleData::new(
        base.u.clone(),
        delta,
        psi.clone(),
        base.r.product(&extra).unwrap(),
    )
    .unwrap();
    let rhs = assemble_ancestor(&composed, 2, 3).unwrap();

    let assembled = assemble_ancestor(&base, 2, 3).unwrap();
    let psi_inv = psi.inverse().unwrap();
    let conj_mats: Vec<QMatrix> = (0..=9)
        .map(|k| psi.matmul(&extra.mat(k)).matmul(&psi_inv))
        .collect();
    let extra_flat = UpperTriangularR::new(assembled.gram().clone(), conj_mats).unwrap();
    let lhs = quantized_r_apply(&extra_flat, &assembled).unwrap();
    assert_eq!(lhs, rhs);
}

#[test]
fn degenerate_data_is_rejected() {
    let gram1 = canonical_gram(&[rat(1, 1)]);
    let r1 = padded_identity(1, 3, gram1);
    assert_eq!(
        SemisimpleData::new(vec![rat(0, 1)], vec![rat(0, 1)], QMatrix::identity(1), r1.clone())
            .unwrap_err(),
        AncestorError::ZeroDelta(0)
    );
    let gram2 = canonical_gram(&[rat(1, 1), rat(1, 1)]);
    let r2 = padded_identity(2, 3, gram2);
    assert_eq!(
        SemisimpleData::new(
            vec![rat(7, 1), rat(7, 1)],
            vec![rat(1, 1), rat(1, 1)],
            QMatrix::identity(2),
            r2.clone()
        )
        .unwrap_err(),
        AncestorError::RepeatedCanonicalValue
    );
    assert_eq!(
        SemisimpleData::new(
            vec![rat(0, 1), rat(1, 1)],
            vec![rat(1, 1), rat(1, 1)],
            mat(&[&[1, 1], &[1, 1]]),
            r2.clone()
        )
        .unwrap_err(),
        AncestorError::SingularTransition
    );
    assert_eq!(
        SemisimpleData::new(
            vec![rat(0, 1), rat(1, 1)],
            vec![rat(2, 1), rat(1, 1)],
            QMatrix::identity(2),
            r2
        )
        .unwrap_err(),
        AncestorError::WrongPairing
    );
    // too few series coefficients for the requested jet cap
    let d = SemisimpleData::new(
        vec![rat(0, 1)],
        vec![rat(1, 1)],
        QMatrix::identity(1),
        padded_identity(1, 3, canonical_gram(&[rat(1, 1)])),
    )
    .unwrap();
    assert!(matches!(
        assemble_ancestor(&d, 2, 4),
        Err(AncestorError::Fock(givental_fock::FockError::OrderError { .. }))
    ));
}

/// Stationary-phase expansion of the one-variable cubic x³/3 − x at its
/// two critical points, computed exactly from Gaussian moments. The
/// resulting series, converted to the idempotent frame, must be an
/// upper-triangular symplectic series for the pairing diag(1/Δ) — a
/// sanity case where the series is pinned by an explicit integral.
#[test]
fn cubic_saddle_expansion_gives_a_symplectic_series() {
    let order = 5usize;
    // moments of exp(x_c·δ²/z): ⟨δ^{2p}⟩ = (2p−1)!!·(−1/(2x_c))^p z^p
    let moment = |p: u64, xc: i64| -> BigRational {
        let mut out = BigRational::one();
        let mut m = 2 * p as i64 - 1;
        while m >= 2 {
            out *= rat(m, 1);
            m -= 2;
        }
        for _ in 0..p {
            out *= rat(-1, 2 * xc);
        }
        out
    };
    // coefficient of z^k in the normalized expansion of ∫ x^a e^{F/z} dx
    // around the saddle x = xc, for a ∈ {0, 1}
    let series = |a: usize, xc: i64, k: u64| -> BigRational {
        let mut acc = BigRational::zero();
        for j in 0..=2 * k {
            let b = 2 * k as i64 - j as i64;
            if !(0..=a as i64).contains(&b) {
                continue;
            }
            // 1/(3^j j!) ⟨(xc + δ)^a picks xc^{a−b} δ^b⟩·⟨δ^{3j}⟩-joint
            let mut w = BigRational::one();
            for i in 1..=j {
                w /= rat(3 * i as i64, 1);
            }
            let xpow = if a as i64 - b == 1 { rat(xc, 1) } else { rat(1, 1) };
            let n = b as u64 + 3 * j;
            if n % 2 != 0 {
                continue;
            }
            acc += w * xpow * moment(n / 2, xc);
        }
        acc
    };
    let delta = vec![rat(2, 1), rat(-2, 1)];
    let gram = canonical_gram(&delta);
    let eta_inv = mat(&[&[0, 1], &[1, 0]]);
    let psi = qmat(&[&[rat(1, 2), rat(1, 2)], &[rat(1, 2), rat(-1, 2)]]);
    let psi_inv = psi.inverse().unwrap();
    let mut mats = Vec::new();
    for k in 0..=order as u64 {
        let mut col_t = QMatrix::zeros(2, 2);
        for (i, &xc) in [1i64, -1].iter().enumerate() {
            for a in 0..2usize {
                col_t[(a, i)] = series(a, xc, k) / &delta[i];
            }
        }
        mats.push(psi_inv.matmul(&eta_inv).matmul(&col_t));
    }
    assert_eq!(mats[0], QMatrix::identity(2));
    assert!(!mats[1].is_zero());
    let r = UpperTriangularR::new(gram, mats);
    assert!(r.is_ok(), "stationary-phase series should be symplectic: {r:?}");
    let d = SemisimpleData::new(
        vec![rat(-2, 3), rat(2, 3)],
        delta,
        psi,
        r.unwrap(),
    )
    .unwrap();
    let f = assemble_ancestor(&d, 1, 2).unwrap();
    assert!(f.is_tame());
    assert!(!f.is_zero());
}
