use fermat_weights::WeightSystem;
use fjrw_ifunction::{
    box_element, f0_w_closed, ghost_degree, ghost_split, gkz_euler_residual, gkz_shift_residual,
    i_lg, i_lg_restricted, i_lg_weighted, lg_index, mir_lg, mirror_map_lg, pairing_check,
    LGError,
};
use num_traits::{One, Signed, Zero};
use series_core::{rat, rint, BigRational, ZLaurent};
use state_spaces::fjrw_gram;

fn e6() -> WeightSystem {
    WeightSystem::new_calabi_yau(&[3, 3, 3]).unwrap()
}

fn ghost_slot(ws: &WeightSystem, b: &[u64]) -> usize {
    ws.ghost_box().iter().position(|g| g == b).unwrap()
}

#[test]
fn box_element_base_cases() {
    let ws = e6();
    let zero_nu = vec![0u64; ws.ghost_box().len()];

    // no ghosts: every nu_j is -1/3, no numerator factors, box is 1
    let idx = lg_index(&ws, &[0, 0, 0], &zero_nu).unwrap();
    assert!(idx.nu_j.iter().all(|x| x == &rat(-1, 3)));
    assert_eq!(box_element(&idx), ZLaurent::monomial(rint(1), 0));
    assert_eq!(idx.gamma_nums(&ws), vec![1, 1, 1]);
    assert_eq!(ws.exponential_element().nums, vec![1, 1, 1]);

    // one copy of the diagonal ghost: nu_j = -2/3, box is 1/z
    let mut nu = zero_nu.clone();
    nu[ghost_slot(&ws, &[1, 1, 1])] = 1;
    let idx = lg_index(&ws, &[0, 0, 0], &nu).unwrap();
    assert!(idx.nu_j.iter().all(|x| x == &rat(-2, 3)));
    assert_eq!(box_element(&idx), ZLaurent::monomial(rint(1), -1));
    assert_eq!(idx.gamma_nums(&ws), vec![2, 2, 2]);

    // an integer -nu_j contributes the factor (nu_j + 1) = 0
    let idx = lg_index(&ws, &[2, 0, 0], &zero_nu).unwrap();
    assert_eq!(idx.nu_j[0], rat(-1, 1));
    assert!(box_element(&idx).is_zero());

    // three diagonal ghosts: coefficient (-1/3)^3 / 3! at z^0
    let mut nu = zero_nu;
    nu[ghost_slot(&ws, &[1, 1, 1])] = 3;
    let idx = lg_index(&ws, &[0, 0, 0], &nu).unwrap();
    assert_eq!(box_element(&idx), ZLaurent::monomial(rat(-1, 162), 0));
}

#[test]
fn assembly_preconditions() {
    let non_cy = WeightSystem::new(&[3, 3]).unwrap();
    assert_eq!(i_lg(&non_cy, &[0, 0], 1).unwrap_err(), LGError::NotCalabiYau);
    assert!(matches!(
        i_lg(&e6(), &[0, 0], 1).unwrap_err(),
        LGError::VariableCountMismatch { got: 2, want: 3 }
    ));
}

#[test]
fn constant_term_is_the_shifted_unit() {
    for ws in [e6(), WeightSystem::new_calabi_yau(&[2, 3, 6]).unwrap()] {
        for (slot, b) in ws.ghost_box().iter().enumerate() {
            let f = i_lg(&ws, b, 2).unwrap();
            assert_eq!(f.narrows()[slot], ws.shift(b));
            assert_eq!(f.constant_term(), vec![(slot, ZLaurent::monomial(rint(1), 0))]);
        }
    }
}

#[test]
fn mirror_image_is_negated() {
    let ws = e6();
    let m = mir_lg(&ws, &[0, 0, 0], 2).unwrap();
    assert_eq!(m.constant_term(), vec![(0, ZLaurent::monomial(rint(-1), 0))]);
}

#[test]
fn every_term_is_weighted_homogeneous() {
    for ws in [e6(), WeightSystem::new_calabi_yau(&[2, 3, 6]).unwrap()] {
        let ghosts = ws.ghost_box();
        let t_degs: Vec<BigRational> = ghosts.iter().map(|b| ghost_degree(&ws, b)).collect();
        for e in [vec![0; ws.n()], ghosts[1].clone(), ghosts.last().unwrap().clone()] {
            let expected: BigRational = e
                .iter()
                .zip(ws.exponents())
                .map(|(&x, &d)| rat(x as i64, d as i64))
                .sum();
            let f = i_lg(&ws, &e, 3).unwrap();
            let mut seen = 0u32;
            for (slot, comp) in f.components().iter().enumerate() {
                let gdeg = f.narrows()[slot].degree(&ws);
                for (exp, zl) in comp.iter() {
                    let t_part: BigRational = exp
                        .iter()
                        .zip(&t_degs)
                        .map(|(&m, d)| rat(m as i64, 1) * d)
                        .sum();
                    for (zexp, c) in zl.iter() {
                        assert!(!c.is_zero());
                        assert_eq!(&t_part + rat(zexp, 1) + &gdeg, expected, "e {e:?} exp {exp:?}");
                        seen += 1;
                    }
                }
            }
            assert!(seen > 5, "only {seen} terms inspected");
        }
    }
}

#[test]
fn weighted_variant_caps_the_total_ghost_weight() {
    let ws = e6();
    let e = [0, 0, 0];
    let full = i_lg(&ws, &e, 3).unwrap();
    assert_eq!(i_lg_weighted(&ws, &e, 3, &BigRational::zero()).unwrap(), full);
    assert_eq!(
        i_lg_weighted(&ws, &e, 3, &rat(1, 2)).unwrap(),
        i_lg(&ws, &e, 2).unwrap()
    );
    assert_eq!(
        i_lg_weighted(&ws, &e, 3, &rat(2, 3)).unwrap(),
        i_lg(&ws, &e, 1).unwrap()
    );
    // the capped variant drops terms the full one keeps
    let capped = i_lg_weighted(&ws, &e, 3, &rat(1, 2)).unwrap();
    let diag = ghost_slot(&ws, &[1, 1, 1]);
    let mut cube = vec![0u32; ws.ghost_box().len()];
    cube[diag] = 3;
    assert!(capped.component(0).coeff(&cube).is_zero());
    assert!(!full.component(0).coeff(&cube).is_zero());
}

#[test]
fn ghost_directions_split_by_degree_sign() {
    let ws = e6();
    let (rel, mar, irr) = ghost_split(&ws);
    assert_eq!(rel.len(), 7);
    assert_eq!(mar, vec![ghost_slot(&ws, &[1, 1, 1])]);
    assert!(irr.is_empty());

    let quintic = WeightSystem::new_calabi_yau(&[5, 5, 5, 5, 5]).unwrap();
    let ghosts = quintic.ghost_box();
    let (rel, mar, irr) = ghost_split(&quintic);
    for &i in &rel {
        assert!(ghosts[i].iter().sum::<u64>() < 5);
    }
    for &i in &mar {
        assert_eq!(ghosts[i].iter().sum::<u64>(), 5);
    }
    for &i in &irr {
        assert!(ghosts[i].iter().sum::<u64>() > 5);
    }
    assert_eq!(rel.len() + mar.len() + irr.len(), ghosts.len());
    assert!(!irr.is_empty());
}

#[test]
fn gkz_relations_hold_and_detect_perturbations() {
    let ws = e6();
    let ghosts = ws.ghost_box();
    let e = vec![0u64, 0, 0];
    let order = 3;
    let i0 = i_lg(&ws, &e, order).unwrap();
    let shifted: Vec<_> = ghosts
        .iter()
        .map(|b| {
            let eb: Vec<u64> = e.iter().zip(b).map(|(&x, &y)| x + y).collect();
            i_lg(&ws, &eb, order).unwrap()
        })
        .collect();
    for slot in 0..ghosts.len() {
        for r in gkz_shift_residual(&i0, &shifted[slot], slot) {
            assert!(r.is_zero(), "shift relation fails for ghost {:?}", ghosts[slot]);
        }
    }
    for axis in 0..3 {
        let mut ea = e.clone();
        ea[axis] += ws.exponents()[axis];
        let axis_shifted = i_lg(&ws, &ea, order).unwrap();
        for r in gkz_euler_residual(&i0, &shifted, &axis_shifted, axis) {
            assert!(r.is_zero(), "euler relation fails on axis {axis}");
        }
    }

    // a wrong coefficient anywhere must leave a visible residual
    let slot = ghost_slot(&ws, &[1, 0, 0]);
    let mut bad = shifted[slot].clone();
    bad.add_component_term(0, vec![0; ghosts.len()], ZLaurent::monomial(rat(1, 7), 0));
    assert!(gkz_shift_residual(&i0, &bad, slot).iter().any(|r| !r.is_zero()));
}

#[test]
fn mirror_map_on_the_marginal_plane() {
    let ws = e6();
    // the three coordinate directions plus the diagonal marginal one
    let active = vec![
        ghost_slot(&ws, &[1, 0, 0]),
        ghost_slot(&ws, &[0, 1, 0]),
        ghost_slot(&ws, &[0, 0, 1]),
        ghost_slot(&ws, &[1, 1, 1]),
    ];
    let order = 3;
    let mir = mirror_map_lg(&ws, order, &active).unwrap();
    let n = mir.ghosts.len();

    // the plus factor of the unit column is a scalar series in the
    // marginal variable times the unit row
    let closed = f0_w_closed(&ws, 1);
    assert_eq!(closed[0], BigRational::one());
    assert_eq!(closed[1], rat(-1, 162));
    for row in 0..n {
        let entry = mir.upsilon.get(row, 0);
        for (exp, zl) in entry.iter() {
            assert_eq!(zl.min_exp(), Some(0), "plus factor must be z-free here");
            assert_eq!(zl.max_exp(), Some(0));
            if row == 0 {
                assert!(
                    exp[..3].iter().all(|&m| m == 0),
                    "unit plus-part depends only on the marginal direction"
                );
                let m = exp[3] as usize;
                assert_eq!(m % 3, 0);
                assert_eq!(zl.coeff(0), closed[m / 3].clone());
            } else {
                panic!("off-unit row {row} of the unit plus column is nonzero");
            }
        }
    }

    // mirror map: zero at t = 0, with unit linear terms along the
    // coordinate directions landing on the shifted generators
    let zero_exp = vec![0u32; active.len()];
    for row in 0..n {
        assert!(mir.tau[row].coeff(&zero_exp).is_zero());
    }
    for (var, &gi) in active.iter().enumerate().take(3) {
        let mut exp = vec![0u32; active.len()];
        exp[var] = 1;
        for row in 0..n {
            let c = mir.tau[row].coeff(&exp);
            if row == gi {
                assert_eq!(c, BigRational::one());
            } else {
                assert!(c.is_zero());
            }
        }
    }
}

#[test]
fn full_frame_factorization_at_low_order() {
    let ws = e6();
    let all: Vec<usize> = (0..ws.ghost_box().len()).collect();
    let mir = mirror_map_lg(&ws, 2, &all).unwrap();
    let zero_exp = vec![0u32; all.len()];
    let n = mir.ghosts.len();
    for row in 0..n {
        assert!(mir.tau[row].coeff(&zero_exp).is_zero());
        for col in 0..n {
            let head = mir.l_minus.get(row, col).coeff(&zero_exp);
            let want = if row == col {
                ZLaurent::monomial(BigRational::one(), 0)
            } else {
                ZLaurent::zero()
            };
            assert_eq!(head, want, "minus factor is the identity at t = 0");
        }
    }
    // restriction to an active plane agrees with restricting the inputs:
    // the sub-plane columns match the restricted assembly exactly
    let active = vec![0usize, 7];
    let sub = i_lg_restricted(&ws, &ws.ghost_box()[7], 2, &active).unwrap();
    let full = i_lg(&ws, &ws.ghost_box()[7], 2).unwrap();
    for slot in 0..n {
        for (exp, zl) in sub.component(slot).iter() {
            let mut full_exp = vec![0u32; n];
            full_exp[0] = exp[0];
            full_exp[7] = exp[1];
            assert_eq!(full.component(slot).coeff(&full_exp), zl.clone());
        }
    }
}

#[test]
fn pairing_gram_is_the_involution_pairs_matrix() {
    let ws = e6();
    assert_eq!(pairing_check(&ws, 2).unwrap(), fjrw_gram(&ws));
    let ws2 = WeightSystem::new_calabi_yau(&[2, 3, 6]).unwrap();
    assert_eq!(pairing_check(&ws2, 2).unwrap(), fjrw_gram(&ws2));
}

#[test]
fn ghost_degree_signs_match_the_split() {
    let ws = WeightSystem::new_calabi_yau(&[4, 4, 4, 4]).unwrap();
    let (rel, mar, irr) = ghost_split(&ws);
    let ghosts = ws.ghost_box();
    for &i in &rel {
        assert!(ghost_degree(&ws, &ghosts[i]).is_positive());
    }
    for &i in &mar {
        assert!(ghost_degree(&ws, &ghosts[i]).is_zero());
    }
    for &i in &irr {
        assert!(ghost_degree(&ws, &ghosts[i]).is_negative());
    }
}
