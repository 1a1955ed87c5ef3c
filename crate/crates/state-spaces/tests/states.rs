use fermat_weights::{Narrow, Sector, WeightSystem};
use num_traits::Zero;
use proptest::prelude::*;
use series_core::{rat, rint, BigRational};
use state_spaces::*;

fn w333() -> WeightSystem {
    WeightSystem::new(&[3, 3, 3]).unwrap()
}

fn sec(nums: &[u64]) -> Sector {
    Sector { nums: nums.to_vec() }
}

#[test]
fn pairing_one_nonzero_entry() {
    let w = w333();
    let a = CRClass::from_term(&w, &sec(&[1, 0, 0]), 0, rint(1));
    let b = CRClass::from_term(&w, &sec(&[2, 0, 0]), 0, rint(1));
    assert_eq!(cr_pairing(&a, &b).unwrap(), rat(1, 3));
}

#[test]
fn unit_pairs_to_zero_with_itself() {
    let w = w333();
    let one = CRClass::unit(&w);
    assert_eq!(cr_pairing(&one, &one).unwrap(), rint(0));
    // the complement of 1_0 is p·1_0 (k+k' = dim Y_0 = 1); |G_0| = 1
    let p = one.mul_p();
    assert_eq!(cr_pairing(&one, &p).unwrap(), rint(1));
}

#[test]
fn product_monomial_relation_d_phi_cubed_is_p() {
    let w = w333();
    let m = cr_product_monomial(&w, &[3, 0, 0]).unwrap();
    let expected = CRClass::unit(&w).mul_p().scale(&rat(1, 3));
    assert_eq!(m, expected);
}

#[test]
fn product_monomial_identity_and_twisted() {
    let w = w333();
    assert_eq!(cr_product_monomial(&w, &[0, 0, 0]).unwrap(), CRClass::unit(&w));
    // (1/3,1/3,0) fixes only [0:0:1], which misses the cubic: the sector is
    // empty and the class vanishes
    let m = cr_product_monomial(&w, &[1, 1, 0]).unwrap();
    assert!(m.is_zero());
    let tw = cr_product_monomial(&w, &[2, 0, 0]).unwrap();
    assert_eq!(tw, CRClass::from_term(&w, &sec(&[2, 0, 0]), 0, rint(1)));
}

#[test]
fn degrees() {
    let w = w333();
    assert_eq!(CRClass::unit(&w).degree().unwrap(), rint(0));
    assert_eq!(CRClass::unit(&w).mul_p().degree().unwrap(), rint(1));
    let tw = CRClass::from_term(&w, &sec(&[2, 0, 0]), 0, rint(1));
    assert_eq!(tw.degree().unwrap(), rat(2, 3));
    assert_eq!(cr_degree_formula(&w, &[1, 1, 1], 0), rint(1));
    let mixed = CRClass::unit(&w).add(&tw);
    assert!(matches!(mixed.degree(), Err(StateError::NotHomogeneous(_))));
}

#[test]
fn fjrw_degree_and_pairing() {
    let w = w333();
    let unit = FJRWClass::unit(&w);
    assert_eq!(unit.degree().unwrap(), rint(0));
    let a = FJRWClass::from_term(&w, &Narrow { nums: vec![1, 1, 1] }, rint(1));
    let b = FJRWClass::from_term(&w, &Narrow { nums: vec![2, 2, 2] }, rint(1));
    assert_eq!(fjrw_pairing(&a, &b).unwrap(), rint(1));
    assert_eq!(b.degree().unwrap(), rint(1));
    assert_eq!(fjrw_pairing(&a, &a).unwrap(), rint(0));
}

#[test]
fn gram_structure() {
    for d in [vec![3u64, 3, 3], vec![2, 3, 6], vec![4, 4, 4, 4]] {
        let w = WeightSystem::new(&d).unwrap();
        let g = cr_gram(&w).unwrap();
        let n = w.milnor_number() as usize;
        assert_eq!(g.rows, n);
        // exactly one nonzero entry per row/column: permuted block-antidiagonal
        for i in 0..n {
            assert_eq!((0..n).filter(|&j| !g[(i, j)].is_zero()).count(), 1);
            assert_eq!((0..n).filter(|&j| !g[(j, i)].is_zero()).count(), 1);
        }
        assert!(!g.det().is_zero());

        let eta = fjrw_gram(&w);
        for i in 0..n {
            assert_eq!((0..n).filter(|&j| !eta[(i, j)].is_zero()).count(), 1);
            let j = (0..n).find(|&j| !eta[(i, j)].is_zero()).unwrap();
            assert_eq!(eta[(i, j)], rint(1));
        }
    }
}

#[test]
fn fjrw_pairing_degree_complement() {
    for d in [vec![3u64, 3, 3], vec![2, 3, 6], vec![4, 4, 4, 4]] {
        let w = WeightSystem::new(&d).unwrap();
        let n = w.n() as i64;
        for a in w.narrow_set() {
            let b = w.narrow_involution(&a);
            let ca = FJRWClass::from_term(&w, &a, rint(1));
            let cb = FJRWClass::from_term(&w, &b, rint(1));
            assert_eq!(fjrw_pairing(&ca, &cb).unwrap(), rint(1));
            assert_eq!(
                ca.degree().unwrap() + cb.degree().unwrap(),
                rint(n - 2)
            );
        }
    }
}

fn arb_class(w: WeightSystem) -> impl Strategy<Value = CRClass> {
    let basis = cr_basis(&w).unwrap();
    proptest::collection::vec((0..basis.len(), -9i64..10), 0..6).prop_map(move |terms| {
        let mut c = CRClass::zero(&w);
        for (i, a) in terms {
            let (s, k) = &basis[i];
            c.add_term(s, *k, rint(a));
        }
        c
    })
}

proptest! {
    #[test]
    fn pairing_symmetric(a in arb_class(w333()), b in arb_class(w333())) {
        prop_assert_eq!(cr_pairing(&a, &b).unwrap(), cr_pairing(&b, &a).unwrap());
    }

    #[test]
    fn pairing_bilinear(a in arb_class(w333()), b in arb_class(w333()), c in arb_class(w333())) {
        let lhs = cr_pairing(&a.add(&b), &c).unwrap();
        let rhs = cr_pairing(&a, &c).unwrap() + cr_pairing(&b, &c).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn monomial_p_recursion(beta in proptest::collection::vec(0u64..5, 3), i in 0usize..3) {
        let w = w333();
        let mut shifted = beta.clone();
        shifted[i] += 3;
        let lhs = cr_product_monomial(&w, &shifted).unwrap();
        let rhs = cr_product_monomial(&w, &beta).unwrap().mul_p().scale(&rat(1, 3));
        prop_assert_eq!(lhs, rhs);
    }
}

#[test]
fn mismatched_weights_error() {
    let a = CRClass::unit(&w333());
    let b = CRClass::unit(&WeightSystem::new(&[4, 4, 4, 4]).unwrap());
    assert_eq!(cr_pairing(&a, &b), Err(StateError::MismatchedWeights));
}

#[test]
fn basis_size_is_milnor() {
    for d in [vec![3u64, 3, 3], vec![2, 3, 6], vec![4, 4, 4, 4], vec![5, 5, 5, 5, 5]] {
        let w = WeightSystem::new(&d).unwrap();
        assert_eq!(cr_basis(&w).unwrap().len() as u128, w.milnor_number());
    }
}

#[test]
fn zero_is_zero() {
    let w = w333();
    assert!(CRClass::zero(&w).is_zero());
    assert_eq!(CRClass::zero(&w).degree().unwrap(), BigRational::zero());
}
