use num_traits::{One, Zero};
use proptest::prelude::*;
use series_core::{rat, rint, BigRational, QMatrix};

#[test]
fn inverse_of_known_matrix() {
    let m = QMatrix::from_rows(vec![
        vec![rint(2), rint(1)],
        vec![rint(1), rint(1)],
    ]);
    let inv = m.inverse().unwrap();
    assert_eq!(m.matmul(&inv), QMatrix::identity(2));
    assert_eq!(inv[(0, 0)], rint(1));
    assert_eq!(inv[(0, 1)], rint(-1));
}

#[test]
fn singular_has_no_inverse() {
    let m = QMatrix::from_rows(vec![
        vec![rint(1), rint(2)],
        vec![rint(2), rint(4)],
    ]);
    assert!(m.inverse().is_none());
    assert_eq!(m.rank(), 1);
    assert_eq!(m.det(), BigRational::zero());
    let k = m.kernel();
    assert_eq!(k.len(), 1);
    assert!(m.matvec(&k[0]).iter().all(|x| x.is_zero()));
}

#[test]
fn solve_consistent_system() {
    let m = QMatrix::from_rows(vec![
        vec![rint(1), rint(2), rint(0)],
        vec![rint(0), rint(1), rint(1)],
    ]);
    let b = vec![rint(5), rint(3)];
    let x = m.solve(&b).unwrap();
    assert_eq!(m.matvec(&x), b);
}

#[test]
fn det_triangular() {
    let m = QMatrix::from_rows(vec![
        vec![rat(1, 2), rint(7), rint(9)],
        vec![rint(0), rint(3), rint(-1)],
        vec![rint(0), rint(0), rint(4)],
    ]);
    assert_eq!(m.det(), rint(6));
}

fn arb_matrix(n: usize) -> impl Strategy<Value = QMatrix> {
    proptest::collection::vec(-9i64..10, n * n).prop_map(move |v| {
        let rows = v
            .chunks(n)
            .map(|r| r.iter().map(|&x| rint(x)).collect())
            .collect();
        QMatrix::from_rows(rows)
    })
}

proptest! {
    #[test]
    fn inverse_round_trip(m in arb_matrix(3)) {
        if let Some(inv) = m.inverse() {
            prop_assert_eq!(m.matmul(&inv), QMatrix::identity(3));
            prop_assert_eq!(inv.matmul(&m), QMatrix::identity(3));
        } else {
            prop_assert_eq!(m.det(), BigRational::zero());
        }
    }

    #[test]
    fn det_multiplicative(a in arb_matrix(3), b in arb_matrix(3)) {
        prop_assert_eq!(a.matmul(&b).det(), a.det() * b.det());
    }

    #[test]
    fn rank_plus_nullity(m in arb_matrix(3)) {
        prop_assert_eq!(m.rank() + m.kernel().len(), 3);
    }

    #[test]
    fn det_nonzero_iff_full_rank(m in arb_matrix(3)) {
        prop_assert_eq!(m.det() != BigRational::zero(), m.rank() == 3);
        let _ = BigRational::one();
    }
}
