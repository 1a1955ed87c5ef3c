use fermat_weights::{Narrow, WeightSystem};
use proptest::prelude::*;
use series_core::rat;

#[test]
fn milnor_numbers() {
    for (d, n) in [
        (vec![3, 3, 3], 8u128),
        (vec![2, 3, 6], 10),
        (vec![4, 4, 4, 4], 81),
        (vec![5, 5, 5, 5, 5], 1024),
    ] {
        let w = WeightSystem::new(&d).unwrap();
        assert_eq!(w.milnor_number(), n);
        assert_eq!(w.ghost_box().len() as u128, n);
    }
}

#[test]
fn derived_degrees() {
    let (d, w) = WeightSystem::new(&[3, 3, 3]).unwrap().derived_degrees();
    assert_eq!((d, w), (3, vec![1, 1, 1]));
    let (d, w) = WeightSystem::new(&[2, 3, 6]).unwrap().derived_degrees();
    assert_eq!((d, w), (6, vec![3, 2, 1]));
    let (d, w) = WeightSystem::new(&[4, 4, 4, 4]).unwrap().derived_degrees();
    assert_eq!((d, w), (4, vec![1, 1, 1, 1]));
}

#[test]
fn shift_of_zero_is_exponential_element() {
    let w = WeightSystem::new(&[3, 3, 3]).unwrap();
    let j = w.shift(&vec![0, 0, 0]);
    assert_eq!(j.phases(&w), vec![rat(1, 3), rat(1, 3), rat(1, 3)]);
    assert_eq!(j, w.exponential_element());
    assert!(j.degree(&w) == rat(0, 1));
}

#[test]
fn sectors_of_333() {
    let w = WeightSystem::new(&[3, 3, 3]).unwrap();
    let sectors = w.sectors().unwrap();
    // untwisted + 6 one-variable twists: total dim of H_CR = Milnor number
    let total: usize = sectors.iter().map(|c| c.dim() + 1).sum();
    assert_eq!(total, 8);
    let c = sectors
        .iter()
        .find(|c| c.nums == vec![1, 0, 0])
        .expect("sector (1/3,0,0) present");
    assert_eq!(c.dim(), 0);
    assert_eq!(c.stabilizer_order(&w), 3);
}

#[test]
fn non_cy_rejected_for_sectors() {
    let w = WeightSystem::new(&[3, 3]).unwrap();
    assert!(!w.is_calabi_yau());
    assert!(w.sectors().is_err());
    assert!(WeightSystem::new_calabi_yau(&[3, 3]).is_err());
}

#[test]
fn cy_flag() {
    assert!(WeightSystem::new(&[2, 3, 6]).unwrap().is_calabi_yau());
    assert!(WeightSystem::new(&[5, 5, 5, 5, 5]).unwrap().is_calabi_yau());
    assert!(!WeightSystem::new(&[2, 3, 7]).unwrap().is_calabi_yau());
}

#[test]
fn ghost_box_cardinality_exhaustive() {
    // every weight system with d_i ≤ 8, n ≤ 5 drawn from a fixed pool
    for n in 1..=5usize {
        for base in 2..=8u64 {
            let d: Vec<u64> = (0..n).map(|i| ((base + i as u64 - 2) % 7) + 2).collect();
            let w = WeightSystem::new(&d).unwrap();
            assert_eq!(w.ghost_box().len() as u128, w.milnor_number());
        }
    }
}

fn arb_ws() -> impl Strategy<Value = WeightSystem> {
    proptest::collection::vec(2u64..8, 1..5)
        .prop_map(|d| WeightSystem::new(&d).unwrap())
}

proptest! {
    #[test]
    fn shift_is_bijective_and_involution_matches(w in arb_ws()) {
        let ghosts = w.ghost_box();
        let narrows = w.narrow_set();
        let mut seen = std::collections::BTreeSet::new();
        for (b, g) in ghosts.iter().zip(&narrows) {
            prop_assert!(w.is_narrow(&g.nums));
            prop_assert_eq!(&w.unshift(g), b);
            seen.insert(g.clone());
            // involution Θ ↦ 1−Θ corresponds to b ↦ (d−2)−b
            let invol = w.narrow_involution(g);
            let b_dual: Vec<u64> = b
                .iter()
                .zip(w.exponents())
                .map(|(&bj, &dj)| (dj - 2) - bj)
                .collect();
            prop_assert_eq!(w.shift(&b_dual), invol);
        }
        prop_assert_eq!(seen.len() as u128, w.milnor_number());
    }

    #[test]
    fn narrow_involution_is_involution(w in arb_ws()) {
        for g in w.narrow_set() {
            prop_assert_eq!(w.narrow_involution(&w.narrow_involution(&g)), g);
        }
    }

    #[test]
    fn sector_stabilizer_denominators(d in proptest::sample::select(vec![
        vec![3u64,3,3], vec![2,3,6], vec![4,4,4,4], vec![2,4,4,4], vec![2,2,3,3,6]
    ])) {
        let w = WeightSystem::new(&d).unwrap();
        prop_assume!(w.is_calabi_yau());
        for c in w.sectors().unwrap() {
            let g = c.stabilizer_order(&w);
            // every nonzero phase has denominator dividing |G_c|
            for (&a, &di) in c.nums.iter().zip(w.exponents()) {
                if a != 0 {
                    prop_assert_eq!(g % di, 0);
                }
            }
            let dual = c.dual(&w);
            prop_assert_eq!(dual.stabilizer_order(&w), g);
            prop_assert_eq!(dual.dual(&w), c);
        }
    }
}

#[test]
fn narrow_type_is_exported() {
    let w = WeightSystem::new(&[3, 3, 3]).unwrap();
    let g = Narrow { nums: vec![2, 2, 2] };
    assert!(w.is_narrow(&g.nums));
    assert_eq!(g.degree(&w), rat(1, 1));
}
