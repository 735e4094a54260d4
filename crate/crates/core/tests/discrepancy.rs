mod common;

use common::{oracle, pts, random_set, rng};
use num_rational::BigRational;
use proptest::prelude::*;
use rand::Rng;
use xordisc::discrepancy::{l2_squared, linf_exact, local_discrepancy, lq_grid};
use xordisc::{DyadicPoint, Exponent, PointSet};

fn linf_ratio(set: &PointSet) -> BigRational {
    linf_exact(set).unwrap().exact.unwrap().ratio
}

#[test]
fn l2_inside_mesh_bracket() {
    let mut r = rng(21);
    for trial in 0..12 {
        let d = 1 + trial % 2;
        let n = r.gen_range(1..=10);
        let set = random_set(&mut r, d, n, 9);
        let mesh = oracle::mesh(&pts(&set), 6);
        let l2 = l2_squared(&set);
        let (lo, hi) = (mesh.ratio(mesh.lower, 3), mesh.ratio(mesh.upper, 3));
        assert!(lo <= l2 && l2 <= hi, "d = {d}: {lo} ≤ {l2} ≤ {hi}");
        let riemann = mesh.ratio(mesh.riemann, 3);
        assert!(num_traits::Signed::abs(&(l2 - riemann)) <= &hi - &lo);
    }
}

#[test]
fn linf_between_corner_and_cell_bounds() {
    let mut r = rng(23);
    for trial in 0..12 {
        let d = 1 + trial % 3;
        let n = r.gen_range(1..=12);
        let set = random_set(&mut r, d, n, 10);
        let m = if d == 3 { 5 } else { 7 };
        let mesh = oracle::mesh(&pts(&set), m);
        let v = linf_ratio(&set);
        assert!(mesh.ratio(mesh.corner_max as u128, 1) <= v);
        assert!(v <= mesh.ratio(mesh.cell_max as u128, 1));
        for _ in 0..50 {
            let y: Vec<u64> = (0..d).map(|_| r.gen_range(0..1 << 12)).collect();
            let l = oracle::local(&pts(&set), &y, 12);
            assert!(num_traits::Signed::abs(&l) <= v);
        }
    }
}

#[test]
fn empty_set_is_zero() {
    let set = PointSet::empty(2, 8).unwrap();
    assert_eq!(l2_squared(&set), BigRational::from_integer(0.into()));
    assert_eq!(linf_exact(&set).unwrap().value, 0.0);
    let y = DyadicPoint::new(vec![3, 5], 3).unwrap();
    assert!(local_discrepancy(&set, &y).unwrap().is_zero());
}

fn arb_set() -> impl Strategy<Value = PointSet> {
    (1usize..=3, 1usize..=10, 1u32..=10).prop_flat_map(|(d, n, w)| {
        proptest::collection::vec(0u64..(1 << w), d * n).prop_map(move |m| PointSet::new(d, w, m).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bracket_contains_l2(set in arb_set(), s in 1u32..=5) {
        let l2 = num_traits::ToPrimitive::to_f64(&l2_squared(&set)).unwrap().sqrt();
        let b = lq_grid(&set, Exponent::Finite(2.0), s).unwrap();
        prop_assert!(b.lower <= l2 * (1.0 + 1e-12) && l2 <= b.upper * (1.0 + 1e-12));
    }

    #[test]
    fn norms_are_ordered(set in arb_set(), s in 1u32..=4) {
        let l1 = lq_grid(&set, Exponent::Finite(1.0), s).unwrap();
        let l2 = num_traits::ToPrimitive::to_f64(&l2_squared(&set)).unwrap().sqrt();
        let li = linf_exact(&set).unwrap().value;
        prop_assert!(l1.lower <= l2 * (1.0 + 1e-12));
        prop_assert!(l2 <= li * (1.0 + 1e-12));
    }

    #[test]
    fn order_of_points_is_irrelevant(set in arb_set()) {
        let mut rows: Vec<Vec<u64>> = set.rows().map(|r| r.to_vec()).collect();
        rows.reverse();
        let flipped = PointSet::new(set.dim(), set.precision(), rows.concat()).unwrap();
        prop_assert_eq!(l2_squared(&set), l2_squared(&flipped));
        prop_assert_eq!(linf_ratio(&set), linf_ratio(&flipped));
    }
}
