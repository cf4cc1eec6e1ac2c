use proptest::prelude::*;

use pwtest::class::Class;
use pwtest::distance::{dist_grid_general, dist_step_exhaustive, dist_step_to_piecewise_const, StepFunction};
use pwtest::instances::gen_in_class;

fn step(values: Vec<usize>) -> StepFunction {
    StepFunction::equal_pieces(values.into_iter().map(|v| v as f64).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dp_matches_exhaustive(values in prop::collection::vec(0usize..3, 1..=8), k in 1usize..=3) {
        let f = step(values);
        let dp = dist_step_to_piecewise_const(&f, k).unwrap();
        let ex = dist_step_exhaustive(&f, k).unwrap();
        prop_assert!((dp - ex).abs() < 1e-12, "dp {} exhaustive {}", dp, ex);
    }

    #[test]
    fn distance_nonincreasing_in_k(values in prop::collection::vec(0usize..2, 1..40)) {
        let f = step(values);
        let d: Vec<f64> = (1..=6).map(|k| dist_step_to_piecewise_const(&f, k).unwrap()).collect();
        prop_assert!(d.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{:?}", d);
        prop_assert!(d.iter().all(|&x| (0.0..=0.5 + 1e-12).contains(&x)));
    }

    #[test]
    fn grid_matches_dp_on_aligned_steps(values in prop::collection::vec(0usize..3, 1..=8), k in 1usize..=3) {
        // Grid midpoints never land on breakpoints that are multiples of 1/n.
        let n = values.len();
        let f = step(values);
        let grid = dist_grid_general(&f, &Class::constants(), k, 64 * n).unwrap();
        let dp = dist_step_to_piecewise_const(&f, k).unwrap();
        prop_assert!((grid - dp).abs() < 1e-12, "grid {} dp {}", grid, dp);
    }
}

#[test]
fn in_class_targets_have_zero_distance() {
    for seed in 0..10 {
        let f = gen_in_class(&Class::constants(), 6, seed).unwrap();
        assert_eq!(dist_grid_general(&f, &Class::constants(), 6, 512).unwrap(), 0.0);
        let g = gen_in_class(&Class::polynomials(1), 2, seed).unwrap();
        assert_eq!(dist_grid_general(&g, &Class::polynomials(1), 2, 64).unwrap(), 0.0);
    }
}

#[test]
fn alternating_quarters_example() {
    let f = step(vec![0, 1, 0, 1]);
    assert_eq!(dist_step_to_piecewise_const(&f, 2).unwrap(), 0.25);
    for n in 1..=4 {
        let f = step((0..2 * n).map(|i| i % 2).collect());
        let expected = (n as f64 - 1.0) / (2.0 * n as f64);
        assert!((dist_step_to_piecewise_const(&f, 2).unwrap() - expected).abs() < 1e-12);
    }
}
