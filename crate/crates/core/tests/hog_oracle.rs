mod common;

use common::oracle::{naive_hog, textbook_pearson, two_pass_variance};
use palmnav_core::classify::pearson_corr;
use palmnav_core::hog::{cell_histograms_from_gray, hog_descriptor, hog_variance, variance_of};
use palmnav_core::rng::rng_for;
use palmnav_core::{HogParams, ImageBuffer};
use proptest::prelude::*;
use rand::Rng;

fn random_window(side: usize, seed: u64) -> ImageBuffer {
    let mut rng = rng_for(seed, "window");
    ImageBuffer::from_gray_fn(side, side, |_, _| rng.random()).unwrap()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn check_against_oracle(params: HogParams, count: u64) {
    for k in 0..count {
        let win = random_window(params.window_size, k);
        let fast = hog_descriptor(&win, &params).unwrap();
        let slow = naive_hog(
            win.data(),
            params.window_size,
            params.cell_size,
            params.block_size,
            params.block_stride,
            params.n_bins,
        );
        let diff = max_abs_diff(&fast.values, &slow);
        assert!(diff <= 1e-9, "window {k}: {diff}");
    }
}

#[test]
fn top_layer_matches_naive_reference() {
    check_against_oracle(HogParams::top_layer(), 100);
}

#[test]
fn bottom_layer_matches_naive_reference() {
    check_against_oracle(HogParams::bottom_layer(), 10);
}

#[test]
fn strided_blocks_match_naive_reference() {
    check_against_oracle(
        HogParams {
            block_stride: 2,
            ..HogParams::bottom_layer().with_window(60)
        },
        10,
    );
}

#[test]
fn rotation_by_half_turn_keeps_interior_cells() {
    let params = HogParams::top_layer().with_window(36);
    let win = random_window(36, 7);
    let rotated = ImageBuffer::from_gray_fn(36, 36, |x, y| win.get(35 - x, 35 - y, 0)).unwrap();
    let a = cell_histograms_from_gray(&win, &params).unwrap();
    let b = cell_histograms_from_gray(&rotated, &params).unwrap();
    let n = a.cells_x;
    for cy in 1..n - 1 {
        for cx in 1..n - 1 {
            let diff = max_abs_diff(a.cell(cx, cy), b.cell(n - 1 - cx, n - 1 - cy));
            assert!(diff < 1e-9, "cell ({cx},{cy}) {diff}");
        }
    }
}

#[test]
fn variance_of_zero_one_is_a_quarter() {
    assert_eq!(variance_of(&[0.0, 1.0]).unwrap(), 0.25);
}

#[test]
fn pearson_reversal_is_minus_one() {
    let h = [3.0, 9.0, 1.0, 4.0, 7.0];
    let r: Vec<f64> = h.iter().map(|v| 12.0 - v).collect();
    assert!((pearson_corr(&h, &r).unwrap() + 1.0).abs() < 1e-12);
}

proptest! {
    #[test]
    fn descriptor_values_stay_in_unit_interval(seed in any::<u64>()) {
        let d = hog_descriptor(&random_window(24, seed), &HogParams::top_layer()).unwrap();
        prop_assert_eq!(d.len(), HogParams::top_layer().descriptor_len());
        prop_assert!(d.values.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn descriptor_variance_matches_two_pass(seed in any::<u64>()) {
        let d = hog_descriptor(&random_window(24, seed), &HogParams::top_layer()).unwrap();
        let v = hog_variance(&d).unwrap();
        let reference = two_pass_variance(&d.values);
        prop_assert!((v - reference).abs() <= 1e-12 * reference.max(1e-300), "{} {}", v, reference);
    }

    #[test]
    fn variance_matches_two_pass(values in prop::collection::vec(-1e3f64..1e3, 1..200)) {
        let v = variance_of(&values).unwrap();
        let reference = two_pass_variance(&values);
        prop_assert!((v - reference).abs() <= 1e-12 * reference.max(1.0));
    }

    #[test]
    fn pearson_identities(
        a in prop::collection::vec(0.0f64..500.0, 2..64),
        alpha in 0.1f64..10.0,
        beta in -100.0f64..100.0,
        seed in any::<u64>(),
    ) {
        prop_assume!(a.iter().any(|v| (v - a[0]).abs() > 1e-3));
        let mut rng = rng_for(seed, "pearson");
        let b: Vec<f64> = a.iter().map(|_| rng.random_range(0.0..500.0)).collect();
        let ab = pearson_corr(&a, &b).unwrap();
        prop_assert!((ab - pearson_corr(&b, &a).unwrap()).abs() <= 1e-12);
        prop_assert!((ab - textbook_pearson(&a, &b)).abs() <= 1e-12);
        let up: Vec<f64> = a.iter().map(|v| alpha * v + beta).collect();
        let down: Vec<f64> = a.iter().map(|v| -alpha * v + beta).collect();
        prop_assert!((pearson_corr(&a, &up).unwrap() - 1.0).abs() <= 1e-12);
        prop_assert!((pearson_corr(&a, &down).unwrap() + 1.0).abs() <= 1e-12);
    }
}
