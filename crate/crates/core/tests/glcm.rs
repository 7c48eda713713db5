mod common;

use proptest::prelude::*;
use rand::RngExt;
use rand_distr::{Distribution, Normal};
use vqdemark::glcm::{self, Angle, GlcmFeature, GlcmMatrix, GlcmParams};
use vqdemark::GrayImage;

use common::*;

fn random_matrix(l: usize, seed: u64) -> GlcmMatrix {
    let mut r = rng(seed);
    // sparse-ish tables exercise the 0 log 0 convention
    let raw: Vec<f64> = (0..l * l)
        .map(|_| if r.random::<f64>() < 0.3 { 0.0 } else { r.random::<f64>() })
        .collect();
    let total: f64 = raw.iter().sum();
    GlcmMatrix::from_probabilities(l, raw.iter().map(|v| v / total).collect()).unwrap()
}

#[test]
fn features_match_naive_on_random_matrices() {
    for seed in 0..60 {
        let l = [2, 4, 8, 16, 32][seed as usize % 5];
        let g = random_matrix(l, seed);
        let n = naive_features(g.probabilities(), l);
        assert_eq!(glcm::max_probability(&g), n.max_probability);
        assert!((glcm::glcm_variance(&g) - n.variance).abs() < 1e-12);
        assert!((glcm::glcm_correlation(&g, &g.stats()) - n.correlation).abs() < 1e-12);
        assert!((glcm::glcm_entropy(&g) - n.entropy).abs() < 1e-12);
    }
}

#[test]
fn glcm_matches_pair_enumeration_for_every_angle() {
    for (k, angle) in [Angle::Deg0, Angle::Deg45, Angle::Deg90, Angle::Deg135].into_iter().enumerate() {
        for symmetric in [false, true] {
            let win = random_image(7, 7, 40 + k as u64);
            let params = GlcmParams {
                distance: 2,
                angle,
                levels: 8,
                window: 7,
                symmetric,
            };
            let g = glcm::compute_glcm(&win, &params).unwrap();
            let (dx, dy) = angle.offset(2);
            let expect = naive_glcm(&win, 8, dx, dy, symmetric);
            for (a, b) in g.probabilities().iter().zip(&expect) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn symmetric_stats_coincide() {
    let win = random_image(9, 9, 77);
    let params = GlcmParams {
        window: 9,
        levels: 16,
        ..GlcmParams::default()
    };
    let g = glcm::compute_glcm(&win, &params).unwrap();
    let s = g.stats();
    assert_eq!(s.mu_x, s.mu_y);
    assert_eq!(s.sigma_x, s.sigma_y);
}

#[test]
fn noisy_half_has_higher_entropy() {
    let mut r = rng(5);
    let noise = Normal::<f64>::new(128.0, 40.0).unwrap();
    let img = GrayImage::from_fn(64, 32, |x, _| {
        if x < 32 {
            100
        } else {
            noise.sample(&mut r).round().clamp(0.0, 255.0) as u8
        }
    });
    let map = glcm::feature_map(&img, &GlcmParams::default(), GlcmFeature::Entropy).unwrap();
    let mean = |x0: usize, x1: usize| {
        let mut s = 0.0;
        for y in 0..32 {
            for x in x0..x1 {
                s += map.get(x, y);
            }
        }
        s / ((x1 - x0) * 32) as f64
    };
    assert!(mean(34, 64) > mean(0, 30));
}

#[test]
fn sliding_window_agrees_with_explicit_windows() {
    let img = brain_like(40, 36, 2);
    let params = GlcmParams {
        window: 7,
        levels: 16,
        ..GlcmParams::default()
    };
    let features = [
        GlcmFeature::MaxProbability,
        GlcmFeature::Variance,
        GlcmFeature::Correlation,
        GlcmFeature::Entropy,
    ];
    let maps = glcm::feature_maps(&img, &params, &features).unwrap();
    let mut r = rng(8);
    for _ in 0..100 {
        let (x, y) = (r.random_range(0..40usize), r.random_range(0..36usize));
        // window built here by hand with clamped indexing
        let win = GrayImage::from_fn(7, 7, |i, j| {
            let sx = (x as isize + i as isize - 3).clamp(0, 39) as usize;
            let sy = (y as isize + j as isize - 3).clamp(0, 35) as usize;
            img.get(sx, sy)
        });
        let g = glcm::compute_glcm(&win, &params).unwrap();
        for (map, &f) in maps.iter().zip(&features) {
            assert_eq!(map.get(x, y), glcm::evaluate(&g, f), "{f:?} at ({x}, {y})");
        }
    }
}

#[test]
fn feature_map_keeps_dimensions_and_is_finite() {
    let img = random_image(23, 17, 3);
    for f in [
        GlcmFeature::MaxProbability,
        GlcmFeature::Variance,
        GlcmFeature::Correlation,
        GlcmFeature::Entropy,
    ] {
        let map = glcm::feature_map(&img, &GlcmParams::default(), f).unwrap();
        assert_eq!((map.width, map.height, map.values.len()), (23, 17, 23 * 17));
        assert!(map.values.iter().all(|v| v.is_finite()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matrix_invariants(seed in any::<u64>(), li in 0usize..4, angle in 0usize..4, symmetric in any::<bool>()) {
        let l = [2usize, 4, 16, 32][li];
        let win = random_image(5, 5, seed);
        let params = GlcmParams {
            distance: 1,
            angle: [Angle::Deg0, Angle::Deg45, Angle::Deg90, Angle::Deg135][angle],
            levels: l,
            window: 5,
            symmetric,
        };
        let g = glcm::compute_glcm(&win, &params).unwrap();
        let total: f64 = g.probabilities().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        prop_assert!(g.probabilities().iter().all(|&p| p >= 0.0));
        if symmetric {
            for i in 0..l {
                for j in 0..l {
                    prop_assert_eq!(g.get(i, j), g.get(j, i));
                }
            }
        }
        let h = glcm::glcm_entropy(&g);
        prop_assert!(h >= 0.0 && h <= 2.0 * (l as f64).log2() + 1e-12);
        let m = glcm::max_probability(&g);
        prop_assert!(m >= 1.0 / (l * l) as f64 && m <= 1.0);
        let c = glcm::glcm_correlation(&g, &g.stats());
        prop_assert!(c.abs() <= 1.0 + 1e-9);
        prop_assert!(glcm::glcm_variance(&g) >= 0.0);
    }

    #[test]
    fn shift_within_bins_preserves_features(seed in any::<u64>(), shift in 0u8..8) {
        // levels = 8 gives bins 32 wide; content uses offsets 0..24 inside each bin
        let mut r = rng(seed);
        let base: Vec<u8> = (0..25).map(|_| r.random_range(0..8u8) * 32 + r.random_range(0..24u8)).collect();
        let a = GrayImage::new(5, 5, base.clone()).unwrap();
        let b = GrayImage::new(5, 5, base.iter().map(|v| v + shift).collect()).unwrap();
        let params = GlcmParams { levels: 8, window: 5, ..GlcmParams::default() };
        let ga = glcm::compute_glcm(&a, &params).unwrap();
        let gb = glcm::compute_glcm(&b, &params).unwrap();
        prop_assert_eq!(glcm::max_probability(&ga), glcm::max_probability(&gb));
        prop_assert_eq!(glcm::glcm_entropy(&ga), glcm::glcm_entropy(&gb));
    }
}
