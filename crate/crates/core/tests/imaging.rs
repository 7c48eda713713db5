mod common;

use proptest::prelude::*;
use rand::RngExt;
use rand_distr::{Distribution, Normal};
use vqdemark::imaging::{self, ImageFormat};
use vqdemark::{Error, GrayImage};

use common::*;

/// Largest gap between the image's empirical CDF and the uniform CDF on 0..=255.
fn uniform_deviation(img: &GrayImage) -> f64 {
    let mut counts = [0u64; 256];
    for &v in img.data() {
        counts[v as usize] += 1;
    }
    let n = img.len() as f64;
    let mut acc = 0u64;
    let mut worst = 0.0f64;
    for (v, &c) in counts.iter().enumerate() {
        acc += c;
        worst = worst.max((acc as f64 / n - (v + 1) as f64 / 256.0).abs());
    }
    worst
}

fn round_trip(img: &GrayImage, format: ImageFormat, name: &str) -> GrayImage {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join(name);
    imaging::save_image(img, &path, format).unwrap();
    imaging::load_image(&path).unwrap()
}

#[test]
fn random_image_survives_both_formats() {
    let img = random_image(64, 64, 21);
    assert_eq!(round_trip(&img, ImageFormat::Pgm, "a.pgm"), img);
    assert_eq!(round_trip(&img, ImageFormat::Png, "a.png"), img);
}

#[test]
fn format_follows_extension() {
    assert_eq!(ImageFormat::from_path("x/y.png".as_ref()), ImageFormat::Png);
    assert_eq!(ImageFormat::from_path("x/y.PNG".as_ref()), ImageFormat::Png);
    assert_eq!(ImageFormat::from_path("x/y.pgm".as_ref()), ImageFormat::Pgm);
}

#[test]
fn saving_into_a_missing_directory_fails() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("x.pgm");
    let err = imaging::save_image(&GrayImage::filled(2, 2, 1), &path, ImageFormat::Pgm).unwrap_err();
    assert!(matches!(err, Error::IoFailure { .. }), "{err:?}");
}

#[test]
fn loading_garbage_is_malformed() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.pgm");
    std::fs::write(&path, b"P5\n4 4\n255\n\x01\x02").unwrap();
    assert!(matches!(imaging::load_image(&path), Err(Error::MalformedFile(_))));
    assert!(matches!(
        imaging::load_image(dir.path().join("nope.pgm")),
        Err(Error::IoFailure { .. })
    ));
}

#[test]
fn equalization_flattens_a_narrow_histogram() {
    let mut r = rng(4);
    let noise = Normal::<f64>::new(120.0, 6.0).unwrap();
    let img = GrayImage::from_fn(64, 64, |_, _| noise.sample(&mut r).round().clamp(0.0, 255.0) as u8);
    let eq = imaging::histogram_equalize(&img);
    assert!(uniform_deviation(&eq) < uniform_deviation(&img));
    assert_eq!(eq.data().iter().min(), Some(&0));
    assert_eq!(eq.data().iter().max(), Some(&255));
}

#[test]
fn output_deviation_never_exceeds_input() {
    // constant images are excluded: anchoring sends them to 0, which is
    // further from uniform than any mid-grey constant
    for seed in 0..200 {
        let mut r = rng(seed);
        let (lo, hi) = (r.random_range(0..200u8), 0u8);
        let hi = hi.max(lo + r.random_range(1..=55u8));
        let skew = r.random_range(0.3..3.0f64);
        let img = GrayImage::from_fn(32, 32, |_, _| {
            let u: f64 = r.random::<f64>().powf(skew);
            (lo as f64 + u * (hi - lo) as f64).round() as u8
        });
        let eq = imaging::histogram_equalize(&img);
        assert!(
            uniform_deviation(&eq) <= uniform_deviation(&img) + 1e-12,
            "seed {seed}: {} > {}",
            uniform_deviation(&eq),
            uniform_deviation(&img)
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pgm_and_png_round_trip(seed in any::<u64>(), w in 1usize..40, h in 1usize..40) {
        let img = random_image(w, h, seed);
        prop_assert_eq!(imaging::decode_pgm(&imaging::encode_pgm(&img)).unwrap(), img.clone());
        prop_assert_eq!(round_trip(&img, ImageFormat::Png, "p.png"), img.clone());
        prop_assert_eq!(round_trip(&img, ImageFormat::Pgm, "p.pgm"), img);
    }

    #[test]
    fn lut_is_monotone_and_order_preserving(seed in any::<u64>(), w in 1usize..30, h in 1usize..30) {
        let img = random_image(w, h, seed);
        let lut = imaging::equalization_lut(&img.histogram());
        prop_assert!(lut.windows(2).all(|p| p[0] <= p[1]));
        let eq = imaging::histogram_equalize(&img);
        for (a, b) in img.data().iter().zip(eq.data()) {
            prop_assert_eq!(lut[*a as usize], *b);
        }
    }

    #[test]
    fn constant_images_stay_constant(v in any::<u8>(), w in 1usize..20, h in 1usize..20) {
        let eq = imaging::histogram_equalize(&GrayImage::filled(w, h, v));
        let first = eq.data()[0];
        prop_assert!(eq.data().iter().all(|&x| x == first));
    }
}
