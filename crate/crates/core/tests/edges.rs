mod common;

use proptest::prelude::*;
use vqdemark::edges::{self, CannyParams, EdgeMap};
use vqdemark::GrayImage;

use common::*;

#[test]
fn candidates_dominate_their_sector_neighbours() {
    for seed in 0..10 {
        let img = brain_like(48, 40, seed);
        let s = edges::canny_stages(&img, &CannyParams::default()).unwrap();
        for p in 0..s.magnitude.len() {
            if !s.candidates[p] {
                continue;
            }
            let (dx, dy) = s.sectors[p].offset();
            assert!(s.magnitude[p] >= s.neighbor_magnitude(p, (dx, dy)));
            assert!(s.magnitude[p] >= s.neighbor_magnitude(p, (-dx, -dy)));
        }
    }
}

#[test]
fn edges_are_a_subset_of_candidates() {
    let img = brain_like(64, 64, 3);
    let s = edges::canny_stages(&img, &CannyParams::default()).unwrap();
    assert!(s.edges.count() > 0);
    for (p, &e) in s.edges.mask.iter().enumerate() {
        assert!(!e || s.candidates[p], "edge pixel {p} was suppressed");
    }
}

#[test]
fn raising_the_high_threshold_never_adds_edges() {
    let img = brain_like(64, 64, 5);
    let mut previous: Option<EdgeMap> = None;
    for high in [0.15, 0.2, 0.3, 0.45, 0.6, 0.9] {
        let em = edges::canny(&img, &CannyParams { high, ..CannyParams::default() }).unwrap();
        if let Some(prev) = &previous {
            for (a, b) in em.mask.iter().zip(&prev.mask) {
                assert!(!a || *b, "high = {high} added an edge");
            }
        }
        previous = Some(em);
    }
}

#[test]
fn vertical_step_is_one_pixel_wide() {
    let img = GrayImage::from_fn(40, 30, |x, _| if x < 20 { 30 } else { 220 });
    let em = edges::canny(&img, &CannyParams::default()).unwrap();
    for y in 0..30 {
        let row: Vec<usize> = (0..40).filter(|&x| em.get(x, y)).collect();
        assert_eq!(row.len(), 1, "row {y}: {row:?}");
        assert!((row[0] as isize - 19).abs() <= 1);
    }
}

#[test]
fn tiny_images_are_rejected() {
    let img = GrayImage::filled(2, 9, 0);
    assert!(edges::canny(&img, &CannyParams::default()).is_err());
    assert!(edges::canny(&GrayImage::filled(5, 5, 0), &CannyParams { low: 0.5, high: 0.2, ..CannyParams::default() }).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn superimpose_keeps_non_edge_pixels(seed in any::<u64>(), w in 3usize..30, h in 3usize..30) {
        let img = random_image(w, h, seed);
        let em = edges::canny(&img, &CannyParams::default()).unwrap();
        let out = edges::superimpose(&img, &em).unwrap();
        for i in 0..img.len() {
            let expect = if em.mask[i] { 255 } else { img.data()[i] };
            prop_assert_eq!(out.data()[i], expect);
        }
    }

    #[test]
    fn constant_images_have_no_edges(v in any::<u8>(), w in 3usize..30, h in 3usize..30) {
        let em = edges::canny(&GrayImage::filled(w, h, v), &CannyParams::default()).unwrap();
        prop_assert_eq!(em.count(), 0);
    }
}
