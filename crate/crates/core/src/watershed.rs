//! Immersion watershed on a gradient-magnitude relief.
//!
//! Pixels are flooded level by level in increasing relief order. Within a
//! level, plateaus are resolved by breadth-first geodesic distance from the
//! already-labeled basins; a pixel reached from two different basins at the
//! same distance becomes a watershed-line pixel (label 0). Any pixels of the
//! level still unreached afterwards form a new minimum and seed a new basin.

use std::collections::VecDeque;

use crate::edges::EdgeMap;
use crate::error::{Error, Result};
use crate::filter;
use crate::imaging::{FeatureMap, GrayImage, MapKind};

/// Per-pixel region labels; 0 marks watershed lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<u32>,
    pub region_count: usize,
}

impl LabelMap {
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WatershedParams {
    /// Gaussian pre-smoothing of the input image before the gradient.
    pub presmooth_sigma: Option<f64>,
}

/// Sobel gradient magnitude with replicated borders.
pub fn gradient_magnitude(img: &GrayImage) -> Result<FeatureMap> {
    gradient_magnitude_smoothed(img, None)
}

pub fn gradient_magnitude_smoothed(img: &GrayImage, sigma: Option<f64>) -> Result<FeatureMap> {
    let (w, h) = (img.width(), img.height());
    if w < 3 || h < 3 {
        return Err(Error::ImageSmallerThanKernel {
            width: w,
            height: h,
        });
    }
    let mut src: Vec<f64> = img.data().iter().map(|&v| v as f64).collect();
    if let Some(s) = sigma {
        if s.is_nan() || s <= 0.0 {
            return Err(Error::InvalidParams(format!("sigma must be positive, got {s}")));
        }
        src = filter::gaussian_blur(&src, w, h, s);
    }
    let (gx, gy) = filter::sobel(&src, w, h);
    Ok(FeatureMap {
        width: w,
        height: h,
        values: gx.iter().zip(&gy).map(|(a, b)| a.hypot(*b)).collect(),
        kind: MapKind::GradientMagnitude,
    })
}

/// Min-max rescale of the relief to 256 integer flooding levels.
pub fn quantize_relief(relief: &FeatureMap) -> Vec<u8> {
    let (lo, hi) = relief.min_max();
    let span = hi - lo;
    relief
        .values
        .iter()
        .map(|&v| {
            if span > 0.0 {
                ((v - lo) / span * 255.0).round().clamp(0.0, 255.0) as u8
            } else {
                0
            }
        })
        .collect()
}

pub fn watershed_segment(relief: &FeatureMap) -> LabelMap {
    flood(&quantize_relief(relief), relief.width, relief.height, None)
}

/// Like [`watershed_segment`], also returning pixel indices in the order
/// they were first given a basin or line label.
pub fn watershed_segment_traced(relief: &FeatureMap) -> (LabelMap, Vec<usize>) {
    let mut order = Vec::with_capacity(relief.values.len());
    let lm = flood(
        &quantize_relief(relief),
        relief.width,
        relief.height,
        Some(&mut order),
    );
    (lm, order)
}

/// Segments an image directly: gradient, then watershed.
pub fn segment_image(img: &GrayImage, params: &WatershedParams) -> Result<LabelMap> {
    let relief = gradient_magnitude_smoothed(img, params.presmooth_sigma)?;
    Ok(watershed_segment(&relief))
}

const INIT: i64 = -1;
const MASK: i64 = -2;
const WSHED: i64 = 0;

fn neighbors4(p: usize, w: usize, h: usize) -> impl Iterator<Item = usize> {
    let (x, y) = (p % w, p / w);
    let left = (x > 0).then(|| p - 1);
    let right = (x + 1 < w).then(|| p + 1);
    let up = (y > 0).then(|| p - w);
    let down = (y + 1 < h).then(|| p + w);
    [left, right, up, down].into_iter().flatten()
}

fn flood(levels: &[u8], w: usize, h: usize, mut order: Option<&mut Vec<usize>>) -> LabelMap {
    let n = levels.len();
    let mut lab = vec![INIT; n];
    let mut dist = vec![0usize; n];
    let mut by_level: Vec<Vec<usize>> = vec![Vec::new(); 256];
    for (p, &v) in levels.iter().enumerate() {
        by_level[v as usize].push(p);
    }
    let mut record = |p: usize| {
        if let Some(o) = order.as_deref_mut() {
            o.push(p);
        }
    };

    let mut current_label: i64 = 0;
    let mut fifo: VecDeque<Option<usize>> = VecDeque::new();
    for pixels in by_level.iter().filter(|v| !v.is_empty()) {
        for &p in pixels {
            lab[p] = MASK;
            if neighbors4(p, w, h).any(|q| lab[q] >= WSHED) {
                dist[p] = 1;
                fifo.push_back(Some(p));
            }
        }

        let mut cur_dist = 1;
        fifo.push_back(None);
        loop {
            let p = match fifo.pop_front() {
                Some(Some(p)) => p,
                Some(None) => {
                    if fifo.is_empty() {
                        break;
                    }
                    fifo.push_back(None);
                    cur_dist += 1;
                    match fifo.pop_front() {
                        Some(Some(p)) => p,
                        _ => break,
                    }
                }
                None => break,
            };
            let before = lab[p];
            for q in neighbors4(p, w, h) {
                if dist[q] < cur_dist && lab[q] >= WSHED {
                    if lab[q] > 0 {
                        if lab[p] == MASK || lab[p] == WSHED {
                            lab[p] = lab[q];
                        } else if lab[p] != lab[q] {
                            lab[p] = WSHED;
                        }
                    } else if lab[p] == MASK {
                        lab[p] = WSHED;
                    }
                } else if lab[q] == MASK && dist[q] == 0 {
                    dist[q] = cur_dist + 1;
                    fifo.push_back(Some(q));
                }
            }
            if before == MASK && lab[p] != MASK {
                record(p);
            }
        }

        for &p in pixels {
            dist[p] = 0;
            if lab[p] == MASK {
                current_label += 1;
                lab[p] = current_label;
                record(p);
                let mut queue = VecDeque::from([p]);
                while let Some(q) = queue.pop_front() {
                    for r in neighbors4(q, w, h) {
                        if lab[r] == MASK {
                            lab[r] = current_label;
                            record(r);
                            queue.push_back(r);
                        }
                    }
                }
            }
        }
    }

    LabelMap {
        width: w,
        height: h,
        labels: lab.into_iter().map(|l| l.max(0) as u32).collect(),
        region_count: current_label as usize,
    }
}

/// Watershed-line pixels plus labeled pixels touching a different region.
pub fn watershed_edges(lm: &LabelMap) -> EdgeMap {
    let (w, h) = (lm.width, lm.height);
    let mask = (0..w * h)
        .map(|p| {
            let l = lm.labels[p];
            l == 0 || neighbors4(p, w, h).any(|q| lm.labels[q] != 0 && lm.labels[q] != l)
        })
        .collect();
    EdgeMap {
        width: w,
        height: h,
        mask,
    }
}
