//! Gray-level co-occurrence matrices and the texture features derived
//! from them, evaluated over a sliding window to produce per-pixel maps.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::imaging::{FeatureMap, GrayImage, MapKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Angle {
    Deg0,
    Deg45,
    Deg90,
    Deg135,
}

impl Angle {
    /// Pixel offset `(dx, dy)` at distance `d`; y grows downwards, so 90°
    /// points up.
    pub fn offset(self, d: usize) -> (isize, isize) {
        let d = d as isize;
        match self {
            Angle::Deg0 => (d, 0),
            Angle::Deg45 => (d, -d),
            Angle::Deg90 => (0, -d),
            Angle::Deg135 => (-d, -d),
        }
    }

    pub fn from_degrees(deg: u32) -> Option<Self> {
        match deg {
            0 => Some(Angle::Deg0),
            45 => Some(Angle::Deg45),
            90 => Some(Angle::Deg90),
            135 => Some(Angle::Deg135),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GlcmParams {
    pub distance: usize,
    pub angle: Angle,
    pub levels: usize,
    /// Odd side length of the sliding window.
    pub window: usize,
    pub symmetric: bool,
}

impl Default for GlcmParams {
    fn default() -> Self {
        Self {
            distance: 1,
            angle: Angle::Deg0,
            levels: 32,
            window: 5,
            symmetric: true,
        }
    }
}

impl GlcmParams {
    pub fn validate(&self) -> Result<()> {
        if self.window < 3 || self.window.is_multiple_of(2) {
            return Err(Error::InvalidParams(format!(
                "window must be odd and >= 3, got {}",
                self.window
            )));
        }
        if !(2..=256).contains(&self.levels) {
            return Err(Error::InvalidParams(format!(
                "levels must be in 2..=256, got {}",
                self.levels
            )));
        }
        if self.distance == 0 || self.distance >= self.window {
            return Err(Error::InvalidParams(format!(
                "distance must be in 1..{}, got {}",
                self.window, self.distance
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn quantize(&self, v: u8) -> usize {
        v as usize * self.levels / 256
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GlcmFeature {
    MaxProbability,
    Variance,
    Correlation,
    Entropy,
}

impl From<GlcmFeature> for MapKind {
    fn from(f: GlcmFeature) -> Self {
        match f {
            GlcmFeature::MaxProbability => MapKind::MaxProbability,
            GlcmFeature::Variance => MapKind::Variance,
            GlcmFeature::Correlation => MapKind::Correlation,
            GlcmFeature::Entropy => MapKind::Entropy,
        }
    }
}

/// Normalized L x L co-occurrence matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GlcmMatrix {
    levels: usize,
    probs: Vec<f64>,
    pub params: GlcmParams,
}

impl GlcmMatrix {
    /// Wraps an arbitrary probability table, e.g. for checking the feature
    /// functions directly. Entries must be non-negative and sum to 1.
    pub fn from_probabilities(levels: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != levels * levels {
            return Err(Error::DimensionMismatch {
                expected: levels * levels,
                found: probs.len(),
            });
        }
        if probs.iter().any(|&p| p.is_nan() || p < 0.0) {
            return Err(Error::InvalidParams("negative probability".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParams(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self {
            levels,
            probs,
            params: GlcmParams {
                levels,
                ..GlcmParams::default()
            },
        })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.probs[i * self.levels + j]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn stats(&self) -> GlcmStats {
        GlcmStats::from_matrix(self)
    }
}

/// Marginal means and standard deviations, in level units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlcmStats {
    pub mu_x: f64,
    pub mu_y: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
}

impl GlcmStats {
    pub fn from_matrix(g: &GlcmMatrix) -> Self {
        let l = g.levels;
        let mut px = vec![0.0; l];
        let mut py = vec![0.0; l];
        for i in 0..l {
            for j in 0..l {
                px[i] += g.get(i, j);
            }
        }
        for j in 0..l {
            for i in 0..l {
                py[j] += g.get(i, j);
            }
        }
        let mean = |p: &[f64]| p.iter().enumerate().map(|(i, &v)| i as f64 * v).sum::<f64>();
        let (mu_x, mu_y) = (mean(&px), mean(&py));
        let spread = |p: &[f64], mu: f64| {
            p.iter()
                .enumerate()
                .map(|(i, &v)| (i as f64 - mu).powi(2) * v)
                .sum::<f64>()
                .sqrt()
        };
        Self {
            mu_x,
            mu_y,
            sigma_x: spread(&px, mu_x),
            sigma_y: spread(&py, mu_y),
        }
    }
}

/// Co-occurrence matrix of a square window.
pub fn compute_glcm(window: &GrayImage, params: &GlcmParams) -> Result<GlcmMatrix> {
    params.validate()?;
    if window.width() != params.window || window.height() != params.window {
        return Err(Error::GeometryMismatch(format!(
            "window is {}x{}, expected {}x{}",
            window.width(),
            window.height(),
            params.window,
            params.window
        )));
    }
    let l = params.levels;
    let (dx, dy) = params.angle.offset(params.distance);
    let (w, h) = (window.width() as isize, window.height() as isize);
    let mut counts = vec![0u64; l * l];
    let mut total = 0u64;
    for y in 0..h {
        let ny = y + dy;
        if ny < 0 || ny >= h {
            continue;
        }
        for x in 0..w {
            let nx = x + dx;
            if nx < 0 || nx >= w {
                continue;
            }
            let a = params.quantize(window.get(x as usize, y as usize));
            let b = params.quantize(window.get(nx as usize, ny as usize));
            counts[a * l + b] += 1;
            total += 1;
            if params.symmetric {
                counts[b * l + a] += 1;
                total += 1;
            }
        }
    }
    if total == 0 {
        return Err(Error::NoPairs);
    }
    let t = total as f64;
    Ok(GlcmMatrix {
        levels: l,
        probs: counts.iter().map(|&c| c as f64 / t).collect(),
        params: *params,
    })
}

pub fn max_probability(g: &GlcmMatrix) -> f64 {
    g.probs.iter().copied().fold(0.0, f64::max)
}

/// `sum (i - mu)^2 P_ij` with `mu = sum i P_ij`.
pub fn glcm_variance(g: &GlcmMatrix) -> f64 {
    let l = g.levels;
    let mu: f64 = (0..l)
        .flat_map(|i| (0..l).map(move |j| (i, j)))
        .map(|(i, j)| i as f64 * g.get(i, j))
        .sum();
    (0..l)
        .flat_map(|i| (0..l).map(move |j| (i, j)))
        .map(|(i, j)| (i as f64 - mu).powi(2) * g.get(i, j))
        .sum()
}

/// Returns 0 when either marginal has zero spread.
pub fn glcm_correlation(g: &GlcmMatrix, s: &GlcmStats) -> f64 {
    let denom = s.sigma_x * s.sigma_y;
    if denom == 0.0 {
        return 0.0;
    }
    let l = g.levels;
    let mut acc = 0.0;
    for i in 0..l {
        for j in 0..l {
            acc += (i as f64 - s.mu_x) * (j as f64 - s.mu_y) * g.get(i, j);
        }
    }
    acc / denom
}

/// Shannon entropy in bits, `0 log 0 = 0`.
pub fn glcm_entropy(g: &GlcmMatrix) -> f64 {
    let h: f64 = g
        .probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum();
    // a single occupied entry gives -0.0
    h.max(0.0)
}

pub fn evaluate(g: &GlcmMatrix, feature: GlcmFeature) -> f64 {
    match feature {
        GlcmFeature::MaxProbability => max_probability(g),
        GlcmFeature::Variance => glcm_variance(g),
        GlcmFeature::Correlation => glcm_correlation(g, &g.stats()),
        GlcmFeature::Entropy => glcm_entropy(g),
    }
}

/// Centered `window`x`window` neighbourhood of (`x`, `y`), edges replicated.
pub fn window_at(img: &GrayImage, x: usize, y: usize, window: usize) -> GrayImage {
    let r = (window / 2) as isize;
    img.region_clamped(x as isize - r, y as isize - r, window, window)
}

/// Evaluates `feature` on the GLCM of the window centred on every pixel.
pub fn feature_map(img: &GrayImage, params: &GlcmParams, feature: GlcmFeature) -> Result<FeatureMap> {
    let mut maps = feature_maps(img, params, &[feature])?;
    Ok(maps.remove(0))
}

/// Several feature maps from one pass; each window's matrix is built once.
pub fn feature_maps(
    img: &GrayImage,
    params: &GlcmParams,
    features: &[GlcmFeature],
) -> Result<Vec<FeatureMap>> {
    params.validate()?;
    if img.width() < params.window || img.height() < params.window {
        return Err(Error::ImageSmallerThanWindow {
            width: img.width(),
            height: img.height(),
            window: params.window,
        });
    }
    let (w, h) = (img.width(), img.height());
    let rows: Vec<Vec<Vec<f64>>> = (0..h)
        .into_par_iter()
        .map(|y| {
            (0..w)
                .map(|x| {
                    let win = window_at(img, x, y, params.window);
                    match compute_glcm(&win, params) {
                        Ok(g) => features.iter().map(|&f| evaluate(&g, f)).collect(),
                        Err(_) => vec![0.0; features.len()],
                    }
                })
                .collect()
        })
        .collect();
    Ok(features
        .iter()
        .enumerate()
        .map(|(k, &f)| FeatureMap {
            width: w,
            height: h,
            values: rows.iter().flatten().map(|px| px[k]).collect(),
            kind: f.into(),
        })
        .collect())
}

/// Linear min-max rescale to 0..=255, rounding half up. A constant map
/// renders black.
pub fn render_feature(map: &FeatureMap) -> GrayImage {
    let (lo, hi) = map.min_max();
    let span = hi - lo;
    let data = map
        .values
        .iter()
        .map(|&v| {
            if span > 0.0 {
                ((v - lo) / span * 255.0 + 0.5).floor().clamp(0.0, 255.0) as u8
            } else {
                0
            }
        })
        .collect();
    GrayImage::new(map.width, map.height, data).expect("feature map dimensions are consistent")
}
