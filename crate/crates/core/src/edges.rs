//! Canny edge detection and edge overlays.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::filter;
use crate::imaging::GrayImage;

/// Binary per-pixel edge mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMap {
    pub width: usize,
    pub height: usize,
    pub mask: Vec<bool>,
}

impl EdgeMap {
    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            mask: vec![false; width * height],
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.mask[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&e| e).count()
    }

    /// Edges as a black image with white edge pixels.
    pub fn to_image(&self) -> GrayImage {
        let data = self.mask.iter().map(|&e| if e { 255 } else { 0 }).collect();
        GrayImage::new(self.width, self.height, data).expect("edge map dimensions are consistent")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CannyParams {
    pub sigma: f64,
    /// Hysteresis thresholds as fractions of the image's largest gradient.
    pub low: f64,
    pub high: f64,
}

impl Default for CannyParams {
    fn default() -> Self {
        Self {
            sigma: 1.4,
            low: 0.1,
            high: 0.3,
        }
    }
}

impl CannyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        if !(0.0 < self.low && self.low <= self.high && self.high <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "thresholds must satisfy 0 < low <= high <= 1, got {} and {}",
                self.low, self.high
            )));
        }
        Ok(())
    }
}

/// Gradient direction quantized to the neighbour pair it points at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sector {
    /// Left/right neighbours.
    Horizontal,
    /// Down-right/up-left neighbours.
    Diagonal,
    /// Up/down neighbours.
    Vertical,
    /// Down-left/up-right neighbours.
    AntiDiagonal,
}

impl Sector {
    fn from_gradient(gx: f64, gy: f64) -> Self {
        let mut angle = gy.atan2(gx).to_degrees();
        if angle < 0.0 {
            angle += 180.0;
        }
        if !(22.5..157.5).contains(&angle) {
            Sector::Horizontal
        } else if angle < 67.5 {
            Sector::Diagonal
        } else if angle < 112.5 {
            Sector::Vertical
        } else {
            Sector::AntiDiagonal
        }
    }

    /// Offset of the "forward" neighbour; the backward one is its negation.
    pub fn offset(self) -> (isize, isize) {
        match self {
            Sector::Horizontal => (1, 0),
            Sector::Diagonal => (1, 1),
            Sector::Vertical => (0, 1),
            Sector::AntiDiagonal => (-1, 1),
        }
    }
}

/// Intermediate results of one Canny run.
#[derive(Debug, Clone)]
pub struct CannyStages {
    pub width: usize,
    pub height: usize,
    pub magnitude: Vec<f64>,
    pub sectors: Vec<Sector>,
    /// Pixels surviving non-maximum suppression.
    pub candidates: Vec<bool>,
    pub edges: EdgeMap,
}

impl CannyStages {
    /// Magnitude of the neighbour at `offset` from pixel `p`; 0 outside the image.
    pub fn neighbor_magnitude(&self, p: usize, offset: (isize, isize)) -> f64 {
        let x = (p % self.width) as isize + offset.0;
        let y = (p / self.width) as isize + offset.1;
        if x < 0 || y < 0 || x >= self.width as isize || y >= self.height as isize {
            0.0
        } else {
            self.magnitude[y as usize * self.width + x as usize]
        }
    }
}

pub fn canny(img: &GrayImage, p: &CannyParams) -> Result<EdgeMap> {
    canny_stages(img, p).map(|s| s.edges)
}

pub fn canny_stages(img: &GrayImage, p: &CannyParams) -> Result<CannyStages> {
    p.validate()?;
    let (w, h) = (img.width(), img.height());
    if w < 3 || h < 3 {
        return Err(Error::ImageSmallerThanKernel {
            width: w,
            height: h,
        });
    }
    let src: Vec<f64> = img.data().iter().map(|&v| v as f64).collect();
    let smoothed = filter::gaussian_blur(&src, w, h, p.sigma);
    let (gx, gy) = filter::sobel(&smoothed, w, h);
    let magnitude: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| a.hypot(*b)).collect();
    let sectors: Vec<Sector> = gx
        .iter()
        .zip(&gy)
        .map(|(&a, &b)| Sector::from_gradient(a, b))
        .collect();

    let mut stages = CannyStages {
        width: w,
        height: h,
        magnitude,
        sectors,
        candidates: vec![false; w * h],
        edges: EdgeMap::empty(w, h),
    };

    // Non-maximum suppression. A pixel must beat its forward neighbour
    // strictly and match its backward one, so flat-topped ridges stay one
    // pixel wide.
    let candidates: Vec<bool> = (0..w * h)
        .map(|i| {
            let m = stages.magnitude[i];
            if m <= 0.0 {
                return false;
            }
            let (dx, dy) = stages.sectors[i].offset();
            m > stages.neighbor_magnitude(i, (dx, dy)) && m >= stages.neighbor_magnitude(i, (-dx, -dy))
        })
        .collect();
    stages.candidates = candidates;

    let max = stages.magnitude.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        stages.edges = hysteresis(&stages, p.low * max, p.high * max);
    }
    Ok(stages)
}

fn hysteresis(s: &CannyStages, low: f64, high: f64) -> EdgeMap {
    let (w, h) = (s.width, s.height);
    let weak = |i: usize| s.candidates[i] && s.magnitude[i] >= low;
    let mut mask = vec![false; w * h];
    let mut queue = VecDeque::new();
    for i in 0..w * h {
        if s.candidates[i] && s.magnitude[i] >= high {
            mask[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if !mask[j] && weak(j) {
                    mask[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    EdgeMap {
        width: w,
        height: h,
        mask,
    }
}

/// Copy of `original` with edge pixels painted white.
pub fn superimpose(original: &GrayImage, em: &EdgeMap) -> Result<GrayImage> {
    if original.width() != em.width || original.height() != em.height {
        return Err(Error::DimensionMismatch {
            expected: original.len(),
            found: em.mask.len(),
        });
    }
    let data = original
        .data()
        .iter()
        .zip(&em.mask)
        .map(|(&v, &e)| if e { 255 } else { v })
        .collect();
    GrayImage::new(original.width(), original.height(), data)
}
