//! End-to-end demarcation pipeline, phantom generation and the comparison
//! report.
//!
//! Output files follow a fixed naming scheme:
//!
//! | emit          | files                                                      |
//! |---------------|------------------------------------------------------------|
//! | clusters      | `cluster_0` .. `cluster_{G-1}`                             |
//! | edges         | `edges_0` .. `edges_{G-1}`                                 |
//! | superimposed  | `overlay_0` .. `overlay_{G-1}`                             |
//! | glcm          | `glcm_probability`, `glcm_probability_eq`, `glcm_entropy`, `glcm_entropy_eq` |
//! | watershed     | `watershed`                                                |
//! | report        | `report.json`                                              |

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::edges::{self, CannyParams, EdgeMap};
use crate::error::{Error, Result};
use crate::glcm::{self, Angle, GlcmFeature, GlcmParams};
use crate::imaging::{self, GrayImage, ImageFormat};
use crate::vq::{self, SplitParams};
use crate::watershed::{self, LabelMap, WatershedParams};

/// Connected pieces smaller than this are ignored when counting segments.
pub const MIN_SEGMENT_PIXELS: usize = 9;

/// Tumor boundary pixels count as recalled within this distance of an edge.
pub const BOUNDARY_TOLERANCE_PX: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Emit {
    Clusters,
    Edges,
    Superimposed,
    Glcm,
    Watershed,
    Report,
}

impl Emit {
    pub const ALL: [Emit; 6] = [
        Emit::Clusters,
        Emit::Edges,
        Emit::Superimposed,
        Emit::Glcm,
        Emit::Watershed,
        Emit::Report,
    ];
}

impl FromStr for Emit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "clusters" => Ok(Emit::Clusters),
            "edges" => Ok(Emit::Edges),
            "superimposed" | "overlays" => Ok(Emit::Superimposed),
            "glcm" => Ok(Emit::Glcm),
            "watershed" => Ok(Emit::Watershed),
            "report" => Ok(Emit::Report),
            other => Err(Error::Config(format!("unknown emit target `{other}`"))),
        }
    }
}

/// Parses a comma-separated emit list; `all` selects everything.
pub fn parse_emit_list(s: &str) -> Result<BTreeSet<Emit>> {
    let mut set = BTreeSet::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if item.eq_ignore_ascii_case("all") {
            set.extend(Emit::ALL);
        } else {
            set.insert(item.parse()?);
        }
    }
    Ok(set)
}

/// Ground-truth disc used for phantom metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disc {
    pub cx: f64,
    pub cy: f64,
    pub radius: f64,
}

impl Disc {
    #[inline]
    pub fn contains(&self, x: usize, y: usize) -> bool {
        let (dx, dy) = (x as f64 - self.cx, y as f64 - self.cy);
        dx * dx + dy * dy <= self.radius * self.radius
    }
}

impl FromStr for Disc {
    type Err = Error;

    /// `cx,cy,r`
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Config(format!("expected `cx,cy,r`, got `{s}`")))?;
        match parts.as_slice() {
            &[cx, cy, radius] if radius > 0.0 => Ok(Disc { cx, cy, radius }),
            _ => Err(Error::Config(format!("expected `cx,cy,r` with r > 0, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub codebook_size: usize,
    pub group_count: usize,
    pub block_w: usize,
    pub block_h: usize,
    pub split: SplitParams,
    pub glcm: GlcmParams,
    pub canny: CannyParams,
    pub watershed: WatershedParams,
    pub output_dir: PathBuf,
    pub emit: BTreeSet<Emit>,
    pub format: ImageFormat,
    pub truth: Option<Disc>,
    /// Write measured stage times into `report.json`. Off by default so
    /// repeated runs produce identical files.
    pub record_timings: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            codebook_size: 128,
            group_count: 8,
            block_w: 4,
            block_h: 3,
            split: SplitParams::default(),
            glcm: GlcmParams::default(),
            canny: CannyParams::default(),
            watershed: WatershedParams::default(),
            output_dir: PathBuf::from("out"),
            emit: Emit::ALL.into_iter().collect(),
            format: ImageFormat::Pgm,
            truth: None,
            record_timings: false,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("invalid value `{value}` for `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(Error::Config(format!("invalid boolean `{value}` for `{key}`"))),
    }
}

/// Parses `WxH` block sizes such as `4x3`.
pub fn parse_block(s: &str) -> Result<(usize, usize)> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| Error::Config(format!("expected block as WxH, got `{s}`")))?;
    Ok((parse_value("block", w)?, parse_value("block", h)?))
}

pub fn parse_format(s: &str) -> Result<ImageFormat> {
    match s.trim().to_ascii_lowercase().as_str() {
        "pgm" => Ok(ImageFormat::Pgm),
        "png" => Ok(ImageFormat::Png),
        other => Err(Error::Config(format!("unknown image format `{other}`"))),
    }
}

impl PipelineConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().to_ascii_lowercase().replace('-', "_");
        match key.as_str() {
            "codebook_size" => self.codebook_size = parse_value(&key, value)?,
            "groups" | "group_count" => self.group_count = parse_value(&key, value)?,
            "block" => (self.block_w, self.block_h) = parse_block(value)?,
            "block_w" => self.block_w = parse_value(&key, value)?,
            "block_h" => self.block_h = parse_value(&key, value)?,
            "epsilon" => self.split.epsilon = parse_value(&key, value)?,
            "lloyd_tol" => self.split.lloyd_tol = parse_value(&key, value)?,
            "max_lloyd_iters" => self.split.max_lloyd_iters = parse_value(&key, value)?,
            "window" => self.glcm.window = parse_value(&key, value)?,
            "levels" => self.glcm.levels = parse_value(&key, value)?,
            "distance" => self.glcm.distance = parse_value(&key, value)?,
            "angle" => {
                let deg: u32 = parse_value(&key, value)?;
                self.glcm.angle = Angle::from_degrees(deg)
                    .ok_or_else(|| Error::Config(format!("angle must be 0, 45, 90 or 135, got {deg}")))?;
            }
            "symmetric" => self.glcm.symmetric = parse_bool(&key, value)?,
            "sigma" => self.canny.sigma = parse_value(&key, value)?,
            "low" => self.canny.low = parse_value(&key, value)?,
            "high" => self.canny.high = parse_value(&key, value)?,
            "watershed_sigma" => {
                let s: f64 = parse_value(&key, value)?;
                self.watershed.presmooth_sigma = (s > 0.0).then_some(s);
            }
            "out" | "output_dir" => self.output_dir = PathBuf::from(value.trim()),
            "emit" => self.emit = parse_emit_list(value)?,
            "format" => self.format = parse_format(value)?,
            "truth" => self.truth = Some(value.parse()?),
            "timings" => self.record_timings = parse_bool(&key, value)?,
            _ => return Err(Error::Config(format!("unknown configuration key `{key}`"))),
        }
        Ok(())
    }

    /// Applies every `key = value` line of an INI document. Section headers
    /// are allowed and ignored.
    pub fn apply_ini(&mut self, text: &str) -> Result<()> {
        let doc = ini::Ini::load_from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for (_, props) in doc.iter() {
            for (k, v) in props.iter() {
                self.set(k, v)?;
            }
        }
        Ok(())
    }

    pub fn from_ini_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::default();
        cfg.apply_ini(&text)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let pow2 = |n: usize| n >= 1 && n.is_power_of_two();
        if !pow2(self.codebook_size) {
            return Err(Error::Config(format!(
                "codebook_size must be a power of two, got {}",
                self.codebook_size
            )));
        }
        if !pow2(self.group_count) || self.group_count > self.codebook_size {
            return Err(Error::Config(format!(
                "groups must be a power of two no larger than codebook_size, got {}",
                self.group_count
            )));
        }
        if self.block_w == 0 || self.block_h == 0 {
            return Err(Error::Config("block dimensions must be positive".into()));
        }
        let wrap = |e: Error| Error::Config(e.to_string());
        self.split.validate().map_err(wrap)?;
        self.glcm.validate().map_err(wrap)?;
        self.canny.validate().map_err(wrap)?;
        Ok(())
    }

    fn file(&self, stem: &str) -> PathBuf {
        let ext = match self.format {
            ImageFormat::Pgm => "pgm",
            ImageFormat::Png => "png",
        };
        self.output_dir.join(format!("{stem}.{ext}"))
    }
}

/// Wall-clock time per stage, milliseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub vq_ms: f64,
    pub glcm_ms: f64,
    pub watershed_ms: f64,
    pub canny_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhantomMetrics {
    pub truth: Disc,
    /// Group holding the largest share of the disc.
    pub best_group: usize,
    /// Share of disc pixels that fall in `best_group`.
    pub tumor_capture_fraction: f64,
    /// Share of disc boundary pixels within 2 px of an edge in the best
    /// group's overlay.
    pub boundary_recall_2px: f64,
    /// Connected segments of at least 9 px in the best group's image.
    pub best_group_segments: usize,
}

/// Summary written to `report.json`. Field names are part of the file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub width: usize,
    pub height: usize,
    pub codebook_size: usize,
    pub group_count: usize,
    pub block_w: usize,
    pub block_h: usize,
    pub codebook_distortion: f64,
    pub occupied_groups: usize,
    pub group_pixel_counts: Vec<usize>,
    pub group_segments: Vec<usize>,
    pub watershed_regions: usize,
    pub glcm_entropy_segments: usize,
    pub timings_ms: StageTimings,
    pub phantom: Option<PhantomMetrics>,
}

/// Every product of one analysis run.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub original: GrayImage,
    pub pixel_groups: Vec<usize>,
    pub cluster_images: Vec<GrayImage>,
    pub edge_maps: Vec<EdgeMap>,
    pub overlays: Vec<GrayImage>,
    pub glcm_probability: GrayImage,
    pub glcm_probability_eq: GrayImage,
    pub glcm_entropy: GrayImage,
    pub glcm_entropy_eq: GrayImage,
    pub labels: LabelMap,
    pub watershed_overlay: GrayImage,
    pub report: ComparisonReport,
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

struct VqProducts {
    distortion: f64,
    pixel_groups: Vec<usize>,
    cluster_images: Vec<GrayImage>,
}

fn run_vq(img: &GrayImage, cfg: &PipelineConfig) -> Result<VqProducts> {
    let ts = vq::extract_training_vectors(img, cfg.block_w, cfg.block_h)?;
    let (cb, asg) = vq::lbg_generate(&ts.vectors, cfg.codebook_size, &cfg.split)?;
    let gm = vq::requantize(&cb, cfg.group_count, &cfg.split)?;
    let pixel_groups = vq::pixel_groups(img.width(), img.height(), &ts.geometry, &asg, &gm)?;
    let cluster_images = vq::cluster_images(img, &ts.geometry, &asg, &gm)?;
    Ok(VqProducts {
        distortion: cb.distortion,
        pixel_groups,
        cluster_images,
    })
}

struct GlcmProducts {
    probability: GrayImage,
    entropy: GrayImage,
    entropy_segments: usize,
}

fn run_glcm(img: &GrayImage, cfg: &PipelineConfig) -> Result<GlcmProducts> {
    let maps = glcm::feature_maps(
        img,
        &cfg.glcm,
        &[GlcmFeature::MaxProbability, GlcmFeature::Entropy],
    )?;
    let probability = glcm::render_feature(&maps[0]);
    let entropy = glcm::render_feature(&maps[1]);
    let edges = edges::canny(&imaging::histogram_equalize(&entropy), &cfg.canny)?;
    let background: Vec<bool> = edges.mask.iter().map(|&e| !e).collect();
    let entropy_segments = count_segments(&background, img.width(), img.height(), false);
    Ok(GlcmProducts {
        probability,
        entropy,
        entropy_segments,
    })
}

/// Runs the VQ route, the GLCM map and the watershed on one image.
pub fn analyze(img: &GrayImage, cfg: &PipelineConfig) -> Result<Analysis> {
    cfg.validate()?;
    if img.width() < 3 || img.height() < 3 {
        return Err(Error::ImageSmallerThanKernel {
            width: img.width(),
            height: img.height(),
        });
    }
    let total = Instant::now();
    let mut timings = StageTimings::default();

    let (vq_res, (glcm_res, ws_res)) = rayon::join(
        || {
            let t = Instant::now();
            run_vq(img, cfg).map(|r| (r, elapsed_ms(t)))
        },
        || {
            rayon::join(
                || {
                    let t = Instant::now();
                    run_glcm(img, cfg).map(|r| (r, elapsed_ms(t)))
                },
                || {
                    let t = Instant::now();
                    watershed::segment_image(img, &cfg.watershed).map(|r| (r, elapsed_ms(t)))
                },
            )
        },
    );
    let (vq_out, vq_ms) = vq_res?;
    let (glcm_out, glcm_ms) = glcm_res?;
    let (labels, ws_ms) = ws_res?;
    timings.vq_ms = vq_ms;
    timings.glcm_ms = glcm_ms;
    timings.watershed_ms = ws_ms;

    let t = Instant::now();
    let edge_maps: Vec<EdgeMap> = vq_out
        .cluster_images
        .par_iter()
        .map(|c| edges::canny(c, &cfg.canny))
        .collect::<Result<_>>()?;
    let overlays: Vec<GrayImage> = edge_maps
        .iter()
        .map(|em| edges::superimpose(img, em))
        .collect::<Result<_>>()?;
    timings.canny_ms = elapsed_ms(t);

    let (w, h) = (img.width(), img.height());
    let mut group_pixel_counts = vec![0; cfg.group_count];
    for &g in &vq_out.pixel_groups {
        group_pixel_counts[g] += 1;
    }
    let group_segments: Vec<usize> = (0..cfg.group_count)
        .map(|g| {
            let mask: Vec<bool> = vq_out.pixel_groups.iter().map(|&p| p == g).collect();
            count_segments(&mask, w, h, true)
        })
        .collect();

    let phantom = cfg.truth.map(|disc| {
        let (best_group, capture) = best_group_for(&vq_out.pixel_groups, w, h, &disc, cfg.group_count);
        PhantomMetrics {
            truth: disc,
            best_group,
            tumor_capture_fraction: capture,
            boundary_recall_2px: boundary_recall(&disc, &edge_maps[best_group], BOUNDARY_TOLERANCE_PX),
            best_group_segments: group_segments[best_group],
        }
    });

    let watershed_overlay = edges::superimpose(img, &watershed::watershed_edges(&labels))?;
    timings.total_ms = elapsed_ms(total);

    let report = ComparisonReport {
        width: w,
        height: h,
        codebook_size: cfg.codebook_size,
        group_count: cfg.group_count,
        block_w: cfg.block_w,
        block_h: cfg.block_h,
        codebook_distortion: vq_out.distortion,
        occupied_groups: group_pixel_counts.iter().filter(|&&n| n > 0).count(),
        group_pixel_counts,
        group_segments,
        watershed_regions: labels.region_count,
        glcm_entropy_segments: glcm_out.entropy_segments,
        timings_ms: timings,
        phantom,
    };

    Ok(Analysis {
        original: img.clone(),
        pixel_groups: vq_out.pixel_groups,
        cluster_images: vq_out.cluster_images,
        edge_maps,
        overlays,
        glcm_probability_eq: imaging::histogram_equalize(&glcm_out.probability),
        glcm_probability: glcm_out.probability,
        glcm_entropy_eq: imaging::histogram_equalize(&glcm_out.entropy),
        glcm_entropy: glcm_out.entropy,
        labels,
        watershed_overlay,
        report,
    })
}

/// Loads `input`, analyzes it and writes the enabled outputs.
pub fn run_pipeline(cfg: &PipelineConfig, input: impl AsRef<Path>) -> Result<ComparisonReport> {
    cfg.validate()?;
    let img = imaging::load_image(input)?;
    let analysis = analyze(&img, cfg)?;
    write_outputs(&analysis, cfg)?;
    Ok(analysis.report)
}

/// Runs every method and returns the report without writing files.
pub fn compare_methods(input: impl AsRef<Path>, cfg: &PipelineConfig) -> Result<ComparisonReport> {
    let img = imaging::load_image(input)?;
    Ok(analyze(&img, cfg)?.report)
}

pub fn write_outputs(a: &Analysis, cfg: &PipelineConfig) -> Result<()> {
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let save = |img: &GrayImage, stem: String| imaging::save_image(img, cfg.file(&stem), cfg.format);
    if cfg.emit.contains(&Emit::Clusters) {
        for (g, img) in a.cluster_images.iter().enumerate() {
            save(img, format!("cluster_{g}"))?;
        }
    }
    if cfg.emit.contains(&Emit::Edges) {
        for (g, em) in a.edge_maps.iter().enumerate() {
            save(&em.to_image(), format!("edges_{g}"))?;
        }
    }
    if cfg.emit.contains(&Emit::Superimposed) {
        for (g, img) in a.overlays.iter().enumerate() {
            save(img, format!("overlay_{g}"))?;
        }
    }
    if cfg.emit.contains(&Emit::Glcm) {
        save(&a.glcm_probability, "glcm_probability".into())?;
        save(&a.glcm_probability_eq, "glcm_probability_eq".into())?;
        save(&a.glcm_entropy, "glcm_entropy".into())?;
        save(&a.glcm_entropy_eq, "glcm_entropy_eq".into())?;
    }
    if cfg.emit.contains(&Emit::Watershed) {
        save(&a.watershed_overlay, "watershed".into())?;
    }
    if cfg.emit.contains(&Emit::Report) {
        let mut report = a.report.clone();
        if !cfg.record_timings {
            report.timings_ms = StageTimings::default();
        }
        let path = dir.join("report.json");
        let mut text = serde_json::to_string_pretty(&report)
            .map_err(|e| Error::io(&path, std::io::Error::other(e)))?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

/// Number of connected components of `mask` with at least
/// [`MIN_SEGMENT_PIXELS`] pixels, using 8- or 4-connectivity.
pub fn count_segments(mask: &[bool], width: usize, height: usize, eight: bool) -> usize {
    let mut seen = vec![false; mask.len()];
    let mut count = 0;
    let mut stack = Vec::new();
    for start in 0..mask.len() {
        if !mask[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut size = 0;
        while let Some(p) = stack.pop() {
            size += 1;
            let (x, y) = ((p % width) as isize, (p / width) as isize);
            for dy in -1..=1isize {
                for dx in -1..=1isize {
                    if (dx == 0 && dy == 0) || (!eight && dx != 0 && dy != 0) {
                        continue;
                    }
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= width as isize || ny >= height as isize {
                        continue;
                    }
                    let q = ny as usize * width + nx as usize;
                    if mask[q] && !seen[q] {
                        seen[q] = true;
                        stack.push(q);
                    }
                }
            }
        }
        if size >= MIN_SEGMENT_PIXELS {
            count += 1;
        }
    }
    count
}

/// The group holding most disc pixels, with the share it holds.
pub fn best_group_for(
    pixel_groups: &[usize],
    width: usize,
    height: usize,
    disc: &Disc,
    group_count: usize,
) -> (usize, f64) {
    let mut per_group = vec![0usize; group_count];
    let mut inside = 0usize;
    for y in 0..height {
        for x in 0..width {
            if disc.contains(x, y) {
                inside += 1;
                per_group[pixel_groups[y * width + x]] += 1;
            }
        }
    }
    let mut best = 0;
    for g in 1..group_count {
        if per_group[g] > per_group[best] {
            best = g;
        }
    }
    let frac = if inside == 0 {
        0.0
    } else {
        per_group[best] as f64 / inside as f64
    };
    (best, frac)
}

/// Disc pixels with a 4-neighbour outside the disc or the image.
pub fn disc_boundary(disc: &Disc, width: usize, height: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for y in 0..height {
        for x in 0..width {
            if !disc.contains(x, y) {
                continue;
            }
            let outside = |nx: isize, ny: isize| {
                nx < 0
                    || ny < 0
                    || nx >= width as isize
                    || ny >= height as isize
                    || !disc.contains(nx as usize, ny as usize)
            };
            let (xi, yi) = (x as isize, y as isize);
            if outside(xi - 1, yi) || outside(xi + 1, yi) || outside(xi, yi - 1) || outside(xi, yi + 1) {
                out.push((x, y));
            }
        }
    }
    out
}

/// Share of disc boundary pixels within `tol` (Euclidean) of an edge pixel.
pub fn boundary_recall(disc: &Disc, em: &EdgeMap, tol: f64) -> f64 {
    let boundary = disc_boundary(disc, em.width, em.height);
    if boundary.is_empty() {
        return 0.0;
    }
    let r = tol.floor() as isize;
    let hit = boundary
        .iter()
        .filter(|&&(x, y)| {
            (-r..=r).any(|dy| {
                (-r..=r).any(|dx| {
                    let (nx, ny) = (x as isize + dx, y as isize + dy);
                    ((dx * dx + dy * dy) as f64) <= tol * tol
                        && nx >= 0
                        && ny >= 0
                        && (nx as usize) < em.width
                        && (ny as usize) < em.height
                        && em.get(nx as usize, ny as usize)
                })
            })
        })
        .count();
    hit as f64 / boundary.len() as f64
}

/// Synthetic test image: Gaussian noise around one mean outside a disc and
/// another inside it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhantomSpec {
    pub width: usize,
    pub height: usize,
    pub tumor_cx: f64,
    pub tumor_cy: f64,
    pub tumor_r: f64,
    pub bg_mean: f64,
    pub tumor_mean: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for PhantomSpec {
    fn default() -> Self {
        Self {
            width: 128,
            height: 128,
            tumor_cx: 64.0,
            tumor_cy: 64.0,
            tumor_r: 15.0,
            bg_mean: 60.0,
            tumor_mean: 200.0,
            noise_sigma: 10.0,
            seed: 7,
        }
    }
}

impl PhantomSpec {
    pub fn disc(&self) -> Disc {
        Disc {
            cx: self.tumor_cx,
            cy: self.tumor_cy,
            radius: self.tumor_r,
        }
    }
}

impl fmt::Display for PhantomSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}x{} disc ({}, {}) r={} bg={} tumor={} sigma={} seed={}",
            self.width,
            self.height,
            self.tumor_cx,
            self.tumor_cy,
            self.tumor_r,
            self.bg_mean,
            self.tumor_mean,
            self.noise_sigma,
            self.seed
        )
    }
}

pub fn generate_phantom(spec: &PhantomSpec) -> Result<GrayImage> {
    let bad = |msg: String| Err(Error::InvalidGeometry(msg));
    if spec.width == 0 || spec.height == 0 {
        return bad(format!("image must be non-empty, got {}x{}", spec.width, spec.height));
    }
    if spec.tumor_r.is_nan() || spec.tumor_r <= 0.0
        || spec.tumor_cx - spec.tumor_r < 0.0
        || spec.tumor_cy - spec.tumor_r < 0.0
        || spec.tumor_cx + spec.tumor_r > (spec.width - 1) as f64
        || spec.tumor_cy + spec.tumor_r > (spec.height - 1) as f64
    {
        return bad(format!(
            "disc at ({}, {}) r={} does not fit in {}x{}",
            spec.tumor_cx, spec.tumor_cy, spec.tumor_r, spec.width, spec.height
        ));
    }
    for (name, m) in [("bg_mean", spec.bg_mean), ("tumor_mean", spec.tumor_mean)] {
        if !(0.0..=255.0).contains(&m) {
            return bad(format!("{name} must be in [0, 255], got {m}"));
        }
    }
    if spec.noise_sigma.is_nan() || spec.noise_sigma < 0.0 {
        return bad(format!("noise_sigma must be non-negative, got {}", spec.noise_sigma));
    }
    let disc = spec.disc();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    Ok(GrayImage::from_fn(spec.width, spec.height, |x, y| {
        let mean = if disc.contains(x, y) {
            spec.tumor_mean
        } else {
            spec.bg_mean
        };
        let z: f64 = StandardNormal.sample(&mut rng);
        (mean + spec.noise_sigma * z).round().clamp(0.0, 255.0) as u8
    }))
}

/// Thread pool sized by `VQDEMARK_THREADS`; 0 means a single worker.
/// Returns `None` when the variable is unset.
pub fn thread_pool_from_env() -> Result<Option<rayon::ThreadPool>> {
    let Ok(raw) = std::env::var("VQDEMARK_THREADS") else {
        return Ok(None);
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("VQDEMARK_THREADS must be an integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n.max(1))
        .build()
        .map(Some)
        .map_err(|e| Error::Config(e.to_string()))
}
