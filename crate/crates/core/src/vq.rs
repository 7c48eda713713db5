//! Block vector quantization.
//!
//! Images are cut into fixed-size blocks whose pixels form the training
//! vectors. A codebook is grown by binary splitting: start from the global
//! centroid, replace every codevector `c` by the pair `c + eps` and `c - eps`,
//! then refine with Lloyd iterations (nearest assignment followed by centroid
//! update). Doubling stops once the requested size is reached.
//!
//! The trained codebook can itself be treated as a training set and split
//! down to a few groups ([`requantize`]); every group then yields one
//! image holding only the blocks that map into it ([`cluster_images`]).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::imaging::GrayImage;

/// A flat, row-major list of equal-length real vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorSet {
    dim: usize,
    data: Vec<f64>,
}

impl VectorSet {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "vector dimension must be positive");
        Self {
            dim,
            data: Vec::new(),
        }
    }

    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map_or(0, |r| r.as_ref().len());
        if dim == 0 {
            return Err(Error::EmptyTrainingSet);
        }
        let mut set = Self::new(dim);
        for r in rows {
            set.push(r.as_ref())?;
        }
        Ok(set)
    }

    pub fn push(&mut self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        self.data.extend_from_slice(v);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::Chunks<'_, f64> {
        self.data.chunks(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }
}

/// Block layout over an image, after right/bottom padding to whole blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockGeometry {
    pub block_w: usize,
    pub block_h: usize,
    pub grid_w: usize,
    pub grid_h: usize,
}

impl BlockGeometry {
    pub fn for_image(width: usize, height: usize, block_w: usize, block_h: usize) -> Result<Self> {
        if block_w == 0 || block_h == 0 {
            return Err(Error::InvalidParams(format!(
                "block size must be positive, got {block_w}x{block_h}"
            )));
        }
        Ok(Self {
            block_w,
            block_h,
            grid_w: width.div_ceil(block_w),
            grid_h: height.div_ceil(block_h),
        })
    }

    /// Vector dimension, `block_w * block_h`.
    pub fn dim(&self) -> usize {
        self.block_w * self.block_h
    }

    pub fn block_count(&self) -> usize {
        self.grid_w * self.grid_h
    }

    /// Row-major index of the block containing pixel (`x`, `y`).
    #[inline]
    pub fn block_of(&self, x: usize, y: usize) -> usize {
        (y / self.block_h) * self.grid_w + x / self.block_w
    }

    pub fn covers(&self, width: usize, height: usize) -> bool {
        self.grid_w * self.block_w >= width
            && self.grid_h * self.block_h >= height
            && (self.grid_w - 1) * self.block_w < width
            && (self.grid_h - 1) * self.block_h < height
    }
}

/// Block vectors of one image.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub vectors: VectorSet,
    pub geometry: BlockGeometry,
    pub source_width: usize,
    pub source_height: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    pub codevectors: VectorSet,
    /// Mean squared error per vector component (intensity^2).
    pub distortion: f64,
}

impl Codebook {
    pub fn len(&self) -> usize {
        self.codevectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codevectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.codevectors.dim()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitParams {
    /// Per-component perturbation used when splitting a codevector.
    pub epsilon: f64,
    /// Lloyd refinement stops once the relative distortion improvement
    /// drops below this.
    pub lloyd_tol: f64,
    pub max_lloyd_iters: usize,
}

impl Default for SplitParams {
    fn default() -> Self {
        Self {
            epsilon: 1.0,
            lloyd_tol: 1e-4,
            max_lloyd_iters: 50,
        }
    }
}

impl SplitParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.lloyd_tol.is_nan() || self.lloyd_tol < 0.0 {
            return Err(Error::InvalidParams(format!(
                "lloyd_tol must be non-negative, got {}",
                self.lloyd_tol
            )));
        }
        if self.max_lloyd_iters == 0 {
            return Err(Error::InvalidParams("max_lloyd_iters must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    pub counts: Vec<usize>,
}

impl ClusterAssignment {
    fn from_labels(labels: Vec<usize>, k: usize) -> Self {
        let mut counts = vec![0; k];
        for &l in &labels {
            counts[l] += 1;
        }
        Self { labels, counts }
    }
}

/// Codevector to group mapping produced by [`requantize`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupMap {
    pub group_of: Vec<usize>,
    pub group_count: usize,
    /// Codevectors per group; zero marks an empty group.
    pub group_sizes: Vec<usize>,
}

impl GroupMap {
    pub fn identity(n: usize) -> Self {
        Self {
            group_of: (0..n).collect(),
            group_count: n,
            group_sizes: vec![1; n],
        }
    }

    pub fn is_empty_group(&self, g: usize) -> bool {
        self.group_sizes[g] == 0
    }
}

/// Distortion after every assignment step of one split level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelTrace {
    pub size: usize,
    pub distortions: Vec<f64>,
}

pub fn extract_training_vectors(
    img: &GrayImage,
    block_w: usize,
    block_h: usize,
) -> Result<TrainingSet> {
    if img.is_empty() {
        return Err(Error::EmptyImage);
    }
    let geometry = BlockGeometry::for_image(img.width(), img.height(), block_w, block_h)?;
    let mut vectors = VectorSet::new(geometry.dim());
    let mut block = Vec::with_capacity(geometry.dim());
    for by in 0..geometry.grid_h {
        for bx in 0..geometry.grid_w {
            block.clear();
            for dy in 0..block_h {
                for dx in 0..block_w {
                    let x = (bx * block_w + dx) as isize;
                    let y = (by * block_h + dy) as isize;
                    block.push(img.get_clamped(x, y) as f64);
                }
            }
            vectors.push(&block)?;
        }
    }
    Ok(TrainingSet {
        vectors,
        geometry,
        source_width: img.width(),
        source_height: img.height(),
    })
}

#[inline]
fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest codevector for every vector, with the squared distance to it.
/// Ties go to the lowest index.
fn nearest(vectors: &VectorSet, codevectors: &VectorSet) -> (Vec<usize>, Vec<f64>) {
    (0..vectors.len())
        .into_par_iter()
        .map(|i| {
            let v = vectors.get(i);
            let mut best = (0, f64::INFINITY);
            for (k, c) in codevectors.iter().enumerate() {
                let d = squared_distance(v, c);
                if d < best.1 {
                    best = (k, d);
                }
            }
            best
        })
        .unzip()
}

fn mean_distortion(sq_dists: &[f64], dim: usize) -> f64 {
    if sq_dists.is_empty() {
        return 0.0;
    }
    sq_dists.iter().sum::<f64>() / (sq_dists.len() * dim) as f64
}

pub fn assign(vectors: &VectorSet, cb: &Codebook) -> Result<ClusterAssignment> {
    if vectors.dim() != cb.dim() {
        return Err(Error::DimensionMismatch {
            expected: cb.dim(),
            found: vectors.dim(),
        });
    }
    let (labels, _) = nearest(vectors, &cb.codevectors);
    Ok(ClusterAssignment::from_labels(labels, cb.len()))
}

/// Mean per-component squared error of `vectors` against their labeled codevectors.
pub fn distortion(vectors: &VectorSet, cb: &Codebook, asg: &ClusterAssignment) -> f64 {
    let d: Vec<f64> = asg
        .labels
        .iter()
        .enumerate()
        .map(|(i, &l)| squared_distance(vectors.get(i), cb.codevectors.get(l)))
        .collect();
    mean_distortion(&d, vectors.dim())
}

pub(crate) fn centroid(vectors: &VectorSet) -> Vec<f64> {
    let mut c = vec![0.0; vectors.dim()];
    for v in vectors.iter() {
        for (a, x) in c.iter_mut().zip(v) {
            *a += x;
        }
    }
    let n = vectors.len() as f64;
    c.iter_mut().for_each(|a| *a /= n);
    c
}

/// Replaces each codevector `c` by `c + eps` followed by `c - eps`.
fn split(codevectors: &VectorSet, epsilon: f64) -> VectorSet {
    let mut out = VectorSet::new(codevectors.dim());
    let mut buf = vec![0.0; codevectors.dim()];
    for c in codevectors.iter() {
        for sign in [1.0, -1.0] {
            for (b, x) in buf.iter_mut().zip(c) {
                *b = x + sign * epsilon;
            }
            out.data.extend_from_slice(&buf);
        }
    }
    out
}

/// Centroid update. A cluster left empty takes the centroid of a populous
/// cluster shifted by `eps`: the j-th empty cluster borrows from the j-th
/// most populous one, and further rounds shift by an extra `eps` each.
fn update_centroids(
    vectors: &VectorSet,
    labels: &[usize],
    codevectors: &VectorSet,
    epsilon: f64,
) -> VectorSet {
    let dim = vectors.dim();
    let k = codevectors.len();
    let mut sums = vec![0.0; k * dim];
    let mut counts = vec![0usize; k];
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        for (s, x) in sums[l * dim..(l + 1) * dim].iter_mut().zip(vectors.get(i)) {
            *s += x;
        }
    }
    for (l, &n) in counts.iter().enumerate() {
        if n > 0 {
            sums[l * dim..(l + 1) * dim]
                .iter_mut()
                .for_each(|s| *s /= n as f64);
        }
    }

    let mut donors: Vec<usize> = (0..k).filter(|&l| counts[l] > 0).collect();
    donors.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    let empties: Vec<usize> = (0..k).filter(|&l| counts[l] == 0).collect();
    if !donors.is_empty() {
        for (j, &e) in empties.iter().enumerate() {
            let donor = donors[j % donors.len()];
            let shift = epsilon * (1 + j / donors.len()) as f64;
            for d in 0..dim {
                sums[e * dim + d] = sums[donor * dim + d] + shift;
            }
        }
    }
    VectorSet { dim, data: sums }
}

struct LloydOutcome {
    codevectors: VectorSet,
    labels: Vec<usize>,
    distortion: f64,
}

fn lloyd(
    vectors: &VectorSet,
    mut codevectors: VectorSet,
    params: &SplitParams,
    trace: &mut Vec<f64>,
) -> LloydOutcome {
    let mut previous: Option<(Vec<usize>, f64)> = None;
    let mut iter = 0;
    loop {
        let (labels, sq) = nearest(vectors, &codevectors);
        let d = mean_distortion(&sq, vectors.dim());
        trace.push(d);
        let converged = d == 0.0
            || match &previous {
                Some((prev_labels, prev_d)) => {
                    *prev_labels == labels || (prev_d - d) < params.lloyd_tol * prev_d
                }
                None => false,
            };
        if converged || iter == params.max_lloyd_iters {
            return LloydOutcome {
                codevectors,
                labels,
                distortion: d,
            };
        }
        codevectors = update_centroids(vectors, &labels, &codevectors, params.epsilon);
        previous = Some((labels, d));
        iter += 1;
    }
}

fn check_target(target_size: usize) -> Result<()> {
    if target_size == 0 || !target_size.is_power_of_two() {
        return Err(Error::InvalidTargetSize(target_size));
    }
    Ok(())
}

/// Grows a codebook of `target_size` codevectors by binary splitting.
pub fn lbg_generate(
    vectors: &VectorSet,
    target_size: usize,
    params: &SplitParams,
) -> Result<(Codebook, ClusterAssignment)> {
    lbg_generate_traced(vectors, target_size, params).map(|(cb, asg, _)| (cb, asg))
}

/// [`lbg_generate`] that also returns the distortion history of every level.
pub fn lbg_generate_traced(
    vectors: &VectorSet,
    target_size: usize,
    params: &SplitParams,
) -> Result<(Codebook, ClusterAssignment, Vec<LevelTrace>)> {
    check_target(target_size)?;
    params.validate()?;
    if vectors.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }

    let mut codevectors = VectorSet::new(vectors.dim());
    codevectors.data = centroid(vectors);
    let mut levels = Vec::new();
    let mut outcome = {
        let mut trace = Vec::new();
        let o = lloyd(vectors, codevectors, params, &mut trace);
        levels.push(LevelTrace {
            size: 1,
            distortions: trace,
        });
        o
    };
    while outcome.codevectors.len() < target_size {
        let split_cb = split(&outcome.codevectors, params.epsilon);
        let size = split_cb.len();
        let mut trace = Vec::new();
        outcome = lloyd(vectors, split_cb, params, &mut trace);
        levels.push(LevelTrace {
            size,
            distortions: trace,
        });
    }

    let k = outcome.codevectors.len();
    Ok((
        Codebook {
            codevectors: outcome.codevectors,
            distortion: outcome.distortion,
        },
        ClusterAssignment::from_labels(outcome.labels, k),
        levels,
    ))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Clusters the codevectors themselves into `group_count` groups.
///
/// Groups are numbered by ascending Euclidean norm of their centroid, so
/// group 0 holds the darkest textures.
pub fn requantize(cb: &Codebook, group_count: usize, params: &SplitParams) -> Result<GroupMap> {
    check_target(group_count)?;
    if group_count > cb.len() {
        return Err(Error::InvalidTargetSize(group_count));
    }
    let (centroids, raw_labels) = if group_count == cb.len() {
        (cb.codevectors.clone(), (0..cb.len()).collect::<Vec<_>>())
    } else {
        let (gcb, gasg) = lbg_generate(&cb.codevectors, group_count, params)?;
        (gcb.codevectors, gasg.labels)
    };

    let norms: Vec<f64> = centroids.iter().map(norm).collect();
    let mut order: Vec<usize> = (0..group_count).collect();
    order.sort_by(|&a, &b| norms[a].total_cmp(&norms[b]).then(a.cmp(&b)));
    let mut rank = vec![0; group_count];
    for (new, &old) in order.iter().enumerate() {
        rank[old] = new;
    }

    let group_of: Vec<usize> = raw_labels.iter().map(|&l| rank[l]).collect();
    let mut group_sizes = vec![0; group_count];
    for &g in &group_of {
        group_sizes[g] += 1;
    }
    Ok(GroupMap {
        group_of,
        group_count,
        group_sizes,
    })
}

fn check_cover(
    width: usize,
    height: usize,
    geometry: &BlockGeometry,
    asg: &ClusterAssignment,
    gm: &GroupMap,
) -> Result<()> {
    if !geometry.covers(width, height) {
        return Err(Error::GeometryMismatch(format!(
            "{}x{} grid of {}x{} blocks does not tile a {width}x{height} image",
            geometry.grid_w, geometry.grid_h, geometry.block_w, geometry.block_h
        )));
    }
    if asg.labels.len() != geometry.block_count() {
        return Err(Error::GeometryMismatch(format!(
            "{} labels for {} blocks",
            asg.labels.len(),
            geometry.block_count()
        )));
    }
    if let Some(&bad) = asg.labels.iter().find(|&&l| l >= gm.group_of.len()) {
        return Err(Error::GeometryMismatch(format!(
            "label {bad} outside a group map of {} codevectors",
            gm.group_of.len()
        )));
    }
    Ok(())
}

/// Group index of every pixel, row-major.
pub fn pixel_groups(
    width: usize,
    height: usize,
    geometry: &BlockGeometry,
    asg: &ClusterAssignment,
    gm: &GroupMap,
) -> Result<Vec<usize>> {
    check_cover(width, height, geometry, asg, gm)?;
    let mut out = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            out.push(gm.group_of[asg.labels[geometry.block_of(x, y)]]);
        }
    }
    Ok(out)
}

/// One image per group: pixels of blocks in that group keep their value,
/// everything else is 0.
pub fn cluster_images(
    img: &GrayImage,
    geometry: &BlockGeometry,
    asg: &ClusterAssignment,
    gm: &GroupMap,
) -> Result<Vec<GrayImage>> {
    let groups = pixel_groups(img.width(), img.height(), geometry, asg, gm)?;
    let mut outputs = vec![vec![0u8; img.len()]; gm.group_count];
    for (i, (&g, &v)) in groups.iter().zip(img.data()).enumerate() {
        outputs[g][i] = v;
    }
    outputs
        .into_iter()
        .map(|data| GrayImage::new(img.width(), img.height(), data))
        .collect()
}
