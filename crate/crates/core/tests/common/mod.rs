//! Reference implementations used as oracles. They are written from the
//! definitions directly and share no code with the library.

#![allow(dead_code)]

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vqdemark::GrayImage;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(w: usize, h: usize, seed: u64) -> GrayImage {
    let mut r = rng(seed);
    GrayImage::from_fn(w, h, |_, _| r.random::<u8>())
}

pub fn random_points(n: usize, dim: usize, scale: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    (0..n)
        .map(|_| (0..dim).map(|_| r.random::<f64>() * scale).collect())
        .collect()
}

fn sq(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += (a[i] - b[i]) * (a[i] - b[i]);
    }
    s
}

/// Index of the nearest row in `table`, first index on ties.
pub fn argmin_row(v: &[f64], table: &[Vec<f64>]) -> usize {
    let dists: Vec<f64> = table.iter().map(|c| sq(v, c)).collect();
    let mut best = 0;
    for k in 1..dists.len() {
        if dists[k] < dists[best] {
            best = k;
        }
    }
    best
}

pub struct OracleResult {
    pub codebook: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub distortion: f64,
}

/// Straight-line LBG: global centroid, split each codevector into
/// (c + eps, c - eps) in place, Lloyd until the labels settle, the distortion
/// hits 0, the relative gain drops below `tol`, or `max_iters` updates.
pub fn lbg_oracle(
    points: &[Vec<f64>],
    target: usize,
    eps: f64,
    tol: f64,
    max_iters: usize,
) -> OracleResult {
    let dim = points[0].len();
    let n = points.len();
    let mut mean = vec![0.0; dim];
    for p in points {
        for d in 0..dim {
            mean[d] += p[d];
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }
    let mut codebook = vec![mean];
    let mut result = lloyd_oracle(points, codebook.clone(), eps, tol, max_iters);
    while result.codebook.len() < target {
        codebook = Vec::new();
        for c in &result.codebook {
            codebook.push(c.iter().map(|x| x + eps).collect());
            codebook.push(c.iter().map(|x| x - eps).collect());
        }
        result = lloyd_oracle(points, codebook, eps, tol, max_iters);
    }
    result
}

fn lloyd_oracle(
    points: &[Vec<f64>],
    mut codebook: Vec<Vec<f64>>,
    eps: f64,
    tol: f64,
    max_iters: usize,
) -> OracleResult {
    let dim = points[0].len();
    let mut prev: Option<(Vec<usize>, f64)> = None;
    let mut iter = 0;
    loop {
        let labels: Vec<usize> = points.iter().map(|p| argmin_row(p, &codebook)).collect();
        let mut total = 0.0;
        for (p, &l) in points.iter().zip(&labels) {
            total += sq(p, &codebook[l]);
        }
        let d = total / (points.len() * dim) as f64;
        let done = d == 0.0
            || match &prev {
                Some((pl, pd)) => *pl == labels || (pd - d) < tol * pd,
                None => false,
            };
        if done || iter == max_iters {
            return OracleResult {
                codebook,
                labels,
                distortion: d,
            };
        }
        let k = codebook.len();
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            for d in 0..dim {
                sums[l][d] += p[d];
            }
        }
        let mut next = vec![vec![0.0; dim]; k];
        for j in 0..k {
            if counts[j] > 0 {
                for d in 0..dim {
                    next[j][d] = sums[j][d] / counts[j] as f64;
                }
            }
        }
        let mut donors: Vec<usize> = (0..k).filter(|&j| counts[j] > 0).collect();
        donors.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
        let mut e = 0;
        for j in 0..k {
            if counts[j] == 0 {
                let donor = donors[e % donors.len()];
                let shift = eps * (1 + e / donors.len()) as f64;
                next[j] = next[donor].iter().map(|x| x + shift).collect();
                e += 1;
            }
        }
        codebook = next;
        prev = Some((labels, d));
        iter += 1;
    }
}

/// Minimum per-component MSE over every split of `points` into two
/// non-empty parts.
pub fn best_two_partition_mse(points: &[Vec<f64>]) -> f64 {
    let n = points.len();
    let dim = points[0].len();
    let mut best = f64::INFINITY;
    for mask in 1..(1u64 << n) - 1 {
        let mut total = 0.0;
        for side in [true, false] {
            let members: Vec<&Vec<f64>> = (0..n)
                .filter(|&i| ((mask >> i) & 1 == 1) == side)
                .map(|i| &points[i])
                .collect();
            let mut c = vec![0.0; dim];
            for m in &members {
                for d in 0..dim {
                    c[d] += m[d] / members.len() as f64;
                }
            }
            for m in &members {
                total += sq(m, &c);
            }
        }
        best = best.min(total / (n * dim) as f64);
    }
    best
}

/// Naive features over a dense L x L probability table.
pub struct NaiveFeatures {
    pub max_probability: f64,
    pub variance: f64,
    pub correlation: f64,
    pub entropy: f64,
}

pub fn naive_features(p: &[f64], l: usize) -> NaiveFeatures {
    let at = |i: usize, j: usize| p[i * l + j];
    let mut maxp = 0.0f64;
    let mut mu = 0.0;
    let mut mu_x = 0.0;
    let mut mu_y = 0.0;
    for i in 0..l {
        for j in 0..l {
            maxp = maxp.max(at(i, j));
            mu += i as f64 * at(i, j);
            mu_x += i as f64 * at(i, j);
            mu_y += j as f64 * at(i, j);
        }
    }
    let mut var = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    let mut cov = 0.0;
    let mut ent = 0.0;
    for i in 0..l {
        for j in 0..l {
            let v = at(i, j);
            var += (i as f64 - mu).powi(2) * v;
            var_x += (i as f64 - mu_x).powi(2) * v;
            var_y += (j as f64 - mu_y).powi(2) * v;
            cov += (i as f64 - mu_x) * (j as f64 - mu_y) * v;
            if v > 0.0 {
                ent -= v * v.log2();
            }
        }
    }
    let denom = var_x.sqrt() * var_y.sqrt();
    NaiveFeatures {
        max_probability: maxp,
        variance: var,
        correlation: if denom == 0.0 { 0.0 } else { cov / denom },
        entropy: ent,
    }
}

/// Co-occurrence table of a square window counted pair by pair.
pub fn naive_glcm(win: &GrayImage, levels: usize, dx: isize, dy: isize, symmetric: bool) -> Vec<f64> {
    let mut counts = vec![0.0; levels * levels];
    let mut total = 0.0;
    let (w, h) = (win.width() as isize, win.height() as isize);
    for y in 0..h {
        for x in 0..w {
            let (nx, ny) = (x + dx, y + dy);
            if nx < 0 || ny < 0 || nx >= w || ny >= h {
                continue;
            }
            let a = (win.get(x as usize, y as usize) as usize * levels) / 256;
            let b = (win.get(nx as usize, ny as usize) as usize * levels) / 256;
            counts[a * levels + b] += 1.0;
            total += 1.0;
            if symmetric {
                counts[b * levels + a] += 1.0;
                total += 1.0;
            }
        }
    }
    counts.iter().map(|c| c / total).collect()
}

/// Number of 4-connected plateaus with no strictly lower 4-neighbour.
pub fn count_minimum_plateaus(levels: &[u8], w: usize, h: usize) -> usize {
    let mut comp = vec![usize::MAX; w * h];
    let mut count = 0;
    for start in 0..w * h {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = start;
        let mut stack = vec![start];
        comp[start] = id;
        let mut is_min = true;
        while let Some(p) = stack.pop() {
            let (x, y) = (p % w, p / w);
            let mut nbrs = Vec::new();
            if x > 0 {
                nbrs.push(p - 1);
            }
            if x + 1 < w {
                nbrs.push(p + 1);
            }
            if y > 0 {
                nbrs.push(p - w);
            }
            if y + 1 < h {
                nbrs.push(p + w);
            }
            for q in nbrs {
                if levels[q] < levels[p] {
                    is_min = false;
                } else if levels[q] == levels[p] && comp[q] == usize::MAX {
                    comp[q] = id;
                    stack.push(q);
                }
            }
        }
        if is_min {
            count += 1;
        }
    }
    count
}

/// A brain-slice-like test image: dark background, an elliptical skull
/// ring, grey and white matter lobes, a bright lesion and mild noise.
pub fn brain_like(w: usize, h: usize, seed: u64) -> GrayImage {
    let mut r = rng(seed);
    let (cx, cy) = (w as f64 / 2.0, h as f64 / 2.0);
    let (ax, ay) = (w as f64 * 0.42, h as f64 * 0.46);
    GrayImage::from_fn(w, h, |x, y| {
        let u = (x as f64 - cx) / ax;
        let v = (y as f64 - cy) / ay;
        let rho = (u * u + v * v).sqrt();
        let base = if rho > 1.0 {
            8.0
        } else if rho > 0.92 {
            230.0
        } else if rho > 0.85 {
            40.0
        } else {
            let lobe = ((x as f64 * 0.15).sin() * (y as f64 * 0.11).cos()) * 25.0;
            let wm = if rho < 0.55 { 150.0 } else { 105.0 };
            wm + lobe
        };
        let (lx, ly) = (x as f64 - cx * 1.25, y as f64 - cy * 0.8);
        let lesion = if lx * lx + ly * ly < (w as f64 * 0.08).powi(2) {
            70.0
        } else {
            0.0
        };
        let noise = (r.random::<f64>() - 0.5) * 12.0;
        (base + lesion + noise).round().clamp(0.0, 255.0) as u8
    })
}
