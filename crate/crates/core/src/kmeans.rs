//! Lloyd-style k-means, either relationally on a dissimilarity matrix or on
//! coordinates, always scored by the relational cost on the original
//! matrix.
//!
//! The relational cost of a partition is `Σ_C (1 / 2|C|) Σ_{i,j∈C} D_ij`,
//! which equals the usual within-cluster sum of squares when `D` holds
//! squared Euclidean distances.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dissim::DissimilarityMatrix;
use crate::error::{Error, Result};
use crate::par;

pub const DEFAULT_MAX_ITER: usize = 100;
pub const DEFAULT_RESTARTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct KMeansConfig {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub restarts: usize,
}

impl KMeansConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            seed,
            max_iter: DEFAULT_MAX_ITER,
            restarts: DEFAULT_RESTARTS,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.k < 1 || self.k > n {
            return Err(Error::invalid(format!("k must lie in [1, {n}], got {}", self.k)));
        }
        if self.restarts == 0 {
            return Err(Error::invalid("restarts must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KMeansResult {
    pub k: usize,
    pub assignment: Vec<usize>,
    pub relational_cost: f64,
    /// Iterations used by the winning restart.
    pub iterations: usize,
    pub seed: u64,
    /// Times an empty cluster was reseeded in the winning restart.
    pub reseeds: usize,
}

/// `Σ_C (1 / 2|C|) Σ_{i,j∈C} D_ij`. Labels must be `< k` for some `k`.
pub fn relational_cost(d: &DissimilarityMatrix, labels: &[usize]) -> Result<f64> {
    let n = d.n();
    if labels.len() != n {
        return Err(Error::DimensionMismatch {
            left: labels.len(),
            right: n,
        });
    }
    let k = labels.iter().max().map_or(0, |&m| m + 1);
    let mut size = vec![0usize; k];
    let mut within = vec![0.0f64; k];
    for i in 0..n {
        size[labels[i]] += 1;
        for j in (i + 1)..n {
            if labels[i] == labels[j] {
                within[labels[i]] += d.get(i, j);
            }
        }
    }
    // within[c] holds each unordered pair once; the ordered sum is twice that
    Ok((0..k)
        .filter(|&c| size[c] > 0)
        .map(|c| within[c] / size[c] as f64)
        .sum())
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

/// k-means++ seeding from an arbitrary point-to-point cost; negative costs
/// count as zero.
fn plus_plus_seeds<F>(n: usize, k: usize, rng: &mut ChaCha8Rng, cost: F) -> Vec<usize>
where
    F: Fn(usize, usize) -> f64,
{
    let mut seeds = vec![rng.gen_range(0..n)];
    let mut best: Vec<f64> = (0..n).map(|i| cost(i, seeds[0]).max(0.0)).collect();
    while seeds.len() < k {
        let total: f64 = best.iter().sum();
        let next = if total > 0.0 && total.is_finite() {
            let mut target = rng.gen_range(0.0..total);
            let mut pick = n - 1;
            for (i, &w) in best.iter().enumerate() {
                if target < w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            pick
        } else {
            // every remaining point coincides with a seed; take any unused one
            (0..n).find(|i| !seeds.contains(i)).expect("k <= n")
        };
        let next = if seeds.contains(&next) {
            (0..n).find(|i| !seeds.contains(i)).expect("k <= n")
        } else {
            next
        };
        seeds.push(next);
        for (i, b) in best.iter_mut().enumerate() {
            *b = b.min(cost(i, next).max(0.0));
        }
    }
    seeds
}

struct RunOutcome {
    labels: Vec<usize>,
    cost: f64,
    iterations: usize,
    reseeds: usize,
}

fn best_of(runs: Vec<Result<RunOutcome>>, cfg: &KMeansConfig) -> Result<KMeansResult> {
    let mut best: Option<RunOutcome> = None;
    for run in runs {
        let run = run?;
        if best.as_ref().is_none_or(|b| run.cost < b.cost) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one restart");
    Ok(KMeansResult {
        k: cfg.k,
        assignment: best.labels,
        relational_cost: best.cost,
        iterations: best.iterations,
        seed: cfg.seed,
        reseeds: best.reseeds,
    })
}

/// Relational Lloyd iterations directly on `D`.
///
/// The cost of assigning `i` to cluster `C` is
/// `(1/|C|) Σ_{j∈C} D_ij − (1/2|C|²) Σ_{j,l∈C} D_jl`, the squared distance
/// to the centroid when `D` is Euclidean. On indefinite `D` the iteration
/// need not descend, so each restart keeps the cheapest partition it
/// visits.
pub fn relational_kmeans(d: &DissimilarityMatrix, cfg: &KMeansConfig) -> Result<KMeansResult> {
    let n = d.n();
    cfg.validate(n)?;
    let runs = par::map_indices(cfg.restarts, |r| {
        let mut rng = restart_rng(cfg.seed, r);
        let seeds = plus_plus_seeds(n, cfg.k, &mut rng, |i, j| d.get(i, j));
        let mut labels: Vec<usize> = (0..n)
            .map(|i| {
                (0..cfg.k)
                    .min_by(|&a, &b| d.get(i, seeds[a]).total_cmp(&d.get(i, seeds[b])))
                    .expect("k >= 1")
            })
            .collect();
        for (c, &s) in seeds.iter().enumerate() {
            labels[s] = c;
        }
        let mut best = (labels.clone(), relational_cost(d, &labels)?);
        let mut iterations = 0;
        let mut reseeds = 0;
        for _ in 0..cfg.max_iter {
            iterations += 1;
            let mut size = vec![0usize; cfg.k];
            for &l in &labels {
                size[l] += 1;
            }
            // sums[c][i] = Σ_{j∈C} D_ij
            let mut sums = vec![vec![0.0f64; n]; cfg.k];
            for (j, &c) in labels.iter().enumerate() {
                let col = d.as_matrix().column(j);
                for (i, s) in sums[c].iter_mut().enumerate() {
                    *s += col[i];
                }
            }
            let spread: Vec<f64> = (0..cfg.k)
                .map(|c| {
                    let tot: f64 = (0..n).filter(|&j| labels[j] == c).map(|j| sums[c][j]).sum();
                    if size[c] > 0 {
                        tot / (2.0 * (size[c] * size[c]) as f64)
                    } else {
                        0.0
                    }
                })
                .collect();
            let mut next: Vec<usize> = (0..n)
                .map(|i| {
                    (0..cfg.k)
                        .filter(|&c| size[c] > 0)
                        .map(|c| (c, sums[c][i] / size[c] as f64 - spread[c]))
                        .min_by(|a, b| a.1.total_cmp(&b.1))
                        .map(|(c, _)| c)
                        .expect("some cluster is non-empty")
                })
                .collect();
            reseeds += reseed_empty(&mut next, cfg.k, |i| {
                let c = labels[i];
                sums[c][i] / size[c] as f64 - spread[c]
            });
            if next == labels {
                break;
            }
            labels = next;
            let cost = relational_cost(d, &labels)?;
            if cost < best.1 {
                best = (labels.clone(), cost);
            }
        }
        Ok(RunOutcome {
            labels: best.0,
            cost: best.1,
            iterations,
            reseeds,
        })
    });
    best_of(runs, cfg)
}

/// Moves the point with the largest current cost into each empty cluster.
fn reseed_empty<F: Fn(usize) -> f64>(labels: &mut [usize], k: usize, cost: F) -> usize {
    let mut count = 0;
    loop {
        let mut size = vec![0usize; k];
        for &l in labels.iter() {
            size[l] += 1;
        }
        let Some(empty) = (0..k).find(|&c| size[c] == 0) else {
            return count;
        };
        let donor = (0..labels.len())
            .filter(|&i| size[labels[i]] > 1)
            .max_by(|&a, &b| cost(a).total_cmp(&cost(b)))
            .expect("k <= n leaves a cluster with two members");
        labels[donor] = empty;
        count += 1;
    }
}

#[inline]
fn row_dist2(x: &DMatrix<f64>, i: usize, row: &[f64]) -> f64 {
    let mut s = 0.0;
    for (t, &v) in row.iter().enumerate() {
        let diff = x[(i, t)] - v;
        s += diff * diff;
    }
    s
}

/// Lloyd iterations on the rows of `coords`; the reported cost is the
/// relational cost of the final assignment on `d`.
pub fn kmeans_projected(
    coords: &DMatrix<f64>,
    d: &DissimilarityMatrix,
    cfg: &KMeansConfig,
) -> Result<KMeansResult> {
    let n = coords.nrows();
    if n != d.n() {
        return Err(Error::DimensionMismatch { left: n, right: d.n() });
    }
    cfg.validate(n)?;
    let dim = coords.ncols();
    let rows: Vec<Vec<f64>> = (0..n).map(|i| coords.row(i).iter().copied().collect()).collect();
    let runs = par::map_indices(cfg.restarts, |r| {
        let mut rng = restart_rng(cfg.seed, r);
        let seeds = plus_plus_seeds(n, cfg.k, &mut rng, |i, j| row_dist2(coords, i, &rows[j]));
        let mut centroids: Vec<Vec<f64>> = seeds.iter().map(|&s| rows[s].clone()).collect();
        let mut labels = vec![usize::MAX; n];
        let mut iterations = 0;
        let mut reseeds = 0;
        let mut within = 0.0;
        for _ in 0..cfg.max_iter {
            iterations += 1;
            let assigned: Vec<(usize, f64)> = (0..n)
                .map(|i| {
                    centroids
                        .iter()
                        .enumerate()
                        .map(|(c, mu)| (c, row_dist2(coords, i, mu)))
                        .min_by(|a, b| a.1.total_cmp(&b.1))
                        .expect("k >= 1")
                })
                .collect();
            let mut next: Vec<usize> = assigned.iter().map(|a| a.0).collect();
            reseeds += reseed_empty(&mut next, cfg.k, |i| assigned[i].1);
            let changed = next != labels;
            labels = next;
            let mut counts = vec![0usize; cfg.k];
            let mut sums = vec![vec![0.0; dim]; cfg.k];
            for i in 0..n {
                counts[labels[i]] += 1;
                for (s, v) in sums[labels[i]].iter_mut().zip(&rows[i]) {
                    *s += v;
                }
            }
            for c in 0..cfg.k {
                for s in &mut sums[c] {
                    *s /= counts[c] as f64;
                }
            }
            centroids = sums;
            within = (0..n).map(|i| row_dist2(coords, i, &centroids[labels[i]])).sum();
            if !changed {
                break;
            }
        }
        (labels, within, iterations, reseeds)
    });
    // restarts compete on their own objective; only the winner is scored on D
    let mut best: Option<(Vec<usize>, f64, usize, usize)> = None;
    for run in runs {
        if best.as_ref().is_none_or(|b| run.1 < b.1) {
            best = Some(run);
        }
    }
    let (labels, _, iterations, reseeds) = best.expect("at least one restart");
    Ok(KMeansResult {
        k: cfg.k,
        relational_cost: relational_cost(d, &labels)?,
        assignment: labels,
        iterations,
        seed: cfg.seed,
        reseeds,
    })
}
