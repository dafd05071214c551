//! Pseudo-Euclidean coordinates of signature `(p, q)`.
//!
//! A point's coordinates are stored as two blocks: the `p` coordinates
//! paired with positive eigenvalues and the `q` coordinates paired with
//! negative ones. The interval square between two points is the squared
//! Euclidean length of the positive-block difference minus that of the
//! negative-block difference.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::dissim::GramDecomposition;
use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoEuclideanEmbedding {
    pos: DMatrix<f64>,
    neg: DMatrix<f64>,
}

impl PseudoEuclideanEmbedding {
    /// Assembles an embedding from its two coordinate blocks.
    pub fn from_parts(pos: DMatrix<f64>, neg: DMatrix<f64>) -> Result<Self> {
        if pos.nrows() != neg.nrows() {
            return Err(Error::DimensionMismatch {
                left: pos.nrows(),
                right: neg.nrows(),
            });
        }
        Ok(Self { pos, neg })
    }

    pub fn n(&self) -> usize {
        self.pos.nrows()
    }

    pub fn p(&self) -> usize {
        self.pos.ncols()
    }

    pub fn q(&self) -> usize {
        self.neg.ncols()
    }

    /// `n x p` block; row `i` is `x_i^(p)`.
    pub fn pos_coords(&self) -> &DMatrix<f64> {
        &self.pos
    }

    /// `n x q` block; row `i` is `x_i^(q)`.
    pub fn neg_coords(&self) -> &DMatrix<f64> {
        &self.neg
    }

    /// Both blocks side by side, read as plain Euclidean coordinates.
    pub fn concatenated(&self) -> DMatrix<f64> {
        let n = self.n();
        let (p, q) = (self.p(), self.q());
        DMatrix::from_fn(n, p + q, |i, k| {
            if k < p {
                self.pos[(i, k)]
            } else {
                self.neg[(i, k - p)]
            }
        })
    }

    fn check(&self, i: usize, j: usize) -> Result<()> {
        let n = self.n();
        if i >= n || j >= n {
            return Err(Error::IndexOutOfRange { i, j, n });
        }
        Ok(())
    }

    fn block_parts(&self, i: usize, j: usize) -> (f64, f64) {
        (
            row_dist2(&self.pos, i, j),
            row_dist2(&self.neg, i, j),
        )
    }

    /// Interval square `‖Δx^(p)‖² − ‖Δx^(q)‖²`; may be negative.
    pub fn pq_interval(&self, i: usize, j: usize) -> Result<f64> {
        self.check(i, j)?;
        let (a, b) = self.block_parts(i, j);
        Ok(a - b)
    }

    /// Squared Euclidean length of the full difference vector.
    pub fn euclid_interval(&self, i: usize, j: usize) -> Result<f64> {
        self.check(i, j)?;
        let (a, b) = self.block_parts(i, j);
        Ok(a + b)
    }

    /// `C_ij = |euclid_interval / pq_interval|`.
    ///
    /// Returns `+∞` for null separations (zero interval square with a
    /// nonzero Euclidean length) and `1` when both vanish.
    pub fn distortion_factor(&self, i: usize, j: usize) -> Result<f64> {
        self.check(i, j)?;
        if i == j {
            return Err(Error::SamePoint(i));
        }
        let (a, b) = self.block_parts(i, j);
        Ok(distortion_ratio(a + b, a - b))
    }

    /// Squared Euclidean distance matrices of the positive and the negative
    /// block, in that order.
    pub fn block_distance_matrices(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        (squared_distance_matrix(&self.pos), squared_distance_matrix(&self.neg))
    }

    /// All pairwise interval squares as an `n x n` matrix.
    pub fn interval_matrix(&self) -> DMatrix<f64> {
        let (a, b) = self.block_distance_matrices();
        a - b
    }
}

/// Pairwise squared distances between the rows of `x`, via `‖a‖² + ‖b‖² − 2⟨a, b⟩`.
///
/// Exactly symmetric with a zero diagonal; tiny negative values from
/// cancellation are clamped to zero.
pub fn squared_distance_matrix(x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    if x.ncols() == 0 {
        return DMatrix::zeros(n, n);
    }
    let g = x * x.transpose();
    let mut out = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..j {
            let v = (g[(i, i)] + g[(j, j)] - 2.0 * g[(i, j)]).max(0.0);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

pub(crate) fn distortion_ratio(euclid: f64, pq: f64) -> f64 {
    if pq == 0.0 {
        if euclid == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        (euclid / pq).abs()
    }
}

#[inline]
pub(crate) fn row_dist2(m: &DMatrix<f64>, i: usize, j: usize) -> f64 {
    let mut s = 0.0;
    for k in 0..m.ncols() {
        let d = m[(i, k)] - m[(j, k)];
        s += d * d;
    }
    s
}

/// Recovers pseudo-Euclidean coordinates `√|λ_k| · U[i][k]`.
///
/// Columns whose eigenvalue lies within the zero threshold are dropped.
pub fn embed_pq(dec: &GramDecomposition) -> PseudoEuclideanEmbedding {
    let n = dec.n();
    let u = dec.eigenvectors();
    let lambda = dec.eigenvalues();
    let block = |idx: Vec<usize>| {
        DMatrix::from_fn(n, idx.len(), |i, c| {
            let k = idx[c];
            lambda[k].abs().sqrt() * u[(i, k)]
        })
    };
    PseudoEuclideanEmbedding {
        pos: block(dec.positive_indices().collect()),
        neg: block(dec.negative_indices().collect()),
    }
}

/// `‖v‖²_E / ‖v‖²_{p,q}` where the first `p` entries of `v` form the
/// positive block.
pub fn norm_ratio(v: &[f64], p: usize) -> f64 {
    let (head, tail) = v.split_at(p.min(v.len()));
    let a: f64 = head.iter().map(|x| x * x).sum();
    let b: f64 = tail.iter().map(|x| x * x).sum();
    (a + b) / (a - b)
}

/// Monte-Carlo sample of norm ratios for uniform directions on the sphere.
#[derive(Debug, Clone, Serialize)]
pub struct NormRatioSample {
    pub p: usize,
    pub q: usize,
    pub ratios: Vec<f64>,
    /// Set when `p == q`, where the ratio has no finite expectation.
    pub degenerate: bool,
}

impl NormRatioSample {
    /// Concentration point `(p + q) / (p − q)`; `None` when `p == q`.
    pub fn expected_ratio(&self) -> Option<f64> {
        (self.p != self.q).then(|| (self.p + self.q) as f64 / (self.p as f64 - self.q as f64))
    }

    pub fn mean(&self) -> f64 {
        self.ratios.iter().sum::<f64>() / self.ratios.len() as f64
    }

    /// Fraction of samples with `0 <= ratio < bound`.
    pub fn fraction_below(&self, bound: f64) -> f64 {
        let hits = self.ratios.iter().filter(|&&r| (0.0..bound).contains(&r)).count();
        hits as f64 / self.ratios.len() as f64
    }
}

/// Draws `trials` uniform unit vectors in `R^(p+q)` and returns their norm
/// ratios. Trial `t` uses its own ChaCha stream, so results do not depend
/// on thread count.
pub fn norm_ratio_sample(p: usize, q: usize, trials: usize, seed: u64) -> Result<NormRatioSample> {
    if p + q == 0 {
        return Err(Error::invalid("p + q must be at least 1"));
    }
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let degenerate = p == q;
    if degenerate {
        log::warn!("norm ratio sample with p == q = {p}: expected ratio is undefined");
    }
    let ratios = par::map_indices(trials, |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t as u64);
        let mut v: Vec<f64> = (0..p + q).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        norm_ratio(&v, p)
    });
    Ok(NormRatioSample {
        p,
        q,
        ratios,
        degenerate,
    })
}
