//! Seeded Gaussian random projections and the three transforms built on
//! them: classical, pseudo-Euclidean (one map per signature block) and
//! power distance (one map on the ball centers, radius carried through).

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::power::{power_matrix, PowerRepresentation};
use crate::pseudo::{squared_distance_matrix, PseudoEuclideanEmbedding};

/// Parameters shared by every transform.
///
/// The target dimension is `ceil(dim_constant * log2(n) / epsilon²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionConfig {
    pub epsilon: f64,
    pub dim_constant: f64,
    pub seed: u64,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.5,
            dim_constant: 2.0,
            seed: 0,
        }
    }
}

impl ProjectionConfig {
    pub fn new(epsilon: f64, dim_constant: f64, seed: u64) -> Result<Self> {
        let cfg = Self {
            epsilon,
            dim_constant,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::invalid(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if !(self.dim_constant > 0.0 && self.dim_constant.is_finite()) {
            return Err(Error::invalid(format!(
                "dimension constant must be positive, got {}",
                self.dim_constant
            )));
        }
        Ok(())
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

/// `ceil(c · log2(n) / ε²)`, at least 1.
pub fn target_dim(n: usize, cfg: &ProjectionConfig) -> Result<usize> {
    cfg.validate()?;
    if n < 2 {
        return Err(Error::invalid(format!("target dimension needs n >= 2, got {n}")));
    }
    let m = (cfg.dim_constant * (n as f64).log2() / (cfg.epsilon * cfg.epsilon)).ceil();
    Ok((m as usize).max(1))
}

/// Dense `m x d` Gaussian map with entries drawn from `N(0, 1/m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JLMap {
    matrix: DMatrix<f64>,
}

/// Builds the map for `(m, d, seed)`. Entries are drawn column by column
/// from a ChaCha8 stream, so the result is fixed by its arguments.
pub fn gaussian_map(m: usize, d: usize, seed: u64) -> JLMap {
    assert!(m >= 1, "target dimension must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0 / (m as f64).sqrt()).expect("positive std dev");
    let matrix = DMatrix::from_fn(m, d, |_, _| normal.sample(&mut rng));
    JLMap { matrix }
}

impl JLMap {
    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `f(x)` for a single vector.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols() {
            return Err(Error::DimensionMismatch {
                left: x.len(),
                right: self.cols(),
            });
        }
        Ok((0..self.rows())
            .map(|r| (0..self.cols()).map(|c| self.matrix[(r, c)] * x[c]).sum())
            .collect())
    }

    /// Applies the map to every row of `coords` (`n x d` → `n x m`).
    pub fn project_rows(&self, coords: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if coords.ncols() != self.cols() {
            return Err(Error::DimensionMismatch {
                left: coords.ncols(),
                right: self.cols(),
            });
        }
        let n = coords.nrows();
        let m = self.rows();
        if self.cols() == 0 {
            return Ok(DMatrix::zeros(n, m));
        }
        // output column r is coords · map_rowᵀ; columns are independent
        let cols = par::flat_map_indices(m, |r| {
            let w = self.matrix.row(r).transpose();
            (coords * w).as_slice().to_vec()
        });
        Ok(DMatrix::from_vec(n, m, cols))
    }
}

/// Projects the rows of `coords` with one Gaussian map of dimension
/// `target_dim(n)`.
pub fn project_classical(coords: &DMatrix<f64>, cfg: &ProjectionConfig) -> Result<DMatrix<f64>> {
    let m = target_dim(coords.nrows(), cfg)?;
    gaussian_map(m, coords.ncols(), cfg.seed).project_rows(coords)
}

/// Projected pseudo-Euclidean points with signature `(p', q')`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedPQ {
    pub pos_coords: DMatrix<f64>,
    pub neg_coords: DMatrix<f64>,
}

impl ProjectedPQ {
    pub fn signature(&self) -> (usize, usize) {
        (self.pos_coords.ncols(), self.neg_coords.ncols())
    }
}

/// Projects each signature block with its own Gaussian map.
///
/// The positive block uses `seed`, the negative block `seed + 1`. Both
/// target dimensions equal `target_dim(n)`; an empty block stays empty.
pub fn project_pq(emb: &PseudoEuclideanEmbedding, cfg: &ProjectionConfig) -> Result<ProjectedPQ> {
    let m = target_dim(emb.n(), cfg)?;
    let block = |coords: &DMatrix<f64>, seed: u64| -> Result<DMatrix<f64>> {
        if coords.ncols() == 0 {
            Ok(DMatrix::zeros(coords.nrows(), 0))
        } else {
            gaussian_map(m, coords.ncols(), seed).project_rows(coords)
        }
    };
    Ok(ProjectedPQ {
        pos_coords: block(emb.pos_coords(), cfg.seed)?,
        neg_coords: block(emb.neg_coords(), cfg.seed.wrapping_add(1))?,
    })
}

/// Projected ball centers with the unchanged common radius.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedPower {
    pub centers: DMatrix<f64>,
    pub radius: f64,
}

pub fn project_power(rep: &PowerRepresentation, cfg: &ProjectionConfig) -> Result<ProjectedPower> {
    Ok(ProjectedPower {
        centers: project_classical(rep.centers(), cfg)?,
        radius: rep.radius(),
    })
}

/// Rebuilds a dissimilarity matrix from projected points.
///
/// The output is symmetric with a zero diagonal but is not validated as a
/// dissimilarity matrix; entries may be negative or non-finite.
pub trait Reconstruct {
    fn reconstruct(&self) -> DMatrix<f64>;
}

impl Reconstruct for ProjectedPQ {
    /// Interval squares under the `(p', q')` form.
    fn reconstruct(&self) -> DMatrix<f64> {
        squared_distance_matrix(&self.pos_coords) - squared_distance_matrix(&self.neg_coords)
    }
}

impl Reconstruct for ProjectedPower {
    /// Power distances with the carried radius.
    fn reconstruct(&self) -> DMatrix<f64> {
        power_matrix(&self.centers, self.radius)
    }
}

impl Reconstruct for DMatrix<f64> {
    /// Squared Euclidean distances between rows.
    fn reconstruct(&self) -> DMatrix<f64> {
        squared_distance_matrix(self)
    }
}
