//! Synthetic non-Euclidean dissimilarity generators and graph hop
//! distances.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dissim::DissimilarityMatrix;
use crate::error::{Error, Result};
use crate::par;

/// Default scale of the dominant block in [`gen_simplex`].
pub const DEFAULT_SIMPLEX_DOMINANCE: f64 = 2.0;

/// Range of the squared vertex weights of the simplex block.
pub const SIMPLEX_WEIGHT_RANGE: (f64, f64) = (0.5, 1.5);

/// Random-simplex dataset.
///
/// Point `i` carries a weighted standard-simplex vertex `w_i e_i` in a
/// negative (time-like) block and a Gaussian vector `a_i ∈ R^k`,
/// `k = ceil(n / 10)`, with covariance `(α² / k) I` in a positive block
/// that dominates the dissimilarities:
///
/// `D_ij = ‖a_i − a_j‖² − (w_i² + w_j²)`.
///
/// The Gram matrix then has `k` positive and `n − 1 − k` negative
/// eigenvalues. Squared weights are uniform in [`SIMPLEX_WEIGHT_RANGE`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimplexSpec {
    pub n: usize,
    pub dominance: f64,
    pub seed: u64,
}

impl SimplexSpec {
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            dominance: DEFAULT_SIMPLEX_DOMINANCE,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::invalid(format!("simplex needs n >= 2, got {}", self.n)));
        }
        if !(self.dominance > 0.0 && self.dominance.is_finite()) {
            return Err(Error::invalid(format!(
                "dominance must be positive, got {}",
                self.dominance
            )));
        }
        Ok(())
    }

    /// Dimension of the dominant block.
    pub fn dominant_dim(&self) -> usize {
        self.n.div_ceil(10)
    }
}

pub fn gen_simplex(spec: &SimplexSpec) -> Result<DissimilarityMatrix> {
    spec.validate()?;
    let n = spec.n;
    let k = spec.dominant_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let normal = Normal::new(0.0, spec.dominance / (k as f64).sqrt()).expect("positive std dev");
    let dominant = DMatrix::from_fn(n, k, |_, _| normal.sample(&mut rng));
    let (lo, hi) = SIMPLEX_WEIGHT_RANGE;
    let w2: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..hi)).collect();

    DissimilarityMatrix::from_upper_fn(n, |i, j| {
        let mut s = 0.0;
        for t in 0..k {
            let d = dominant[(i, t)] - dominant[(j, t)];
            s += d * d;
        }
        s - (w2[i] + w2[j])
    })
}

/// Euclidean-ball dataset: balls with Gaussian centers and uniform radii.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallSpec {
    pub n: usize,
    pub dim: usize,
    pub radius_range: (f64, f64),
    pub seed: u64,
}

impl BallSpec {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.radius_range;
        if self.n < 2 {
            return Err(Error::invalid(format!("balls need n >= 2, got {}", self.n)));
        }
        if self.dim == 0 {
            return Err(Error::invalid("ball dimension must be at least 1"));
        }
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::invalid(format!("radius range must satisfy 0 < min <= max, got ({lo}, {hi})")));
        }
        Ok(())
    }
}

/// Gap between ball surfaces, `max(0, ‖c_i − c_j‖ − r_i − r_j)`.
pub fn gen_balls(spec: &BallSpec) -> Result<DissimilarityMatrix> {
    spec.validate()?;
    let (lo, hi) = spec.radius_range;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let centers = DMatrix::from_fn(spec.n, spec.dim, |_, _| StandardNormal.sample(&mut rng));
    let radii: Vec<f64> = (0..spec.n).map(|_| rng.gen_range(lo..=hi)).collect();
    Ok(ball_gaps(&centers, &radii))
}

/// Surface gaps for explicit centers (rows) and radii. Zero radii give the
/// plain Euclidean distance matrix.
pub fn ball_gaps(centers: &DMatrix<f64>, radii: &[f64]) -> DissimilarityMatrix {
    let n = centers.nrows();
    DissimilarityMatrix::from_upper_fn(n, |i, j| {
        let dist = (centers.row(i) - centers.row(j)).norm();
        (dist - radii[i] - radii[j]).max(0.0)
    })
    .expect("finite centers and radii give finite gaps")
}

/// Hop-count matrix of the largest connected component.
#[derive(Debug, Clone)]
pub struct GraphHops {
    pub matrix: DissimilarityMatrix,
    /// Original vertex id of each row.
    pub vertices: Vec<usize>,
    /// Vertices outside the kept component (including ids with no edges).
    pub dropped: usize,
}

/// Unweighted BFS distances over an undirected edge list.
///
/// Vertex ids run over `0..=max id`; self-loops and duplicates are ignored.
/// A disconnected graph is reduced to its largest component (ties go to
/// the component with the smallest vertex id) with a warning.
pub fn graph_hops(edges: &[(usize, usize)]) -> Result<GraphHops> {
    let n = edges
        .iter()
        .map(|&(u, v)| u.max(v) + 1)
        .max()
        .ok_or(Error::EmptyGraph)?;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(u, v) in edges {
        if u != v {
            adj[u].push(v);
            adj[v].push(u);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }

    let mut component = vec![usize::MAX; n];
    let mut sizes = Vec::new();
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        let mut size = 0;
        let mut queue = VecDeque::from([start]);
        component[start] = id;
        while let Some(u) = queue.pop_front() {
            size += 1;
            for &v in &adj[u] {
                if component[v] == usize::MAX {
                    component[v] = id;
                    queue.push_back(v);
                }
            }
        }
        sizes.push(size);
    }
    let keep = (0..sizes.len())
        .max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(b.cmp(&a)))
        .expect("at least one component");
    let vertices: Vec<usize> = (0..n).filter(|&v| component[v] == keep).collect();
    let dropped = n - vertices.len();
    if dropped > 0 {
        log::warn!(
            "graph has {} components; keeping the largest ({} of {n} vertices)",
            sizes.len(),
            vertices.len()
        );
    }

    let mut local = vec![usize::MAX; n];
    for (idx, &v) in vertices.iter().enumerate() {
        local[v] = idx;
    }
    let m = vertices.len();
    let rows = par::map_indices(m, |src| {
        let mut dist = vec![u32::MAX; m];
        dist[src] = 0;
        let mut queue = VecDeque::from([vertices[src]]);
        while let Some(u) = queue.pop_front() {
            let du = dist[local[u]];
            for &v in &adj[u] {
                let lv = local[v];
                if dist[lv] == u32::MAX {
                    dist[lv] = du + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    });
    let matrix = DissimilarityMatrix::from_upper_fn(m, |i, j| rows[i][j] as f64)?;
    Ok(GraphHops {
        matrix,
        vertices,
        dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dissim::{gram_decomposition, DEFAULT_TAU_REL};

    #[test]
    fn simplex_two_points() {
        let d = gen_simplex(&SimplexSpec::new(2, 1)).unwrap();
        assert_eq!(d.n(), 2);
        assert_eq!(d.get(0, 1), d.get(1, 0));
        assert_eq!(d.get(0, 0), 0.0);
    }

    #[test]
    fn simplex_is_mostly_negative() {
        let spec = SimplexSpec::new(120, 3);
        let d = gen_simplex(&spec).unwrap();
        let dec = gram_decomposition(&d, DEFAULT_TAU_REL).unwrap();
        assert_eq!(dec.p(), spec.dominant_dim());
        assert_eq!(dec.q(), 120 - 1 - spec.dominant_dim());
        assert!(dec.q() as f64 >= 0.8 * 120.0);
    }

    #[test]
    fn simplex_is_seed_deterministic() {
        let a = gen_simplex(&SimplexSpec::new(30, 5)).unwrap();
        let b = gen_simplex(&SimplexSpec::new(30, 5)).unwrap();
        let c = gen_simplex(&SimplexSpec::new(30, 6)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn simplex_rejects_bad_spec() {
        assert!(gen_simplex(&SimplexSpec::new(1, 0)).is_err());
        let spec = SimplexSpec {
            dominance: 0.0,
            ..SimplexSpec::new(5, 0)
        };
        assert!(gen_simplex(&spec).is_err());
    }

    #[test]
    fn zero_radius_balls_are_metric() {
        let centers = DMatrix::from_row_slice(3, 2, &[0.0, 0.0, 3.0, 0.0, 0.0, 4.0]);
        let d = ball_gaps(&centers, &[0.0; 3]);
        assert_eq!(d.get(0, 1), 3.0);
        assert_eq!(d.get(1, 2), 5.0);
        assert!(d.triangle_violation().is_none());
    }

    #[test]
    fn overlapping_balls_clamp_to_zero() {
        let centers = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let d = ball_gaps(&centers, &[1.0, 1.0]);
        assert_eq!(d.get(0, 1), 0.0);
    }

    #[test]
    fn huge_balls_all_overlap() {
        let spec = BallSpec {
            n: 3,
            dim: 2,
            radius_range: (10.0, 10.0),
            seed: 1,
        };
        let d = gen_balls(&spec).unwrap();
        assert_eq!(d.max_abs(), 0.0);
    }

    #[test]
    fn balls_violate_triangle_inequality() {
        let spec = BallSpec {
            n: 60,
            dim: 10,
            radius_range: (0.5, 2.0),
            seed: 4,
        };
        let d = gen_balls(&spec).unwrap();
        assert!(d.triangle_violation().is_some());
        let dec = gram_decomposition(&d, DEFAULT_TAU_REL).unwrap();
        assert!(dec.q() > 0);
    }

    #[test]
    fn ball_spec_validation() {
        let bad = BallSpec {
            n: 3,
            dim: 2,
            radius_range: (2.0, 1.0),
            seed: 0,
        };
        assert!(gen_balls(&bad).is_err());
        assert!(gen_balls(&BallSpec { radius_range: (0.0, 1.0), ..bad }).is_err());
        assert!(gen_balls(&BallSpec { dim: 0, radius_range: (1.0, 1.0), ..bad }).is_err());
    }

    fn hops(edges: &[(usize, usize)]) -> Vec<Vec<f64>> {
        let g = graph_hops(edges).unwrap();
        let n = g.matrix.n();
        (0..n).map(|i| (0..n).map(|j| g.matrix.get(i, j)).collect()).collect()
    }

    #[test]
    fn path_graph() {
        assert_eq!(
            hops(&[(0, 1), (1, 2)]),
            vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]]
        );
    }

    #[test]
    fn triangle_graph() {
        let h = hops(&[(0, 1), (1, 2), (2, 0), (0, 1), (2, 2)]);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(h[i][j], if i == j { 0.0 } else { 1.0 });
            }
        }
    }

    #[test]
    fn star_graph() {
        let h = hops(&[(0, 1), (0, 2), (0, 3)]);
        assert_eq!(h[0][1..], [1.0, 1.0, 1.0]);
        assert_eq!(h[1][2], 2.0);
        assert_eq!(h[2][3], 2.0);
    }

    #[test]
    fn disconnected_graph_keeps_largest_component() {
        let g = graph_hops(&[(0, 1), (3, 4), (4, 5)]).unwrap();
        assert_eq!(g.vertices, vec![3, 4, 5]);
        assert_eq!(g.dropped, 3);
        assert_eq!(g.matrix.get(0, 2), 2.0);
    }

    #[test]
    fn empty_graph_is_error() {
        assert!(matches!(graph_hops(&[]), Err(Error::EmptyGraph)));
    }

    #[test]
    fn hop_matrix_is_metric() {
        let edges: Vec<(usize, usize)> = (0..20).map(|i| (i, (i * 7 + 3) % 20)).chain((0..19).map(|i| (i, i + 1))).collect();
        let g = graph_hops(&edges).unwrap();
        assert!(g.matrix.triangle_violation().is_none());
    }
}
