//! Generalized power distances between equal-radius balls.
//!
//! Any symmetric hollow `D` can be written as `E − 4r²(J − I)` where `E` is
//! a squared Euclidean distance matrix, provided `2r² ≥ |e_n|` for the
//! smallest Gram eigenvalue `e_n`. Recovering centers for `E` and keeping
//! the common radius `r` then reproduces `D` exactly as power distances.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dissim::{center_gram, decompose, DissimilarityMatrix, GramDecomposition};
use crate::error::{Error, Result};
use crate::pseudo::squared_distance_matrix;

/// `‖c1 − c2‖² − (r1 + r2)²`; negative for overlapping balls.
pub fn power_distance(c1: &[f64], r1: f64, c2: &[f64], r2: f64) -> Result<f64> {
    if c1.len() != c2.len() {
        return Err(Error::DimensionMismatch {
            left: c1.len(),
            right: c2.len(),
        });
    }
    let d2: f64 = c1.iter().zip(c2).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(d2 - (r1 + r2) * (r1 + r2))
}

/// How the common radius is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RadiusRule {
    /// `r = √(|e_n| / 2)`, the smallest radius for which `E` is Euclidean.
    #[default]
    Minimal,
    /// `r = √|e_n| / 2`, which halves the shift and leaves `E` indefinite
    /// whenever `e_n < 0`.
    QuarterRoot,
    /// A caller-supplied radius.
    Fixed(f64),
}

/// `√(max(0, −e_n) / 2)`, or 0 when `e_n` lies within the zero threshold.
pub fn power_radius(dec: &GramDecomposition) -> f64 {
    let en = dec.smallest_eigenvalue();
    if en >= -dec.tau() {
        0.0
    } else {
        (-en / 2.0).sqrt()
    }
}

/// `√|e_n| / 2`, or 0 when `e_n` lies within the zero threshold.
pub fn power_radius_quarter_root(dec: &GramDecomposition) -> f64 {
    let en = dec.smallest_eigenvalue();
    if en >= -dec.tau() {
        0.0
    } else {
        (-en).sqrt() / 2.0
    }
}

impl RadiusRule {
    pub fn radius(&self, dec: &GramDecomposition) -> Result<f64> {
        match *self {
            RadiusRule::Minimal => Ok(power_radius(dec)),
            RadiusRule::QuarterRoot => Ok(power_radius_quarter_root(dec)),
            RadiusRule::Fixed(r) if r >= 0.0 && r.is_finite() => Ok(r),
            RadiusRule::Fixed(r) => Err(Error::invalid(format!("radius must be finite and >= 0, got {r}"))),
        }
    }
}

/// `E_ij = D_ij + 4r²` off the diagonal, `E_ii = 0`.
pub fn euclideanize(d: &DissimilarityMatrix, r: f64) -> DissimilarityMatrix {
    let shift = 4.0 * r * r;
    let n = d.n();
    let mut e = d.as_matrix().add_scalar(shift);
    for i in 0..n {
        e[(i, i)] = 0.0;
    }
    DissimilarityMatrix::validate(e).expect("shifting a valid dissimilarity matrix keeps it valid")
}

/// Centers recovered by classical scaling, with bookkeeping about the
/// eigenvalues that had to be discarded.
#[derive(Debug, Clone)]
pub struct RecoveredCenters {
    pub centers: DMatrix<f64>,
    /// Most negative eigenvalue of `Gram(E)` (0 when PSD).
    pub min_eigenvalue: f64,
    /// Number of eigenvalues below `-τ` that were dropped.
    pub dropped_negative: usize,
}

/// Classical-scaling coordinates for a squared Euclidean distance matrix.
///
/// Eigenvalues of `Gram(E)` in `[−τ, 0)` are clamped to zero; one below
/// `−10τ` means `E` is not Euclidean and is an error.
pub fn recover_centers(e: &DissimilarityMatrix, tau_rel: f64) -> Result<DMatrix<f64>> {
    let dec = decompose(&center_gram(e), tau_rel)?;
    let en = dec.smallest_eigenvalue();
    let bound = 10.0 * dec.tau();
    if en < -bound {
        return Err(Error::NotEuclidean {
            eigenvalue: en,
            bound,
        });
    }
    Ok(positive_coordinates(&dec))
}

/// Like [`recover_centers`] but never fails: eigenvalues below the zero
/// threshold are dropped and counted. Used when a radius smaller than the
/// minimal one is forced.
pub fn recover_centers_lossy(e: &DissimilarityMatrix, tau_rel: f64) -> Result<RecoveredCenters> {
    let dec = decompose(&center_gram(e), tau_rel)?;
    Ok(RecoveredCenters {
        centers: positive_coordinates(&dec),
        min_eigenvalue: dec.smallest_eigenvalue().min(0.0),
        dropped_negative: dec.q(),
    })
}

fn positive_coordinates(dec: &GramDecomposition) -> DMatrix<f64> {
    let idx: Vec<usize> = dec.positive_indices().collect();
    let u = dec.eigenvectors();
    let l = dec.eigenvalues();
    DMatrix::from_fn(dec.n(), idx.len(), |i, c| l[idx[c]].sqrt() * u[(i, idx[c])])
}

/// `n` balls of a common radius whose power distances reproduce `D`.
#[derive(Debug, Clone)]
pub struct PowerRepresentation {
    centers: DMatrix<f64>,
    radius: f64,
    dropped_negative: usize,
}

impl PowerRepresentation {
    pub fn new(centers: DMatrix<f64>, radius: f64) -> Result<Self> {
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(Error::invalid(format!("radius must be finite and >= 0, got {radius}")));
        }
        Ok(Self {
            centers,
            radius,
            dropped_negative: 0,
        })
    }

    /// Builds the representation from `D` and its Gram decomposition.
    ///
    /// With [`RadiusRule::Minimal`] (or any radius at least as large) the
    /// representation is exact. A smaller forced radius leaves `E`
    /// indefinite; its negative directions are dropped and counted in
    /// [`dropped_negative`](Self::dropped_negative).
    pub fn build(d: &DissimilarityMatrix, dec: &GramDecomposition, rule: RadiusRule) -> Result<Self> {
        let radius = rule.radius(dec)?;
        let tau_rel = dec.tau() / dec.eigenvalues().amax().max(1.0);
        let e = euclideanize(d, radius);
        match rule {
            RadiusRule::Minimal => Ok(Self {
                centers: recover_centers(&e, tau_rel)?,
                radius,
                dropped_negative: 0,
            }),
            _ => {
                let rec = recover_centers_lossy(&e, tau_rel)?;
                if rec.dropped_negative > 0 {
                    log::warn!(
                        "radius {radius} leaves {} negative Gram eigenvalues (min {}); dropping them",
                        rec.dropped_negative,
                        rec.min_eigenvalue
                    );
                }
                Ok(Self {
                    centers: rec.centers,
                    radius,
                    dropped_negative: rec.dropped_negative,
                })
            }
        }
    }

    pub fn n(&self) -> usize {
        self.centers.nrows()
    }

    /// Center dimension `d`.
    pub fn dim(&self) -> usize {
        self.centers.ncols()
    }

    pub fn centers(&self) -> &DMatrix<f64> {
        &self.centers
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dropped_negative(&self) -> usize {
        self.dropped_negative
    }

    pub fn power_distance(&self, i: usize, j: usize) -> Result<f64> {
        let n = self.n();
        if i >= n || j >= n {
            return Err(Error::IndexOutOfRange { i, j, n });
        }
        let ci: Vec<f64> = self.centers.row(i).iter().copied().collect();
        let cj: Vec<f64> = self.centers.row(j).iter().copied().collect();
        power_distance(&ci, self.radius, &cj, self.radius)
    }

    /// Power distances for all pairs, with a zero diagonal.
    pub fn distance_matrix(&self) -> DMatrix<f64> {
        power_matrix(&self.centers, self.radius)
    }
}

/// `‖c_i − c_j‖² − 4r²` off the diagonal, zero on it.
pub(crate) fn power_matrix(centers: &DMatrix<f64>, radius: f64) -> DMatrix<f64> {
    let shift = 4.0 * radius * radius;
    let mut m = squared_distance_matrix(centers).add_scalar(-shift);
    for i in 0..m.nrows() {
        m[(i, i)] = 0.0;
    }
    m
}

/// Isotropic Gaussian cluster.
///
/// `sigma² = E‖x − mean‖²` is the total variance, so a cluster in `R^d`
/// has per-coordinate variance `sigma² / d`. In one dimension this is the
/// ordinary standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianCluster {
    pub mean: Vec<f64>,
    pub sigma: f64,
}

impl GaussianCluster {
    pub fn new(mean: Vec<f64>, sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::invalid(format!("sigma must be finite and >= 0, got {sigma}")));
        }
        Ok(Self { mean, sigma })
    }
}

/// Unnormalized Wasserstein silhouette `‖μ_a − μ_b‖² − (σ_a + σ_b)²`.
///
/// This is the power distance between the balls `(μ_a, σ_a)` and `(μ_b, σ_b)`.
pub fn silhouette_gaussian(a: &GaussianCluster, b: &GaussianCluster) -> Result<f64> {
    power_distance(&a.mean, a.sigma, &b.mean, b.sigma)
}

/// `(‖Δμ‖² − (σ_a + σ_b)²) / (‖Δμ‖² + (σ_a + σ_b)²)`, in `[−1, 1]`.
///
/// Two coincident point masses are assigned −1.
pub fn silhouette_normalized(a: &GaussianCluster, b: &GaussianCluster) -> Result<f64> {
    let separation = silhouette_gaussian(a, b)?;
    let spread = (a.sigma + b.sigma).powi(2);
    let denom = separation + 2.0 * spread;
    if denom == 0.0 {
        return Ok(-1.0);
    }
    Ok((separation / denom).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dissim::{gram_decomposition, DEFAULT_TAU_REL};
    use crate::oracle;

    fn triangle_violating() -> DissimilarityMatrix {
        DissimilarityMatrix::from_rows(&[
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 5.0],
            vec![1.0, 5.0, 0.0],
        ])
        .unwrap()
    }

    #[test]
    fn power_distance_formula() {
        assert_eq!(power_distance(&[0.0, 0.0], 1.0, &[3.0, 0.0], 1.0).unwrap(), 5.0);
        assert_eq!(power_distance(&[1.0, 2.0], 0.0, &[4.0, 6.0], 0.0).unwrap(), 25.0);
        assert_eq!(power_distance(&[1.0], 1.0, &[1.0], 1.0).unwrap(), -4.0);
        assert!(matches!(
            power_distance(&[1.0], 1.0, &[1.0, 2.0], 1.0),
            Err(Error::DimensionMismatch { left: 1, right: 2 })
        ));
    }

    #[test]
    fn radius_examples() {
        let pts = oracle::random_points(10, 3, 1);
        let d = DissimilarityMatrix::validate(oracle::squared_distances(&pts)).unwrap();
        assert_eq!(power_radius(&gram_decomposition(&d, DEFAULT_TAU_REL).unwrap()), 0.0);

        let dec = gram_decomposition(&triangle_violating(), DEFAULT_TAU_REL).unwrap();
        assert!((power_radius(&dec) - (1.0f64 / 12.0).sqrt()).abs() < 1e-12);
        assert!((power_radius_quarter_root(&dec) - (1.0f64 / 6.0).sqrt() / 2.0).abs() < 1e-12);

        // e_n = -2 for D = -4(J - I) on two points: Gram = -C·(-4)(J-I)·C/2 has eigenvalue -2
        let d2 = DissimilarityMatrix::from_rows(&[vec![0.0, -4.0], vec![-4.0, 0.0]]).unwrap();
        let dec2 = gram_decomposition(&d2, DEFAULT_TAU_REL).unwrap();
        assert!((dec2.smallest_eigenvalue() + 2.0).abs() < 1e-12);
        assert!((power_radius(&dec2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn euclideanize_examples() {
        let d = triangle_violating();
        assert_eq!(euclideanize(&d, 0.0), d);
        let e = euclideanize(&d, (1.0f64 / 12.0).sqrt());
        let expected = [[0.0, 4.0 / 3.0, 4.0 / 3.0], [4.0 / 3.0, 0.0, 16.0 / 3.0], [4.0 / 3.0, 16.0 / 3.0, 0.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((e.get(i, j) - expected[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn recovers_collinear_centers() {
        let d = triangle_violating();
        let e = euclideanize(&d, (1.0f64 / 12.0).sqrt());
        let c = recover_centers(&e, DEFAULT_TAU_REL).unwrap();
        assert_eq!(c.ncols(), 1);
        // (0, 2/√3, −2/√3) up to sign and translation; the mean is already 0
        let s = c[(1, 0)].signum();
        let t = 2.0 / 3f64.sqrt();
        assert!(c[(0, 0)].abs() < 1e-12);
        assert!((s * c[(1, 0)] - t).abs() < 1e-12);
        assert!((s * c[(2, 0)] + t).abs() < 1e-12);
    }

    #[test]
    fn recovers_unit_square() {
        let pts = DMatrix::from_row_slice(4, 2, &[0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0]);
        let e = DissimilarityMatrix::validate(oracle::squared_distances(&pts)).unwrap();
        let c = recover_centers(&e, DEFAULT_TAU_REL).unwrap();
        assert_eq!(c.ncols(), 2);
        let back = squared_distance_matrix(&c);
        assert!((back - e.as_matrix()).amax() < 1e-12);
    }

    #[test]
    fn recovers_nothing_from_zero_matrix() {
        let e = DissimilarityMatrix::validate(DMatrix::zeros(4, 4)).unwrap();
        let c = recover_centers(&e, DEFAULT_TAU_REL).unwrap();
        assert_eq!((c.nrows(), c.ncols()), (4, 0));
    }

    #[test]
    fn rejects_non_euclidean_input() {
        let err = recover_centers(&triangle_violating(), DEFAULT_TAU_REL).unwrap_err();
        assert!(matches!(err, Error::NotEuclidean { .. }));
        assert!(err.is_numerical());
    }

    #[test]
    fn representation_is_exact() {
        let d = triangle_violating();
        let dec = gram_decomposition(&d, DEFAULT_TAU_REL).unwrap();
        let rep = PowerRepresentation::build(&d, &dec, RadiusRule::Minimal).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!((rep.power_distance(i, j).unwrap() - d.get(i, j)).abs() < 1e-12);
                }
            }
        }
        assert!((rep.distance_matrix() - d.as_matrix()).amax() < 1e-12);
    }

    #[test]
    fn quarter_root_radius_is_lossy() {
        let d = triangle_violating();
        let dec = gram_decomposition(&d, DEFAULT_TAU_REL).unwrap();
        let rep = PowerRepresentation::build(&d, &dec, RadiusRule::QuarterRoot).unwrap();
        assert_eq!(rep.dropped_negative(), 1);
        assert!(RadiusRule::Fixed(-1.0).radius(&dec).is_err());
    }

    #[test]
    fn silhouette_matches_power_distance() {
        let a = GaussianCluster::new(vec![0.0, 0.0], 1.0).unwrap();
        let b = GaussianCluster::new(vec![3.0, 0.0], 1.0).unwrap();
        assert_eq!(silhouette_gaussian(&a, &b).unwrap(), 5.0);
        let p = GaussianCluster::new(vec![1.0], 0.0).unwrap();
        assert_eq!(silhouette_gaussian(&p, &p).unwrap(), 0.0);
        assert!(silhouette_gaussian(&p, &a).is_err());
        assert!(GaussianCluster::new(vec![0.0], -1.0).is_err());
    }

    #[test]
    fn normalized_silhouette_endpoints() {
        let x = GaussianCluster::new(vec![1.0, 2.0], 0.7).unwrap();
        assert_eq!(silhouette_normalized(&x, &x).unwrap(), -1.0);
        let p = GaussianCluster::new(vec![0.0, 0.0], 0.0).unwrap();
        let q = GaussianCluster::new(vec![1.0, 0.0], 0.0).unwrap();
        assert_eq!(silhouette_normalized(&p, &q).unwrap(), 1.0);
        assert_eq!(silhouette_normalized(&p, &p).unwrap(), -1.0);
        // ‖Δμ‖² = (σa + σb)² = 4
        let a = GaussianCluster::new(vec![0.0], 0.5).unwrap();
        let b = GaussianCluster::new(vec![2.0], 1.5).unwrap();
        assert_eq!(silhouette_normalized(&a, &b).unwrap(), 0.0);
    }
}
