//! Validated dissimilarity matrices, double centering and the signed
//! eigendecomposition shared by both embeddings.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

/// Relative tolerance for asymmetry and diagonal noise on ingestion.
pub const INGEST_TOL_REL: f64 = 1e-9;

/// Default relative zero threshold for eigenvalues.
pub const DEFAULT_TAU_REL: f64 = 1e-9;

/// An `n x n` symmetric hollow real matrix with finite entries.
///
/// Symmetry and the zero diagonal hold exactly: construction averages the
/// two triangles and overwrites the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix {
    entries: DMatrix<f64>,
}

impl DissimilarityMatrix {
    /// Validates `raw` and returns its symmetrized form.
    ///
    /// Asymmetry and diagonal entries are tolerated up to
    /// `1e-9 * max|raw|`; anything larger is rejected with the offending
    /// index.
    pub fn validate(raw: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = raw.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(Error::Empty);
        }
        let n = rows;
        for j in 0..n {
            for i in 0..n {
                if !raw[(i, j)].is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        let tol = INGEST_TOL_REL * raw.amax();
        for i in 0..n {
            let value = raw[(i, i)];
            if value.abs() > tol {
                return Err(Error::NonZeroDiagonal { index: i, value, tol });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let (upper, lower) = (raw[(i, j)], raw[(j, i)]);
                if (upper - lower).abs() > tol {
                    return Err(Error::Asymmetric {
                        row: i,
                        col: j,
                        upper,
                        lower,
                        tol,
                    });
                }
            }
        }

        let mut entries = raw;
        for i in 0..n {
            entries[(i, i)] = 0.0;
            for j in (i + 1)..n {
                let avg = 0.5 * (entries[(i, j)] + entries[(j, i)]);
                entries[(i, j)] = avg;
                entries[(j, i)] = avg;
            }
        }
        Ok(Self { entries })
    }

    /// Builds from row vectors; rows must all have length `rows.len()`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::NotSquare {
                rows: n,
                cols: bad.len(),
            });
        }
        Self::validate(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// Fills the strict upper triangle from `f(i, j)` (with `i < j`) and
    /// mirrors it. The result is exactly symmetric and hollow.
    pub(crate) fn from_upper_fn<F>(n: usize, f: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> f64 + Sync + Send,
    {
        if n == 0 {
            return Err(Error::Empty);
        }
        let cols = par::map_indices(n, |j| (0..n).map(|i| {
            match i.cmp(&j) {
                std::cmp::Ordering::Less => f(i, j),
                std::cmp::Ordering::Greater => f(j, i),
                std::cmp::Ordering::Equal => 0.0,
            }
        }).collect::<Vec<_>>());
        let entries = DMatrix::from_iterator(n, n, cols.into_iter().flatten());
        if let Some(k) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: k % n,
                col: k / n,
            });
        }
        Ok(Self { entries })
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.entries.amax()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            entries: &self.entries * c,
        }
    }

    /// Strict upper-triangle pairs `(i, j, D_ij)` in row-major order.
    pub fn upper_pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n();
        (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j, self.get(i, j))))
    }

    /// Checks for a triple with `D_ik > D_ij + D_jk`, returning the first found.
    pub fn triangle_violation(&self) -> Option<(usize, usize, usize)> {
        let n = self.n();
        for i in 0..n {
            for k in (i + 1)..n {
                let dik = self.get(i, k);
                for j in 0..n {
                    if j != i && j != k && dik > self.get(i, j) + self.get(j, k) {
                        return Some((i, j, k));
                    }
                }
            }
        }
        None
    }
}

/// Double centering `B = -C D C / 2` with `C = I - 11ᵀ/n`.
pub fn center_gram(d: &DissimilarityMatrix) -> DMatrix<f64> {
    center_matrix(d.as_matrix())
}

pub(crate) fn center_matrix(d: &DMatrix<f64>) -> DMatrix<f64> {
    let n = d.nrows();
    let inv_n = 1.0 / n as f64;
    // column means equal row means for symmetric input, but compute both so
    // nothing depends on that
    let row_mean: Vec<f64> = (0..n).map(|i| d.row(i).sum() * inv_n).collect();
    let col_mean: Vec<f64> = (0..n).map(|j| d.column(j).sum() * inv_n).collect();
    let grand = row_mean.iter().sum::<f64>() * inv_n;
    let cols = par::flat_map_indices(n, |j| {
        (0..n)
            .map(|i| -0.5 * (d[(i, j)] - row_mean[i] - col_mean[j] + grand))
            .collect()
    });
    DMatrix::from_vec(n, n, cols)
}

/// Eigendecomposition of a centered Gram matrix with signature bookkeeping.
#[derive(Debug, Clone)]
pub struct GramDecomposition {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
    tau: f64,
    p: usize,
    q: usize,
    zero_rank: usize,
}

/// Counts of positive, negative and numerically-zero eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub p: usize,
    pub q: usize,
    pub zero_rank: usize,
}

impl GramDecomposition {
    /// Eigenvalues sorted descending.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// Orthonormal eigenvectors; column `k` pairs with `eigenvalues()[k]`.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn zero_rank(&self) -> usize {
        self.zero_rank
    }

    pub fn signature(&self) -> Signature {
        Signature {
            p: self.p,
            q: self.q,
            zero_rank: self.zero_rank,
        }
    }

    pub fn largest_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// The smallest eigenvalue, `e_n`.
    pub fn smallest_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.n() - 1]
    }

    /// Indices of eigenvalues above `tau`, in descending eigenvalue order.
    pub fn positive_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n()).filter(move |&k| self.eigenvalues[k] > self.tau)
    }

    /// Indices of eigenvalues below `-tau`, in descending eigenvalue order.
    pub fn negative_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n()).filter(move |&k| self.eigenvalues[k] < -self.tau)
    }

    /// `U diag(λ) Uᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut scaled = self.eigenvectors.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= self.eigenvalues[k];
        }
        scaled * self.eigenvectors.transpose()
    }
}

/// Full dense symmetric eigendecomposition of `b`.
///
/// The zero threshold is `tau_rel * max(1, max|λ|)`; eigenvalues inside
/// `[-τ, τ]` are counted in `zero_rank` and belong to neither part of the
/// signature.
pub fn decompose(b: &DMatrix<f64>, tau_rel: f64) -> Result<GramDecomposition> {
    let (rows, cols) = b.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if rows == 0 {
        return Err(Error::Empty);
    }
    if !(tau_rel >= 0.0 && tau_rel.is_finite()) {
        return Err(Error::invalid(format!("tau_rel must be finite and >= 0, got {tau_rel}")));
    }
    let n = rows;
    let sym_tol = 1e-8 * b.amax().max(1.0);
    for i in 0..n {
        for j in (i + 1)..n {
            if (b[(i, j)] - b[(j, i)]).abs() > sym_tol {
                return Err(Error::Asymmetric {
                    row: i,
                    col: j,
                    upper: b[(i, j)],
                    lower: b[(j, i)],
                    tol: sym_tol,
                });
            }
        }
    }

    let max_iter = 64 * n + 1000;
    let eig = SymmetricEigen::try_new(b.clone(), f64::EPSILON, max_iter)
        .ok_or(Error::EigenNonConvergence { n })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &c| eig.eigenvalues[c].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let eigenvectors = DMatrix::from_fn(n, n, |i, k| eig.eigenvectors[(i, order[k])]);

    let tau = tau_rel * eigenvalues.amax().max(1.0);
    let p = eigenvalues.iter().filter(|&&l| l > tau).count();
    let q = eigenvalues.iter().filter(|&&l| l < -tau).count();
    Ok(GramDecomposition {
        eigenvalues,
        eigenvectors,
        tau,
        p,
        q,
        zero_rank: n - p - q,
    })
}

/// `decompose(center_gram(d), tau_rel)`.
pub fn gram_decomposition(d: &DissimilarityMatrix, tau_rel: f64) -> Result<GramDecomposition> {
    decompose(&center_gram(d), tau_rel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;

    fn m(rows: &[&[f64]]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
    }

    fn triangle_violating() -> DissimilarityMatrix {
        DissimilarityMatrix::from_rows(&[
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 5.0],
            vec![1.0, 5.0, 0.0],
        ])
        .unwrap()
    }

    #[test]
    fn accepts_hollow_symmetric_unchanged() {
        let raw = m(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let d = DissimilarityMatrix::validate(raw.clone()).unwrap();
        assert_eq!(d.as_matrix(), &raw);
    }

    #[test]
    fn rejects_asymmetry_naming_index() {
        let err = DissimilarityMatrix::validate(m(&[&[0.0, 1.0], &[2.0, 0.0]])).unwrap_err();
        assert!(matches!(err, Error::Asymmetric { row: 0, col: 1, .. }), "{err}");
    }

    #[test]
    fn symmetrizes_within_tolerance() {
        let d = DissimilarityMatrix::validate(m(&[&[0.0, 1.0 + 1e-12], &[1.0, 0.0]])).unwrap();
        assert_eq!(d.get(0, 1), d.get(1, 0));
        assert!((d.get(0, 1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_shapes_and_values() {
        assert!(matches!(
            DissimilarityMatrix::validate(DMatrix::zeros(2, 3)),
            Err(Error::NotSquare { rows: 2, cols: 3 })
        ));
        assert!(matches!(
            DissimilarityMatrix::validate(DMatrix::zeros(0, 0)),
            Err(Error::Empty)
        ));
        assert!(matches!(
            DissimilarityMatrix::validate(m(&[&[0.0, f64::NAN], &[1.0, 0.0]])),
            Err(Error::NonFinite { row: 0, col: 1 })
        ));
        assert!(matches!(
            DissimilarityMatrix::validate(m(&[&[0.0, 1.0], &[1.0, 0.5]])),
            Err(Error::NonZeroDiagonal { index: 1, .. })
        ));
    }

    #[test]
    fn tiny_diagonal_noise_is_zeroed() {
        let d = DissimilarityMatrix::validate(m(&[&[1e-13, 1.0], &[1.0, 0.0]])).unwrap();
        assert_eq!(d.get(0, 0), 0.0);
    }

    #[test]
    fn center_gram_two_points() {
        let d = DissimilarityMatrix::from_rows(&[vec![0.0, 2.0], vec![2.0, 0.0]]).unwrap();
        let b = center_gram(&d);
        let expected = oracle::dense_gram(d.as_matrix());
        assert!((&b - &expected).amax() < 1e-12);
        assert!((&b - m(&[&[0.5, -0.5], &[-0.5, 0.5]])).amax() < 1e-12);
    }

    #[test]
    fn center_gram_zero_input() {
        let d = DissimilarityMatrix::validate(DMatrix::zeros(3, 3)).unwrap();
        assert_eq!(center_gram(&d), DMatrix::zeros(3, 3));
    }

    #[test]
    fn center_gram_triangle_violating() {
        let d = triangle_violating();
        let b = center_gram(&d);
        let expected = m(&[
            &[-1.0 / 9.0, 1.0 / 18.0, 1.0 / 18.0],
            &[1.0 / 18.0, 11.0 / 9.0, -23.0 / 18.0],
            &[1.0 / 18.0, -23.0 / 18.0, 11.0 / 9.0],
        ]);
        assert!((&b - &expected).amax() < 1e-12);
        assert!((&b - oracle::dense_gram(d.as_matrix())).amax() < 1e-12);
        let ones = DVector::from_element(3, 1.0);
        assert!((&b * ones).amax() < 1e-9);
    }

    #[test]
    fn decompose_two_points() {
        let dec = decompose(&m(&[&[0.5, -0.5], &[-0.5, 0.5]]), DEFAULT_TAU_REL).unwrap();
        assert!((dec.eigenvalues()[0] - 1.0).abs() < 1e-12);
        assert!(dec.eigenvalues()[1].abs() < 1e-12);
        assert_eq!(dec.signature(), Signature { p: 1, q: 0, zero_rank: 1 });
    }

    #[test]
    fn decompose_triangle_violating_matches_hand_eigenpairs() {
        let dec = gram_decomposition(&triangle_violating(), DEFAULT_TAU_REL).unwrap();
        let l = dec.eigenvalues();
        assert!((l[0] - 2.5).abs() < 1e-12);
        assert!(l[1].abs() < 1e-12);
        assert!((l[2] + 1.0 / 6.0).abs() < 1e-12);
        assert_eq!(dec.signature(), Signature { p: 1, q: 1, zero_rank: 1 });
        // (0, 1, -1) spans the top eigenspace, (2, -1, -1) the bottom one
        let u0 = dec.eigenvectors().column(0);
        assert!((u0[0]).abs() < 1e-12 && (u0[1] + u0[2]).abs() < 1e-12);
        let u2 = dec.eigenvectors().column(2);
        assert!((u2[1] - u2[2]).abs() < 1e-12 && (u2[0] + 2.0 * u2[1]).abs() < 1e-12);
        // jacobi oracle agrees
        let jac = oracle::jacobi_eigenvalues(&center_gram(&triangle_violating()));
        for (a, b) in l.iter().zip(jac.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn euclidean_input_has_no_negative_part() {
        let pts = oracle::random_points(30, 4, 7);
        let d = DissimilarityMatrix::validate(oracle::squared_distances(&pts)).unwrap();
        let dec = gram_decomposition(&d, DEFAULT_TAU_REL).unwrap();
        assert_eq!(dec.q(), 0);
        assert_eq!(dec.p(), 4);
        assert!(dec.smallest_eigenvalue() >= -dec.tau());
    }

    #[test]
    fn ones_vector_lies_in_zero_eigenspace() {
        let d = DissimilarityMatrix::validate(oracle::random_hollow(12, 3)).unwrap();
        let dec = gram_decomposition(&d, DEFAULT_TAU_REL).unwrap();
        let ones = DVector::from_element(12, 1.0 / 12f64.sqrt());
        // projection of 1 onto the non-zero eigenvectors vanishes
        for k in dec.positive_indices().chain(dec.negative_indices()) {
            assert!(dec.eigenvectors().column(k).dot(&ones).abs() < 1e-8);
        }
        assert!(dec.zero_rank() >= 1);
    }

    #[test]
    fn rejects_asymmetric_gram() {
        let err = decompose(&m(&[&[1.0, 0.0], &[1.0, 1.0]]), DEFAULT_TAU_REL).unwrap_err();
        assert!(matches!(err, Error::Asymmetric { .. }));
    }

    #[test]
    fn triangle_violation_detected() {
        assert!(triangle_violating().triangle_violation().is_some());
        let metric =
            DissimilarityMatrix::from_rows(&[vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]])
                .unwrap();
        assert!(metric.triangle_violation().is_none());
    }
}
