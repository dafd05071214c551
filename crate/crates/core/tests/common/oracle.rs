//! Independent reference computations for tests.
//!
//! Everything here works on plain `DMatrix`/`Vec` values and avoids the
//! library's own code paths: the Gram matrix is formed with an explicit
//! centering matrix, eigenvalues come from cyclic Jacobi rotations, and
//! k-means optima from exhaustive enumeration.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// `-C D C / 2` with `C = I - J/n` formed explicitly.
pub fn dense_gram(d: &DMatrix<f64>) -> DMatrix<f64> {
    let n = d.nrows();
    let c = DMatrix::<f64>::identity(n, n) - DMatrix::from_element(n, n, 1.0 / n as f64);
    (&c * d * &c) * -0.5
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi, sorted descending.
pub fn jacobi_eigenvalues(b: &DMatrix<f64>) -> Vec<f64> {
    let n = b.nrows();
    let mut a = b.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ 0x05ee_d0f0_ac1e)
}

/// `n x dim` matrix of standard normal coordinates.
pub fn random_points(n: usize, dim: usize, seed: u64) -> DMatrix<f64> {
    let mut r = rng(seed);
    DMatrix::from_fn(n, dim, |_, _| r.sample::<f64, _>(StandardNormal))
}

/// Pairwise squared Euclidean distances between rows.
pub fn squared_distances(points: &DMatrix<f64>) -> DMatrix<f64> {
    let n = points.nrows();
    DMatrix::from_fn(n, n, |i, j| (points.row(i) - points.row(j)).norm_squared())
}

/// Symmetric hollow matrix with off-diagonal entries uniform in [-1, 1].
pub fn random_hollow(n: usize, seed: u64) -> DMatrix<f64> {
    let mut r = rng(seed.wrapping_mul(31).wrapping_add(17));
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v: f64 = r.gen_range(-1.0..=1.0);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Sum over clusters of squared distances to the cluster centroid.
pub fn coordinate_kmeans_cost(points: &DMatrix<f64>, labels: &[usize]) -> f64 {
    let k = labels.iter().max().map_or(0, |&m| m + 1);
    let dim = points.ncols();
    let mut total = 0.0;
    for c in 0..k {
        let members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        if members.is_empty() {
            continue;
        }
        let mut centroid = vec![0.0; dim];
        for &i in &members {
            for t in 0..dim {
                centroid[t] += points[(i, t)] / members.len() as f64;
            }
        }
        for &i in &members {
            for t in 0..dim {
                total += (points[(i, t)] - centroid[t]).powi(2);
            }
        }
    }
    total
}

/// Relational cost `Σ_C (1/(2|C|)) Σ_{i,j∈C} D_ij` written out directly.
pub fn relational_cost(d: &DMatrix<f64>, labels: &[usize]) -> f64 {
    let n = labels.len();
    let k = labels.iter().max().map_or(0, |&m| m + 1);
    let mut total = 0.0;
    for c in 0..k {
        let members: Vec<usize> = (0..n).filter(|&i| labels[i] == c).collect();
        if members.is_empty() {
            continue;
        }
        let mut s = 0.0;
        for &i in &members {
            for &j in &members {
                s += d[(i, j)];
            }
        }
        total += s / (2.0 * members.len() as f64);
    }
    total
}

/// Minimum relational cost over every split into two non-empty parts.
pub fn brute_force_two_partition(d: &DMatrix<f64>) -> (f64, Vec<usize>) {
    let n = d.nrows();
    assert!(n <= 20);
    let mut best = (f64::INFINITY, vec![]);
    // fix point 0 in cluster 0 to skip mirrored labelings
    for mask in 1u32..(1 << (n - 1)) {
        let labels: Vec<usize> = (0..n)
            .map(|i| if i == 0 { 0 } else { ((mask >> (i - 1)) & 1) as usize })
            .collect();
        let cost = relational_cost(d, &labels);
        if cost < best.0 {
            best = (cost, labels);
        }
    }
    best
}

/// Monte-Carlo estimate of `W2²(a, b) − E‖x − x'‖² − E‖y − y'‖²` for
/// isotropic Gaussians with total variances `sa²`, `sb²`, returned with
/// its standard error.
///
/// `W2²` comes from the comonotone coupling `x = μa + (sa/√d) z`,
/// `y = μb + (sb/√d) z`, which is optimal for proportional covariances; the
/// self terms use independent copies.
pub fn silhouette_monte_carlo(mu_a: &[f64], sa: f64, mu_b: &[f64], sb: f64, samples: usize, seed: u64) -> (f64, f64) {
    let d = mu_a.len();
    let (ka, kb) = (sa / (d as f64).sqrt(), sb / (d as f64).sqrt());
    let mut r = rng(seed);
    let mut normal = |len: usize| -> Vec<f64> { (0..len).map(|_| r.sample::<f64, _>(StandardNormal)).collect() };
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let (z, z1, z2, z3, z4) = (normal(d), normal(d), normal(d), normal(d), normal(d));
        let mut coupled = 0.0;
        let mut self_a = 0.0;
        let mut self_b = 0.0;
        for t in 0..d {
            let x = mu_a[t] + ka * z[t];
            let y = mu_b[t] + kb * z[t];
            coupled += (x - y).powi(2);
            self_a += (ka * (z1[t] - z2[t])).powi(2);
            self_b += (kb * (z3[t] - z4[t])).powi(2);
        }
        let v = coupled - self_a - self_b;
        sum += v;
        sum_sq += v * v;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean) * n / (n - 1.0);
    (mean, (var / n).sqrt())
}
