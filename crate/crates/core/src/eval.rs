//! Distortion statistics and empirical checks of the projection bounds.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dissim::DissimilarityMatrix;
use crate::error::{Error, Result};
use crate::pseudo::{distortion_ratio, PseudoEuclideanEmbedding};

/// Which transform produced a reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Classical Gaussian projection of the absolute-eigenvalue coordinates.
    Jl,
    /// Separate projections of the positive and negative blocks.
    JlPq,
    /// Projection of the power-distance ball centers.
    JlPower,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Jl, Method::JlPq, Method::JlPower];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Jl => "jl",
            Method::JlPq => "jl-pq",
            Method::JlPower => "jl-power",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jl" => Ok(Method::Jl),
            "jl-pq" => Ok(Method::JlPq),
            "jl-power" => Ok(Method::JlPower),
            other => Err(Error::invalid(format!(
                "unknown method '{other}' (expected jl, jl-pq or jl-power)"
            ))),
        }
    }
}

/// Serializes non-finite floats as the strings `"inf"`, `"-inf"`, `"nan"`.
pub mod float_or_inf {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("not a number: {other}"))),
            },
        }
    }
}

/// Relative error `|D_ij − D̂_ij| / |D_ij|` over off-diagonal pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeErrorStats {
    #[serde(rename = "max_rel", with = "float_or_inf")]
    pub max: f64,
    #[serde(rename = "mean_rel", with = "float_or_inf")]
    pub mean: f64,
    #[serde(rename = "median_rel", with = "float_or_inf")]
    pub median: f64,
    /// Pairs with `D_ij = 0`, left out of the statistics.
    pub excluded: usize,
}

fn check_shape(d: &DissimilarityMatrix, d_hat: &DMatrix<f64>) -> Result<()> {
    let n = d.n();
    if d_hat.shape() != (n, n) {
        return Err(Error::ShapeMismatch {
            expected: n,
            rows: d_hat.nrows(),
            cols: d_hat.ncols(),
        });
    }
    Ok(())
}

/// Statistics over unordered pairs `i < j`. Non-finite reconstructions make
/// the max and mean infinite. With no eligible pair every statistic is 0.
pub fn relative_error_stats(d: &DissimilarityMatrix, d_hat: &DMatrix<f64>) -> Result<RelativeErrorStats> {
    check_shape(d, d_hat)?;
    let mut errs = Vec::with_capacity(d.n() * d.n().saturating_sub(1) / 2);
    let mut excluded = 0;
    for (i, j, dij) in d.upper_pairs() {
        if dij == 0.0 {
            excluded += 1;
            continue;
        }
        let e = (d_hat[(i, j)] - dij).abs() / dij.abs();
        errs.push(if e.is_nan() { f64::INFINITY } else { e });
    }
    if errs.is_empty() {
        return Ok(RelativeErrorStats {
            max: 0.0,
            mean: 0.0,
            median: 0.0,
            excluded,
        });
    }
    let max = errs.iter().copied().fold(0.0, f64::max);
    let mean = errs.iter().sum::<f64>() / errs.len() as f64;
    errs.sort_by(f64::total_cmp);
    let mid = errs.len() / 2;
    let median = if errs.len() % 2 == 1 {
        errs[mid]
    } else {
        0.5 * (errs[mid - 1] + errs[mid])
    };
    Ok(RelativeErrorStats {
        max,
        mean,
        median,
        excluded,
    })
}

/// One pair checked against the `D_ij (1 ± ε C_ij)` band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PqPairRecord {
    pub i: usize,
    pub j: usize,
    pub d: f64,
    pub d_hat: f64,
    /// `D̂_ij / D_ij`.
    pub ratio: f64,
    pub c_ij: f64,
    pub lower: f64,
    pub upper: f64,
    pub violated: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PqBoundValidation {
    pub epsilon: f64,
    /// Fraction of checked pairs outside their band.
    pub violation_rate: f64,
    pub checked: usize,
    pub violations: usize,
    /// Pairs with an infinite distortion factor (null separations).
    pub infinite_factor: usize,
    #[serde(skip)]
    pub records: Vec<PqPairRecord>,
}

/// Checks `D̂_ij ∈ [D_ij − ε C_ij |D_ij|, D_ij + ε C_ij |D_ij|]` for every
/// pair with a finite distortion factor.
pub fn validate_pq_bound(
    d: &DissimilarityMatrix,
    emb: &PseudoEuclideanEmbedding,
    d_hat: &DMatrix<f64>,
    epsilon: f64,
) -> Result<PqBoundValidation> {
    check_shape(d, d_hat)?;
    if emb.n() != d.n() {
        return Err(Error::DimensionMismatch {
            left: emb.n(),
            right: d.n(),
        });
    }
    let (pos, neg) = emb.block_distance_matrices();
    let mut records = Vec::with_capacity(d.n() * d.n().saturating_sub(1) / 2);
    let mut infinite_factor = 0;
    for (i, j, dij) in d.upper_pairs() {
        let (a, b) = (pos[(i, j)], neg[(i, j)]);
        let c = distortion_ratio(a + b, a - b);
        if !c.is_finite() {
            infinite_factor += 1;
            continue;
        }
        let half = epsilon * c * dij.abs();
        let (lower, upper) = (dij - half, dij + half);
        let dh = d_hat[(i, j)];
        records.push(PqPairRecord {
            i,
            j,
            d: dij,
            d_hat: dh,
            ratio: dh / dij,
            c_ij: c,
            lower,
            upper,
            violated: !(lower..=upper).contains(&dh),
        });
    }
    let violations = records.iter().filter(|r| r.violated).count();
    let checked = records.len();
    Ok(PqBoundValidation {
        epsilon,
        violation_rate: if checked == 0 { 0.0 } else { violations as f64 / checked as f64 },
        checked,
        violations,
        infinite_factor,
        records,
    })
}

/// One pair's excess over the multiplicative band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerPairRecord {
    pub i: usize,
    pub j: usize,
    pub d: f64,
    pub d_hat: f64,
    pub residual: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerResidualValidation {
    pub epsilon: f64,
    pub radius: f64,
    pub max_residual: f64,
    /// `4 ε r²`.
    pub bound: f64,
    pub fraction_within: f64,
    pub checked: usize,
    #[serde(skip)]
    pub records: Vec<PowerPairRecord>,
}

/// Residual `max(0, |D̂_ij − D_ij| − ε |D_ij|)` against the additive
/// allowance `4 ε r²`.
pub fn validate_power_residual(
    d: &DissimilarityMatrix,
    radius: f64,
    d_hat: &DMatrix<f64>,
    epsilon: f64,
) -> Result<PowerResidualValidation> {
    check_shape(d, d_hat)?;
    let bound = 4.0 * epsilon * radius * radius;
    let records: Vec<PowerPairRecord> = d
        .upper_pairs()
        .map(|(i, j, dij)| {
            let dh = d_hat[(i, j)];
            let residual = ((dh - dij).abs() - epsilon * dij.abs()).max(0.0);
            PowerPairRecord {
                i,
                j,
                d: dij,
                d_hat: dh,
                residual: if residual.is_nan() { f64::INFINITY } else { residual },
                bound,
            }
        })
        .collect();
    let checked = records.len();
    let within = records.iter().filter(|r| r.residual <= bound).count();
    Ok(PowerResidualValidation {
        epsilon,
        radius,
        max_residual: records.iter().map(|r| r.residual).fold(0.0, f64::max),
        bound,
        fraction_within: if checked == 0 { 1.0 } else { within as f64 / checked as f64 },
        checked,
        records,
    })
}
