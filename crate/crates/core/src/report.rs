//! JSON reports. Every report embeds the manifest of the run that made it.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dissim::{DissimilarityMatrix, Signature};
use crate::error::Result;
use crate::eval::{
    relative_error_stats, validate_pq_bound, validate_power_residual, Method, PowerResidualValidation,
    PqBoundValidation, RelativeErrorStats,
};
use crate::pipeline::{MethodRun, Prepared};
use crate::projection::ProjectionConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<String>,
    /// Every flag value, as given or defaulted.
    pub config: serde_json::Value,
    pub version: String,
    pub duration_secs: f64,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, inputs: Vec<String>, config: serde_json::Value) -> Self {
        Self {
            command: command.into(),
            inputs,
            config,
            version: env!("CARGO_PKG_VERSION").to_string(),
            duration_secs: 0.0,
        }
    }

    pub fn finish(mut self, started: Instant) -> Self {
        self.duration_secs = started.elapsed().as_secs_f64();
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pq_violation_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power_residual_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_4er2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power_fraction_within: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionReport {
    pub manifest: RunManifest,
    pub method: Method,
    pub n: usize,
    pub m: usize,
    pub epsilon: f64,
    #[serde(rename = "const")]
    pub dim_constant: f64,
    pub seed: u64,
    pub signature: Signature,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    pub stats: RelativeErrorStats,
    pub bounds: Bounds,
}

/// Full evaluation of one run against the original matrix.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub stats: RelativeErrorStats,
    pub pq: Option<PqBoundValidation>,
    pub power: Option<PowerResidualValidation>,
}

impl Evaluation {
    pub fn bounds(&self) -> Bounds {
        Bounds {
            pq_violation_rate: self.pq.as_ref().map(|v| v.violation_rate),
            power_residual_max: self.power.as_ref().map(|v| v.max_residual),
            bound_4er2: self.power.as_ref().map(|v| v.bound),
            power_fraction_within: self.power.as_ref().map(|v| v.fraction_within),
        }
    }
}

/// Relative errors plus the bound check that matches the method. Passing
/// `d_hat` separately allows checking an injected reconstruction.
pub fn evaluate(prep: &Prepared, run: &MethodRun, d_hat: &nalgebra::DMatrix<f64>, epsilon: f64) -> Result<Evaluation> {
    let d: &DissimilarityMatrix = prep.matrix();
    let stats = relative_error_stats(d, d_hat)?;
    let (pq, power) = match run.method {
        Method::Jl => (None, None),
        Method::JlPq => (Some(validate_pq_bound(d, prep.embedding(), d_hat, epsilon)?), None),
        Method::JlPower => (
            None,
            Some(validate_power_residual(d, run.radius.unwrap_or(0.0), d_hat, epsilon)?),
        ),
    };
    Ok(Evaluation { stats, pq, power })
}

impl ProjectionReport {
    pub fn new(
        manifest: RunManifest,
        prep: &Prepared,
        run: &MethodRun,
        cfg: &ProjectionConfig,
        eval: &Evaluation,
    ) -> Self {
        Self {
            manifest,
            method: run.method,
            n: prep.matrix().n(),
            m: run.m,
            epsilon: cfg.epsilon,
            dim_constant: cfg.dim_constant,
            seed: cfg.seed,
            signature: prep.signature(),
            radius: run.radius,
            stats: eval.stats,
            bounds: eval.bounds(),
        }
    }
}
