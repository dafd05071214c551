//! Validate → gram → decompose → embed → project → reconstruct, for each
//! of the three transforms, sharing one decomposition.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::dissim::{gram_decomposition, DissimilarityMatrix, GramDecomposition, Signature};
use crate::error::Result;
use crate::eval::Method;
use crate::kmeans::{kmeans_projected, KMeansConfig, KMeansResult};
use crate::power::{PowerRepresentation, RadiusRule};
use crate::projection::{project_classical, project_pq, project_power, target_dim, ProjectionConfig, Reconstruct};
use crate::pseudo::{embed_pq, PseudoEuclideanEmbedding};

/// A validated matrix with its decomposition and exact pq embedding.
#[derive(Debug, Clone)]
pub struct Prepared {
    d: DissimilarityMatrix,
    dec: GramDecomposition,
    emb: PseudoEuclideanEmbedding,
}

/// Output of one transform.
#[derive(Debug, Clone)]
pub struct MethodRun {
    pub method: Method,
    /// Target dimension; for jl-pq this is the dimension of each block.
    pub m: usize,
    pub d_hat: DMatrix<f64>,
    /// Projected coordinates used for clustering (pq blocks concatenated).
    pub coords: DMatrix<f64>,
    /// Power radius, for jl-power only.
    pub radius: Option<f64>,
    /// Negative directions dropped when a non-minimal radius was forced.
    pub dropped_negative: usize,
}

impl Prepared {
    pub fn new(d: DissimilarityMatrix, tau_rel: f64) -> Result<Self> {
        let dec = gram_decomposition(&d, tau_rel)?;
        let emb = embed_pq(&dec);
        Ok(Self { d, dec, emb })
    }

    pub fn matrix(&self) -> &DissimilarityMatrix {
        &self.d
    }

    pub fn decomposition(&self) -> &GramDecomposition {
        &self.dec
    }

    pub fn embedding(&self) -> &PseudoEuclideanEmbedding {
        &self.emb
    }

    pub fn signature(&self) -> Signature {
        self.dec.signature()
    }

    pub fn run(&self, method: Method, cfg: &ProjectionConfig, rule: RadiusRule) -> Result<MethodRun> {
        cfg.validate()?;
        let m = target_dim(self.d.n(), cfg)?;
        match method {
            Method::Jl => {
                let coords = project_classical(&self.emb.concatenated(), cfg)?;
                Ok(MethodRun {
                    method,
                    m,
                    d_hat: coords.reconstruct(),
                    coords,
                    radius: None,
                    dropped_negative: 0,
                })
            }
            Method::JlPq => {
                let proj = project_pq(&self.emb, cfg)?;
                let n = self.d.n();
                let (a, b) = proj.signature();
                let mut coords = DMatrix::zeros(n, a + b);
                coords.columns_mut(0, a).copy_from(&proj.pos_coords);
                coords.columns_mut(a, b).copy_from(&proj.neg_coords);
                Ok(MethodRun {
                    method,
                    m,
                    d_hat: proj.reconstruct(),
                    coords,
                    radius: None,
                    dropped_negative: 0,
                })
            }
            Method::JlPower => {
                let rep = PowerRepresentation::build(&self.d, &self.dec, rule)?;
                let proj = project_power(&rep, cfg)?;
                Ok(MethodRun {
                    method,
                    m,
                    d_hat: proj.reconstruct(),
                    radius: Some(proj.radius),
                    coords: proj.centers,
                    dropped_negative: rep.dropped_negative(),
                })
            }
        }
    }

    /// Lloyd on the unprojected positive-eigenvalue coordinates, scored on `D`.
    pub fn original_kmeans(&self, cfg: &KMeansConfig) -> Result<KMeansResult> {
        kmeans_projected(self.emb.pos_coords(), &self.d, cfg)
    }

    /// Lloyd on a transform's projected coordinates, scored on `D`.
    pub fn method_kmeans(&self, run: &MethodRun, cfg: &KMeansConfig) -> Result<KMeansResult> {
        kmeans_projected(&run.coords, &self.d, cfg)
    }
}

/// Original and projected clustering costs side by side.
#[derive(Debug, Clone, Serialize)]
pub struct KMeansComparison {
    pub method: Method,
    pub original: KMeansResult,
    pub projected: KMeansResult,
    /// `projected.relational_cost / original.relational_cost`.
    #[serde(with = "crate::eval::float_or_inf")]
    pub ratio: f64,
}

pub fn compare_kmeans(
    prep: &Prepared,
    method: Method,
    proj: &ProjectionConfig,
    rule: RadiusRule,
    km: &KMeansConfig,
) -> Result<KMeansComparison> {
    let original = prep.original_kmeans(km)?;
    let run = prep.run(method, proj, rule)?;
    let projected = prep.method_kmeans(&run, km)?;
    let ratio = if original.relational_cost == 0.0 {
        if projected.relational_cost == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        projected.relational_cost / original.relational_cost
    };
    Ok(KMeansComparison {
        method,
        original,
        projected,
        ratio,
    })
}
