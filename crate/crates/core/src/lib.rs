//! Johnson-Lindenstrauss style random projection for dissimilarity
//! matrices that need not be Euclidean.
//!
//! A symmetric hollow matrix `D` is double centered into a Gram matrix
//! whose eigendecomposition gives either an exact pseudo-Euclidean
//! embedding (split into positive and negative blocks) or, after shifting
//! every off-diagonal entry by `4r²`, an exact representation as power
//! distances between equal balls. Both are projected with seeded Gaussian
//! maps and reconstructed.

pub mod datagen;
pub mod dissim;
pub mod error;
pub mod eval;
pub mod io;
pub mod kmeans;
pub mod par;
pub mod pipeline;
pub mod power;
pub mod projection;
pub mod pseudo;
pub mod report;

#[cfg(test)]
#[path = "../tests/common/oracle.rs"]
mod oracle;

pub use dissim::{
    center_gram, decompose, gram_decomposition, DissimilarityMatrix, GramDecomposition, Signature,
    DEFAULT_TAU_REL,
};
pub use error::{Error, Result};
pub use eval::Method;
pub use pipeline::{MethodRun, Prepared};
pub use power::{power_distance, PowerRepresentation, RadiusRule};
pub use projection::{target_dim, ProjectionConfig, Reconstruct};
pub use pseudo::{embed_pq, PseudoEuclideanEmbedding};
