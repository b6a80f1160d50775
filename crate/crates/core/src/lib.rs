//! Measures of how context-specific contextualized word representations are.
//!
//! The crate reads per-layer token vector dumps ([`store`]), computes
//! self-similarity, intra-sentence similarity and maximum explainable
//! variance together with their anisotropy baselines ([`metrics`]),
//! distills first-principal-component static embeddings ([`distill`]) and
//! scores static embeddings on similarity, analogy and categorization
//! benchmarks ([`bench`]). [`synth`] generates corpora with known geometry
//! and holds brute-force oracles; [`analysis`] ties everything into
//! per-layer reports.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`). The aliases
//! below fix the scalar used by the analysis pipeline.

pub mod analysis;
pub mod bench;
pub mod distill;
mod error;
pub mod linalg;
pub mod metrics;
mod sampling;
mod scalar;
pub mod store;
pub mod synth;

pub use error::{Error, ErrorCategory, Result};
pub use scalar::Scalar;

pub type OccurrenceMatrix64 = store::OccurrenceMatrix<f64>;
pub type OccurrenceMatrix32 = store::OccurrenceMatrix<f32>;
pub type StaticEmbeddingTable64 = distill::StaticEmbeddingTable<f64>;
pub type StaticEmbeddingTable32 = distill::StaticEmbeddingTable<f32>;
pub type MevResult64 = metrics::MevResult<f64>;
pub type MevResult32 = metrics::MevResult<f32>;
pub type PrincipalComponent64 = distill::PrincipalComponent<f64>;
