//! Contrastive summary-pair embedding laboratory.
//!
//! The crate trains a small from-scratch text encoder with a triplet margin
//! loss over in-batch negatives (or a cosine softmax variant), evaluates the
//! resulting embedding space with ranking-based matching tasks and k-NN
//! clustering purity, and analyzes its geometry via the mean-centered PCA
//! variance profile.
//!
//! Pipeline: [`corpus`] provides the document/summary data model plus a
//! deterministic synthetic generator, [`encoder`] the trainable model and its
//! checkpoint format, [`training`] the losses, analytic gradients and the
//! optimizer loop, [`evaluation`] the benchmark, and [`analysis`] the
//! embedding-space diagnostics. Everything is deterministic given a seed; see
//! [`rng`] for how sub-streams are derived.

pub mod analysis;
pub mod corpus;
pub mod encoder;
mod error;
pub mod evaluation;
pub mod linalg;
pub mod rng;
pub mod training;

pub use error::{Error, Result};
