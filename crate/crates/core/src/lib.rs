//! Adversarial social recommendation: a denoising-autoencoder generator
//! proposes friends and their items through differentiable sampling, and a
//! pairwise matrix-factorisation discriminator learns to rank real
//! consumption above the proposals. The crate also carries the surrounding
//! experiment machinery: dataset loading and fold splitting, meta-path walks
//! with skip-gram embeddings for seeded friend selection, ranking and
//! link-prediction evaluation, and binary checkpoints.

pub mod data;
pub mod discriminator;
pub mod error;
pub mod eval;
pub mod generator;
pub mod gradcheck;
pub mod hetgraph;
pub mod linalg;
pub mod rng;
pub mod synth;
pub mod trainer;

pub use error::{Error, Result};
