//! Adaptive, difficulty-driven sampling of synthesized training data.
//!
//! A parameter space is cut into buckets; a classifier is trained on data
//! drawn bucket-by-bucket, and a probe set measures where it struggles so
//! the sampler can shift probability mass toward the hard buckets.

pub mod config;
pub mod difficulty;
pub mod distribution;
pub mod engine;
pub mod error;
pub mod generator;
pub mod learner;
pub mod metrics;
pub mod output;
pub mod space;

pub use error::{Error, Result};
