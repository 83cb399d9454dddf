//! Data generators: the map from a parameter point to a labeled datum.

mod augment;
mod gaussian;
mod idx;
mod mnist;
mod pool;

pub use augment::{affine_augment, AugmentationBin, AugmentationKind, AugmentationRanges, Image};
pub use gaussian::{GaussianTask, GaussianTaskSpec};
pub use idx::{encode_idx_images, encode_idx_labels, load_idx, parse_idx_images, parse_idx_labels, ImagePool};
pub use mnist::MnistTask;
pub use pool::{fixed_pool_snapshot, FixedPool};

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::space::{BucketPartition, ParamPoint};

/// One labeled example together with the parameter point that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Datum {
    pub features: Vec<f64>,
    pub label: usize,
    pub point: ParamPoint,
    pub bucket: usize,
}

/// `X = g(U)`: turns parameter points into labeled data.
pub trait Generator: Send + Sync {
    fn partition(&self) -> &BucketPartition;

    fn n_classes(&self) -> usize;

    fn feature_dim(&self) -> usize;

    fn generate(&self, point: &ParamPoint, rng: &mut dyn RngCore) -> Result<Datum>;
}
