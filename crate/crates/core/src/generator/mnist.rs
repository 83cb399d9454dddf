use std::sync::Arc;

use rand::RngCore;

use super::augment::{affine_augment, AugmentationBin, AugmentationRanges};
use super::idx::{ImagePool, N_DIGITS};
use super::{Datum, Generator};
use crate::error::{Error, Result};
use crate::space::{Axis, BucketPartition, ParamPoint, ParameterSpace};

/// Digit images under one of sixteen augmentation bins: 10 × 16 buckets.
///
/// Points are `(class, bin, t, s)`. `t ∈ [0, 1]` is the position of the
/// magnitude inside the bin's interval and `s ∈ [0, 1]` selects the source
/// image among the class's members; both are single-bin axes, so they do not
/// change the bucket count.
#[derive(Debug, Clone)]
pub struct MnistTask {
    pool: Arc<ImagePool>,
    ranges: AugmentationRanges,
    partition: BucketPartition,
}

impl MnistTask {
    pub const CLASS_AXIS: usize = 0;
    pub const BIN_AXIS: usize = 1;
    pub const MAGNITUDE_AXIS: usize = 2;
    pub const SOURCE_AXIS: usize = 3;

    pub fn new(pool: Arc<ImagePool>, ranges: AugmentationRanges) -> Result<Self> {
        ranges.validate()?;
        let space = ParameterSpace::new(vec![
            Axis::categorical("class", N_DIGITS)?,
            Axis::categorical("augmentation", AugmentationBin::COUNT)?,
            Axis::continuous("magnitude", vec![0.0, 1.0])?,
            Axis::continuous("source", vec![0.0, 1.0])?,
        ])?;
        Ok(MnistTask {
            pool,
            ranges,
            partition: BucketPartition::new(space)?,
        })
    }

    pub fn pool(&self) -> &ImagePool {
        &self.pool
    }

    pub fn ranges(&self) -> &AugmentationRanges {
        &self.ranges
    }

    /// The augmentation bin and transform magnitude a point encodes.
    pub fn magnitude_of(&self, point: &ParamPoint) -> Result<(AugmentationBin, f64)> {
        let bin = point
            .category(Self::BIN_AXIS)
            .ok_or_else(|| Error::contract("point lacks an augmentation bin"))?;
        let t = point
            .real(Self::MAGNITUDE_AXIS)
            .ok_or_else(|| Error::contract("point lacks a magnitude coordinate"))?;
        let bin = AugmentationBin::new(bin)?;
        Ok((bin, bin.magnitude_at(&self.ranges, t)))
    }
}

impl Generator for MnistTask {
    fn partition(&self) -> &BucketPartition {
        &self.partition
    }

    fn n_classes(&self) -> usize {
        N_DIGITS
    }

    fn feature_dim(&self) -> usize {
        self.pool.images().first().map_or(0, |i| i.pixels.len())
    }

    fn generate(&self, point: &ParamPoint, _rng: &mut dyn RngCore) -> Result<Datum> {
        let bucket = self.partition.bucket_of(point)?;
        let class = point.category(Self::CLASS_AXIS).expect("checked by bucket_of");
        let s = point.real(Self::SOURCE_AXIS).expect("checked by bucket_of");
        let members = self.pool.class_members(class);
        if members.is_empty() {
            return Err(Error::Data(format!("no images of class {class} in the pool")));
        }
        let pick = ((s * members.len() as f64) as usize).min(members.len() - 1);
        let (image, label) = self.pool.get(members[pick]);
        let (bin, magnitude) = self.magnitude_of(point)?;
        let out = affine_augment(image, bin, magnitude, &self.ranges)?;
        Ok(Datum {
            features: out.pixels,
            label,
            point: point.clone(),
            bucket,
        })
    }
}
