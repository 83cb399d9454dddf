use std::sync::Arc;

use rand::Rng;

use super::{Datum, Generator};
use crate::distribution::SamplingDistribution;
use crate::error::{Error, Result};

/// A finite dataset generated up front, indexed by bucket.
#[derive(Debug, Clone)]
pub struct FixedPool {
    data: Vec<Datum>,
    by_bucket: Vec<Vec<usize>>,
}

/// Generates `n` data by two-stage sampling from the volume prior.
pub fn fixed_pool_snapshot<R: Rng>(generator: &dyn Generator, n: usize, rng: &mut R) -> Result<FixedPool> {
    if n == 0 {
        return Err(Error::contract("fixed pool needs at least one datum"));
    }
    let partition = generator.partition();
    let prior: Arc<[f64]> = partition.volume_prior().into();
    let dist = SamplingDistribution::from_prior(prior)?;
    let mut data = Vec::with_capacity(n);
    for (point, k) in dist.sample_params(partition, n, rng)? {
        let datum = generator.generate(&point, rng).map_err(|e| Error::Generator {
            bucket: k,
            source: Box::new(e),
        })?;
        data.push(datum);
    }
    FixedPool::new(data, partition.len())
}

impl FixedPool {
    pub fn new(data: Vec<Datum>, bucket_count: usize) -> Result<Self> {
        let mut by_bucket = vec![Vec::new(); bucket_count];
        for (i, d) in data.iter().enumerate() {
            by_bucket
                .get_mut(d.bucket)
                .ok_or(Error::BucketIndex {
                    index: d.bucket,
                    count: bucket_count,
                })?
                .push(i);
        }
        Ok(FixedPool { data, by_bucket })
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[Datum] {
        &self.data
    }

    pub fn bucket_len(&self, k: usize) -> usize {
        self.by_bucket.get(k).map_or(0, Vec::len)
    }

    /// Uniform draw with replacement from bucket `k`.
    pub fn draw<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Result<&Datum> {
        let members = self
            .by_bucket
            .get(k)
            .ok_or(Error::BucketIndex {
                index: k,
                count: self.by_bucket.len(),
            })?;
        if members.is_empty() {
            return Err(Error::EmptyBucket { bucket: Some(k) });
        }
        Ok(&self.data[members[rng.random_range(0..members.len())]])
    }

    /// The populated bucket closest to `k` by id; ties go to the lower id.
    pub fn nearest_populated(&self, k: usize) -> Option<usize> {
        let n = self.by_bucket.len();
        (0..n).find_map(|step| {
            [k.checked_sub(step), k.checked_add(step)]
                .into_iter()
                .flatten()
                .find(|&j| j < n && !self.by_bucket[j].is_empty())
        })
    }

    /// Like [`draw`](Self::draw), falling back to the nearest populated
    /// bucket. Returns the bucket actually used.
    pub fn draw_or_nearest<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Result<(&Datum, usize)> {
        let used = self
            .nearest_populated(k)
            .ok_or(Error::EmptyBucket { bucket: Some(k) })?;
        Ok((self.draw(used, rng)?, used))
    }
}
