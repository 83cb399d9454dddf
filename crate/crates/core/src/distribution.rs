//! Bucket-level sampling distribution and its difficulty-driven update.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::difficulty::DifficultyField;
use crate::error::{Error, Result};
use crate::space::{BucketPartition, ParamPoint};

/// Largest admissible β: keeps `exp(β·d)` finite for `d ≤ 1`.
pub const MAX_BETA: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpdateParams {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for UpdateParams {
    fn default() -> Self {
        UpdateParams {
            alpha: 0.9,
            beta: 1.0,
        }
    }
}

impl UpdateParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let p = UpdateParams { alpha, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::contract(format!("alpha {} not in [0, 1]", self.alpha)));
        }
        if !(0.0..=MAX_BETA).contains(&self.beta) {
            return Err(Error::contract(format!("beta {} not in [0, {MAX_BETA}]", self.beta)));
        }
        Ok(())
    }
}

/// A categorical distribution over bucket ids, sampled by inverse CDF.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingDistribution {
    probs: Vec<f64>,
    cumulative: Vec<f64>,
    epoch: u64,
    prior: Arc<[f64]>,
}

fn check_normalized(v: &[f64], what: &str) -> Result<()> {
    if v.is_empty() {
        return Err(Error::contract(format!("{what} is empty")));
    }
    if v.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::contract(format!("{what} has a negative or non-finite entry")));
    }
    let total: f64 = v.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::contract(format!("{what} sums to {total}, not 1")));
    }
    Ok(())
}

fn cumulative(probs: &[f64]) -> Vec<f64> {
    probs
        .iter()
        .scan(0.0, |acc, p| {
            *acc += p;
            Some(*acc)
        })
        .collect()
}

impl SamplingDistribution {
    /// The epoch-0 distribution, equal to the prior.
    pub fn from_prior(prior: Arc<[f64]>) -> Result<Self> {
        check_normalized(&prior, "prior")?;
        Ok(SamplingDistribution {
            cumulative: cumulative(&prior),
            probs: prior.to_vec(),
            epoch: 0,
            prior,
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prior(&self) -> &Arc<[f64]> {
        &self.prior
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Same probabilities, relabelled as epoch `epoch`.
    pub fn at_epoch(mut self, epoch: u64) -> Self {
        self.epoch = epoch;
        self
    }

    pub fn sample_bucket<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("non-empty distribution");
        let u = rng.random::<f64>() * total;
        // first bucket whose cumulative mass exceeds u; zero-mass buckets never qualify
        let k = self.cumulative.partition_point(|c| *c <= u);
        k.min(self.probs.len() - 1)
    }

    /// Two-stage draw: a bucket from this distribution, then a point uniform in it.
    pub fn sample_params<R: Rng + ?Sized>(
        &self,
        partition: &BucketPartition,
        n: usize,
        rng: &mut R,
    ) -> Result<Vec<(ParamPoint, usize)>> {
        if partition.len() != self.len() {
            return Err(Error::contract(format!(
                "distribution over {} buckets, partition has {}",
                self.len(),
                partition.len()
            )));
        }
        (0..n)
            .map(|_| {
                let k = self.sample_bucket(rng);
                partition.uniform_in_bucket(k, rng).map(|p| (p, k))
            })
            .collect()
    }
}

/// `P_k ∝ α·P⁽⁰⁾_k + (1−α)·P⁽⁰⁾_k·exp(β·d_k)`, always anchored to the prior.
/// The result is tagged one epoch after the difficulty field.
pub fn update_distribution(
    prior: &Arc<[f64]>,
    difficulty: &DifficultyField,
    params: &UpdateParams,
) -> Result<SamplingDistribution> {
    check_normalized(prior, "prior")?;
    params.validate()?;
    if difficulty.values.len() != prior.len() {
        return Err(Error::contract(format!(
            "difficulty field has {} buckets, prior has {}",
            difficulty.values.len(),
            prior.len()
        )));
    }
    let UpdateParams { alpha, beta } = *params;
    if alpha == 1.0 || beta == 0.0 {
        // both terms are proportional to the prior
        return Ok(SamplingDistribution {
            cumulative: cumulative(prior),
            probs: prior.to_vec(),
            epoch: difficulty.epoch + 1,
            prior: Arc::clone(prior),
        });
    }
    let weights: Vec<f64> = prior
        .iter()
        .zip(&difficulty.values)
        .map(|(p, d)| alpha * p + (1.0 - alpha) * p * (beta * d).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
    Ok(SamplingDistribution {
        cumulative: cumulative(&probs),
        probs,
        epoch: difficulty.epoch + 1,
        prior: Arc::clone(prior),
    })
}
