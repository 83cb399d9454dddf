//! The classifier–sampler loop.
//!
//! Each epoch `t` trains on data drawn from `P^(t)`. Before every epoch after
//! the first (and once warmup is over) the probe set is scored against the
//! current classifier, the per-bucket difficulty `d^(t−1)` is recomputed, and
//! `P^(t)` is rebuilt from the prior.

mod compare;

pub use compare::{compare, Arm, Cell, ComparisonReport, ConfigSummary, PairSummary};

use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::difficulty::{
    build_probe_set, bucket_difficulties, probe_difficulties, DifficultyField, DifficultyMode,
};
use crate::distribution::{update_distribution, SamplingDistribution, UpdateParams};
use crate::error::{Error, Result};
use crate::generator::{fixed_pool_snapshot, Datum, FixedPool, Generator};
use crate::learner::{Architecture, Classifier, Evaluation, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Adaptive,
    UniformBaseline,
    FrozenDistribution,
    FixedPool,
}

impl Mode {
    pub const ALL: [Mode; 4] = [
        Mode::Adaptive,
        Mode::UniformBaseline,
        Mode::FrozenDistribution,
        Mode::FixedPool,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Adaptive => "adaptive",
            Mode::UniformBaseline => "uniform-baseline",
            Mode::FrozenDistribution => "frozen-distribution",
            Mode::FixedPool => "fixed-pool",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        Mode::ALL.into_iter().find(|m| m.as_str() == s)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Softmax,
    Mlp { hidden: usize },
}

impl ModelKind {
    pub fn architecture(self, inputs: usize, classes: usize) -> Architecture {
        match self {
            ModelKind::Softmax => Architecture::SoftmaxRegression { inputs, classes },
            ModelKind::Mlp { hidden } => Architecture::Mlp {
                inputs,
                hidden,
                classes,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopConfig {
    pub mode: Mode,
    pub seed: u64,
    pub total_iterations: u64,
    pub iterations_per_epoch: u64,
    /// Iterations trained on the prior before the first update.
    pub warmup_iterations: u64,
    pub update: UpdateParams,
    pub probes_per_bucket: usize,
    pub difficulty_mode: DifficultyMode,
    pub model: ModelKind,
    pub train: TrainConfig,
    pub validation_size: usize,
    pub pool_size: usize,
}

impl Default for LoopConfig {
    fn default() -> Self {
        LoopConfig {
            mode: Mode::Adaptive,
            seed: 0,
            total_iterations: 10_000,
            iterations_per_epoch: 500,
            warmup_iterations: 0,
            update: UpdateParams::default(),
            probes_per_bucket: 100,
            difficulty_mode: DifficultyMode::Hard,
            model: ModelKind::Mlp { hidden: 32 },
            train: TrainConfig::default(),
            validation_size: 10_000,
            pool_size: 10_000,
        }
    }
}

impl LoopConfig {
    pub fn validate(&self) -> Result<()> {
        self.update.validate()?;
        self.train.validate()?;
        if self.iterations_per_epoch == 0 {
            return Err(Error::contract("iterations_per_epoch must be at least 1"));
        }
        if self.total_iterations == 0 {
            return Err(Error::contract("total_iterations must be at least 1"));
        }
        if self.warmup_iterations > self.total_iterations {
            return Err(Error::contract("warmup exceeds total iterations"));
        }
        if self.probes_per_bucket == 0 || self.validation_size == 0 {
            return Err(Error::contract("probe and validation sizes must be positive"));
        }
        if self.mode == Mode::FixedPool && self.pool_size == 0 {
            return Err(Error::contract("fixed-pool mode needs a positive pool size"));
        }
        if let ModelKind::Mlp { hidden: 0 } = self.model {
            return Err(Error::contract("hidden layer must have at least one unit"));
        }
        Ok(())
    }

    pub fn epochs(&self) -> u64 {
        self.total_iterations.div_ceil(self.iterations_per_epoch)
    }

    /// Update parameters in effect for this mode.
    pub fn effective_update(&self) -> UpdateParams {
        match self.mode {
            Mode::UniformBaseline => UpdateParams {
                alpha: 1.0,
                ..self.update
            },
            _ => self.update,
        }
    }
}

/// Everything a run draws data from.
#[derive(Clone)]
pub struct Task {
    pub generator: Arc<dyn Generator>,
    /// Real examples mixed into each batch alongside synthesized ones.
    pub real_train: Option<Arc<Vec<(Vec<f64>, usize)>>>,
    /// Held-out set for the final error; the generated validation set is used otherwise.
    pub test: Option<Arc<Vec<(Vec<f64>, usize)>>>,
}

impl Task {
    pub fn synthetic(generator: Arc<dyn Generator>) -> Self {
        Task {
            generator,
            real_train: None,
            test: None,
        }
    }
}

/// Independent random streams derived from one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Init = 0,
    Sampler = 1,
    Generator = 2,
    Probes = 3,
    Validation = 4,
    Pool = 5,
    Real = 6,
}

pub fn stream_rng(master_seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream as u64);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: u64,
    /// `P^(t)` used to sample this epoch's data.
    pub probs: Vec<f64>,
    /// `d^(t−1)` behind `P^(t)`.
    pub difficulty: Vec<f64>,
    pub mean_loss: f64,
    /// Mean probe difficulty before the epoch; `None` when probes were not evaluated.
    pub probe_error: Option<f64>,
    /// Validation error after the epoch.
    pub val_error: f64,
    pub wall_ms: u64,
    /// Fixed-pool draws that fell back to a neighbouring bucket.
    pub pool_fallbacks: usize,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub mode: Mode,
    pub seed: u64,
    pub records: Vec<EpochRecord>,
    pub classifier: Classifier,
    pub prior: Vec<f64>,
    pub final_error: f64,
    pub final_evaluation: Evaluation,
    pub iterations: u64,
}

/// A run that stopped early, with the epochs completed before the failure.
#[derive(Debug)]
pub struct RunFailure {
    pub error: Error,
    pub completed: Vec<EpochRecord>,
}

impl fmt::Display for RunFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (after {} complete epochs)", self.error, self.completed.len())
    }
}

impl std::error::Error for RunFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl From<Error> for RunFailure {
    fn from(error: Error) -> Self {
        RunFailure {
            error,
            completed: Vec::new(),
        }
    }
}

fn generate_set(
    generator: &dyn Generator,
    dist: &SamplingDistribution,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Datum>> {
    dist.sample_params(generator.partition(), n, rng)?
        .into_iter()
        .map(|(point, k)| {
            generator.generate(&point, rng).map_err(|e| Error::Generator {
                bucket: k,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Runs the full loop under `config` and returns every epoch's record.
pub fn run(config: &LoopConfig, task: &Task) -> std::result::Result<RunReport, RunFailure> {
    config.validate()?;
    let generator = task.generator.as_ref();
    let partition = generator.partition();
    let k = partition.len();
    let seed = config.seed;

    let prior: Arc<[f64]> = partition.volume_prior().into();
    let prior_dist = SamplingDistribution::from_prior(Arc::clone(&prior))?;

    let mut sampler_rng = stream_rng(seed, Stream::Sampler);
    let mut generator_rng = stream_rng(seed, Stream::Generator);
    let mut real_rng = stream_rng(seed, Stream::Real);
    let probes = build_probe_set(generator, config.probes_per_bucket, &mut stream_rng(seed, Stream::Probes))?;
    let validation = generate_set(
        generator,
        &prior_dist,
        config.validation_size,
        &mut stream_rng(seed, Stream::Validation),
    )?;
    let pool: Option<FixedPool> = match config.mode {
        Mode::FixedPool => Some(fixed_pool_snapshot(
            generator,
            config.pool_size,
            &mut stream_rng(seed, Stream::Pool),
        )?),
        _ => None,
    };

    let arch = config
        .model
        .architecture(generator.feature_dim(), generator.n_classes());
    let mut classifier = Classifier::xavier(arch, stream_rng(seed, Stream::Init).next_u64())?;

    let real = task.real_train.as_deref().filter(|r| !r.is_empty());
    let synth_per_batch = if real.is_some() {
        config.train.synth_per_batch
    } else {
        config.train.batch_size
    };
    let real_per_batch = config.train.batch_size - synth_per_batch;
    let update = config.effective_update();

    let mut field = DifficultyField::initial(k);
    let mut records: Vec<EpochRecord> = Vec::new();
    let mut iteration = 0u64;

    for epoch in 0..config.epochs() {
        let started = Instant::now();
        let in_warmup = iteration < config.warmup_iterations;
        let mut probe_error = None;
        let dist = if epoch == 0 || in_warmup {
            prior_dist.clone().at_epoch(epoch)
        } else {
            let scored = probe_difficulties(&probes, &classifier, config.difficulty_mode, epoch - 1);
            let scored = scored.map_err(|e| fail(e, &records))?;
            probe_error = Some(scored.mean());
            field = bucket_difficulties(&scored, &probes, &field).map_err(|e| fail(e, &records))?;
            match config.mode {
                Mode::FrozenDistribution => prior_dist.clone().at_epoch(epoch),
                _ => update_distribution(&prior, &field, &update).map_err(|e| fail(e, &records))?,
            }
        };

        let steps = config
            .iterations_per_epoch
            .min(config.total_iterations - iteration);
        let mut loss_sum = 0.0;
        let mut fallbacks = 0usize;
        let mut batch: Vec<(Vec<f64>, usize)> = Vec::with_capacity(config.train.batch_size);
        for _ in 0..steps {
            batch.clear();
            if let Some(real) = real {
                for _ in 0..real_per_batch {
                    batch.push(real[real_rng.random_range(0..real.len())].clone());
                }
            }
            for _ in 0..synth_per_batch {
                let datum = match &pool {
                    Some(pool) => {
                        let wanted = dist.sample_bucket(&mut sampler_rng);
                        let (datum, used) = pool
                            .draw_or_nearest(wanted, &mut sampler_rng)
                            .map_err(|e| fail(e, &records))?;
                        fallbacks += usize::from(used != wanted);
                        datum.clone()
                    }
                    None => {
                        let bucket = dist.sample_bucket(&mut sampler_rng);
                        let point = partition
                            .uniform_in_bucket(bucket, &mut sampler_rng)
                            .map_err(|e| fail(e, &records))?;
                        generator
                            .generate(&point, &mut generator_rng)
                            .map_err(|e| {
                                fail(
                                    Error::Generator {
                                        bucket,
                                        source: Box::new(e),
                                    },
                                    &records,
                                )
                            })?
                    }
                };
                batch.push((datum.features, datum.label));
            }
            loss_sum += classifier
                .train_step(&batch, &config.train, iteration)
                .map_err(|e| fail(e, &records))?;
            iteration += 1;
        }

        let val = classifier.evaluate(&validation, k).map_err(|e| fail(e, &records))?;
        records.push(EpochRecord {
            epoch,
            probs: dist.probs().to_vec(),
            difficulty: field.values.clone(),
            mean_loss: loss_sum / steps as f64,
            probe_error,
            val_error: val.error,
            wall_ms: started.elapsed().as_millis() as u64,
            pool_fallbacks: fallbacks,
        });
    }

    let final_evaluation = classifier.evaluate(&validation, k).map_err(|e| fail(e, &records))?;
    let final_error = match &task.test {
        Some(test) => classifier.error_rate(test).map_err(|e| fail(e, &records))?,
        None => final_evaluation.error,
    };
    Ok(RunReport {
        mode: config.mode,
        seed,
        records,
        classifier,
        prior: prior.to_vec(),
        final_error,
        final_evaluation,
        iterations: iteration,
    })
}

fn fail(error: Error, records: &[EpochRecord]) -> RunFailure {
    RunFailure {
        error,
        completed: records.to_vec(),
    }
}
