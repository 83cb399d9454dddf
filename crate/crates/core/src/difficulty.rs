//! Probe sets and difficulty estimation.
//!
//! Probes are generated once and kept fixed. Each epoch the current
//! classifier is scored on them; per-bucket difficulty is the mean probe
//! difficulty inside the bucket.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::{Datum, Generator};
use crate::learner::Predictor;
use crate::space::{BucketPartition, Coord, ParamPoint};

/// Difficulty assigned to buckets that have never been probed.
pub const INITIAL_DIFFICULTY: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DifficultyMode {
    /// 1 if the argmax prediction is wrong, else 0.
    #[default]
    Hard,
    /// One minus the predicted probability of the true class.
    Soft,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub datum: Datum,
}

impl Probe {
    pub fn point(&self) -> &ParamPoint {
        &self.datum.point
    }

    pub fn bucket(&self) -> usize {
        self.datum.bucket
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSet {
    probes: Vec<Probe>,
    by_bucket: Vec<Vec<usize>>,
}

impl ProbeSet {
    pub fn new(probes: Vec<Probe>, bucket_count: usize) -> Result<Self> {
        if probes.is_empty() {
            return Err(Error::contract("probe set needs at least one probe"));
        }
        let mut by_bucket = vec![Vec::new(); bucket_count];
        for (i, p) in probes.iter().enumerate() {
            by_bucket
                .get_mut(p.bucket())
                .ok_or(Error::BucketIndex {
                    index: p.bucket(),
                    count: bucket_count,
                })?
                .push(i);
        }
        Ok(ProbeSet { probes, by_bucket })
    }

    pub fn probes(&self) -> &[Probe] {
        &self.probes
    }

    pub fn len(&self) -> usize {
        self.probes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probes.is_empty()
    }

    pub fn bucket_count(&self) -> usize {
        self.by_bucket.len()
    }

    pub fn in_bucket(&self, k: usize) -> &[usize] {
        &self.by_bucket[k]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub difficulties: Vec<f64>,
    pub epoch: u64,
}

impl ProbeResult {
    pub fn mean(&self) -> f64 {
        self.difficulties.iter().sum::<f64>() / self.difficulties.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifficultyField {
    pub values: Vec<f64>,
    pub counts: Vec<usize>,
    pub epoch: u64,
}

impl DifficultyField {
    pub fn constant(bucket_count: usize, value: f64) -> Self {
        DifficultyField {
            values: vec![value; bucket_count],
            counts: vec![0; bucket_count],
            epoch: 0,
        }
    }

    pub fn initial(bucket_count: usize) -> Self {
        Self::constant(bucket_count, INITIAL_DIFFICULTY)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum KernelWeight {
    BucketIndicator,
    InverseDistance { epsilon: f64 },
}

/// `probes_per_bucket` probes in every bucket, each drawn uniformly inside its
/// bucket and generated once.
pub fn build_probe_set<R: Rng>(
    generator: &dyn Generator,
    probes_per_bucket: usize,
    rng: &mut R,
) -> Result<ProbeSet> {
    if probes_per_bucket == 0 {
        return Err(Error::contract("probes_per_bucket must be positive"));
    }
    let partition = generator.partition();
    let mut probes = Vec::with_capacity(partition.len() * probes_per_bucket);
    for k in 0..partition.len() {
        for _ in 0..probes_per_bucket {
            let point = partition.uniform_in_bucket(k, rng)?;
            let datum = generator.generate(&point, rng).map_err(|e| Error::Generator {
                bucket: k,
                source: Box::new(e),
            })?;
            probes.push(Probe { datum });
        }
    }
    ProbeSet::new(probes, partition.len())
}

/// Scores every probe against `classifier`. Evaluation runs in parallel; the
/// output order matches the probe order.
pub fn probe_difficulties(
    probe_set: &ProbeSet,
    classifier: &dyn Predictor,
    mode: DifficultyMode,
    epoch: u64,
) -> Result<ProbeResult> {
    let difficulties = probe_set
        .probes
        .par_iter()
        .map(|probe| {
            let probs = classifier.predict_proba(&probe.datum.features)?;
            let label = probe.datum.label;
            if label >= probs.len() {
                return Err(Error::contract(format!(
                    "label {label} outside classifier's {} classes",
                    probs.len()
                )));
            }
            Ok(match mode {
                DifficultyMode::Hard => {
                    if argmax(&probs) == label {
                        0.0
                    } else {
                        1.0
                    }
                }
                DifficultyMode::Soft => (1.0 - probs[label]).clamp(0.0, 1.0),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProbeResult {
        difficulties,
        epoch,
    })
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, x)| if *x > best.1 { (i, *x) } else { best })
        .0
}

/// Euclidean distance where a categorical mismatch counts as one unit.
pub fn point_distance(a: &ParamPoint, b: &ParamPoint) -> f64 {
    a.coords
        .iter()
        .zip(&b.coords)
        .map(|(x, y)| match (x, y) {
            (Coord::Real(u), Coord::Real(v)) => (u - v).powi(2),
            (Coord::Category(u), Coord::Category(v)) => {
                if u == v {
                    0.0
                } else {
                    1.0
                }
            }
            _ => 1.0,
        })
        .sum::<f64>()
        .sqrt()
}

/// Kernel-weighted mean of probe difficulties at an arbitrary point.
pub fn kernel_difficulty(
    point: &ParamPoint,
    result: &ProbeResult,
    probe_set: &ProbeSet,
    partition: &BucketPartition,
    weight: KernelWeight,
) -> Result<f64> {
    check_consistent(result, probe_set)?;
    match weight {
        KernelWeight::BucketIndicator => {
            let k = partition.bucket_of(point)?;
            let members = probe_set.in_bucket(k);
            if members.is_empty() {
                return Err(Error::EmptyBucket { bucket: Some(k) });
            }
            let sum: f64 = members.iter().map(|&m| result.difficulties[m]).sum();
            Ok(sum / members.len() as f64)
        }
        KernelWeight::InverseDistance { epsilon } => {
            if !(epsilon > 0.0) {
                return Err(Error::contract("inverse-distance epsilon must be positive"));
            }
            if partition.space().axes().len() != point.coords.len() {
                return Err(Error::contract("point arity does not match the space"));
            }
            let (num, den) = probe_set.probes.iter().zip(&result.difficulties).fold(
                (0.0, 0.0),
                |(num, den), (probe, d)| {
                    let w = 1.0 / (point_distance(point, probe.point()) + epsilon);
                    (num + d * w, den + w)
                },
            );
            if den <= 0.0 {
                return Err(Error::EmptyBucket { bucket: None });
            }
            Ok(num / den)
        }
    }
}

/// Per-bucket mean probe difficulty; unprobed buckets keep the fallback value.
/// The field is tagged with the probe result's epoch.
pub fn bucket_difficulties(
    result: &ProbeResult,
    probe_set: &ProbeSet,
    fallback: &DifficultyField,
) -> Result<DifficultyField> {
    check_consistent(result, probe_set)?;
    let k = probe_set.bucket_count();
    if fallback.values.len() != k {
        return Err(Error::contract(format!(
            "fallback field has {} buckets, probe set has {k}",
            fallback.values.len()
        )));
    }
    let mut values = Vec::with_capacity(k);
    let mut counts = Vec::with_capacity(k);
    for bucket in 0..k {
        let members = probe_set.in_bucket(bucket);
        counts.push(members.len());
        if members.is_empty() {
            values.push(fallback.values[bucket]);
        } else {
            let sum: f64 = members.iter().map(|&m| result.difficulties[m]).sum();
            values.push(sum / members.len() as f64);
        }
    }
    Ok(DifficultyField {
        values,
        counts,
        epoch: result.epoch,
    })
}

fn check_consistent(result: &ProbeResult, probe_set: &ProbeSet) -> Result<()> {
    if result.difficulties.len() != probe_set.len() {
        return Err(Error::contract(format!(
            "{} difficulties for {} probes",
            result.difficulties.len(),
            probe_set.len()
        )));
    }
    Ok(())
}
