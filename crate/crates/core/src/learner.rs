//! Softmax regression and one-hidden-layer MLP classifiers trained by SGD.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::difficulty::argmax;
use crate::error::{Error, Result};
use crate::generator::Datum;

/// Anything that maps features to class probabilities.
pub trait Predictor: Sync {
    fn input_dim(&self) -> usize;
    fn n_classes(&self) -> usize;
    fn predict_proba(&self, features: &[f64]) -> Result<Vec<f64>>;
}

/// A labeled example as seen by the trainer.
pub trait Labeled {
    fn features(&self) -> &[f64];
    fn label(&self) -> usize;
}

impl Labeled for Datum {
    fn features(&self) -> &[f64] {
        &self.features
    }
    fn label(&self) -> usize {
        self.label
    }
}

impl Labeled for (Vec<f64>, usize) {
    fn features(&self) -> &[f64] {
        &self.0
    }
    fn label(&self) -> usize {
        self.1
    }
}

impl<T: Labeled> Labeled for &T {
    fn features(&self) -> &[f64] {
        (*self).features()
    }
    fn label(&self) -> usize {
        (*self).label()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Architecture {
    SoftmaxRegression { inputs: usize, classes: usize },
    Mlp { inputs: usize, hidden: usize, classes: usize },
}

impl Architecture {
    pub fn inputs(&self) -> usize {
        match *self {
            Architecture::SoftmaxRegression { inputs, .. } | Architecture::Mlp { inputs, .. } => inputs,
        }
    }

    pub fn classes(&self) -> usize {
        match *self {
            Architecture::SoftmaxRegression { classes, .. } | Architecture::Mlp { classes, .. } => {
                classes
            }
        }
    }

    pub fn param_count(&self) -> usize {
        match *self {
            Architecture::SoftmaxRegression { inputs, classes } => classes * (inputs + 1),
            Architecture::Mlp {
                inputs,
                hidden,
                classes,
            } => hidden * (inputs + 1) + classes * (hidden + 1),
        }
    }

    fn validate(&self) -> Result<()> {
        let hidden_ok = match *self {
            Architecture::Mlp { hidden, .. } => hidden > 0,
            Architecture::SoftmaxRegression { .. } => true,
        };
        if self.inputs() == 0 || self.classes() < 2 || !hidden_ok {
            return Err(Error::contract(format!("degenerate architecture {self:?}")));
        }
        Ok(())
    }
}

/// SGD settings. The learning rate follows `lr·(1 + γ·t)^(−p)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub gamma: f64,
    pub power: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    /// Synthesized examples per batch; the rest are real when a real set is configured.
    pub synth_per_batch: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 5e-3,
            gamma: 1e-4,
            power: 0.75,
            weight_decay: 5e-4,
            batch_size: 76,
            synth_per_batch: 16,
        }
    }
}

impl TrainConfig {
    pub fn learning_rate_at(&self, iteration: u64) -> f64 {
        self.learning_rate * (1.0 + self.gamma * iteration as f64).powf(-self.power)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::contract("learning rate must be finite and non-negative"));
        }
        if self.gamma < 0.0 || self.power < 0.0 || self.weight_decay < 0.0 {
            return Err(Error::contract("gamma, power and weight decay must be non-negative"));
        }
        if self.batch_size == 0 || self.synth_per_batch > self.batch_size {
            return Err(Error::contract("need 0 < synth_per_batch <= batch_size"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classifier {
    arch: Architecture,
    params: Vec<f64>,
    iteration: u64,
}

/// Overall and per-bucket error rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub error: f64,
    pub per_bucket: Vec<Option<f64>>,
    pub counts: Vec<usize>,
}

impl Classifier {
    pub fn zeros(arch: Architecture) -> Result<Self> {
        arch.validate()?;
        Ok(Classifier {
            params: vec![0.0; arch.param_count()],
            arch,
            iteration: 0,
        })
    }

    /// Xavier-uniform weights, zero biases.
    pub fn xavier(arch: Architecture, seed: u64) -> Result<Self> {
        let mut c = Self::zeros(arch)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut fill = |slice: &mut [f64], fan_in: usize, fan_out: usize| {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            slice.iter_mut().for_each(|w| *w = rng.random_range(-limit..limit));
        };
        match arch {
            Architecture::SoftmaxRegression { inputs, classes } => {
                fill(&mut c.params[..inputs * classes], inputs, classes);
            }
            Architecture::Mlp {
                inputs,
                hidden,
                classes,
            } => {
                let w1 = hidden * inputs;
                fill(&mut c.params[..w1], inputs, hidden);
                let w2_start = w1 + hidden;
                fill(&mut c.params[w2_start..w2_start + classes * hidden], hidden, classes);
            }
        }
        Ok(c)
    }

    pub fn from_params(arch: Architecture, params: Vec<f64>, iteration: u64) -> Result<Self> {
        arch.validate()?;
        if params.len() != arch.param_count() {
            return Err(Error::contract(format!(
                "{} parameters for an architecture needing {}",
                params.len(),
                arch.param_count()
            )));
        }
        Ok(Classifier {
            arch,
            params,
            iteration,
        })
    }

    pub fn architecture(&self) -> Architecture {
        self.arch
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    fn check_input(&self, features: &[f64]) -> Result<()> {
        if features.len() != self.arch.inputs() {
            return Err(Error::contract(format!(
                "feature length {} does not match classifier input {}",
                features.len(),
                self.arch.inputs()
            )));
        }
        Ok(())
    }

    /// Class probabilities for one input.
    pub fn forward(&self, features: &[f64]) -> Result<Vec<f64>> {
        self.check_input(features)?;
        let mut hidden = Vec::new();
        let mut logits = self.logits(features, &mut hidden);
        softmax_in_place(&mut logits);
        Ok(logits)
    }

    pub fn predict(&self, features: &[f64]) -> Result<usize> {
        Ok(argmax(&self.forward(features)?))
    }

    fn logits(&self, x: &[f64], hidden_out: &mut Vec<f64>) -> Vec<f64> {
        let p = &self.params;
        match self.arch {
            Architecture::SoftmaxRegression { inputs, classes } => {
                let bias = &p[classes * inputs..];
                (0..classes)
                    .map(|c| dot(&p[c * inputs..(c + 1) * inputs], x) + bias[c])
                    .collect()
            }
            Architecture::Mlp {
                inputs,
                hidden,
                classes,
            } => {
                let (w1, rest) = p.split_at(hidden * inputs);
                let (b1, rest) = rest.split_at(hidden);
                let (w2, b2) = rest.split_at(classes * hidden);
                hidden_out.clear();
                hidden_out.extend(
                    (0..hidden).map(|h| (dot(&w1[h * inputs..(h + 1) * inputs], x) + b1[h]).tanh()),
                );
                (0..classes)
                    .map(|c| dot(&w2[c * hidden..(c + 1) * hidden], hidden_out) + b2[c])
                    .collect()
            }
        }
    }

    /// Mean cross-entropy over the batch plus `weight_decay·½‖θ‖²`.
    pub fn loss<B: Labeled>(&self, batch: &[B], weight_decay: f64) -> Result<f64> {
        Ok(self.loss_and_gradient(batch, weight_decay, false)?.0)
    }

    pub fn loss_and_gradient<B: Labeled>(
        &self,
        batch: &[B],
        weight_decay: f64,
        want_grad: bool,
    ) -> Result<(f64, Vec<f64>)> {
        if batch.is_empty() {
            return Err(Error::contract("empty batch"));
        }
        let classes = self.arch.classes();
        let mut grad = if want_grad {
            vec![0.0; self.params.len()]
        } else {
            Vec::new()
        };
        let mut total = 0.0;
        let mut hidden = Vec::new();
        let scale = 1.0 / batch.len() as f64;
        for ex in batch {
            let x = ex.features();
            self.check_input(x)?;
            let y = ex.label();
            if y >= classes {
                return Err(Error::contract(format!("label {y} outside {classes} classes")));
            }
            let mut probs = self.logits(x, &mut hidden);
            softmax_in_place(&mut probs);
            total -= probs[y].max(f64::MIN_POSITIVE).ln();
            if want_grad {
                // dL/dlogit = p - onehot(y)
                probs[y] -= 1.0;
                self.accumulate_gradient(x, &hidden, &probs, scale, &mut grad);
            }
        }
        let norm2: f64 = self.params.iter().map(|w| w * w).sum();
        let loss = total * scale + 0.5 * weight_decay * norm2;
        if want_grad {
            grad.iter_mut()
                .zip(&self.params)
                .for_each(|(g, w)| *g += weight_decay * w);
        }
        Ok((loss, grad))
    }

    fn accumulate_gradient(&self, x: &[f64], hidden_act: &[f64], dlogit: &[f64], scale: f64, grad: &mut [f64]) {
        match self.arch {
            Architecture::SoftmaxRegression { inputs, classes } => {
                let (gw, gb) = grad.split_at_mut(classes * inputs);
                for c in 0..classes {
                    let g = dlogit[c] * scale;
                    axpy(g, x, &mut gw[c * inputs..(c + 1) * inputs]);
                    gb[c] += g;
                }
            }
            Architecture::Mlp {
                inputs,
                hidden,
                classes,
            } => {
                let w2 = &self.params[hidden * (inputs + 1)..hidden * (inputs + 1) + classes * hidden];
                let (gw1, rest) = grad.split_at_mut(hidden * inputs);
                let (gb1, rest) = rest.split_at_mut(hidden);
                let (gw2, gb2) = rest.split_at_mut(classes * hidden);
                let mut dhidden = vec![0.0; hidden];
                for c in 0..classes {
                    let g = dlogit[c] * scale;
                    if g == 0.0 {
                        continue;
                    }
                    axpy(g, hidden_act, &mut gw2[c * hidden..(c + 1) * hidden]);
                    gb2[c] += g;
                    axpy(g, &w2[c * hidden..(c + 1) * hidden], &mut dhidden);
                }
                for h in 0..hidden {
                    // tanh' = 1 - a²
                    let g = dhidden[h] * (1.0 - hidden_act[h] * hidden_act[h]);
                    if g == 0.0 {
                        continue;
                    }
                    axpy(g, x, &mut gw1[h * inputs..(h + 1) * inputs]);
                    gb1[h] += g;
                }
            }
        }
    }

    /// One SGD step at the schedule's learning rate for `iteration`.
    /// Returns the loss before the step.
    pub fn train_step<B: Labeled>(&mut self, batch: &[B], config: &TrainConfig, iteration: u64) -> Result<f64> {
        let (loss, grad) = self.loss_and_gradient(batch, config.weight_decay, true)?;
        if !loss.is_finite() {
            return Err(Error::Divergence { iteration, loss });
        }
        let lr = config.learning_rate_at(iteration);
        if lr != 0.0 {
            self.params.iter_mut().zip(&grad).for_each(|(w, g)| *w -= lr * g);
        }
        if self.params.iter().any(|w| !w.is_finite()) {
            return Err(Error::Divergence {
                iteration,
                loss: f64::NAN,
            });
        }
        self.iteration = iteration + 1;
        Ok(loss)
    }

    /// Error rate overall and within each bucket (`None` for buckets without data).
    pub fn evaluate(&self, dataset: &[Datum], bucket_count: usize) -> Result<Evaluation> {
        if dataset.is_empty() {
            return Err(Error::contract("cannot evaluate on an empty dataset"));
        }
        let mut wrong = vec![0usize; bucket_count];
        let mut counts = vec![0usize; bucket_count];
        let mut total_wrong = 0usize;
        for d in dataset {
            let miss = usize::from(self.predict(&d.features)? != d.label);
            total_wrong += miss;
            if let Some(c) = counts.get_mut(d.bucket) {
                *c += 1;
                wrong[d.bucket] += miss;
            } else {
                return Err(Error::BucketIndex {
                    index: d.bucket,
                    count: bucket_count,
                });
            }
        }
        let per_bucket = wrong
            .iter()
            .zip(&counts)
            .map(|(w, n)| (*n > 0).then(|| *w as f64 / *n as f64))
            .collect();
        Ok(Evaluation {
            error: total_wrong as f64 / dataset.len() as f64,
            per_bucket,
            counts,
        })
    }

    /// Error rate on plain labeled data.
    pub fn error_rate<B: Labeled>(&self, data: &[B]) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::contract("cannot evaluate on an empty dataset"));
        }
        let mut wrong = 0usize;
        for ex in data {
            wrong += usize::from(self.predict(ex.features())? != ex.label());
        }
        Ok(wrong as f64 / data.len() as f64)
    }
}

impl Predictor for Classifier {
    fn input_dim(&self) -> usize {
        self.arch.inputs()
    }

    fn n_classes(&self) -> usize {
        self.arch.classes()
    }

    fn predict_proba(&self, features: &[f64]) -> Result<Vec<f64>> {
        self.forward(features)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

fn softmax_in_place(v: &mut [f64]) {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in v.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    v.iter_mut().for_each(|x| *x /= sum);
}

const CHECKPOINT_MAGIC: &[u8; 8] = b"SAHEADCK";
const CHECKPOINT_VERSION: u32 = 1;

/// Little-endian checkpoint: magic, version, architecture, iteration, parameters.
pub fn encode_checkpoint(classifier: &Classifier) -> Vec<u8> {
    let mut out = Vec::with_capacity(56 + 8 * classifier.params.len());
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    let (tag, inputs, hidden, classes) = match classifier.arch {
        Architecture::SoftmaxRegression { inputs, classes } => (0u32, inputs, 0, classes),
        Architecture::Mlp {
            inputs,
            hidden,
            classes,
        } => (1u32, inputs, hidden, classes),
    };
    out.extend_from_slice(&tag.to_le_bytes());
    for v in [inputs, hidden, classes] {
        out.extend_from_slice(&(v as u64).to_le_bytes());
    }
    out.extend_from_slice(&classifier.iteration.to_le_bytes());
    out.extend_from_slice(&(classifier.params.len() as u64).to_le_bytes());
    for w in &classifier.params {
        out.extend_from_slice(&w.to_le_bytes());
    }
    out
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<Classifier> {
    let bad = |m: &str| Error::Checkpoint(m.to_string());
    let mut pos = 0usize;
    let mut take = |n: usize| -> Result<&[u8]> {
        let s = bytes.get(pos..pos + n).ok_or_else(|| bad("truncated checkpoint"))?;
        pos += n;
        Ok(s)
    };
    if take(8)? != CHECKPOINT_MAGIC {
        return Err(bad("bad checkpoint magic"));
    }
    let u32_at = |s: &[u8]| u32::from_le_bytes(s.try_into().expect("4 bytes"));
    let u64_at = |s: &[u8]| u64::from_le_bytes(s.try_into().expect("8 bytes"));
    let version = u32_at(take(4)?);
    if version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!("unsupported checkpoint version {version}")));
    }
    let tag = u32_at(take(4)?);
    let inputs = u64_at(take(8)?) as usize;
    let hidden = u64_at(take(8)?) as usize;
    let classes = u64_at(take(8)?) as usize;
    let iteration = u64_at(take(8)?);
    let n = u64_at(take(8)?) as usize;
    let arch = match tag {
        0 => Architecture::SoftmaxRegression { inputs, classes },
        1 => Architecture::Mlp {
            inputs,
            hidden,
            classes,
        },
        t => return Err(Error::Checkpoint(format!("unknown architecture tag {t}"))),
    };
    let raw = take(n.checked_mul(8).ok_or_else(|| bad("parameter count overflow"))?)?;
    let params = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    if pos != bytes.len() {
        return Err(bad("trailing bytes after parameters"));
    }
    Classifier::from_params(arch, params, iteration)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mlp() -> Architecture {
        Architecture::Mlp {
            inputs: 3,
            hidden: 5,
            classes: 4,
        }
    }

    fn softmax() -> Architecture {
        Architecture::SoftmaxRegression {
            inputs: 3,
            classes: 4,
        }
    }

    fn random_batch(rng: &mut ChaCha8Rng, n: usize, d: usize, c: usize) -> Vec<(Vec<f64>, usize)> {
        (0..n)
            .map(|_| {
                let x = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
                (x, rng.random_range(0..c))
            })
            .collect()
    }

    #[test]
    fn zero_parameters_give_uniform_output() {
        for arch in [mlp(), softmax()] {
            let c = Classifier::zeros(arch).unwrap();
            let p = c.forward(&[1.0, -3.0, 7.0]).unwrap();
            assert!(p.iter().all(|v| (v - 0.25).abs() < 1e-15));
        }
    }

    #[test]
    fn dominant_logit_saturates() {
        let mut c = Classifier::zeros(softmax()).unwrap();
        // weight row of class 2
        c.params_mut()[6] = 1e3;
        let p = c.forward(&[1.0, 0.0, 0.0]).unwrap();
        assert!((p[2] - 1.0).abs() < 1e-12);
        assert_eq!(c.predict(&[1.0, 0.0, 0.0]).unwrap(), 2);
    }

    #[test]
    fn forward_rejects_wrong_dimension() {
        let c = Classifier::zeros(mlp()).unwrap();
        assert!(matches!(c.forward(&[1.0]), Err(Error::Contract(_))));
    }

    #[test]
    fn probabilities_match_direct_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let c = Classifier::xavier(softmax(), 3).unwrap();
        for _ in 0..50 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-5.0..5.0)).collect();
            let p = c.forward(&x).unwrap();
            // unshifted softmax as an independent route
            let w = c.params();
            let logits: Vec<f64> = (0..4)
                .map(|k| (0..3).map(|i| w[k * 3 + i] * x[i]).sum::<f64>() + w[12 + k])
                .collect();
            let z: f64 = logits.iter().map(|l| l.exp()).sum();
            for k in 0..4 {
                assert!((p[k] - logits[k].exp() / z).abs() < 1e-9);
            }
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_learning_rate_leaves_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let batch = random_batch(&mut rng, 8, 3, 4);
        let mut c = Classifier::xavier(mlp(), 9).unwrap();
        let before = c.params().to_vec();
        let cfg = TrainConfig {
            learning_rate: 0.0,
            batch_size: 8,
            synth_per_batch: 8,
            ..TrainConfig::default()
        };
        let l0 = c.train_step(&batch, &cfg, 0).unwrap();
        let l1 = c.train_step(&batch, &cfg, 1).unwrap();
        assert_eq!(c.params(), &before[..]);
        assert_eq!(l0, l1);
    }

    #[test]
    fn inverse_schedule() {
        let cfg = TrainConfig {
            learning_rate: 0.01,
            gamma: 1e-4,
            power: 0.75,
            ..TrainConfig::default()
        };
        assert_eq!(cfg.learning_rate_at(0), 0.01);
        let expect = 0.01 * 2f64.powf(-0.75);
        assert!((cfg.learning_rate_at(10_000) - expect).abs() < 1e-15);
    }

    #[test]
    fn separable_two_class_data_is_learned() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let data: Vec<(Vec<f64>, usize)> = (0..200)
            .map(|_| {
                let y = rng.random_range(0..2usize);
                let s = if y == 1 { 1.0 } else { -1.0 };
                (vec![s * rng.random_range(0.5..2.0), rng.random_range(-1.0..1.0)], y)
            })
            .collect();
        let arch = Architecture::SoftmaxRegression {
            inputs: 2,
            classes: 2,
        };
        let mut c = Classifier::xavier(arch, 4).unwrap();
        let cfg = TrainConfig {
            learning_rate: 0.1,
            weight_decay: 0.0,
            batch_size: 10,
            synth_per_batch: 10,
            ..TrainConfig::default()
        };
        let mut reached = None;
        for t in 0..500 {
            let start = (t as usize * 10) % 200;
            c.train_step(&data[start..start + 10], &cfg, t).unwrap();
            if c.error_rate(&data).unwrap() == 0.0 {
                reached = Some(t);
                break;
            }
        }
        assert!(reached.is_some(), "still misclassifying after 500 steps");
    }

    #[test]
    fn evaluation_per_bucket_aggregates() {
        use crate::space::{Coord, ParamPoint};
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = Classifier::xavier(softmax(), 5).unwrap();
        let data: Vec<Datum> = (0..300)
            .map(|_| Datum {
                features: (0..3).map(|_| rng.random_range(-1.0..1.0)).collect(),
                label: rng.random_range(0..4),
                point: ParamPoint::new(vec![Coord::Category(0)]),
                bucket: rng.random_range(0..6),
            })
            .collect();
        let ev = c.evaluate(&data, 7).unwrap();
        assert_eq!(ev.per_bucket[6], None);
        let weighted: f64 = ev
            .per_bucket
            .iter()
            .zip(&ev.counts)
            .map(|(e, n)| e.unwrap_or(0.0) * *n as f64)
            .sum::<f64>()
            / data.len() as f64;
        assert!((weighted - ev.error).abs() < 1e-15);
        assert!(c.evaluate(&[], 7).is_err());
    }

    #[test]
    fn constant_predictor_error_on_balanced_data() {
        let c = Classifier::zeros(softmax()).unwrap();
        // all-zero logits tie; argmax picks class 0
        let data: Vec<(Vec<f64>, usize)> = (0..400).map(|i| (vec![0.0; 3], i % 4)).collect();
        assert_eq!(c.error_rate(&data).unwrap(), 0.75);
    }

    #[test]
    fn divergence_is_reported_with_iteration() {
        let mut c = Classifier::zeros(softmax()).unwrap();
        c.params_mut()[0] = f64::NAN;
        let batch = vec![(vec![1.0, 0.0, 0.0], 1usize)];
        let cfg = TrainConfig {
            batch_size: 1,
            synth_per_batch: 1,
            ..TrainConfig::default()
        };
        match c.train_step(&batch, &cfg, 41) {
            Err(Error::Divergence { iteration, .. }) => assert_eq!(iteration, 41),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn checkpoint_round_trip_and_corruption() {
        let c = Classifier::from_params(mlp(), (0..mlp().param_count()).map(|i| i as f64 * 0.5).collect(), 77)
            .unwrap();
        let bytes = encode_checkpoint(&c);
        assert_eq!(&bytes[..8], b"SAHEADCK");
        assert_eq!(decode_checkpoint(&bytes).unwrap(), c);
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode_checkpoint(&bad).is_err());
        assert!(decode_checkpoint(&bytes[..bytes.len() - 1]).is_err());
    }

    #[test]
    fn same_seed_same_trajectory() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let batches: Vec<_> = (0..20).map(|_| random_batch(&mut rng, 6, 3, 4)).collect();
        let cfg = TrainConfig {
            learning_rate: 0.05,
            batch_size: 6,
            synth_per_batch: 6,
            ..TrainConfig::default()
        };
        let run = || {
            let mut c = Classifier::xavier(mlp(), 99).unwrap();
            for (t, b) in batches.iter().enumerate() {
                c.train_step(b, &cfg, t as u64).unwrap();
            }
            c
        };
        assert_eq!(run().params(), run().params());
    }
}
