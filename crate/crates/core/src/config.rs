//! Experiment configuration: a line-oriented `key = value` text format.
//!
//! Keys are dotted (`train.learning_rate`); a `[train]` header prefixes the
//! keys that follow it. `#` starts a comment line. Lists are comma separated,
//! optionally wrapped in brackets. Unknown keys are errors.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::difficulty::DifficultyMode;
use crate::distribution::UpdateParams;
use crate::engine::{LoopConfig, Mode, ModelKind, Task};
use crate::error::{Error, Result};
use crate::generator::{fixed_pool_snapshot, load_idx, AugmentationRanges, GaussianTask, GaussianTaskSpec, MnistTask};
use crate::learner::TrainConfig;

/// Overrides `mnist.data_dir` when set.
pub const DATA_DIR_ENV: &str = "SAMPLEAHEAD_DATA_DIR";

pub const TRAIN_IMAGES: &str = "train-images-idx3-ubyte";
pub const TRAIN_LABELS: &str = "train-labels-idx1-ubyte";
pub const TEST_IMAGES: &str = "t10k-images-idx3-ubyte";
pub const TEST_LABELS: &str = "t10k-labels-idx1-ubyte";

#[derive(Debug, Clone, PartialEq)]
pub struct MnistSpec {
    pub data_dir: Option<PathBuf>,
    /// Use only the first `n` training images.
    pub train_limit: Option<usize>,
    /// Mix real training images into every batch.
    pub mix_real: bool,
    pub ranges: AugmentationRanges,
}

impl Default for MnistSpec {
    fn default() -> Self {
        MnistSpec {
            data_dir: None,
            train_limit: None,
            mix_real: true,
            ranges: AugmentationRanges::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TaskSpec {
    Gaussian {
        spec: GaussianTaskSpec,
        /// Size of a fixed "real" training set drawn once from the prior; 0 disables mixing.
        real_size: usize,
    },
    Mnist(MnistSpec),
}

impl TaskSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            TaskSpec::Gaussian { .. } => "gaussian",
            TaskSpec::Mnist(_) => "mnist",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub name: String,
    pub task: TaskSpec,
    /// Expected partition descriptor; checked against the generator when present.
    pub space: Option<String>,
    /// Everything the loop needs except the seed, which comes from `seeds`.
    pub run: LoopConfig,
    pub seeds: Vec<u64>,
    pub output_dir: Option<PathBuf>,
    /// Record real durations in `wall_ms`; off by default so reruns are byte-identical.
    pub record_wall_time: bool,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        text.parse()
    }

    /// The loop configuration for one seed.
    pub fn loop_config(&self, seed: u64) -> LoopConfig {
        LoopConfig {
            seed,
            ..self.run.clone()
        }
    }

    /// Applies the data-directory environment override.
    pub fn apply_env(&mut self) {
        if let (TaskSpec::Mnist(m), Some(dir)) = (&mut self.task, std::env::var_os(DATA_DIR_ENV)) {
            m.data_dir = Some(PathBuf::from(dir));
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |key: &str, r: Result<()>| {
            r.map_err(|e| Error::config(key, 0, e.to_string()))
        };
        if self.name.trim().is_empty() {
            return Err(Error::config("name", 0, "must not be empty"));
        }
        if !(0.0..=1.0).contains(&self.run.update.alpha) {
            return Err(Error::config(
                "sampler.alpha",
                0,
                format!("{} not in [0, 1]", self.run.update.alpha),
            ));
        }
        check("sampler.beta", self.run.update.validate())?;
        if self.seeds.is_empty() {
            return Err(Error::config("seeds", 0, "need at least one seed"));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::config("seeds", 0, format!("seed {} listed twice", w[0])));
        }
        match &self.task {
            TaskSpec::Gaussian { spec, .. } => check("gaussian", spec.validate())?,
            TaskSpec::Mnist(m) => check("mnist", m.ranges.validate())?,
        }
        check("loop", self.run.validate())
    }

    /// Serializes to the text format; parsing the result gives back `self`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let kv = |s: &mut String, k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv(&mut s, "name", self.name.clone());
        kv(&mut s, "mode", self.run.mode.to_string());
        kv(&mut s, "seeds", join(&self.seeds));
        if let Some(dir) = &self.output_dir {
            kv(&mut s, "output_dir", dir.display().to_string());
        }
        kv(&mut s, "record_wall_time", self.record_wall_time.to_string());

        s.push_str("\n[task]\n");
        kv(&mut s, "kind", self.task.kind().into());
        if let Some(space) = &self.space {
            kv(&mut s, "space", space.clone());
        }
        match &self.task {
            TaskSpec::Gaussian { spec: g, real_size } => {
                s.push_str("\n[gaussian]\n");
                kv(&mut s, "classes", g.n_classes.to_string());
                kv(&mut s, "sectors", g.n_sectors.to_string());
                kv(&mut s, "radius", g.radius.to_string());
                kv(&mut s, "gap", g.gap.to_string());
                kv(&mut s, "noise", join(&g.noise));
                kv(&mut s, "wobble", g.wobble.to_string());
                kv(&mut s, "geometry_seed", g.geometry_seed.to_string());
                kv(&mut s, "real_size", real_size.to_string());
            }
            TaskSpec::Mnist(m) => {
                s.push_str("\n[mnist]\n");
                if let Some(dir) = &m.data_dir {
                    kv(&mut s, "data_dir", dir.display().to_string());
                }
                if let Some(n) = m.train_limit {
                    kv(&mut s, "train_limit", n.to_string());
                }
                kv(&mut s, "mix_real", m.mix_real.to_string());
                kv(&mut s, "rotation_deg", m.ranges.rotation_deg.to_string());
                kv(&mut s, "scale_min", m.ranges.scale.0.to_string());
                kv(&mut s, "scale_max", m.ranges.scale.1.to_string());
                kv(&mut s, "shift_px", m.ranges.shift_px.to_string());
                kv(&mut s, "shear", m.ranges.shear.to_string());
            }
        }

        let r = &self.run;
        s.push_str("\n[sampler]\n");
        kv(&mut s, "alpha", r.update.alpha.to_string());
        kv(&mut s, "beta", r.update.beta.to_string());
        kv(&mut s, "warmup_iterations", r.warmup_iterations.to_string());

        s.push_str("\n[probes]\n");
        kv(&mut s, "per_bucket", r.probes_per_bucket.to_string());
        kv(&mut s, "difficulty", difficulty_name(r.difficulty_mode).into());

        s.push_str("\n[loop]\n");
        kv(&mut s, "total_iterations", r.total_iterations.to_string());
        kv(&mut s, "iterations_per_epoch", r.iterations_per_epoch.to_string());
        kv(&mut s, "validation_size", r.validation_size.to_string());
        kv(&mut s, "pool_size", r.pool_size.to_string());

        s.push_str("\n[model]\n");
        match r.model {
            ModelKind::Softmax => kv(&mut s, "kind", "softmax".into()),
            ModelKind::Mlp { hidden } => {
                kv(&mut s, "kind", "mlp".into());
                kv(&mut s, "hidden", hidden.to_string());
            }
        }

        let t = &r.train;
        s.push_str("\n[train]\n");
        kv(&mut s, "learning_rate", t.learning_rate.to_string());
        kv(&mut s, "gamma", t.gamma.to_string());
        kv(&mut s, "power", t.power.to_string());
        kv(&mut s, "weight_decay", t.weight_decay.to_string());
        kv(&mut s, "batch_size", t.batch_size.to_string());
        kv(&mut s, "synth_per_batch", t.synth_per_batch.to_string());
        s
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

fn difficulty_name(mode: DifficultyMode) -> &'static str {
    match mode {
        DifficultyMode::Hard => "hard",
        DifficultyMode::Soft => "soft",
    }
}

struct Entry {
    value: String,
    line: usize,
}

/// Key/value pairs that have not yet been consumed.
struct Entries(BTreeMap<String, Entry>);

impl Entries {
    fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if let Some(inner) = trimmed.strip_prefix('[') {
                let name = inner
                    .strip_suffix(']')
                    .map(str::trim)
                    .filter(|n| !n.is_empty())
                    .ok_or_else(|| Error::config(trimmed, line, "malformed section header"))?;
                section = format!("{name}.");
                continue;
            }
            let (key, value) = trimmed
                .split_once('=')
                .ok_or_else(|| Error::config(trimmed, line, "expected `key = value`"))?;
            let key = format!("{section}{}", key.trim());
            let value = unquote(value.trim()).to_string();
            if let Some(previous) = map.insert(key.clone(), Entry { value, line }) {
                return Err(Error::config(
                    key,
                    line,
                    format!("duplicate key (first set on line {})", previous.line),
                ));
            }
        }
        Ok(Entries(map))
    }

    fn take_raw(&mut self, key: &str) -> Option<Entry> {
        self.0.remove(key)
    }

    fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.take_raw(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse()
                .map(Some)
                .map_err(|err| Error::config(key, e.line, format!("cannot parse `{}`: {err}", e.value))),
        }
    }

    fn take_or<T: FromStr>(&mut self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.take(key)?.unwrap_or(default))
    }

    fn take_list<T: FromStr>(&mut self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        let Some(e) = self.take_raw(key) else {
            return Ok(None);
        };
        let inner = e.value.trim();
        let inner = inner
            .strip_prefix('[')
            .and_then(|v| v.strip_suffix(']'))
            .unwrap_or(inner);
        inner
            .split(',')
            .map(str::trim)
            .filter(|v| !v.is_empty())
            .map(|v| {
                v.parse()
                    .map_err(|err| Error::config(key, e.line, format!("cannot parse `{v}`: {err}")))
            })
            .collect::<Result<Vec<T>>>()
            .map(Some)
    }

    fn line_of(&self, key: &str) -> usize {
        self.0.get(key).map_or(0, |e| e.line)
    }

    fn finish(self) -> Result<()> {
        match self.0.into_iter().min_by_key(|(_, e)| e.line) {
            None => Ok(()),
            Some((key, e)) => Err(Error::config(key, e.line, "unknown key")),
        }
    }
}

fn unquote(v: &str) -> &str {
    v.strip_prefix('"')
        .and_then(|v| v.strip_suffix('"'))
        .unwrap_or(v)
}

/// Re-labels a validation error with the line of the offending key.
fn locate(err: Error, lines: &BTreeMap<String, usize>) -> Error {
    match err {
        Error::Config { key, line: 0, message } => {
            let line = lines
                .iter()
                .filter(|(k, _)| *k == &key || k.starts_with(&format!("{key}.")))
                .map(|(_, l)| *l)
                .min()
                .unwrap_or(0);
            Error::Config { key, line, message }
        }
        other => other,
    }
}

impl FromStr for RunConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut e = Entries::parse(text)?;
        let lines: BTreeMap<String, usize> = e.0.iter().map(|(k, v)| (k.clone(), v.line)).collect();

        let name: String = e
            .take("name")?
            .ok_or_else(|| Error::config("name", 0, "required key missing"))?;
        let mode = match e.take_raw("mode") {
            None => Mode::Adaptive,
            Some(entry) => Mode::parse(&entry.value).ok_or_else(|| {
                Error::config(
                    "mode",
                    entry.line,
                    format!(
                        "unknown mode `{}` (expected one of {})",
                        entry.value,
                        Mode::ALL.map(Mode::as_str).join(", ")
                    ),
                )
            })?,
        };
        let seeds = e.take_list("seeds")?.unwrap_or_else(|| vec![0]);
        let output_dir = e.take::<PathBuf>("output_dir")?;
        let record_wall_time = e.take_or("record_wall_time", false)?;

        let kind_line = e.line_of("task.kind");
        let kind: String = e
            .take("task.kind")?
            .ok_or_else(|| Error::config("task.kind", 0, "required key missing"))?;
        let space = e.take("task.space")?;
        let task = match kind.as_str() {
            "gaussian" => {
                let d = GaussianTaskSpec::default();
                let n_sectors = e.take_or("gaussian.sectors", d.n_sectors)?;
                let noise = match e.take_list::<f64>("gaussian.noise")? {
                    None => vec![d.noise[0]; n_sectors],
                    Some(v) if v.len() == 1 => vec![v[0]; n_sectors],
                    Some(v) => v,
                };
                TaskSpec::Gaussian {
                    spec: GaussianTaskSpec {
                        n_classes: e.take_or("gaussian.classes", d.n_classes)?,
                        n_sectors,
                        radius: e.take_or("gaussian.radius", d.radius)?,
                        gap: e.take_or("gaussian.gap", d.gap)?,
                        noise,
                        wobble: e.take_or("gaussian.wobble", d.wobble)?,
                        geometry_seed: e.take_or("gaussian.geometry_seed", d.geometry_seed)?,
                    },
                    real_size: e.take_or("gaussian.real_size", 0)?,
                }
            }
            "mnist" => {
                let d = MnistSpec::default();
                TaskSpec::Mnist(MnistSpec {
                    data_dir: e.take("mnist.data_dir")?,
                    train_limit: e.take("mnist.train_limit")?,
                    mix_real: e.take_or("mnist.mix_real", d.mix_real)?,
                    ranges: AugmentationRanges {
                        rotation_deg: e.take_or("mnist.rotation_deg", d.ranges.rotation_deg)?,
                        scale: (
                            e.take_or("mnist.scale_min", d.ranges.scale.0)?,
                            e.take_or("mnist.scale_max", d.ranges.scale.1)?,
                        ),
                        shift_px: e.take_or("mnist.shift_px", d.ranges.shift_px)?,
                        shear: e.take_or("mnist.shear", d.ranges.shear)?,
                    },
                })
            }
            other => {
                return Err(Error::config(
                    "task.kind",
                    kind_line,
                    format!("unknown task `{other}` (expected gaussian or mnist)"),
                ))
            }
        };

        let defaults = LoopConfig::default();
        let update = UpdateParams {
            alpha: e.take_or("sampler.alpha", defaults.update.alpha)?,
            beta: e.take_or("sampler.beta", defaults.update.beta)?,
        };
        let difficulty_mode = match e.take_raw("probes.difficulty") {
            None => defaults.difficulty_mode,
            Some(entry) => match entry.value.as_str() {
                "hard" => DifficultyMode::Hard,
                "soft" => DifficultyMode::Soft,
                other => {
                    return Err(Error::config(
                        "probes.difficulty",
                        entry.line,
                        format!("unknown difficulty `{other}` (expected hard or soft)"),
                    ))
                }
            },
        };
        let model_line = e.line_of("model.kind");
        let model = match e.take::<String>("model.kind")?.as_deref() {
            None | Some("mlp") => {
                let hidden = match defaults.model {
                    ModelKind::Mlp { hidden } => hidden,
                    ModelKind::Softmax => 32,
                };
                ModelKind::Mlp {
                    hidden: e.take_or("model.hidden", hidden)?,
                }
            }
            Some("softmax") => ModelKind::Softmax,
            Some(other) => {
                return Err(Error::config(
                    "model.kind",
                    model_line,
                    format!("unknown model `{other}` (expected mlp or softmax)"),
                ))
            }
        };
        let td = TrainConfig::default();
        let train = TrainConfig {
            learning_rate: e.take_or("train.learning_rate", td.learning_rate)?,
            gamma: e.take_or("train.gamma", td.gamma)?,
            power: e.take_or("train.power", td.power)?,
            weight_decay: e.take_or("train.weight_decay", td.weight_decay)?,
            batch_size: e.take_or("train.batch_size", td.batch_size)?,
            synth_per_batch: e.take_or("train.synth_per_batch", td.synth_per_batch)?,
        };
        let run = LoopConfig {
            mode,
            seed: seeds.first().copied().unwrap_or(0),
            total_iterations: e.take_or("loop.total_iterations", defaults.total_iterations)?,
            iterations_per_epoch: e.take_or("loop.iterations_per_epoch", defaults.iterations_per_epoch)?,
            warmup_iterations: e.take_or("sampler.warmup_iterations", defaults.warmup_iterations)?,
            update,
            probes_per_bucket: e.take_or("probes.per_bucket", defaults.probes_per_bucket)?,
            difficulty_mode,
            model,
            train,
            validation_size: e.take_or("loop.validation_size", defaults.validation_size)?,
            pool_size: e.take_or("loop.pool_size", defaults.pool_size)?,
        };
        e.finish()?;

        let config = RunConfig {
            name,
            task,
            space,
            run,
            seeds,
            output_dir,
            record_wall_time,
        };
        config.validate().map_err(|err| locate(err, &lines))?;
        Ok(config)
    }
}

/// Instantiates the generator (and real data, for MNIST) a config describes.
///
/// Missing or malformed data files are data errors.
pub fn build_task(config: &RunConfig) -> Result<Task> {
    let task = match &config.task {
        TaskSpec::Gaussian { spec, real_size } => {
            let generator = Arc::new(GaussianTask::new(spec.clone())?);
            let mut task = Task::synthetic(generator.clone());
            if *real_size > 0 {
                task.real_train = Some(Arc::new(gaussian_real_set(&generator, *real_size, spec.geometry_seed)?));
            }
            task
        }
        TaskSpec::Mnist(spec) => {
            let dir = spec.data_dir.as_ref().ok_or_else(|| {
                Error::Data(format!("mnist task needs mnist.data_dir or ${DATA_DIR_ENV}"))
            })?;
            if !dir.is_dir() {
                return Err(Error::Data(format!("data directory {} not found", dir.display())));
            }
            let require = |name: &str| -> Result<PathBuf> {
                let p = dir.join(name);
                if p.is_file() {
                    Ok(p)
                } else {
                    Err(Error::Data(format!("missing data file {}", p.display())))
                }
            };
            let mut pool = load_idx(&require(TRAIN_IMAGES)?, &require(TRAIN_LABELS)?)?;
            if let Some(limit) = spec.train_limit {
                let images = pool.images().iter().take(limit).cloned().collect();
                let labels = pool.labels().iter().take(limit).copied().collect();
                pool = crate::generator::ImagePool::new(images, labels)?;
            }
            let flatten = |p: &crate::generator::ImagePool| -> Arc<Vec<(Vec<f64>, usize)>> {
                Arc::new(
                    p.images()
                        .iter()
                        .zip(p.labels())
                        .map(|(img, &l)| (img.pixels.clone(), l))
                        .collect(),
                )
            };
            let test_images = dir.join(TEST_IMAGES);
            let test_labels = dir.join(TEST_LABELS);
            let test = if test_images.is_file() && test_labels.is_file() {
                Some(flatten(&load_idx(&test_images, &test_labels)?))
            } else {
                None
            };
            let real_train = spec.mix_real.then(|| flatten(&pool));
            Task {
                generator: Arc::new(MnistTask::new(Arc::new(pool), spec.ranges.clone())?),
                real_train,
                test,
            }
        }
    };
    if let Some(expected) = &config.space {
        let actual = task.generator.partition().descriptor();
        if &actual != expected {
            return Err(Error::config(
                "task.space",
                0,
                format!("config expects `{expected}` but the generator defines `{actual}`"),
            ));
        }
    }
    Ok(task)
}

/// A fixed training set drawn from the prior, standing in for a finite real dataset.
///
/// It depends only on the task geometry seed, so every run seed trains on the same set.
pub fn gaussian_real_set(task: &GaussianTask, n: usize, geometry_seed: u64) -> Result<Vec<(Vec<f64>, usize)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(geometry_seed);
    rng.set_stream(1);
    let pool = fixed_pool_snapshot(task, n, &mut rng)?;
    Ok(pool.data().iter().map(|d| (d.features.clone(), d.label)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const MINIMAL: &str = "name = smoke\ntask.kind = gaussian\n";

    fn config_err(text: &str) -> (String, usize) {
        match text.parse::<RunConfig>() {
            Err(Error::Config { key, line, .. }) => (key, line),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c: RunConfig = MINIMAL.parse().unwrap();
        assert_eq!(c.name, "smoke");
        assert_eq!(c.run.update.alpha, 0.9);
        assert_eq!(c.run.update.beta, 1.0);
        assert_eq!(c.run.mode, Mode::Adaptive);
        assert_eq!(c.seeds, vec![0]);
        assert_eq!(
            c.task,
            TaskSpec::Gaussian {
                spec: GaussianTaskSpec::default(),
                real_size: 0
            }
        );
        assert!(!c.record_wall_time);
    }

    #[test]
    fn alpha_out_of_range_names_alpha() {
        let (key, line) = config_err("name = x\ntask.kind = gaussian\n[sampler]\nalpha = 1.5\n");
        assert_eq!(key, "sampler.alpha");
        assert_eq!(line, 4);
    }

    #[test]
    fn duplicate_seeds_rejected() {
        let (key, line) = config_err("name = x\ntask.kind = gaussian\nseeds = [7, 7]\n");
        assert_eq!(key, "seeds");
        assert_eq!(line, 3);
    }

    #[test]
    fn unknown_key_reports_its_line() {
        let (key, line) = config_err("name = x\ntask.kind = gaussian\n\n[sampler]\nbeat = 2\n");
        assert_eq!(key, "sampler.beat");
        assert_eq!(line, 5);
    }

    #[test]
    fn type_mismatch_and_missing_keys() {
        let (key, line) = config_err("name = x\ntask.kind = gaussian\ntrain.batch_size = lots\n");
        assert_eq!((key.as_str(), line), ("train.batch_size", 3));
        assert_eq!(config_err("task.kind = gaussian\n").0, "name");
        assert_eq!(config_err("name = x\n").0, "task.kind");
        assert_eq!(config_err("name = x\ntask.kind = video\n").0, "task.kind");
        assert_eq!(config_err("name = x\nname = y\ntask.kind = gaussian\n"), ("name".into(), 2));
        assert_eq!(config_err("name = x\ntask.kind = gaussian\nmode = turbo\n").0, "mode");
        assert_eq!(config_err("name = x\ntask.kind = gaussian\njust text\n").1, 3);
    }

    #[test]
    fn beta_limit() {
        assert_eq!(config_err("name = x\ntask.kind = gaussian\nsampler.beta = 701\n").0, "sampler.beta");
    }

    #[test]
    fn noise_broadcasts_and_must_match_sectors() {
        let c: RunConfig = "name = x\ntask.kind = gaussian\ngaussian.sectors = 3\ngaussian.noise = 0.4\n"
            .parse()
            .unwrap();
        let TaskSpec::Gaussian { spec: g, .. } = c.task else { panic!() };
        assert_eq!(g.noise, vec![0.4; 3]);
        let (key, _) = config_err("name = x\ntask.kind = gaussian\ngaussian.sectors = 3\ngaussian.noise = 1, 2\n");
        assert_eq!(key, "gaussian");
    }

    #[test]
    fn mnist_without_data_is_a_data_error() {
        let c: RunConfig = "name = m\ntask.kind = mnist\nmnist.data_dir = /nonexistent/mnist\n".parse().unwrap();
        assert!(matches!(build_task(&c), Err(Error::Data(_))));
        let c: RunConfig = "name = m\ntask.kind = mnist\n".parse().unwrap();
        assert!(matches!(build_task(&c), Err(Error::Data(_))));
    }

    #[test]
    fn space_descriptor_is_checked() {
        let good = "name = x\ntask.kind = gaussian\ntask.space = class:cat(2) x angle:cont(0,1)\n";
        let c: RunConfig = good.parse().unwrap();
        assert!(matches!(build_task(&c), Err(Error::Config { .. })));
        let mut c: RunConfig = MINIMAL.parse().unwrap();
        let task = build_task(&c).unwrap();
        c.space = Some(task.generator.partition().descriptor());
        let reparsed: RunConfig = c.to_text().parse().unwrap();
        build_task(&reparsed).unwrap();
    }

    #[test]
    fn full_text_round_trips() {
        let text = "name = \"full run\"\nmode = fixed-pool\nseeds = 3, 1, 2\noutput_dir = out/full\n\
            [task]\nkind = mnist\n[mnist]\ndata_dir = /data\ntrain_limit = 500\nmix_real = false\n\
            [model]\nkind = softmax\n[probes]\ndifficulty = soft\n";
        let c: RunConfig = text.parse().unwrap();
        assert_eq!(c.run.model, ModelKind::Softmax);
        assert_eq!(c.run.difficulty_mode, DifficultyMode::Soft);
        assert_eq!(c.seeds, vec![3, 1, 2]);
        let again: RunConfig = c.to_text().parse().unwrap();
        assert_eq!(again, c);
        assert_eq!(again.to_text(), c.to_text());
    }

    fn arb_config() -> impl Strategy<Value = RunConfig> {
        (
            (0.0..=1.0f64, 0.0..=700.0f64, 1usize..6, prop::collection::vec(0.0..3.0f64, 1..6)),
            (1u64..5000, 1u64..600, 1usize..40, prop::sample::select(Mode::ALL.to_vec())),
            (1e-5..1.0f64, prop::option::of(1usize..64), prop::collection::hash_set(any::<u64>(), 1..5)),
            any::<bool>(),
        )
            .prop_map(|((alpha, beta, classes, noise), (total, per_epoch, probes, mode), (lr, hidden, seeds), wall)| {
                let mut seeds: Vec<u64> = seeds.into_iter().collect();
                seeds.sort_unstable();
                let batch = 8;
                RunConfig {
                    name: "prop".into(),
                    task: TaskSpec::Gaussian {
                        spec: GaussianTaskSpec {
                            n_classes: classes + 1,
                            n_sectors: noise.len(),
                            noise,
                            ..GaussianTaskSpec::default()
                        },
                        real_size: if wall { 0 } else { 64 },
                    },
                    space: None,
                    run: LoopConfig {
                        mode,
                        seed: seeds[0],
                        total_iterations: total,
                        iterations_per_epoch: per_epoch,
                        update: UpdateParams { alpha, beta },
                        probes_per_bucket: probes,
                        model: hidden.map_or(ModelKind::Softmax, |hidden| ModelKind::Mlp { hidden }),
                        train: TrainConfig {
                            learning_rate: lr,
                            batch_size: batch,
                            synth_per_batch: batch,
                            ..TrainConfig::default()
                        },
                        ..LoopConfig::default()
                    },
                    seeds,
                    output_dir: None,
                    record_wall_time: wall,
                }
            })
    }

    proptest! {
        #[test]
        fn parse_serialize_parse_is_identity(c in arb_config()) {
            let once: RunConfig = c.to_text().parse().unwrap();
            prop_assert_eq!(&once, &c);
            let twice: RunConfig = once.to_text().parse().unwrap();
            prop_assert_eq!(twice, once);
        }
    }
}
