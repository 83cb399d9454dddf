use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run, LoopConfig, Task};
use crate::error::{Category, Error, Result};
use crate::metrics::{mean, paired_t_test, sample_std};

/// One configuration entered into a comparison.
#[derive(Clone)]
pub struct Arm {
    pub name: String,
    pub config: LoopConfig,
    pub task: Task,
}

/// Outcome of one (config, seed) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub config: usize,
    pub name: String,
    pub seed: u64,
    pub final_error: Option<f64>,
    pub failure: Option<String>,
    pub failure_category: Option<Category>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigSummary {
    pub name: String,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub completed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSummary {
    pub a: usize,
    pub b: usize,
    /// Mean of `error_a − error_b` over seeds.
    pub mean_difference: Option<f64>,
    /// Seeds where `a` is at or below `b`.
    pub a_not_worse: usize,
    pub t: Option<f64>,
    pub p_value: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub seeds: Vec<u64>,
    /// Ordered by config index, then seed index.
    pub cells: Vec<Cell>,
    pub configs: Vec<ConfigSummary>,
    pub pairs: Vec<PairSummary>,
}

impl ComparisonReport {
    pub fn errors_of(&self, config: usize) -> Vec<Option<f64>> {
        self.cells
            .iter()
            .filter(|c| c.config == config)
            .map(|c| c.final_error)
            .collect()
    }

    pub fn pair(&self, a: usize, b: usize) -> Option<&PairSummary> {
        self.pairs.iter().find(|p| p.a == a && p.b == b)
    }
}

/// Runs every arm under every seed (in parallel) and summarizes the final errors.
///
/// Each arm's own `seed` is replaced by the seeds listed here, so all arms
/// see identical initial conditions seed by seed.
pub fn compare(arms: &[Arm], seeds: &[u64]) -> Result<ComparisonReport> {
    if arms.len() < 2 {
        return Err(Error::contract("compare needs at least two configs"));
    }
    if seeds.len() < 2 {
        return Err(Error::contract("compare needs at least two seeds"));
    }
    let jobs: Vec<(usize, u64)> = (0..arms.len())
        .flat_map(|i| seeds.iter().map(move |&s| (i, s)))
        .collect();
    // collect() on an indexed parallel iterator keeps input order
    let cells: Vec<Cell> = jobs
        .par_iter()
        .map(|&(i, seed)| {
            let arm = &arms[i];
            let config = LoopConfig {
                seed,
                ..arm.config.clone()
            };
            let outcome = run(&config, &arm.task);
            Cell {
                config: i,
                name: arm.name.clone(),
                seed,
                final_error: outcome.as_ref().ok().map(|r| r.final_error),
                failure_category: outcome.as_ref().err().map(|f| f.error.category()),
                failure: outcome.err().map(|f| f.to_string()),
            }
        })
        .collect();

    let per_config: Vec<Vec<Option<f64>>> = (0..arms.len())
        .map(|i| cells.iter().filter(|c| c.config == i).map(|c| c.final_error).collect())
        .collect();

    let configs = arms
        .iter()
        .zip(&per_config)
        .map(|(arm, errors)| {
            let ok: Vec<f64> = errors.iter().flatten().copied().collect();
            ConfigSummary {
                name: arm.name.clone(),
                mean: (!ok.is_empty()).then(|| mean(&ok)),
                std: (ok.len() >= 2).then(|| sample_std(&ok)),
                completed: ok.len(),
                failed: errors.len() - ok.len(),
            }
        })
        .collect();

    let mut pairs = Vec::new();
    for a in 0..arms.len() {
        for b in a + 1..arms.len() {
            pairs.push(summarize_pair(a, b, &per_config[a], &per_config[b]));
        }
    }

    Ok(ComparisonReport {
        seeds: seeds.to_vec(),
        cells,
        configs,
        pairs,
    })
}

fn summarize_pair(a: usize, b: usize, xs: &[Option<f64>], ys: &[Option<f64>]) -> PairSummary {
    let complete: Option<(Vec<f64>, Vec<f64>)> = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| Some(((*x)?, (*y)?)))
        .collect::<Option<Vec<_>>>()
        .map(|v| v.into_iter().unzip());
    let Some((xs, ys)) = complete else {
        return PairSummary {
            a,
            b,
            mean_difference: None,
            a_not_worse: 0,
            t: None,
            p_value: None,
            note: Some("skipped: a run failed in one of the two configs".into()),
        };
    };
    let diffs: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| x - y).collect();
    let a_not_worse = diffs.iter().filter(|d| **d <= 0.0).count();
    let (t, p_value, note) = match paired_t_test(&xs, &ys) {
        Ok(test) => (Some(test.t), Some(test.p), None),
        Err(e) => (None, None, Some(e.to_string())),
    };
    PairSummary {
        a,
        b,
        mean_difference: Some(mean(&diffs)),
        a_not_worse,
        t,
        p_value,
        note,
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::engine::{ModelKind, Mode};
    use crate::generator::{GaussianTask, GaussianTaskSpec};
    use crate::learner::TrainConfig;

    fn arm(name: &str, mode: Mode, learning_rate: f64) -> Arm {
        let spec = GaussianTaskSpec {
            n_sectors: 4,
            noise: vec![0.2, 0.2, 0.8, 0.2],
            ..GaussianTaskSpec::default()
        };
        Arm {
            name: name.into(),
            config: LoopConfig {
                mode,
                total_iterations: 100,
                iterations_per_epoch: 50,
                probes_per_bucket: 10,
                model: ModelKind::Softmax,
                train: TrainConfig {
                    learning_rate,
                    batch_size: 8,
                    synth_per_batch: 8,
                    ..TrainConfig::default()
                },
                validation_size: 200,
                ..LoopConfig::default()
            },
            task: Task::synthetic(Arc::new(GaussianTask::new(spec).unwrap())),
        }
    }

    #[test]
    fn self_comparison_is_degenerate() {
        let a = arm("a", Mode::Adaptive, 0.05);
        let report = compare(&[a.clone(), a], &[1, 2, 3]).unwrap();
        let pair = report.pair(0, 1).unwrap();
        assert_eq!(pair.mean_difference, Some(0.0));
        assert!(pair.p_value.is_none());
        assert!(pair.note.as_deref().unwrap().contains("zero variance"));
    }

    #[test]
    fn cells_are_ordered_and_failures_isolated() {
        let good = arm("good", Mode::UniformBaseline, 0.05);
        let bad = arm("bad", Mode::Adaptive, 1e300);
        let report = compare(&[good, bad], &[5, 6, 7]).unwrap();
        let order: Vec<(usize, u64)> = report.cells.iter().map(|c| (c.config, c.seed)).collect();
        assert_eq!(order, vec![(0, 5), (0, 6), (0, 7), (1, 5), (1, 6), (1, 7)]);
        assert_eq!(report.configs[0].completed, 3);
        assert_eq!(report.configs[1].failed, 3);
        assert!(report.pairs[0].p_value.is_none());
        assert!(report.pairs[0].note.is_some());
    }

    #[test]
    fn needs_two_configs_and_two_seeds() {
        let a = arm("a", Mode::Adaptive, 0.05);
        assert!(compare(std::slice::from_ref(&a), &[1, 2]).is_err());
        assert!(compare(&[a.clone(), a], &[1]).is_err());
    }
}
