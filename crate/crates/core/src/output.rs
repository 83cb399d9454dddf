//! Run directories on disk: writing results and reading them back for reports.
//!
//! Every file is written to a temporary sibling and renamed into place, so a
//! reader never sees a half-written file.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::engine::{ComparisonReport, EpochRecord, RunFailure, RunReport};
use crate::error::{Error, Result};
use crate::learner::encode_checkpoint;
use crate::space::BucketPartition;

pub const EPOCHS_CSV: &str = "epochs.csv";
pub const DISTRIBUTION_CSV: &str = "distribution.csv";
pub const SNAPSHOT: &str = "config.snapshot";
pub const REPORT_JSON: &str = "report.json";
pub const CHECKPOINT: &str = "classifier.ckpt";
pub const HEATMAP_CSV: &str = "heatmap.csv";
pub const SUMMARY_TXT: &str = "summary.txt";
pub const COMPARE_CSV: &str = "compare.csv";
pub const COMPARE_JSON: &str = "compare_summary.json";

pub const EPOCHS_HEADER: [&str; 5] = ["epoch", "loss", "probe_error", "val_error", "wall_ms"];
pub const DISTRIBUTION_HEADER: [&str; 4] = ["epoch", "bucket", "p", "d"];

/// Contents of `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub name: String,
    pub mode: String,
    pub seed: u64,
    pub status: String,
    pub error: Option<String>,
    pub space: String,
    pub bucket_count: usize,
    pub epochs_completed: usize,
    pub iterations: u64,
    pub final_error: Option<f64>,
    pub final_val_error: Option<f64>,
    pub final_bucket_error: Vec<Option<f64>>,
    pub pool_fallbacks: usize,
}

impl RunSummary {
    pub fn new(
        name: &str,
        partition: &BucketPartition,
        seed: u64,
        outcome: std::result::Result<&RunReport, &RunFailure>,
    ) -> Self {
        let records = match outcome {
            Ok(r) => &r.records,
            Err(f) => &f.completed,
        };
        let (mode, status, error, iterations, final_error, final_val_error, final_bucket_error) = match outcome {
            Ok(r) => (
                r.mode.to_string(),
                "ok",
                None,
                r.iterations,
                Some(r.final_error),
                Some(r.final_evaluation.error),
                r.final_evaluation.per_bucket.clone(),
            ),
            Err(f) => (String::new(), "failed", Some(f.error.to_string()), 0, None, None, Vec::new()),
        };
        RunSummary {
            name: name.to_string(),
            mode,
            seed,
            status: status.to_string(),
            error,
            space: partition.descriptor(),
            bucket_count: partition.len(),
            epochs_completed: records.len(),
            iterations,
            final_error,
            final_val_error,
            final_bucket_error,
            pool_fallbacks: records.iter().map(|r| r.pool_fallbacks).sum(),
        }
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn csv_bytes<I, R>(header: &[&str], rows: I) -> Result<Vec<u8>>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.into_inner().map_err(|e| Error::Data(format!("csv buffer: {e}")))
}

/// `epochs.csv` contents. `wall_ms` is written as 0 unless `record_wall_time`.
pub fn epochs_csv(records: &[EpochRecord], record_wall_time: bool) -> Result<Vec<u8>> {
    csv_bytes(
        &EPOCHS_HEADER,
        records.iter().map(|r| {
            [
                r.epoch.to_string(),
                r.mean_loss.to_string(),
                r.probe_error.map(|p| p.to_string()).unwrap_or_default(),
                r.val_error.to_string(),
                if record_wall_time { r.wall_ms } else { 0 }.to_string(),
            ]
        }),
    )
}

pub fn distribution_csv(records: &[EpochRecord]) -> Result<Vec<u8>> {
    csv_bytes(
        &DISTRIBUTION_HEADER,
        records.iter().flat_map(|r| {
            r.probs.iter().zip(&r.difficulty).enumerate().map(move |(k, (p, d))| {
                [r.epoch.to_string(), k.to_string(), p.to_string(), d.to_string()]
            })
        }),
    )
}

/// Everything one run leaves on disk.
pub struct RunOutput<'a> {
    pub snapshot: &'a str,
    pub summary: &'a RunSummary,
    pub records: &'a [EpochRecord],
    pub report: Option<&'a RunReport>,
    pub record_wall_time: bool,
}

pub fn write_run_dir(dir: &Path, out: &RunOutput<'_>) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_atomic(&dir.join(SNAPSHOT), out.snapshot.as_bytes())?;
    write_atomic(&dir.join(EPOCHS_CSV), &epochs_csv(out.records, out.record_wall_time)?)?;
    write_atomic(&dir.join(DISTRIBUTION_CSV), &distribution_csv(out.records)?)?;
    if let Some(report) = out.report {
        write_atomic(&dir.join(CHECKPOINT), &encode_checkpoint(&report.classifier))?;
    }
    let mut json = serde_json::to_vec_pretty(out.summary)?;
    json.push(b'\n');
    write_atomic(&dir.join(REPORT_JSON), &json)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRow {
    pub epoch: u64,
    pub loss: f64,
    pub probe_error: Option<f64>,
    pub val_error: f64,
    pub wall_ms: u64,
}

/// A run directory read back from disk.
#[derive(Debug, Clone)]
pub struct RunDir {
    pub summary: RunSummary,
    pub partition: BucketPartition,
    pub epochs: Vec<EpochRow>,
    /// `(epoch, probs, difficulty)` per epoch, in file order.
    pub distributions: Vec<(u64, Vec<f64>, Vec<f64>)>,
}

fn require(dir: &Path, name: &str) -> Result<PathBuf> {
    let p = dir.join(name);
    if p.is_file() {
        Ok(p)
    } else {
        Err(Error::Data(format!("incomplete run directory: {} is missing", p.display())))
    }
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, file: &str) -> Result<T> {
    let raw = rec.get(i).unwrap_or("");
    raw.parse()
        .map_err(|_| Error::Data(format!("{file}: cannot parse `{raw}` in column {i}")))
}

fn open_csv(path: &Path, header: &[&str]) -> Result<csv::Reader<std::fs::File>> {
    let mut reader = csv::Reader::from_path(path)?;
    let found = reader.headers()?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::Data(format!(
            "{}: unexpected header {:?}",
            path.display(),
            found.iter().collect::<Vec<_>>()
        )));
    }
    Ok(reader)
}

pub fn load_run_dir(dir: &Path) -> Result<RunDir> {
    if !dir.is_dir() {
        return Err(Error::Data(format!("run directory {} not found", dir.display())));
    }
    require(dir, SNAPSHOT)?;
    let report_path = require(dir, REPORT_JSON)?;
    let epochs_path = require(dir, EPOCHS_CSV)?;
    let dist_path = require(dir, DISTRIBUTION_CSV)?;

    let text = std::fs::read_to_string(&report_path).map_err(|e| Error::io(&report_path, e))?;
    let summary: RunSummary =
        serde_json::from_str(&text).map_err(|e| Error::Data(format!("{REPORT_JSON}: {e}")))?;
    let partition: BucketPartition = summary
        .space
        .parse()
        .map_err(|e| Error::Data(format!("{REPORT_JSON}: {e}")))?;

    let mut epochs = Vec::new();
    for rec in open_csv(&epochs_path, &EPOCHS_HEADER)?.records() {
        let rec = rec?;
        let probe = rec.get(2).unwrap_or("");
        epochs.push(EpochRow {
            epoch: field(&rec, 0, EPOCHS_CSV)?,
            loss: field(&rec, 1, EPOCHS_CSV)?,
            probe_error: if probe.is_empty() {
                None
            } else {
                Some(field(&rec, 2, EPOCHS_CSV)?)
            },
            val_error: field(&rec, 3, EPOCHS_CSV)?,
            wall_ms: field(&rec, 4, EPOCHS_CSV)?,
        });
    }

    let k = partition.len();
    let mut distributions: Vec<(u64, Vec<f64>, Vec<f64>)> = Vec::new();
    for rec in open_csv(&dist_path, &DISTRIBUTION_HEADER)?.records() {
        let rec = rec?;
        let epoch: u64 = field(&rec, 0, DISTRIBUTION_CSV)?;
        let bucket: usize = field(&rec, 1, DISTRIBUTION_CSV)?;
        if distributions.last().is_none_or(|(e, _, _)| *e != epoch) {
            distributions.push((epoch, Vec::with_capacity(k), Vec::with_capacity(k)));
        }
        let (_, probs, diffs) = distributions.last_mut().expect("pushed above");
        if bucket != probs.len() {
            return Err(Error::Data(format!(
                "{DISTRIBUTION_CSV}: epoch {epoch} lists bucket {bucket} out of order"
            )));
        }
        probs.push(field(&rec, 2, DISTRIBUTION_CSV)?);
        diffs.push(field(&rec, 3, DISTRIBUTION_CSV)?);
    }
    if let Some((epoch, probs, _)) = distributions.iter().find(|(_, p, _)| p.len() != k) {
        return Err(Error::Data(format!(
            "{DISTRIBUTION_CSV}: epoch {epoch} has {} buckets, expected {k}",
            probs.len()
        )));
    }
    if distributions.len() != epochs.len() {
        return Err(Error::Data(format!(
            "{} epochs in {EPOCHS_CSV} but {} in {DISTRIBUTION_CSV}",
            epochs.len(),
            distributions.len()
        )));
    }
    Ok(RunDir {
        summary,
        partition,
        epochs,
        distributions,
    })
}

/// `heatmap.csv`: one row per (epoch, bucket) with the bucket's bin on every axis.
pub fn heatmap_csv(run: &RunDir) -> Result<Vec<u8>> {
    let axis_cols: Vec<String> = run
        .partition
        .space()
        .axes()
        .iter()
        .map(|a| format!("{}_bin", a.name))
        .collect();
    let mut header: Vec<&str> = vec!["epoch", "bucket"];
    header.extend(axis_cols.iter().map(String::as_str));
    header.extend(["p", "d"]);
    let mut rows = Vec::new();
    for (epoch, probs, diffs) in &run.distributions {
        for (k, (p, d)) in probs.iter().zip(diffs).enumerate() {
            let mut row = vec![epoch.to_string(), k.to_string()];
            row.extend(run.partition.bins_of(k)?.iter().map(ToString::to_string));
            row.push(p.to_string());
            row.push(d.to_string());
            rows.push(row);
        }
    }
    csv_bytes(&header, rows)
}

/// Plain-text per-epoch table.
pub fn summary_table(run: &RunDir) -> String {
    let s = &run.summary;
    let mut out = String::new();
    let _ = writeln!(out, "run {} ({}, seed {}): {}", s.name, s.mode, s.seed, s.status);
    let _ = writeln!(out, "space {} ({} buckets)", s.space, s.bucket_count);
    let _ = writeln!(
        out,
        "{:>6} {:>10} {:>11} {:>9} {:>9} {:>9} {:>8}",
        "epoch", "loss", "probe_error", "val_error", "p_min", "p_max", "argmax"
    );
    for (row, (_, probs, _)) in run.epochs.iter().zip(&run.distributions) {
        let (arg, p_max) = probs
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (k, p)| if p > best.1 { (k, p) } else { best });
        let p_min = probs.iter().copied().fold(f64::INFINITY, f64::min);
        let probe = row.probe_error.map_or_else(|| "-".to_string(), |p| format!("{p:.4}"));
        let _ = writeln!(
            out,
            "{:>6} {:>10.5} {:>11} {:>9.4} {:>9.5} {:>9.5} {:>8}",
            row.epoch, row.loss, probe, row.val_error, p_min, p_max, arg
        );
    }
    match s.final_error {
        Some(e) => {
            let _ = writeln!(out, "final error {e:.5}");
        }
        None => {
            let _ = writeln!(out, "failed: {}", s.error.as_deref().unwrap_or("unknown error"));
        }
    }
    out
}

/// Writes `heatmap.csv` and `summary.txt` into a run directory and returns the table.
pub fn write_report(dir: &Path) -> Result<String> {
    let run = load_run_dir(dir)?;
    write_atomic(&dir.join(HEATMAP_CSV), &heatmap_csv(&run)?)?;
    let table = summary_table(&run);
    write_atomic(&dir.join(SUMMARY_TXT), table.as_bytes())?;
    Ok(table)
}

/// Writes `compare.csv` and `compare_summary.json`.
pub fn write_compare(dir: &Path, report: &ComparisonReport) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let rows = report.cells.iter().map(|c| {
        [
            c.name.clone(),
            c.seed.to_string(),
            c.final_error.map(|e| e.to_string()).unwrap_or_default(),
        ]
    });
    write_atomic(&dir.join(COMPARE_CSV), &csv_bytes(&["config", "seed", "final_error"], rows)?)?;
    let mut json = serde_json::to_vec_pretty(report)?;
    json.push(b'\n');
    write_atomic(&dir.join(COMPARE_JSON), &json)
}
