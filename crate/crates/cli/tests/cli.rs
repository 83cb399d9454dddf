use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sampleahead::generator::{encode_idx_images, encode_idx_labels, Image};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn sampleahead(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sampleahead"))
        .args(args)
        .env_remove("SAMPLEAHEAD_DATA_DIR")
        .output()
        .unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn smoke_run(out: &Path) {
    let smoke = configs().join("smoke.cfg");
    let o = sampleahead(&["run", path(&smoke), "--out", path(out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

fn rows(file: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(file).unwrap();
    r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn smoke_run_writes_two_epochs() {
    let tmp = tempfile::tempdir().unwrap();
    smoke_run(tmp.path());
    let epochs = rows(&tmp.path().join("epochs.csv"));
    assert_eq!(epochs.len(), 2);
    // no probes before the first epoch
    assert_eq!(epochs[0][2], "");
    assert_eq!(rows(&tmp.path().join("distribution.csv")).len(), 2 * 16);
    for f in ["config.snapshot", "report.json", "classifier.ckpt"] {
        assert!(tmp.path().join(f).is_file(), "{f}");
    }
}

#[test]
fn snapshot_reproduces_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    smoke_run(&first);
    let second = tmp.path().join("second");
    let snapshot = first.join("config.snapshot");
    let o = sampleahead(&["run", path(&snapshot), "--out", path(&second)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["epochs.csv", "distribution.csv", "config.snapshot", "classifier.ckpt"] {
        assert_eq!(std::fs::read(first.join(f)).unwrap(), std::fs::read(second.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn report_heatmap_matches_distribution() {
    let tmp = tempfile::tempdir().unwrap();
    smoke_run(tmp.path());
    let o = sampleahead(&["report", path(tmp.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!o.stdout.is_empty());
    let heat = rows(&tmp.path().join("heatmap.csv"));
    assert_eq!(heat.len(), 2 * 16);
    let dist = rows(&tmp.path().join("distribution.csv"));
    let last: Vec<_> = heat.iter().filter(|r| r[0] == "1").collect();
    let last_dist: Vec<_> = dist.iter().filter(|r| r[0] == "1").collect();
    assert_eq!(last.len(), 16);
    for (h, d) in last.iter().zip(&last_dist) {
        assert_eq!(h[1], d[1]);
        let n = h.len();
        assert_eq!(h[n - 2].parse::<f64>().unwrap(), d[2].parse::<f64>().unwrap());
    }
}

#[test]
fn report_on_incomplete_dir_is_a_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    smoke_run(tmp.path());
    std::fs::remove_file(tmp.path().join("distribution.csv")).unwrap();
    assert_eq!(sampleahead(&["report", path(tmp.path())]).status.code(), Some(2));
    let empty = tempfile::tempdir().unwrap();
    assert_eq!(sampleahead(&["report", path(empty.path())]).status.code(), Some(2));
}

#[test]
fn invalid_alpha_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.cfg");
    let text = std::fs::read_to_string(configs().join("smoke.cfg")).unwrap();
    std::fs::write(&cfg, format!("{text}\n[sampler]\nalpha = 1.5\n")).unwrap();
    let o = sampleahead(&["run", path(&cfg), "--out", path(&tmp.path().join("out"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha"));
}

#[test]
fn unknown_key_reports_its_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.cfg");
    std::fs::write(&cfg, "name = x\n[task]\nkind = gaussian\n[train]\nlearning_rat = 0.1\n").unwrap();
    let o = sampleahead(&["run", path(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 5"));
}

#[test]
fn missing_mnist_data_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("m.cfg");
    let text = std::fs::read_to_string(configs().join("mnist-adaptive.cfg")).unwrap();
    let missing = tmp.path().join("nowhere");
    std::fs::write(&cfg, text.replace("[mnist]\n", &format!("[mnist]\ndata_dir = {}\n", missing.display()))).unwrap();
    let o = sampleahead(&["run", path(&cfg), "--out", path(&tmp.path().join("out"))]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

fn write_mnist_fixture(dir: &Path) {
    let mut images = Vec::new();
    let mut labels = Vec::new();
    for i in 0..40 {
        let digit = i % 10;
        let mut px = vec![0.0; 28 * 28];
        // a bar whose position encodes the digit
        for y in 6..22 {
            px[y * 28 + 4 + 2 * digit] = 1.0;
        }
        images.push(Image::new(28, 28, px).unwrap());
        labels.push(digit);
    }
    std::fs::write(dir.join("train-images-idx3-ubyte"), encode_idx_images(&images)).unwrap();
    std::fs::write(dir.join("train-labels-idx1-ubyte"), encode_idx_labels(&labels)).unwrap();
}

#[test]
fn mnist_fixture_runs_through_env_override() {
    let tmp = tempfile::tempdir().unwrap();
    write_mnist_fixture(tmp.path());
    let cfg = tmp.path().join("m.cfg");
    std::fs::write(
        &cfg,
        "name = m\n[task]\nkind = mnist\n[loop]\ntotal_iterations = 20\niterations_per_epoch = 10\nvalidation_size = 50\n\
         [probes]\nper_bucket = 1\n[model]\nkind = softmax\n[train]\nbatch_size = 8\nsynth_per_batch = 4\n",
    )
    .unwrap();
    let out = tmp.path().join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_sampleahead"))
        .args(["run", path(&cfg), "--out", path(&out)])
        .env("SAMPLEAHEAD_DATA_DIR", tmp.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(rows(&out.join("distribution.csv")).len(), 2 * 160);
}

#[test]
fn compare_summary_matches_cells() {
    let tmp = tempfile::tempdir().unwrap();
    let smoke = configs().join("smoke.cfg");
    let text = std::fs::read_to_string(&smoke).unwrap();
    let uniform = tmp.path().join("uniform.cfg");
    std::fs::write(&uniform, text.replace("name = smoke", "name = smoke-uniform\nmode = uniform-baseline")).unwrap();
    let out = tmp.path().join("cmp");
    let o = sampleahead(&["compare", path(&smoke), path(&uniform), "--seeds", "1,2,3", "--out", path(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let mut reader = csv::Reader::from_path(out.join("compare.csv")).unwrap();
    let headers = reader.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let (config_col, err_col) = (col("config"), col("final_error"));
    let cells: Vec<_> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(cells.len(), 6);

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("compare_summary.json")).unwrap()).unwrap();
    for c in summary["configs"].as_array().unwrap() {
        let name = c["name"].as_str().unwrap();
        let errs: Vec<f64> = cells
            .iter()
            .filter(|r| &r[config_col] == name)
            .map(|r| r[err_col].parse().unwrap())
            .collect();
        assert_eq!(errs.len(), 3);
        let mean = errs.iter().sum::<f64>() / 3.0;
        assert!((mean - c["mean"].as_f64().unwrap()).abs() < 1e-12);
    }
}

#[test]
fn compare_rejects_duplicate_seeds() {
    let smoke = configs().join("smoke.cfg");
    let tmp = tempfile::tempdir().unwrap();
    let o = sampleahead(&["compare", path(&smoke), path(&smoke), "--seeds", "1,1", "--out", path(tmp.path())]);
    assert_eq!(o.status.code(), Some(1));
}
