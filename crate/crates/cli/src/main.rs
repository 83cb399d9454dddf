use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sampleahead::config::{build_task, RunConfig};
use sampleahead::engine::{compare, run, Arm};
use sampleahead::error::{Category, Error, Result};
use sampleahead::output::{write_compare, write_report, write_run_dir, RunOutput, RunSummary};

#[derive(Parser)]
#[command(name = "sampleahead", version, about = "Adaptive sampling experiments over bucketized data spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one configuration and write its run directory.
    Run {
        config: PathBuf,
        /// Run only this seed instead of the config's seed list.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (defaults to the config's output_dir, then runs/<name>).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run several configurations over shared seeds and test the paired differences.
    Compare {
        #[arg(required = true, num_args = 2..)]
        configs: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',', required = true)]
        seeds: Vec<u64>,
        #[arg(long, default_value = "runs/compare")]
        out: PathBuf,
    },
    /// Emit heatmap.csv and a summary table for a finished run directory.
    Report { dir: PathBuf },
}

fn exit_code(category: Category) -> u8 {
    match category {
        Category::Config | Category::Contract => 1,
        Category::Data => 2,
        Category::Divergence => 3,
        Category::Io => 4,
    }
}

fn load_config(path: &Path) -> Result<RunConfig> {
    let mut config = RunConfig::from_file(path)?;
    config.apply_env();
    Ok(config)
}

fn cmd_run(path: &Path, seed: Option<u64>, out: Option<PathBuf>) -> Result<Option<Error>> {
    let config = load_config(path)?;
    let task = build_task(&config)?;
    let partition = task.generator.partition().clone();
    let base = out
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("runs").join(&config.name));
    let seeds = match seed {
        Some(s) => vec![s],
        None => config.seeds.clone(),
    };
    let mut first_failure = None;
    for &seed in &seeds {
        let dir = if seeds.len() == 1 {
            base.clone()
        } else {
            base.join(format!("seed-{seed}"))
        };
        // the snapshot reruns exactly this seed and pins the partition
        let resolved = RunConfig {
            seeds: vec![seed],
            space: Some(partition.descriptor()),
            run: config.loop_config(seed),
            ..config.clone()
        };
        let outcome = run(&resolved.run, &task);
        let summary = RunSummary::new(&config.name, &partition, seed, outcome.as_ref());
        let (records, report) = match &outcome {
            Ok(r) => (&r.records, Some(r)),
            Err(f) => (&f.completed, None),
        };
        write_run_dir(
            &dir,
            &RunOutput {
                snapshot: &resolved.to_text(),
                summary: &summary,
                records,
                report,
                record_wall_time: config.record_wall_time,
            },
        )?;
        match outcome {
            Ok(r) => println!(
                "{} seed {seed}: {} epochs, final error {:.5} -> {}",
                config.name,
                r.records.len(),
                r.final_error,
                dir.display()
            ),
            Err(f) => {
                eprintln!("{} seed {seed}: {f} -> {}", config.name, dir.display());
                first_failure.get_or_insert(f.error);
            }
        }
    }
    Ok(first_failure)
}

fn cmd_compare(paths: &[PathBuf], seeds: &[u64], out: &Path) -> Result<Option<Category>> {
    let mut sorted = seeds.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::config("--seeds", 0, "seeds must be distinct"));
    }
    let mut arms: Vec<Arm> = Vec::new();
    for path in paths {
        let config = load_config(path)?;
        let task = build_task(&config)?;
        let taken = arms.iter().filter(|a| a.name.split('#').next() == Some(&config.name)).count();
        let name = if taken == 0 {
            config.name.clone()
        } else {
            format!("{}#{}", config.name, taken + 1)
        };
        arms.push(Arm {
            name,
            config: config.run.clone(),
            task,
        });
    }
    let report = compare(&arms, seeds)?;
    write_compare(out, &report)?;
    for c in &report.configs {
        let fmt = |v: Option<f64>| v.map_or_else(|| "-".into(), |v| format!("{v:.5}"));
        println!(
            "{:<24} mean {} std {} ({} ok, {} failed)",
            c.name,
            fmt(c.mean),
            fmt(c.std),
            c.completed,
            c.failed
        );
    }
    for p in &report.pairs {
        let (a, b) = (&report.configs[p.a].name, &report.configs[p.b].name);
        match (p.mean_difference, p.p_value) {
            (Some(d), Some(pv)) => println!(
                "{a} vs {b}: mean difference {d:+.5}, {a} not worse in {}/{} seeds, p = {pv:.4}",
                p.a_not_worse,
                seeds.len()
            ),
            _ => println!("{a} vs {b}: {}", p.note.as_deref().unwrap_or("no test")),
        }
    }
    println!("-> {}", out.display());
    Ok(report.cells.iter().find_map(|c| c.failure_category))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, seed, out } => {
            cmd_run(&config, seed, out).map(|failure| failure.map(|e| e.category()))
        }
        Command::Compare { configs, seeds, out } => cmd_compare(&configs, &seeds, &out),
        Command::Report { dir } => write_report(&dir).map(|table| {
            print!("{table}");
            None
        }),
    };
    match result {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(category)) => ExitCode::from(exit_code(category)),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.category()))
        }
    }
}
