//! Experiment orchestration for the pathlab desk: config validation, seeded
//! runs, and atomic persistence of CSV/JSON outputs with a run manifest.

pub mod config;
pub mod experiments;
pub mod manifest;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context as _};
use serde::Serialize;

pub use config::{ConfigError, ExperimentConfig, EXPERIMENTS};
pub use manifest::{Check, FileEntry, RunManifest, Table};

use manifest::{sha256_hex, write_atomically, Outputs};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const VERDICT_FILE: &str = "verdict.json";
pub const TIMINGS_FILE: &str = "timings.json";

/// Reads and validates a config file, returning every problem found.
pub fn validate_config(path: &Path) -> anyhow::Result<Result<ExperimentConfig, Vec<ConfigError>>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(ExperimentConfig::parse(&text))
}

/// State threaded through one experiment.
pub struct Ctx<'a> {
    pub cfg: &'a ExperimentConfig,
    outputs: Outputs,
    checks: Vec<Check>,
    timings: Vec<(String, f64)>,
}

impl<'a> Ctx<'a> {
    fn new(cfg: &'a ExperimentConfig) -> Self {
        Ctx {
            cfg,
            outputs: Outputs::default(),
            checks: Vec::new(),
            timings: Vec::new(),
        }
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn table(&mut self, name: &str, table: &Table) {
        self.outputs.table(name, table);
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) {
        self.outputs.json(name, value);
    }

    /// Runs `f`, recording its wall time under `name`.
    pub fn timed<T>(&mut self, name: &str, f: impl FnOnce(&mut Self) -> anyhow::Result<T>) -> anyhow::Result<T> {
        let start = Instant::now();
        let out = f(self);
        self.timings.push((name.to_string(), start.elapsed().as_secs_f64()));
        out
    }
}

#[derive(Serialize)]
struct Verdict<'a> {
    experiment: &'a str,
    all_pass: bool,
    checks: &'a [Check],
}

#[derive(Serialize)]
struct Timings {
    operations: BTreeMap<String, f64>,
    total_seconds: f64,
}

/// Runs the configured experiment and writes its outputs, `verdict.json`,
/// `manifest.json` and `timings.json` into the output directory.
pub fn run_experiment(cfg: &ExperimentConfig) -> anyhow::Result<RunManifest> {
    run_experiment_in(cfg, &cfg.out_dir())
}

pub fn run_experiment_in(cfg: &ExperimentConfig, dir: &Path) -> anyhow::Result<RunManifest> {
    let start = Instant::now();
    let mut ctx = Ctx::new(cfg);
    match cfg.experiment() {
        "simulate" => experiments::simulate::run(&mut ctx)?,
        "convergence" => experiments::convergence::run(&mut ctx)?,
        "driver-verify" => experiments::driver::run_verify(&mut ctx)?,
        "dv-residual" => experiments::driver::run_dv_residual(&mut ctx)?,
        "qform" => experiments::qform::run(&mut ctx)?,
        "chaos" => experiments::chaos::run(&mut ctx)?,
        "theta" => experiments::theta::run(&mut ctx)?,
        "laplacian-compare" => experiments::laplacian::run(&mut ctx)?,
        other => bail!("unknown experiment `{other}`"),
    }
    let Ctx {
        mut outputs,
        checks,
        timings,
        ..
    } = ctx;
    let all_pass = !checks.is_empty() && checks.iter().all(|c| c.pass);
    outputs.json(
        VERDICT_FILE,
        &Verdict {
            experiment: cfg.experiment(),
            all_pass,
            checks: &checks,
        },
    );
    let files = outputs.entries();
    // The output location is not part of what was computed.
    let config = cfg.values().iter().filter(|(k, _)| k.as_str() != "out").map(|(k, v)| (k.clone(), v.clone())).collect();
    let manifest = RunManifest {
        experiment: cfg.experiment().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config,
        content_hash: content_hash(&files),
        files,
        checks,
        all_pass,
        timings_file: TIMINGS_FILE.to_string(),
    };
    let mut operations = BTreeMap::new();
    for (name, secs) in timings {
        *operations.entry(name).or_insert(0.0) += secs;
    }
    let timings = Timings {
        operations,
        total_seconds: start.elapsed().as_secs_f64(),
    };
    let mut files = outputs.into_files();
    files.push((MANIFEST_FILE.to_string(), manifest.to_json().into_bytes()));
    let mut t = serde_json::to_string_pretty(&timings)?;
    t.push('\n');
    files.push((TIMINGS_FILE.to_string(), t.into_bytes()));
    write_atomically(dir, &files).with_context(|| format!("writing outputs to {}", dir.display()))?;
    Ok(manifest)
}

/// Hash over the sorted `name sha256` lines of every emitted file.
fn content_hash(files: &[FileEntry]) -> String {
    let mut lines: Vec<String> = files.iter().map(|f| format!("{} {}\n", f.name, f.sha256)).collect();
    lines.sort();
    sha256_hex(lines.concat().as_bytes())
}
