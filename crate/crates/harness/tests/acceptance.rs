//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::path::Path;
use std::process::ExitCode;

use pathlab_harness::{run_experiment_in, ExperimentConfig, RunManifest, MANIFEST_FILE, TIMINGS_FILE};

struct Run {
    manifest: RunManifest,
    total_seconds: f64,
    operations: serde_json::Value,
}

fn run(dir: &Path, text: &str) -> Run {
    let cfg = ExperimentConfig::parse(text).unwrap_or_else(|e| panic!("bad acceptance config {text:?}: {e:?}"));
    let out = dir.join(cfg.experiment());
    let manifest = run_experiment_in(&cfg, &out).unwrap_or_else(|e| panic!("{} failed: {e:#}", cfg.experiment()));
    let timings: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join(TIMINGS_FILE)).unwrap()).unwrap();
    Run {
        manifest,
        total_seconds: timings["total_seconds"].as_f64().unwrap(),
        operations: timings["operations"].clone(),
    }
}

struct Report {
    failures: usize,
}

impl Report {
    /// Prints one criterion line. `select` picks checks by name; every
    /// selected check must pass, and at least one must be selected.
    fn criterion(&mut self, id: u32, title: &str, run: &Run, select: impl Fn(&str) -> bool, extra: &[(String, bool)]) {
        let chosen: Vec<_> = run.manifest.checks.iter().filter(|c| select(&c.name)).collect();
        let mut bad: Vec<String> = chosen
            .iter()
            .filter(|c| !c.pass)
            .map(|c| format!("{} = {:e} {} {:e}", c.name, c.statistic, c.relation, c.threshold))
            .collect();
        bad.extend(extra.iter().filter(|(_, ok)| !ok).map(|(s, _)| s.clone()));
        if chosen.is_empty() {
            bad.push("no checks selected".into());
        }
        let pass = bad.is_empty();
        if !pass {
            self.failures += 1;
        }
        let details: Vec<String> = extra.iter().map(|(s, _)| s.clone()).collect();
        println!(
            "{} criterion {id:>2}: {title} [{} checks{}{}]",
            if pass { "PASS" } else { "FAIL" },
            chosen.len(),
            if details.is_empty() { String::new() } else { format!("; {}", details.join("; ")) },
            if bad.is_empty() { String::new() } else { format!("; failed: {}", bad.join(", ")) },
        );
    }
}

const RERUN_CONFIGS: &[&str] = &[
    "experiment = simulate\nseed = 3\npaths = 40\nsteps = 256\n",
    "experiment = convergence\nseed = 3\npaths = 20\nladder = 128,256,512\n",
    "experiment = driver-verify\nseed = 3\npaths = 1\nsteps = 256\nsamples = 20\nmodes = 2\n",
    "experiment = dv-residual\nseed = 3\npaths = 2\nladder = 128,256,512\nmodel = s2\nconnection = lc\n",
    "experiment = qform\nseed = 3\npaths = 10\nsteps = 256\nmodes_ladder = 1,2,4\n",
    "experiment = chaos\nseed = 3\n",
    "experiment = theta\nseed = 3\npaths = 400\nsteps = 128\ntheta.sign_paths = 2000\n",
    "experiment = laplacian-compare\nseed = 3\nsamples = 20\n",
];

fn main() -> ExitCode {
    let tmp = tempfile::tempdir().expect("temporary directory");
    let dir = tmp.path();
    let mut report = Report { failures: 0 };

    let conv = run(&dir.join("c1"), "experiment = convergence\nseed = 20240\npaths = 2000\n");
    let is = |prefix: &'static str| move |n: &str| n.starts_with(prefix);
    report.criterion(
        1,
        "isometry defect of stochastic parallel transport on s2/lc",
        &conv,
        is("isometry_"),
        &[(format!("convergence run {:.1} s <= 120 s", conv.total_seconds), conv.total_seconds <= 120.0)],
    );
    report.criterion(
        2,
        "frame orthonormality ladder and transport of frame columns",
        &conv,
        |n| n.starts_with("frame_median") || n.starts_with("frame_halving") || n == "transport_equals_frame_bitwise",
        &[],
    );

    let heat = run(&dir.join("c3"), "experiment = simulate\nseed = 20241\npaths = 10000\nsteps = 1024\n");
    report.criterion(3, "heat semigroup on the s2 height over 10^4 paths", &heat, is("heat_semigroup"), &[]);

    let driver = run(&dir.join("c4"), "experiment = driver-verify\nseed = 20242\n");
    report.criterion(4, "antisymmetry of A(v) on Driver connections, control separated", &driver, |_| true, &[]);

    let dv = run(&dir.join("c5"), "experiment = dv-residual\nseed = 20243\n");
    report.criterion(5, "(D_v - v)p residual under refinement", &dv, |n| n.contains(":residual"), &[]);

    let lap = run(&dir.join("c6"), "experiment = laplacian-compare\nseed = 20244\nmodel = s3\n");
    report.criterion(6, "Laplacians of Driver and non-Driver pairs on S^3", &lap, |_| true, &[]);

    report.criterion(7, "metric closure D_v g = 0 within tol(dt)", &dv, |n| n.contains(":metric_closure"), &[]);

    let chaos = run(&dir.join("c8"), "experiment = chaos\nseed = 20245\nchaos.n = 4\nchaos.order = 5\n");
    let suite_secs = chaos.operations["suite"].as_f64().unwrap_or(f64::INFINITY);
    let suite_names = [
        "ou-conditional-expectation-commute",
        "grad-div-adjointness",
        "leibniz-div-a-grad",
        "zero-divergence-div-a-grad",
        "clark-ocone-reconstruction",
    ];
    report.criterion(
        8,
        "exact chaos identities, N <= 4, order <= 5",
        &chaos,
        |n| suite_names.iter().any(|s| n.starts_with(&format!("{s}:"))),
        &[(format!("suite {suite_secs:.3} s <= 30 s"), suite_secs <= 30.0)],
    );
    report.criterion(
        9,
        "divergence partial sums equal m; approx_derivation exact on cylinders",
        &chaos,
        |n| n.starts_with("partial_sum_") || n.starts_with("div_a_grad_rotation:") || n.starts_with("constant_field:"),
        &[],
    );
    report.criterion(10, "q0 exact on the panel and non-degenerate", &chaos, is("q0_"), &[]);

    let theta = run(&dir.join("c11"), "experiment = theta\nseed = 20246\n");
    report.criterion(11, "theta: law, Picard inverse, rotation and sign counterexamples", &theta, |_| true, &[]);

    // Identical manifests for identical configs written to different places.
    let mut mismatched = Vec::new();
    let mut compared = 0;
    for text in RERUN_CONFIGS {
        let cfg = ExperimentConfig::parse(text).unwrap();
        let a = dir.join("r1").join(cfg.experiment());
        let b = dir.join("r2").join(cfg.experiment());
        run_experiment_in(&cfg, &a).unwrap();
        run_experiment_in(&cfg, &b).unwrap();
        let (ma, mb) = (std::fs::read(a.join(MANIFEST_FILE)).unwrap(), std::fs::read(b.join(MANIFEST_FILE)).unwrap());
        compared += 1;
        if ma != mb {
            mismatched.push(cfg.experiment().to_string());
        }
    }
    let ok = mismatched.is_empty() && compared == RERUN_CONFIGS.len();
    if !ok {
        report.failures += 1;
    }
    println!(
        "{} criterion 12: byte-identical manifests on rerun [{compared} experiments{}]",
        if ok { "PASS" } else { "FAIL" },
        if ok { String::new() } else { format!("; differ: {}", mismatched.join(", ")) }
    );

    println!("acceptance: {} of 12 criteria failed", report.failures);
    if report.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
