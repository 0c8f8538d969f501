use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pathlab_harness::{run_experiment, ExperimentConfig};

#[derive(Parser)]
#[command(name = "pathlab", version, about = "Path-space desk laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the frame bundle and check isometry, frame and heat semigroup.
    Simulate(RunArgs),
    /// Torsion condition and antisymmetry of the tangent rotation.
    DriverVerify(RunArgs),
    /// Consistency residual of the tangent process under refinement.
    DvResidual(RunArgs),
    /// Truncated gradient and the standard bilinear form.
    Qform(RunArgs),
    /// Exact Wiener-chaos identities.
    Chaos(RunArgs),
    /// Rotations of Brownian motion by adapted orthogonal processes.
    Theta(RunArgs),
    /// Laplacians of two connections on the same metric.
    LaplacianCompare(RunArgs),
    /// Grid-refinement study of the frame bundle and strong order.
    Convergence(RunArgs),
    /// Check a config file and print its normalized form.
    Validate { path: PathBuf },
}

#[derive(Args)]
struct RunArgs {
    /// Key-value config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    connection: Option<String>,
    /// Chaos identity to run.
    #[arg(long)]
    check: Option<String>,
    /// Morphism case to run.
    #[arg(long)]
    case: Option<String>,
    /// Number of Gaussian coordinates for the chaos suite.
    #[arg(long = "N")]
    n: Option<usize>,
    /// Maximum chaos order for the chaos suite.
    #[arg(long)]
    order: Option<usize>,
}

fn report_errors(errors: &[pathlab_harness::ConfigError]) -> ExitCode {
    for e in errors {
        eprintln!("config error: {e}");
    }
    ExitCode::from(2)
}

fn build_config(experiment: &str, args: RunArgs) -> anyhow::Result<Result<ExperimentConfig, Vec<pathlab_harness::ConfigError>>> {
    let mut raw = BTreeMap::new();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)?;
        match ExperimentConfig::parse_raw(&text) {
            Ok(m) => raw = m,
            Err(e) => return Ok(Err(e)),
        }
    }
    if let Some(e) = raw.get("experiment") {
        if e != experiment {
            return Ok(Err(vec![pathlab_harness::ConfigError {
                key: "experiment".into(),
                reason: format!("config is for `{e}` but the subcommand is `{experiment}`"),
            }]));
        }
    }
    raw.insert("experiment".into(), experiment.into());
    let mut set = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            raw.insert(k.to_string(), v);
        }
    };
    set("seed", args.seed.map(|x| x.to_string()));
    set("out", args.out.map(|p| p.display().to_string()));
    set("paths", args.paths.map(|x| x.to_string()));
    set("steps", args.steps.map(|x| x.to_string()));
    set("model", args.model);
    set("connection", args.connection);
    set("check", args.check);
    set("case", args.case);
    set("chaos.n", args.n.map(|x| x.to_string()));
    set("chaos.order", args.order.map(|x| x.to_string()));
    Ok(ExperimentConfig::from_map(raw))
}

fn main() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    let (experiment, args) = match cli.command {
        Command::Validate { path } => {
            return Ok(match pathlab_harness::validate_config(&path)? {
                Ok(cfg) => {
                    print!("{}", cfg.normalized());
                    ExitCode::SUCCESS
                }
                Err(errors) => report_errors(&errors),
            });
        }
        Command::Simulate(a) => ("simulate", a),
        Command::DriverVerify(a) => ("driver-verify", a),
        Command::DvResidual(a) => ("dv-residual", a),
        Command::Qform(a) => ("qform", a),
        Command::Chaos(a) => ("chaos", a),
        Command::Theta(a) => ("theta", a),
        Command::LaplacianCompare(a) => ("laplacian-compare", a),
        Command::Convergence(a) => ("convergence", a),
    };
    let cfg = match build_config(experiment, args)? {
        Ok(c) => c,
        Err(errors) => return Ok(report_errors(&errors)),
    };
    let manifest = run_experiment(&cfg)?;
    for c in &manifest.checks {
        println!(
            "{} {} = {:e} {} {:e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.statistic,
            c.relation,
            c.threshold
        );
    }
    println!("outputs: {}", cfg.out_dir().display());
    Ok(if manifest.all_pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
