use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use pathlab_core::geometry::{parse_connection, parse_model, ManifoldModel, TestFunction};
use pathlab_core::tangent::FourierMode;

pub const EXPERIMENTS: [&str; 8] = [
    "simulate",
    "driver-verify",
    "dv-residual",
    "qform",
    "chaos",
    "theta",
    "laplacian-compare",
    "convergence",
];

pub const CHAOS_CHECKS: [&str; 9] = [
    "all",
    "ou-commute",
    "adjoint",
    "leibniz",
    "zero-divergence",
    "clark-ocone",
    "not-a-vector-field",
    "approx-derivation",
    "q0",
];

pub const THETA_CASES: [&str; 5] = ["all", "law", "rotation", "sign", "picard"];

/// Model used when a config names none.
pub fn default_model(experiment: &str) -> &'static str {
    if experiment == "laplacian-compare" {
        "s3"
    } else {
        "s2"
    }
}

/// A rejected key and the reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub key: String,
    pub reason: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.reason)
    }
}

fn err(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError {
        key: key.to_string(),
        reason: reason.into(),
    }
}

#[derive(Clone, Copy)]
enum Kind {
    Experiment,
    Seed,
    Count { min: usize },
    Real,
    Positive,
    Text,
    Model,
    Connection,
    Function,
    CountList,
    RealList,
    Direction,
    Choice(&'static [&'static str]),
}

fn kind_of(key: &str) -> Option<Kind> {
    if key.starts_with("tolerance.") && key.len() > "tolerance.".len() {
        return Some(Kind::Positive);
    }
    Some(match key {
        "experiment" => Kind::Experiment,
        "seed" => Kind::Seed,
        "steps" => Kind::Count { min: 2 },
        "paths" | "samples" | "modes" | "chaos.per_n" | "theta.sign_paths" => Kind::Count { min: 1 },
        "chaos.n" => Kind::Count { min: 1 },
        "chaos.order" => Kind::Count { min: 0 },
        "out" => Kind::Text,
        "model" => Kind::Model,
        "connection" | "compare" | "control" => Kind::Connection,
        "function" | "function2" => Kind::Function,
        "ladder" | "modes_ladder" => Kind::CountList,
        "times" => Kind::RealList,
        "direction" => Kind::Direction,
        "theta.angle" | "theta.hdot_x" | "theta.hdot_y" => Kind::Real,
        "theta.k" => Kind::Positive,
        "extension" => Kind::Choice(&["skew", "full"]),
        "check" => Kind::Choice(&CHAOS_CHECKS),
        "case" => Kind::Choice(&THETA_CASES),
        _ => return None,
    })
}

/// A validated experiment configuration. Values are kept as trimmed
/// strings; typed accessors parse them on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    values: BTreeMap<String, String>,
}

impl ExperimentConfig {
    /// `key = value` per line, `#` comments, dotted keys for nesting.
    pub fn parse(text: &str) -> Result<Self, Vec<ConfigError>> {
        Self::from_map(Self::parse_raw(text)?)
    }

    /// Syntax only: the key-value map before any value is checked.
    pub fn parse_raw(text: &str) -> Result<BTreeMap<String, String>, Vec<ConfigError>> {
        let mut raw = BTreeMap::new();
        let mut errors = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                errors.push(err(&format!("line {}", lineno + 1), "expected `key = value`"));
                continue;
            };
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || !k.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || matches!(c, '_' | '.' | '-')) {
                errors.push(err(&format!("line {}", lineno + 1), format!("malformed key `{k}`")));
                continue;
            }
            if raw.insert(k.to_string(), v.to_string()).is_some() {
                errors.push(err(k, "duplicate key"));
            }
        }
        if errors.is_empty() {
            Ok(raw)
        } else {
            Err(errors)
        }
    }

    /// Validates a key-value map, reporting every problem at once.
    pub fn from_map(raw: BTreeMap<String, String>) -> Result<Self, Vec<ConfigError>> {
        let mut errors = Vec::new();
        for key in ["experiment", "seed"] {
            if !raw.contains_key(key) {
                errors.push(err(key, format!("{key} required")));
            }
        }
        let experiment = raw.get("experiment").map(String::as_str).unwrap_or_default();
        let model: Option<ManifoldModel> = parse_model(raw.get("model").map(String::as_str).unwrap_or(default_model(experiment))).ok();
        for (key, value) in &raw {
            let Some(kind) = kind_of(key) else {
                errors.push(err(key, "unknown key"));
                continue;
            };
            if value.is_empty() {
                errors.push(err(key, "empty value"));
                continue;
            }
            if let Err(reason) = check_value(key, value, kind, model.as_ref()) {
                errors.push(err(key, reason));
            }
        }
        if errors.is_empty() {
            Ok(ExperimentConfig { values: raw })
        } else {
            Err(errors)
        }
    }

    /// Sorted `key = value` lines.
    pub fn normalized(&self) -> String {
        self.values.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn values(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn experiment(&self) -> &str {
        self.get("experiment").unwrap_or_default()
    }

    pub fn seed(&self) -> u64 {
        self.get("seed").and_then(|s| s.parse().ok()).unwrap_or_default()
    }

    pub fn count(&self, key: &str, default: usize) -> usize {
        self.get(key).and_then(|s| s.parse().ok()).unwrap_or(default)
    }

    pub fn real(&self, key: &str, default: f64) -> f64 {
        self.get(key).and_then(|s| s.parse().ok()).unwrap_or(default)
    }

    pub fn text<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.get(key).unwrap_or(default)
    }

    pub fn counts(&self, key: &str, default: &[usize]) -> Vec<usize> {
        self.get(key).map(|s| parse_list(s).unwrap_or_default()).unwrap_or_else(|| default.to_vec())
    }

    pub fn reals(&self, key: &str, default: &[f64]) -> Vec<f64> {
        self.get(key).map(|s| parse_list(s).unwrap_or_default()).unwrap_or_else(|| default.to_vec())
    }

    pub fn tolerance(&self, name: &str, default: f64) -> f64 {
        self.real(&format!("tolerance.{name}"), default)
    }

    pub fn out_dir(&self) -> PathBuf {
        PathBuf::from(self.get("out").map(str::to_string).unwrap_or_else(|| format!("runs/{}", self.experiment())))
    }
}

/// `const@u<μ>`, `cos<l>@u<μ>` or `sin<k>@u<μ>`: a Fourier mode on one frame column.
pub fn parse_direction(id: &str, n: usize) -> Result<(FourierMode, usize), String> {
    let (mode, col) = id.split_once('@').ok_or_else(|| format!("expected <mode>@u<column>, got `{id}`"))?;
    let mu: usize = col
        .strip_prefix('u')
        .and_then(|c| c.parse().ok())
        .ok_or_else(|| format!("bad frame column `{col}`"))?;
    if mu >= n {
        return Err(format!("frame column {mu} out of range for dimension {n}"));
    }
    let freq = |s: &str| -> Result<u32, String> {
        match s.parse::<u32>() {
            Ok(l) if l >= 1 => Ok(l),
            _ => Err(format!("bad frequency `{s}`")),
        }
    };
    let mode = if mode == "const" {
        FourierMode::Constant
    } else if let Some(l) = mode.strip_prefix("cos") {
        FourierMode::Cos(freq(l)?)
    } else if let Some(k) = mode.strip_prefix("sin") {
        FourierMode::Sin(freq(k)?)
    } else {
        return Err(format!("unknown mode `{mode}` (expected const, cos<l> or sin<k>)"));
    };
    Ok((mode, mu))
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Option<Vec<T>> {
    s.split(',').map(|x| x.trim().parse().ok()).collect()
}

fn check_value(key: &str, value: &str, kind: Kind, model: Option<&ManifoldModel>) -> Result<(), String> {
    match kind {
        Kind::Experiment => {
            if !EXPERIMENTS.contains(&value) {
                return Err(format!("unknown experiment `{value}` (expected one of {})", EXPERIMENTS.join(", ")));
            }
        }
        Kind::Seed => {
            value.parse::<u64>().map_err(|_| "seed must be a non-negative 64-bit integer".to_string())?;
        }
        Kind::Count { min } => {
            let v: usize = value.parse().map_err(|_| format!("{key} must be a non-negative integer"))?;
            if v < min {
                return Err(format!("{key} ≥ {min}"));
            }
        }
        Kind::Real => {
            let v: f64 = value.parse().map_err(|_| format!("{key} must be a number"))?;
            if !v.is_finite() {
                return Err(format!("{key} must be finite"));
            }
        }
        Kind::Positive => {
            let v: f64 = value.parse().map_err(|_| format!("{key} must be a number"))?;
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("{key} must be a positive number"));
            }
        }
        Kind::Text => {}
        Kind::Model => {
            parse_model(value).map_err(|e| e.to_string())?;
        }
        Kind::Connection => {
            if let Some(m) = model {
                parse_connection(value, m).map_err(|e| e.to_string())?;
            }
        }
        Kind::Function => {
            if let Some(m) = model {
                TestFunction::parse(value, m).map_err(|e| e.to_string())?;
            }
        }
        Kind::CountList => {
            let v: Vec<usize> = parse_list(value).ok_or_else(|| format!("{key} must be a comma-separated list of integers"))?;
            if v.is_empty() || v.iter().any(|&x| x < 1) {
                return Err(format!("{key} entries must be ≥ 1"));
            }
            if v.windows(2).any(|w| w[1] <= w[0]) {
                return Err(format!("{key} must be strictly increasing"));
            }
        }
        Kind::RealList => {
            let v: Vec<f64> = parse_list(value).ok_or_else(|| format!("{key} must be a comma-separated list of numbers"))?;
            if v.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
                return Err(format!("{key} entries must lie in (0, 1]"));
            }
        }
        Kind::Direction => {
            let n = model.map(ManifoldModel::dim).unwrap_or(usize::MAX);
            parse_direction(value, n)?;
        }
        Kind::Choice(options) => {
            if !options.contains(&value) {
                return Err(format!("expected one of {}", options.join(", ")));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_seed() {
        let e = ExperimentConfig::parse("experiment = simulate\n").unwrap_err();
        assert_eq!(e, vec![err("seed", "seed required")]);
    }

    #[test]
    fn steps_lower_bound() {
        let e = ExperimentConfig::parse("experiment = simulate\nseed = 1\nsteps = 0\n").unwrap_err();
        assert_eq!(e[0].key, "steps");
        assert_eq!(e[0].reason, "steps ≥ 2");
    }

    #[test]
    fn normalized_echo_sorts_keys() {
        let a = ExperimentConfig::parse("seed = 3\n# note\nexperiment = theta\n  case = sign \n").unwrap();
        let b = ExperimentConfig::parse("case=sign\nexperiment=theta\nseed=3").unwrap();
        assert_eq!(a.normalized(), b.normalized());
        assert_eq!(ExperimentConfig::parse(&a.normalized()).unwrap(), a);
    }

    #[test]
    fn every_error_is_reported() {
        let e = ExperimentConfig::parse("experiment = nope\nseed = x\nbogus = 1\nconnection = torsion\n").unwrap_err();
        let keys: Vec<&str> = e.iter().map(|x| x.key.as_str()).collect();
        assert_eq!(keys, ["bogus", "connection", "experiment", "seed"]);
    }

    #[test]
    fn directions() {
        assert_eq!(parse_direction("cos1@u0", 2), Ok((FourierMode::Cos(1), 0)));
        assert_eq!(parse_direction("const@u2", 3), Ok((FourierMode::Constant, 2)));
        assert!(parse_direction("cos0@u0", 2).is_err());
        assert!(parse_direction("sin1@u2", 2).is_err());
        assert!(parse_direction("tan1@u0", 2).is_err());
    }

    #[test]
    fn connection_is_checked_against_the_model() {
        assert!(ExperimentConfig::parse("experiment = simulate\nseed = 1\nmodel = s3\nconnection = structure:lambda=1\n").is_ok());
        let e = ExperimentConfig::parse("experiment = simulate\nseed = 1\nmodel = s2\nconnection = structure:lambda=1\n").unwrap_err();
        assert_eq!(e[0].key, "connection");
    }
}
