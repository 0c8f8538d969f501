//! String identifiers used by experiment configs.
//!
//! Models: `s2`, `s3`, `t2`, `r1`..`r4` or `flat:n=<n>`.
//! Connections: `lc`, `structure:lambda=<x>`, `volume:kappa=<x>`,
//! `vector:strength=<x>`.

use crate::error::{Error, Result};

use super::connection::ConnectionSpec;
use super::model::ManifoldModel;

fn invalid(id: &str, reason: impl Into<String>) -> Error {
    Error::InvalidId {
        id: id.to_string(),
        reason: reason.into(),
    }
}

pub fn parse_model(id: &str) -> Result<ManifoldModel> {
    let s = id.trim();
    match s {
        "s2" => ManifoldModel::sphere(2),
        "s3" => ManifoldModel::sphere(3),
        "t2" => Ok(ManifoldModel::torus()),
        _ => {
            let dim = if let Some(rest) = s.strip_prefix("flat:n=") {
                rest
            } else if let Some(rest) = s.strip_prefix('r') {
                rest
            } else {
                return Err(invalid(id, "unknown model (expected s2, s3, t2, r1..r4 or flat:n=<n>)"));
            };
            let n: usize = dim.parse().map_err(|_| invalid(id, "dimension is not an integer"))?;
            ManifoldModel::flat(n).map_err(|e| invalid(id, e.to_string()))
        }
    }
}

/// Parses `key=value` after a `name:` prefix and returns the number.
fn parameter(id: &str, rest: &str, key: &str) -> Result<f64> {
    let (k, v) = rest.split_once('=').ok_or_else(|| invalid(id, format!("expected {key}=<number>")))?;
    if k.trim() != key {
        return Err(invalid(id, format!("unknown parameter `{}` (expected {key})", k.trim())));
    }
    let x: f64 = v.trim().parse().map_err(|_| invalid(id, format!("{key} is not a number")))?;
    if !x.is_finite() {
        return Err(invalid(id, format!("{key} must be finite")));
    }
    Ok(x)
}

pub fn parse_connection(id: &str, model: &ManifoldModel) -> Result<ConnectionSpec> {
    let s = id.trim();
    if s == "lc" {
        return Ok(ConnectionSpec::levi_civita(model));
    }
    let (name, rest) = s.split_once(':').ok_or_else(|| invalid(id, "unknown connection"))?;
    let wrap = |e: Error| invalid(id, e.to_string());
    match name {
        "structure" => ConnectionSpec::structure(model, parameter(id, rest, "lambda")?).map_err(wrap),
        "volume" => ConnectionSpec::volume(model, parameter(id, rest, "kappa")?).map_err(wrap),
        "vector" => Ok(ConnectionSpec::vector(model, parameter(id, rest, "strength")?)),
        _ => Err(invalid(id, "unknown connection (expected lc, structure:, volume: or vector:)")),
    }
}
