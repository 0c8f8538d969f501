//! One module per experiment id. Each `run` reads its settings from the
//! context's config, emits tables and records contract checks.

pub mod chaos;
pub mod convergence;
pub mod driver;
pub mod laplacian;
pub mod qform;
pub mod simulate;
pub mod theta;

use pathlab_core::geometry::{parse_connection, parse_model, ConnectionSpec, ManifoldModel, TestFunction};
use pathlab_core::linalg::{column, frobenius, Vector};
use pathlab_core::path_space::{spt_transport_many, PathBundle};

use crate::config::{default_model, ExperimentConfig};

/// Every built-in connection: the Driver ones, then the non-Driver controls.
pub const BUILTIN_PANEL: [(&str, &str); 8] = [
    ("s2", "lc"),
    ("s3", "lc"),
    ("s3", "structure:lambda=1"),
    ("t2", "lc"),
    ("r3", "volume:kappa=1"),
    ("s2", "vector:strength=1"),
    ("s3", "vector:strength=1"),
    ("t2", "vector:strength=1"),
];

pub fn model(cfg: &ExperimentConfig) -> anyhow::Result<ManifoldModel> {
    Ok(parse_model(cfg.text("model", default_model(cfg.experiment())))?)
}

pub fn connection(cfg: &ExperimentConfig, model: &ManifoldModel, key: &str, default: &str) -> anyhow::Result<ConnectionSpec> {
    Ok(parse_connection(cfg.text(key, default), model)?)
}

pub fn function(cfg: &ExperimentConfig, model: &ManifoldModel, key: &str, default: &str) -> anyhow::Result<TestFunction> {
    Ok(TestFunction::parse(cfg.text(key, default), model)?)
}

/// The connection named by the config, or the whole built-in panel.
pub fn panel(cfg: &ExperimentConfig) -> anyhow::Result<Vec<ConnectionSpec>> {
    if cfg.get("connection").is_some() || cfg.get("model").is_some() {
        let m = model(cfg)?;
        return Ok(vec![connection(cfg, &m, "connection", "lc")?]);
    }
    BUILTIN_PANEL
        .iter()
        .map(|(m, c)| Ok(parse_connection(c, &parse_model(m)?)?))
        .collect()
}

/// `tol(dt) = max(10·frame defect, 1e-12)`.
pub fn tolerance_from_frame(frame_defect: f64) -> f64 {
    (10.0 * frame_defect).max(1e-12)
}

/// Whether transporting the frame columns reproduces `Z` bit for bit.
pub fn transport_matches_frame(bundle: &PathBundle, conn: &ConnectionSpec) -> anyhow::Result<bool> {
    let n = bundle.dim();
    let x0: Vec<Vector> = (0..n).map(|mu| column(n, &bundle.frame0, mu)).collect();
    let cols = spt_transport_many(bundle, conn, &x0)?;
    Ok((0..n).all(|mu| {
        cols[mu]
            .iter()
            .zip(&bundle.z)
            .all(|(x, z)| x.iter().zip(&column(n, z, mu)).all(|(a, b)| a.to_bits() == b.to_bits()))
    }))
}

/// `‖Z(t_i)‖_F⁴` at `checkpoints + 1` evenly spaced grid points.
pub fn frame_fourth_moments(bundle: &PathBundle, checkpoints: usize) -> Vec<f64> {
    let n = bundle.dim();
    let m = bundle.grid.steps();
    (0..=checkpoints).map(|k| frobenius(n, &bundle.z[k * m / checkpoints]).powi(4)).collect()
}
