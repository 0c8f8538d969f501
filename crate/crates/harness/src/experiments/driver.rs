use pathlab_core::geometry::{check_driver, ConnectionSpec};
use pathlab_core::linalg::{column, Vector};
use pathlab_core::path_space::{frame_defect, median, simulate_default, spt_transport_many};
use pathlab_core::sde::{check_nested, halving_rate, TimeGrid};
use pathlab_core::tangent::{
    basis_vector, build_tangent_process, build_with_tensors, tensor_dv, verify_dv_consistency, CovariantTensor, Extension, FrameTensors,
    NcmBasis, DEFAULT_MODES, DV_EPSILON,
};

use super::{panel, tolerance_from_frame};
use crate::config::parse_direction;
use crate::manifest::{num, Check, Table};
use crate::Ctx;

/// Torsion violation allowed on a Driver connection (rounding only).
const DRIVER_VIOLATION: f64 = 1e-10;
/// Below this the consistency residual is central-difference rounding.
const EXACT_RESIDUAL: f64 = 1e-8;

fn label(conn: &ConnectionSpec) -> String {
    format!("{}/{}", conn.model().id(), conn.id())
}

/// Torsion condition and antisymmetry of `A(v)` over the Fourier basis.
pub fn run_verify(ctx: &mut Ctx) -> anyhow::Result<()> {
    let cfg = ctx.cfg;
    let samples = cfg.count("samples", 200);
    let steps = cfg.count("steps", 2048);
    let paths = cfg.count("paths", 3);
    let modes = cfg.count("modes", DEFAULT_MODES as usize) as u32;
    let seed = cfg.seed();
    let grid = TimeGrid::new(steps)?;
    let control_min = cfg.tolerance("control", 0.05);

    let mut torsion = Table::new(&["model", "connection", "driver", "samples", "max_violation"]);
    let mut defects = Table::new(&["model", "connection", "path_index", "basis", "antisymmetry_defect", "tol"]);
    for conn in panel(cfg)? {
        let name = label(&conn);
        let model = conn.model();
        let report = ctx.timed("torsion-check", |_| Ok(check_driver(&conn, samples, seed)?))?;
        torsion.row(&[
            model.id(),
            conn.id().to_string(),
            conn.is_driver().to_string(),
            samples.to_string(),
            num(report.max_violation),
        ]);
        let basis = NcmBasis::new(grid, model.dim(), modes)?;
        // Per basis element: worst defect and worst defect/tol over paths.
        let mut worst = vec![0.0f64; basis.len()];
        let mut worst_ratio: f64 = 0.0;
        let mut ratios = Vec::new();
        ctx.timed("antisymmetry", |_| {
            for p in 0..paths as u64 {
                let b = simulate_default(&conn, grid, seed, p)?;
                let tol = tolerance_from_frame(frame_defect(&b, model)?);
                let tensors = FrameTensors::new(&b, &conn)?;
                for (k, v) in basis.elements.iter().enumerate() {
                    let d = build_with_tensors(&b, &tensors, &conn, v)?.antisymmetry_defect();
                    worst[k] = worst[k].max(d);
                    worst_ratio = worst_ratio.max(d / tol);
                    ratios.push(d / tol);
                    defects.row(&[
                        model.id(),
                        conn.id().to_string(),
                        p.to_string(),
                        v.tag.clone().unwrap_or_default(),
                        num(d),
                        num(tol),
                    ]);
                }
            }
            Ok(())
        })?;
        if conn.is_driver() {
            ctx.check(Check::at_most(format!("{name}:torsion_violation"), report.max_violation, DRIVER_VIOLATION));
            ctx.check(Check::below(format!("{name}:antisymmetry_over_tol"), worst_ratio, 1.0));
        } else {
            ctx.check(Check::above(format!("{name}:torsion_violation"), report.max_violation, control_min));
            let strongest = worst.iter().cloned().fold(0.0, f64::max);
            ctx.check(Check::above(format!("{name}:antisymmetry_max_over_basis"), strongest, control_min));
            // The defect decays like 1/l over the basis, so the typical
            // element (not the highest frequency) must clear tol(dt).
            ctx.check(Check::above(format!("{name}:antisymmetry_median_over_tol"), median(&ratios), 1.0));
        }
    }
    ctx.table("torsion.csv", &torsion);
    ctx.table("antisymmetry.csv", &defects);
    Ok(())
}

/// `(D_v − v)p` under grid refinement, and the metric closure `D_v g = 0`.
pub fn run_dv_residual(ctx: &mut Ctx) -> anyhow::Result<()> {
    let cfg = ctx.cfg;
    let ladder = cfg.counts("ladder", &[512, 1024, 2048, 4096]);
    check_nested(&ladder)?;
    let paths = cfg.count("paths", 5);
    let seed = cfg.seed();
    let direction = cfg.text("direction", "cos1@u0");
    let ext = match cfg.text("extension", "skew") {
        "full" => Extension::Full,
        _ => Extension::Skew,
    };
    let times = cfg.reals("times", &[0.25, 0.5, 1.0]);
    let modes = cfg.count("modes", 2) as u32;
    let residual_max = cfg.tolerance("residual", 0.05);
    let rate_min = cfg.tolerance("rate", 0.4);
    let control_min = cfg.tolerance("control_residual", 0.02);
    let finest = *ladder.last().expect("nested ladder is non-empty");

    let mut dv = Table::new(&["model", "connection", "steps", "path_index", "residual"]);
    let mut summary = Table::new(&["model", "connection", "steps", "median_residual"]);
    let mut closure = Table::new(&["model", "connection", "path_index", "max_abs_dv_metric", "tol"]);
    for conn in panel(cfg)? {
        let name = label(&conn);
        let model = conn.model();
        let n = model.dim();
        let (mode, mu) = parse_direction(direction, n).map_err(anyhow::Error::msg)?;
        let mut medians = Vec::new();
        let mut all = Vec::new();
        ctx.timed("dv-ladder", |_| {
            for &steps in &ladder {
                let grid = TimeGrid::new(steps)?;
                let v = basis_vector(grid, n, mode, mu)?;
                let mut rs = Vec::new();
                for p in 0..paths as u64 {
                    let b = simulate_default(&conn, grid, seed, p)?;
                    let tp = build_tangent_process(&b, &conn, &v)?;
                    let r = verify_dv_consistency(&b, &conn, &v, &tp, ext, DV_EPSILON)?;
                    dv.row(&[model.id(), conn.id().to_string(), steps.to_string(), p.to_string(), num(r)]);
                    rs.push(r);
                }
                medians.push(median(&rs));
                summary.row(&[model.id(), conn.id().to_string(), steps.to_string(), num(*medians.last().unwrap())]);
                all.extend(rs);
            }
            Ok(())
        })?;
        let last = *medians.last().unwrap();
        if conn.is_driver() {
            if model.is_flat() && conn.is_levi_civita() {
                let worst = all.iter().cloned().fold(0.0, f64::max);
                ctx.check(Check::below(format!("{name}:residual_exact"), worst, EXACT_RESIDUAL));
            } else {
                ctx.check(Check::below(format!("{name}:residual_at_{finest}"), last, residual_max));
                let rate = halving_rate(&ladder, &medians).map_or(f64::NAN, |f| f.slope);
                ctx.check(Check::at_least(format!("{name}:residual_halving_rate"), rate, rate_min));
                ctx.check(Check::holds(format!("{name}:residual_decreasing"), medians.windows(2).all(|w| w[1] < w[0])));
            }
        } else {
            ctx.check(Check::above(format!("{name}:residual_at_{finest}"), last, control_min));
        }

        // Metric closure on the finest grid over a small basis.
        let grid = TimeGrid::new(finest)?;
        let basis = NcmBasis::new(grid, n, modes)?;
        let mut worst_ratio: f64 = 0.0;
        ctx.timed("tensor-closure", |_| {
            for p in 0..paths.min(3) as u64 {
                let b = simulate_default(&conn, grid, seed, p)?;
                let tol = tolerance_from_frame(frame_defect(&b, model)?);
                let x0: Vec<Vector> = (0..n).map(|k| column(n, &b.z[0], k)).collect();
                let xs = spt_transport_many(&b, &conn, &x0)?;
                let tensors = FrameTensors::new(&b, &conn)?;
                let mut worst: f64 = 0.0;
                for v in &basis.elements {
                    let tp = build_with_tensors(&b, &tensors, &conn, v)?;
                    for &t in &times {
                        for a in 0..n {
                            for c in 0..n {
                                let pair = [xs[a].clone(), xs[c].clone()];
                                worst = worst.max(tensor_dv(&b, &conn, v, &tp, &CovariantTensor::Metric, &pair, t)?.abs());
                            }
                        }
                    }
                }
                closure.row(&[model.id(), conn.id().to_string(), p.to_string(), num(worst), num(tol)]);
                worst_ratio = worst_ratio.max(worst / tol);
            }
            Ok(())
        })?;
        if conn.is_driver() {
            ctx.check(Check::below(format!("{name}:metric_closure_over_tol"), worst_ratio, 1.0));
        } else {
            ctx.check(Check::above(format!("{name}:metric_closure_over_tol"), worst_ratio, 1.0));
        }
    }
    ctx.table("dv_residual.csv", &dv);
    ctx.table("dv_summary.csv", &summary);
    ctx.table("metric_closure.csv", &closure);
    Ok(())
}
