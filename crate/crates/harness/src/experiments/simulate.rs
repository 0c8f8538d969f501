use pathlab_core::path_space::{
    ensemble_map, frame_defect, isometry_defect, max_frame_condition, mean_and_se, median, simulate_default, MAX_FRAME_CONDITION,
};
use pathlab_core::sde::TimeGrid;

use super::{connection, frame_fourth_moments, function, model, transport_matches_frame};
use crate::manifest::{num, Check, Table};
use crate::Ctx;

/// Paths whose frame is re-transported for the bitwise comparison.
const TRANSPORT_PATHS: usize = 64;
const CHECKPOINTS: usize = 16;

struct Row {
    isometry: f64,
    frame: f64,
    condition: f64,
    transport: Option<bool>,
    values: Vec<f64>,
    z4: Vec<f64>,
}

pub fn run(ctx: &mut Ctx) -> anyhow::Result<()> {
    let cfg = ctx.cfg;
    let m = model(cfg)?;
    let conn = connection(cfg, &m, "connection", "lc")?;
    let f = function(cfg, &m, "function", "height")?;
    let steps = cfg.count("steps", 4096);
    let paths = cfg.count("paths", 2000);
    let seed = cfg.seed();
    let times = cfg.reals("times", &[0.25, 0.5, 1.0]);
    let grid = TimeGrid::new(steps)?;
    let idx: Vec<usize> = times.iter().map(|t| grid.index_of(*t)).collect::<Result<_, _>>()?;

    let rows = ctx.timed("simulate", |_| {
        Ok(ensemble_map(paths, |p| {
            let b = simulate_default(&conn, grid, seed, p)?;
            let transport = if (p as usize) < TRANSPORT_PATHS {
                Some(transport_matches_frame(&b, &conn).map_err(|e| pathlab_core::Error::Contract(e.to_string()))?)
            } else {
                None
            };
            Ok(Row {
                isometry: isometry_defect(&b, &conn)?,
                frame: frame_defect(&b, &m)?,
                condition: max_frame_condition(&b)?,
                transport,
                values: idx.iter().map(|&i| f.value(&m, &b.point(i))).collect::<Result<_, _>>()?,
                z4: frame_fourth_moments(&b, CHECKPOINTS.min(steps)),
            })
        })?)
    })?;

    let mut cols = vec!["path_index", "isometry_defect", "frame_defect", "frame_condition"];
    let value_cols: Vec<String> = times.iter().map(|t| format!("f_t{t}")).collect();
    cols.extend(value_cols.iter().map(String::as_str));
    let mut table = Table::new(&cols);
    for (p, r) in rows.iter().enumerate() {
        let mut cells = vec![p.to_string(), num(r.isometry), num(r.frame), num(r.condition)];
        cells.extend(r.values.iter().map(|v| num(*v)));
        table.row(&cells);
    }
    ctx.table("paths.csv", &table);

    let iso: Vec<f64> = rows.iter().map(|r| r.isometry).collect();
    let frame: Vec<f64> = rows.iter().map(|r| r.frame).collect();
    let cond = rows.iter().map(|r| r.condition).fold(0.0, f64::max);
    ctx.check(Check::below("isometry_defect_median", median(&iso), cfg.tolerance("isometry", 0.05)));
    ctx.check(Check::below("frame_defect_median", median(&frame), cfg.tolerance("frame", 0.05)));
    ctx.check(Check::below("frame_condition_max", cond, MAX_FRAME_CONDITION));
    let transported: Vec<bool> = rows.iter().filter_map(|r| r.transport).collect();
    ctx.check(Check::holds("transport_equals_frame_bitwise", transported.iter().all(|x| *x)));

    let z4_means: Vec<f64> = (0..rows[0].z4.len()).map(|k| rows.iter().map(|r| r.z4[k]).sum::<f64>() / paths as f64).collect();
    let z4_sup = z4_means.iter().cloned().fold(0.0, f64::max);
    ctx.check(Check::holds("frame_fourth_moment_finite", z4_sup.is_finite()));
    let mut moments = Table::new(&["t", "mean_frame_norm4"]);
    let cp = rows[0].z4.len() - 1;
    for (k, v) in z4_means.iter().enumerate() {
        moments.row(&[num(grid.t(k * steps / cp)), num(*v)]);
    }
    ctx.table("moments.csv", &moments);

    // E f(p_t) = e^{tλ/2} f(p_0) for an eigenfunction with eigenvalue λ.
    let mut heat = Table::new(&["t", "mean", "std_error", "expected", "z"]);
    if let Some(lambda) = f.laplace_eigenvalue(&m) {
        let f0 = f.value(&m, &m.origin())?;
        for (j, t) in times.iter().enumerate() {
            let xs: Vec<f64> = rows.iter().map(|r| r.values[j]).collect();
            let (mean, se) = mean_and_se(&xs);
            let expected = (0.5 * lambda * t).exp() * f0;
            let z = if se > 0.0 { (mean - expected) / se } else if mean == expected { 0.0 } else { f64::INFINITY };
            heat.row(&[num(*t), num(mean), num(se), num(expected), num(z)]);
            ctx.check(Check::below(format!("heat_semigroup_abs_z_t{t}"), z.abs(), 3.0));
        }
    }
    ctx.table("heat.csv", &heat);
    Ok(())
}
