use pathlab_core::geometry::{laplacian, laplacian_compare, laplacian_in_frame, sample_points};

use super::{connection, function, model};
use crate::manifest::{num, Check, Table};
use crate::Ctx;

/// Equal Laplacians are expected exactly when both connections satisfy the Driver condition.
pub fn run(ctx: &mut Ctx) -> anyhow::Result<()> {
    let cfg = ctx.cfg;
    let m = model(cfg)?;
    let c1 = connection(cfg, &m, "connection", "lc")?;
    let c2 = connection(cfg, &m, "compare", "structure:lambda=1")?;
    let control = connection(cfg, &m, "control", "vector:strength=1")?;
    let f = function(cfg, &m, "function", "y0*y1")?;
    let samples = cfg.count("samples", 100);
    let points = sample_points(&m, samples, cfg.seed());
    let equal_max = cfg.tolerance("laplacian", 1e-10);
    let generic_min = cfg.tolerance("laplacian_control", 1e-6);

    let mut table = Table::new(&["point", "chart", "laplacian_1", "laplacian_2", "laplacian_control"]);
    ctx.timed("laplacians", |_| {
        for (i, cp) in points.iter().enumerate() {
            table.row(&[
                i.to_string(),
                cp.chart.to_string(),
                num(laplacian(&c1, &f, cp)?),
                num(laplacian(&c2, &f, cp)?),
                num(laplacian(&control, &f, cp)?),
            ]);
        }
        Ok(())
    })?;
    ctx.table("laplacian.csv", &table);

    let pair = laplacian_compare(&c1, &c2, &f, &points)?;
    let name = format!("{}_vs_{}", c1.id(), c2.id());
    if c1.is_driver() && c2.is_driver() {
        ctx.check(Check::below(format!("{name}:max_abs_difference"), pair, equal_max));
    } else {
        ctx.check(Check::above(format!("{name}:max_abs_difference"), pair, generic_min));
    }
    let ctrl = laplacian_compare(&c1, &control, &f, &points)?;
    let cname = format!("{}_vs_{}", c1.id(), control.id());
    if c1.is_driver() && control.is_driver() {
        ctx.check(Check::below(format!("{cname}:max_abs_difference"), ctrl, equal_max));
    } else {
        ctx.check(Check::above(format!("{cname}:max_abs_difference"), ctrl, generic_min));
    }
    ctx.check(Check::equal("self_comparison", laplacian_compare(&c1, &c1, &f, &points)?, 0.0));

    // The frame is an artifact of the computation: reversing the
    // Gram-Schmidt order must not change the value.
    let n = m.dim();
    let reversed: Vec<usize> = (0..n).rev().collect();
    let mut gap: f64 = 0.0;
    for cp in &points {
        for c in [&c1, &c2] {
            gap = gap.max((laplacian(c, &f, cp)? - laplacian_in_frame(c, &f, cp, &reversed)?).abs());
        }
    }
    ctx.check(Check::below("frame_independence", gap, 1e-9));
    Ok(())
}
