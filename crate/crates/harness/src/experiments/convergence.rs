use pathlab_core::geometry::default_frame;
use pathlab_core::path_space::{ensemble_map, frame_defect, isometry_defect, median, simulate_with_draw};
use pathlab_core::sde::{check_nested, estimate_strong_order, halving_rate, BrownianDraw, LinearSystem, TimeGrid, LADDER};

use super::{connection, frame_fourth_moments, model, transport_matches_frame};
use crate::manifest::{num, Check, Table};
use crate::Ctx;

const STRONG_LADDER: [usize; 5] = [64, 128, 256, 512, 1024];
const STRONG_PATHS: usize = 400;
/// Grid at which the absolute defect thresholds apply.
const CHECK_STEPS: usize = 4096;

struct Level {
    isometry: f64,
    frame: f64,
    z4: Vec<f64>,
}

pub fn run(ctx: &mut Ctx) -> anyhow::Result<()> {
    let cfg = ctx.cfg;
    let m = model(cfg)?;
    let conn = connection(cfg, &m, "connection", "lc")?;
    let ladder = cfg.counts("ladder", &LADDER);
    check_nested(&ladder)?;
    let paths = cfg.count("paths", 2000);
    let seed = cfg.seed();
    let finest = TimeGrid::new(*ladder.last().expect("nested ladder is non-empty"))?;
    let start = m.origin();
    let frame0 = default_frame(&m, &start)?;

    let rows: Vec<Vec<Level>> = ctx.timed("isometry-ladder", |_| {
        Ok(ensemble_map(paths, |p| {
            let draw = BrownianDraw::sample(finest, m.dim(), seed, p)?;
            ladder
                .iter()
                .map(|&steps| {
                    let b = simulate_with_draw(&conn, draw.coarsen_to(steps)?, start, frame0)?;
                    Ok(Level {
                        isometry: isometry_defect(&b, &conn)?,
                        frame: frame_defect(&b, &m)?,
                        z4: frame_fourth_moments(&b, 16),
                    })
                })
                .collect()
        })?)
    })?;

    let transport_ok = ctx.timed("transport", |_| {
        let draw = BrownianDraw::sample(finest, m.dim(), seed, 0)?;
        let mut ok = true;
        for &steps in &ladder {
            let b = simulate_with_draw(&conn, draw.coarsen_to(steps)?, start, frame0)?;
            ok &= transport_matches_frame(&b, &conn)?;
        }
        Ok(ok)
    })?;

    let mut table = Table::new(&["steps", "isometry_median", "frame_median", "frame_norm4_sup"]);
    let mut iso_med = Vec::new();
    let mut frame_med = Vec::new();
    let mut z4_sup = Vec::new();
    for (l, &steps) in ladder.iter().enumerate() {
        let iso: Vec<f64> = rows.iter().map(|r| r[l].isometry).collect();
        let fr: Vec<f64> = rows.iter().map(|r| r[l].frame).collect();
        let k = rows[0][l].z4.len();
        let sup = (0..k).map(|j| rows.iter().map(|r| r[l].z4[j]).sum::<f64>() / paths as f64).fold(0.0, f64::max);
        iso_med.push(median(&iso));
        frame_med.push(median(&fr));
        z4_sup.push(sup);
        table.row(&[steps.to_string(), num(iso_med[l]), num(frame_med[l]), num(sup)]);
    }
    ctx.table("ladder.csv", &table);

    let at = ladder.iter().position(|&s| s == CHECK_STEPS).unwrap_or(ladder.len() - 1);
    let rate_min = cfg.tolerance("rate", 0.45);
    let rate = |v: &[f64]| halving_rate(&ladder, v).map_or(f64::NAN, |f| f.slope);
    ctx.check(Check::below(format!("isometry_median_at_{}", ladder[at]), iso_med[at], cfg.tolerance("isometry", 0.05)));
    ctx.check(Check::at_least("isometry_halving_rate", rate(&iso_med), rate_min));
    ctx.check(Check::below(format!("frame_median_at_{}", ladder[at]), frame_med[at], cfg.tolerance("frame", 0.05)));
    ctx.check(Check::at_least("frame_halving_rate", rate(&frame_med), rate_min));
    ctx.check(Check::holds("transport_equals_frame_bitwise", transport_ok));
    let lo = z4_sup.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = z4_sup.iter().cloned().fold(0.0, f64::max);
    ctx.check(Check::below("frame_norm4_relative_spread", (hi - lo) / lo, 0.1));

    // Linear test equations: one noise (order 1 for Heun) and two
    // non-commuting noises (order 1/2).
    let (scalar, noncomm) = ctx.timed("strong-order", |_| {
        let exp_b1 = |d: &BrownianDraw| vec![d.value_at(d.grid.steps())[0].exp()];
        let s = estimate_strong_order(&LinearSystem::scalar_exponential(), &[1.0], &STRONG_LADDER, STRONG_PATHS, seed, Some(&exp_b1))?;
        let n = estimate_strong_order(&LinearSystem::non_commutative(), &[1.0, 1.0], &STRONG_LADDER, STRONG_PATHS, seed, None)?;
        Ok((s, n))
    })?;
    let mut strong = Table::new(&["system", "steps", "mean_error"]);
    for (name, r) in [("scalar", &scalar), ("non_commutative", &noncomm)] {
        for (s, e) in r.steps.iter().zip(&r.errors) {
            strong.row(&[name.to_string(), s.to_string(), num(*e)]);
        }
    }
    ctx.table("strong_order.csv", &strong);
    let slope = |r: &pathlab_core::sde::StrongOrderReport| r.fit.map_or(f64::NAN, |f| f.slope);
    ctx.check(Check::at_least("scalar_strong_order", slope(&scalar), 0.45));
    ctx.check(Check::at_least("non_commutative_strong_order_min", slope(&noncomm), 0.4));
    ctx.check(Check::at_most("non_commutative_strong_order_max", slope(&noncomm), 0.7));
    Ok(())
}
