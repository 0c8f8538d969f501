use std::f64::consts::{PI, SQRT_2};

use pathlab_core::geometry::TestFunction;
use pathlab_core::linalg::ZERO_VEC;
use pathlab_core::path_space::{ensemble_map, simulate_default};
use pathlab_core::sde::TimeGrid;
use pathlab_core::tangent::{apply_dv_cylinder, ncm_inner, new_grad, pair_with_gradient, q_limit, standard_form_q, NcmBasis, NcmVector};

use super::{connection, function, model};
use crate::manifest::{num, Check, Table};
use crate::Ctx;

/// Per path and time: `q(f,f), q(f,g), q(g,f), q(g,g)` for every truncation.
struct Row {
    q: Vec<Vec<[f64; 4]>>,
    limit_ff: Vec<f64>,
    limit_fg: Vec<f64>,
    /// `‖grad f‖²` through the basis Gram matrix, finest truncation.
    gram_norm: Vec<f64>,
    pairing_gap: Vec<f64>,
    coeff_ratio: f64,
    constant_max: f64,
}

pub fn run(ctx: &mut Ctx) -> anyhow::Result<()> {
    let cfg = ctx.cfg;
    let m = model(cfg)?;
    let conn = connection(cfg, &m, "connection", "lc")?;
    let f = function(cfg, &m, "function", "y0")?;
    let g = function(cfg, &m, "function2", "y1")?;
    let steps = cfg.count("steps", 1024);
    let paths = cfg.count("paths", 200);
    let seed = cfg.seed();
    let ladder = cfg.counts("modes_ladder", &[1, 2, 4, 8, 16]);
    let times = cfg.reals("times", &[0.25, 0.75]);
    let n = m.dim();
    let grid = TimeGrid::new(steps)?;
    let bases: Vec<NcmBasis> = ladder.iter().map(|&l| NcmBasis::new(grid, n, l as u32)).collect::<Result<_, _>>()?;
    let top = bases.last().expect("ladder is non-empty");
    let gram: Vec<Vec<f64>> = ctx.timed("gram", |_| {
        Ok(top
            .elements
            .iter()
            .map(|a| top.elements.iter().map(|b| ncm_inner(a, b)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<_, _>>()?)
    })?;
    // w(t) = t² u₀.
    let w = NcmVector::from_fn(grid, n, Some("t^2@u0".into()), |t| {
        let (mut a, mut b) = (ZERO_VEC, ZERO_VEC);
        a[0] = t * t;
        b[0] = 2.0 * t;
        (a, b)
    })?;
    let constant = TestFunction::Constant(1.0);

    let rows = ctx.timed("gradients", |_| {
        Ok(ensemble_map(paths, |p| {
            let b = simulate_default(&conn, grid, seed, p)?;
            let mut row = Row {
                q: Vec::new(),
                limit_ff: Vec::new(),
                limit_fg: Vec::new(),
                gram_norm: Vec::new(),
                pairing_gap: Vec::new(),
                coeff_ratio: 0.0,
                constant_max: 0.0,
            };
            for &t in &times {
                let mut per_k = Vec::new();
                let mut last_gf = Vec::new();
                for basis in &bases {
                    let gf = new_grad(&b, &m, &f, t, basis)?;
                    let gg = new_grad(&b, &m, &g, t, basis)?;
                    per_k.push([
                        standard_form_q(&gf, &gf)?,
                        standard_form_q(&gf, &gg)?,
                        standard_form_q(&gg, &gf)?,
                        standard_form_q(&gg, &gg)?,
                    ]);
                    last_gf = gf;
                }
                row.q.push(per_k);
                let lff = q_limit(&b, &m, &f, &f, t)?;
                row.limit_ff.push(lff);
                row.limit_fg.push(q_limit(&b, &m, &f, &g, t)?);
                let mut norm = 0.0;
                for (i, ci) in last_gf.iter().enumerate() {
                    for (j, cj) in last_gf.iter().enumerate() {
                        norm += ci * gram[i][j] * cj;
                    }
                }
                row.gram_norm.push(norm);
                let grad_len = (lff / t).sqrt();
                let gap = (pair_with_gradient(&w, top, &last_gf)? - apply_dv_cylinder(&b, &m, &w, &f, t)?).abs();
                row.pairing_gap.push(if grad_len > 0.0 { gap / grad_len } else { gap });
                // l·|c_l| ≤ (√2/π)|∇f| for every Fourier element.
                let bound = SQRT_2 / PI * grad_len;
                for ((mode, _), c) in top.labels.iter().zip(&last_gf) {
                    let l = mode.frequency() as f64;
                    if l > 0.0 && bound > 0.0 {
                        row.coeff_ratio = row.coeff_ratio.max(l * c.abs() / bound);
                    }
                }
                let gc = new_grad(&b, &m, &constant, t, top)?;
                row.constant_max = gc.iter().fold(row.constant_max, |acc, x| acc.max(x.abs()));
            }
            Ok(row)
        })?)
    })?;

    let mut table = Table::new(&["path_index", "t", "modes", "q_ff", "q_fg", "q_gg", "limit_ff", "limit_fg"]);
    for (p, r) in rows.iter().enumerate() {
        for (ti, t) in times.iter().enumerate() {
            for (ki, l) in ladder.iter().enumerate() {
                let q = r.q[ti][ki];
                table.row(&[p.to_string(), num(*t), l.to_string(), num(q[0]), num(q[1]), num(q[3]), num(r.limit_ff[ti]), num(r.limit_fg[ti])]);
            }
        }
    }
    ctx.table("q.csv", &table);

    let all_q = || rows.iter().flat_map(|r| r.q.iter().flatten());
    ctx.check(Check::holds("q_symmetric_bitwise", all_q().all(|q| q[1].to_bits() == q[2].to_bits())));
    let psd_worst = all_q()
        .map(|q| {
            let det = q[0] * q[3] - q[1] * q[1];
            (-q[0]).max(-q[3]).max(-det / (q[0] * q[3]).max(1e-300))
        })
        .fold(f64::NEG_INFINITY, f64::max);
    ctx.check(Check::at_most("q_psd_violation", psd_worst, 1e-12));
    let norm_gap = rows
        .iter()
        .flat_map(|r| r.q.iter().zip(&r.gram_norm).map(|(per_k, gn)| (per_k.last().unwrap()[0] - gn).abs()))
        .fold(0.0, f64::max);
    ctx.check(Check::at_most("q_equals_gradient_norm", norm_gap, 1e-12));

    let mut trunc = Table::new(&["t", "modes", "next_modes", "mean_abs_q_change", "mean_tail_ff", "mean_abs_limit_gap"]);
    for (ti, t) in times.iter().enumerate() {
        let mean = |k: &dyn Fn(&Row) -> f64| rows.iter().map(k).sum::<f64>() / paths as f64;
        let changes: Vec<f64> = (0..ladder.len() - 1).map(|k| mean(&|r: &Row| (r.q[ti][k + 1][0] - r.q[ti][k][0]).abs())).collect();
        let tails: Vec<f64> = (0..ladder.len()).map(|k| mean(&|r: &Row| r.limit_ff[ti] - r.q[ti][k][0])).collect();
        let gaps: Vec<f64> = (0..ladder.len()).map(|k| mean(&|r: &Row| (r.q[ti][k][1] - r.limit_fg[ti]).abs())).collect();
        for k in 0..ladder.len() {
            let next = ladder.get(k + 1).map(|x| x.to_string()).unwrap_or_default();
            let change = changes.get(k).map(|x| num(*x)).unwrap_or_default();
            trunc.row(&[num(*t), ladder[k].to_string(), next, change, num(tails[k]), num(gaps[k])]);
        }
        // Band changes |q_K - q_2K| follow sin²(πlt)/l² and are not monotone at every t;
        // the tail q_∞ - q_K is a sum of squares and must shrink.
        ctx.check(Check::holds(format!("truncation_tail_decreasing_t{t}"), tails.windows(2).all(|w| w[1] < w[0]) && tails[0] > 0.0));
        let scale = mean(&|r: &Row| r.limit_ff[ti]);
        ctx.check(Check::below(format!("q_limit_relative_gap_t{t}"), gaps.last().unwrap() / scale, cfg.tolerance("qlimit", 0.05)));
        let pairing = rows.iter().map(|r| r.pairing_gap[ti]).fold(0.0, f64::max);
        ctx.check(Check::below(format!("gradient_pairing_gap_t{t}"), pairing, cfg.tolerance("pairing", 0.02)));
    }
    ctx.table("truncation.csv", &trunc);
    let ratio = rows.iter().map(|r| r.coeff_ratio).fold(0.0, f64::max);
    ctx.check(Check::at_most("fourier_coefficient_bound_ratio", ratio, 1.0 + 1e-9));
    let constant_max = rows.iter().map(|r| r.constant_max).fold(0.0, f64::max);
    ctx.check(Check::equal("constant_function_gradient", constant_max, 0.0));
    Ok(())
}
