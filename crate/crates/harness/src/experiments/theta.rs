use std::f64::consts::PI;

use pathlab_core::linalg::{Vector, ZERO_VEC};
use pathlab_core::morphism::{
    gaussian_law_check, picard_inverse, rotation, rotation_invariance, sign_counterexample, PicardConfig, UnitaryRule, ORTHOGONALITY_TOL,
};

use crate::manifest::{num, Check, Table};
use crate::Ctx;

const MOMENT_ORDER: u32 = 6;

fn law_h(t: f64) -> Vector {
    let mut v = ZERO_VEC;
    v[0] = (PI * t).cos();
    v[1] = (PI * t).sin();
    v
}

pub fn run(ctx: &mut Ctx) -> anyhow::Result<()> {
    let case = ctx.cfg.text("case", "all");
    let wants = |c: &str| case == "all" || case == c;
    if wants("law") {
        law(ctx)?;
    }
    if wants("picard") {
        picard(ctx)?;
    }
    if wants("rotation") {
        invariance(ctx)?;
    }
    if wants("sign") {
        sign(ctx)?;
    }
    Ok(())
}

fn hdot(ctx: &Ctx) -> [f64; 2] {
    [ctx.cfg.real("theta.hdot_x", 0.3), ctx.cfg.real("theta.hdot_y", 0.4)]
}

fn law(ctx: &mut Ctx) -> anyhow::Result<()> {
    let cfg = ctx.cfg;
    let steps = cfg.count("steps", 512);
    let paths = cfg.count("paths", 10_000);
    let z_max = cfg.tolerance("moment_z", 4.0);
    let rules = [
        ("identity", UnitaryRule::Identity { n: 2 }),
        ("constant", UnitaryRule::Constant { n: 2, matrix: rotation(PI / 4.0) }),
        ("deterministic_angle", UnitaryRule::DeterministicAngle { rate: 2.0 * PI }),
        ("gaussian_angle", UnitaryRule::GaussianAngle { hdot: hdot(ctx) }),
        ("path_angle", UnitaryRule::PathAngle),
        ("sign", UnitaryRule::Sign),
    ];
    let mut table = Table::new(&["rule", "kind", "order", "sample", "expected", "sigma", "z"]);
    for (name, rule) in &rules {
        let report = ctx.timed("law", |_| Ok(gaussian_law_check(rule, &law_h, steps, paths, cfg.seed(), MOMENT_ORDER)?))?;
        for mc in &report.moments {
            table.row(&[
                name.to_string(),
                rule.kind().to_string(),
                mc.order.to_string(),
                num(mc.sample),
                num(mc.expected),
                num(mc.sigma),
                num(mc.z_score()),
            ]);
        }
        ctx.check(Check::at_most(format!("{name}:quadratic_variation_defect"), report.qv_defect, ORTHOGONALITY_TOL));
        ctx.check(Check::below(format!("{name}:moment_max_abs_z"), report.max_abs_z(), z_max));
    }
    ctx.table("law_moments.csv", &table);
    Ok(())
}

fn picard(ctx: &mut Ctx) -> anyhow::Result<()> {
    let cfg = ctx.cfg;
    let k = cfg.real("theta.k", 0.5);
    let pc = PicardConfig {
        steps: cfg.count("steps", 512),
        paths: cfg.count("paths", 10_000),
        seed: cfg.seed(),
        k,
        ..PicardConfig::default()
    };
    let rule = UnitaryRule::GaussianAngle { hdot: hdot(ctx) };
    let report = ctx.timed("picard", |_| Ok(picard_inverse(&rule, &pc)?))?;
    let mut table = Table::new(&["iteration", "distance", "factor"]);
    for (i, d) in report.distances.iter().enumerate() {
        let factor = if i > 0 && report.distances[i - 1] > 0.0 { num(d / report.distances[i - 1]) } else { String::new() };
        table.row(&[(i + 1).to_string(), num(*d), factor]);
    }
    ctx.table("picard.csv", &table);
    ctx.check(Check::holds("picard_converged", report.converged));
    ctx.check(Check::holds("picard_not_diverged", !report.diverged));
    ctx.check(Check::at_most("picard_max_factor", report.max_factor(), k + 0.05));
    ctx.check(Check::holds("picard_monotone", report.monotone));
    let mut comp = Table::new(&["h", "rms", "mc_sigma"]);
    for c in &report.composition {
        comp.row(&[c.label.clone(), num(c.rms), num(c.mc_sigma)]);
        ctx.check(Check::below(format!("composition_{}_rms_over_sigma", c.label), c.rms / c.mc_sigma, 5.0));
    }
    ctx.table("composition.csv", &comp);

    // For deterministic U the first iterate is already the inverse.
    let det = UnitaryRule::DeterministicAngle { rate: 2.0 * PI };
    let short = PicardConfig {
        paths: 16,
        max_iterations: 3,
        ..pc
    };
    let r = ctx.timed("picard", |_| Ok(picard_inverse(&det, &short)?))?;
    ctx.check(Check::equal("deterministic_second_iterate_distance", r.distances[1], 0.0));
    Ok(())
}

fn invariance(ctx: &mut Ctx) -> anyhow::Result<()> {
    let cfg = ctx.cfg;
    let steps = cfg.count("steps", 512);
    let paths = cfg.count("paths", 10_000);
    let angle = cfg.real("theta.angle", PI / 2.0);
    let report = ctx.timed("rotation", |_| Ok(rotation_invariance(angle, steps, paths, cfg.seed())?))?;
    let identity = ctx.timed("rotation", |_| Ok(rotation_invariance(0.0, steps, paths.min(2000), cfg.seed())?))?;
    let mut table = Table::new(&["angle", "pathwise_defect", "functional_ks", "functional_p", "raw_ks", "raw_p", "n1", "n2"]);
    for r in [&report, &identity] {
        table.row(&[
            num(r.angle),
            num(r.pathwise_defect),
            num(r.functional.statistic),
            num(r.functional.p_value),
            num(r.raw.statistic),
            num(r.raw.p_value),
            r.functional.n1.to_string(),
            r.functional.n2.to_string(),
        ]);
    }
    ctx.table("rotation.csv", &table);
    ctx.check(Check::below("rotation_pathwise_defect", report.pathwise_defect, 1e-9));
    ctx.check(Check::above("rotation_functional_ks_p", report.functional.p_value, 0.01));
    ctx.check(Check::below("rotation_raw_ks_p", report.raw.p_value, 1e-6));
    ctx.check(Check::equal("identity_rotation_defect", identity.pathwise_defect, 0.0));
    ctx.check(Check::equal("identity_rotation_ks", identity.functional.statistic, 0.0));
    Ok(())
}

fn sign(ctx: &mut Ctx) -> anyhow::Result<()> {
    let cfg = ctx.cfg;
    let steps = cfg.count("steps", 512);
    let paths = cfg.count("theta.sign_paths", 100_000);
    let r = ctx.timed("sign", |_| Ok(sign_counterexample(steps, paths, cfg.seed())?))?;
    let mut table = Table::new(&["paths", "flip_defect", "corr_sign", "corr_squares", "corr_bound"]);
    table.row(&[r.paths.to_string(), num(r.flip_defect), num(r.corr_sign), num(r.corr_squares), num(r.corr_bound)]);
    ctx.table("sign.csv", &table);
    ctx.check(Check::equal("sign_flip_defect", r.flip_defect, 0.0));
    ctx.check(Check::below("sign_abs_correlation", r.corr_sign.abs(), cfg.tolerance("sign_corr", 0.013)));
    ctx.check(Check::above("squares_correlation", r.corr_squares, r.corr_bound));
    Ok(())
}
