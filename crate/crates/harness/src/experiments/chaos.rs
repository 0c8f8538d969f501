use pathlab_chaos::suite::monomials;
use pathlab_chaos::{
    approx_derivation, fundamental_q0, not_a_vector_field, q0_gradient_defect, q0_nondegenerate, run_suite, AntisymOperator, Caps,
    ChaosFunction, Coeff, Covector, Derivation, Rational, VectorField,
};

use crate::manifest::{num, Check, Table};
use crate::Ctx;

const SUITE_NAMES: [(&str, &str); 5] = [
    ("ou-commute", "ou-conditional-expectation-commute"),
    ("adjoint", "grad-div-adjointness"),
    ("leibniz", "leibniz-div-a-grad"),
    ("zero-divergence", "zero-divergence-div-a-grad"),
    ("clark-ocone", "clark-ocone-reconstruction"),
];
/// Coordinates carrying the rotation pairs of the approximation study.
const APPROX_N: usize = 16;

type Q = ChaosFunction<Rational>;

fn q(a: i64) -> Rational {
    Rational::from_i64(a)
}

fn monomial(n: usize, caps: Caps, alpha: Vec<u8>) -> anyhow::Result<Q> {
    Ok(Q::from_terms(n, caps, [(alpha, q(1))])?)
}

pub fn run(ctx: &mut Ctx) -> anyhow::Result<()> {
    let cfg = ctx.cfg;
    let which = cfg.text("check", "all");
    let wants = |id: &str| which == "all" || which == id;
    if SUITE_NAMES.iter().any(|(id, _)| wants(id)) {
        suite(ctx, &wants)?;
    }
    if wants("not-a-vector-field") {
        witness(ctx)?;
    }
    if wants("approx-derivation") {
        approximation(ctx)?;
    }
    if wants("q0") {
        fundamental_metric(ctx)?;
    }
    Ok(())
}

fn suite(ctx: &mut Ctx, wants: &dyn Fn(&str) -> bool) -> anyhow::Result<()> {
    let cfg = ctx.cfg;
    let n = cfg.count("chaos.n", 4);
    let order = cfg.count("chaos.order", 5);
    let per_n = cfg.count("chaos.per_n", 10);
    let checks = ctx.timed("suite", |_| Ok(run_suite(n, order, cfg.seed(), per_n)?))?;
    let mut table = Table::new(&["identity", "cases", "exact_failures", "max_float_gap"]);
    for c in &checks {
        let Some((id, _)) = SUITE_NAMES.iter().find(|(_, name)| *name == c.name) else {
            continue;
        };
        if !wants(id) {
            continue;
        }
        table.row(&[c.name.to_string(), c.cases.to_string(), c.exact_failures.to_string(), num(c.max_float_gap)]);
        ctx.check(Check::holds(format!("{}:cases_run", c.name), c.cases > 0));
        ctx.check(Check::equal(format!("{}:exact_failures", c.name), c.exact_failures as f64, 0.0));
        ctx.check(Check::at_most(format!("{}:float_gap", c.name), c.max_float_gap, pathlab_chaos::suite::FLOAT_TOL));
    }
    ctx.table("identities.csv", &table);
    Ok(())
}

fn witness(ctx: &mut Ctx) -> anyhow::Result<()> {
    let ladder = ctx.cfg.counts("ladder", &[2, 4, 8, 16]);
    let rows = ctx.timed("divergence-witness", |_| Ok(not_a_vector_field::<Rational>(&ladder)?))?;
    let mut table = Table::new(&["m", "partial_sum"]);
    for w in &rows {
        table.row(&[w.m.to_string(), w.partial_sum.to_string()]);
        ctx.check(Check::holds(format!("partial_sum_equals_m_{}", w.m), w.partial_sum == q(w.m as i64)));
    }
    ctx.table("divergence_witness.csv", &table);
    Ok(())
}

fn approximation(ctx: &mut Ctx) -> anyhow::Result<()> {
    let caps = Caps::wide();
    let n = APPROX_N;
    let ladder = [1, 2, 4, 8, 16];
    let mono = |pairs: &[(usize, u8)]| -> anyhow::Result<Q> {
        let mut alpha = vec![0u8; n];
        for &(i, k) in pairs {
            alpha[i] = k;
        }
        monomial(n, caps, alpha)
    };
    // Cylindrical functions: each depends on finitely many coordinates.
    let panel: Vec<(String, Q)> = vec![
        ("He1(W1)".into(), mono(&[(0, 1)])?),
        ("He1(W2)".into(), mono(&[(1, 1)])?),
        ("He1(W1)He1(W2)".into(), mono(&[(0, 1), (1, 1)])?),
        ("He2(W1)".into(), mono(&[(0, 2)])?),
        ("He3(W2)He1(W3)".into(), mono(&[(1, 3), (2, 1)])?),
        ("He2(W5)He1(W8)".into(), mono(&[(4, 2), (7, 1)])?),
        ("He1(W11)He1(W16)".into(), mono(&[(10, 1), (15, 1)])?),
    ];
    let fs: Vec<Q> = panel.iter().map(|(_, f)| f.clone()).collect();
    let rotation = Derivation::DivAGrad(AntisymOperator::<Rational>::rotation_pairs(n, n / 2)?);
    let h: Vec<Rational> = (0..n).map(|i| if i < 3 { q(i as i64 + 1) } else { q(0) }).collect();
    let constant = Derivation::Field(VectorField::constant(caps, &h)?);
    let mut table = Table::new(&["derivation", "function", "truncation", "error"]);
    for (label, d) in [("div_a_grad_rotation", &rotation), ("constant_field", &constant)] {
        let steps = ctx.timed("approx-derivation", |_| Ok(approx_derivation(d, &ladder, &fs)?))?;
        for (k, (name, _)) in panel.iter().enumerate() {
            let errors: Vec<&Rational> = steps.iter().map(|s| &s.errors[k]).collect();
            for (s, e) in steps.iter().zip(&errors) {
                table.row(&[label.to_string(), name.clone(), s.truncation.to_string(), e.to_string()]);
            }
            let exact_at_full = **errors.last().unwrap() == q(0);
            let non_increasing = errors.windows(2).all(|w| w[1] <= w[0]);
            ctx.check(Check::holds(format!("{label}:{name}:exact_at_N{n}"), exact_at_full));
            ctx.check(Check::holds(format!("{label}:{name}:error_non_increasing"), non_increasing));
        }
    }
    ctx.table("approx_derivation.csv", &table);
    Ok(())
}

fn fundamental_metric(ctx: &mut Ctx) -> anyhow::Result<()> {
    let caps = Caps::default();
    let n = 3;
    let panel: Vec<Q> = monomials(n, 3).into_iter().map(|a| monomial(n, caps, a)).collect::<anyhow::Result<_>>()?;
    let (cases, failures) = ctx.timed("q0-panel", |_| {
        let mut failures = 0usize;
        let mut cases = 0usize;
        for f in &panel {
            for g in &panel {
                cases += 1;
                if q0_gradient_defect(f, g)? != q(0) {
                    failures += 1;
                }
            }
        }
        Ok((cases, failures))
    })?;
    ctx.check(Check::holds("q0_panel_cases_run", cases > 0));
    ctx.check(Check::equal("q0_equals_gradient_pairing_failures", failures as f64, 0.0));

    // df for every panel element, plus a combination that vanishes identically.
    let w = |i| -> anyhow::Result<Q> { Ok(Q::coordinate(n, caps, i)?) };
    let one = Q::constant(n, caps, q(1))?;
    let vanishing = Covector {
        terms: vec![
            (one, w(0)?.product(&w(1)?)?),
            (w(1)?.scale(&q(-1)), w(0)?),
            (w(0)?.scale(&q(-1)), w(1)?),
        ],
    };
    let mut ok = q0_nondegenerate(&vanishing)? && fundamental_q0(&vanishing, &vanishing)?.is_zero();
    let mut table = Table::new(&["covector", "mean_q0"]);
    table.row(&["vanishing".into(), "0".into()]);
    for f in panel.iter().filter(|f| f.grade() > 0) {
        let alpha = Covector::exact(f)?;
        ok &= q0_nondegenerate(&alpha)?;
        let label = f.terms().map(|(a, _)| format!("{a:?}")).collect::<Vec<_>>().join("+");
        table.row(&[format!("d{label}").replace(',', " "), fundamental_q0(&alpha, &alpha)?.mean().to_string()]);
    }
    ctx.table("q0_nondegeneracy.csv", &table);
    ctx.check(Check::holds("q0_nondegenerate_on_panel", ok));
    Ok(())
}
