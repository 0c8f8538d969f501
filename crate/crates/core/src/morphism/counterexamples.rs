use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::*;
use crate::path_space::ensemble_map;
use crate::sde::{BrownianDraw, TimeGrid};

use super::stats::{correlation, ks_two_sample, KsResult};
use super::theta::{theta_apply, wiener_integral};
use super::unitary::{rotation, UnitaryRule};

/// Rotating the input path by a fixed `R` leaves `θ_U(W(h))` unchanged
/// for `U = R(arg B)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    pub angle: f64,
    pub paths: usize,
    /// `max |F(Rω) − F(ω)|` over the ensemble.
    pub pathwise_defect: f64,
    /// `F` on `{arg B₁ ∈ S}` against `F` on `{arg B₁ ∈ RS}`.
    pub functional: KsResult,
    /// The same split applied to `B¹(1)`.
    pub raw: KsResult,
}

fn invariance_h(t: f64) -> Vector {
    let mut v = ZERO_VEC;
    v[0] = (PI * t).cos();
    v[1] = (PI * t).sin();
    v
}

/// `(θ(f)(ω), θ(f)(Rω), B¹(1), arg B(1))` for one path.
type Sample = (f64, f64, f64, f64);

/// `S = [−a/2, a/2)` and `RS = [a/2, 3a/2)` in the angle of `B(1)`; for
/// `a = 0` both sectors are `[−π/4, π/4)` and the two samples coincide.
pub fn rotation_invariance(angle: f64, steps: usize, paths: usize, seed: u64) -> Result<InvarianceReport> {
    if !(0.0..=PI).contains(&angle) {
        return Err(Error::Contract(format!("rotation angle {angle} must lie in [0, π]")));
    }
    let grid = TimeGrid::new(steps)?;
    let r = rotation(angle);
    let rule = UnitaryRule::PathAngle;
    let rows = ensemble_map(paths, |p| {
        let draw = BrownianDraw::sample(grid, 2, seed, p)?;
        let mut rotated = draw.clone();
        for i in 0..steps {
            let d = draw.increment(i);
            let rd = mat_vec(2, &r, &vector_from(d));
            rotated.increments[2 * i] = rd[0];
            rotated.increments[2 * i + 1] = rd[1];
        }
        // U is undefined at B = 0, so the first step is left out.
        let f = wiener_integral(&invariance_h, &theta_apply(&rule, &draw)?.output, 1);
        let fr = wiener_integral(&invariance_h, &theta_apply(&rule, &rotated)?.output, 1);
        let b1 = draw.value_at(steps);
        Ok((f, fr, b1[0], b1[1].atan2(b1[0])))
    })?;
    let half = if angle == 0.0 { PI / 4.0 } else { 0.5 * angle };
    let wrap = |x: f64| (x + PI).rem_euclid(2.0 * PI) - PI;
    let in_s = |phi: f64| (-half..half).contains(&wrap(phi));
    let in_rs = |phi: f64| (-half..half).contains(&wrap(phi - angle));
    let pick = |sector: &dyn Fn(f64) -> bool, which: &dyn Fn(&Sample) -> f64| -> Vec<f64> {
        rows.iter().filter(|r| sector(r.3)).map(which).collect()
    };
    let functional = ks_two_sample(&pick(&in_s, &|r| r.0), &pick(&in_rs, &|r| r.0));
    let raw = ks_two_sample(&pick(&in_s, &|r| r.2), &pick(&in_rs, &|r| r.2));
    Ok(InvarianceReport {
        angle,
        paths,
        pathwise_defect: rows.iter().map(|r| (r.0 - r.1).abs()).fold(0.0, f64::max),
        functional,
        raw,
    })
}

/// `X_t = ∫ (1{B>0} − 1{B<0}) dB`, which only sees `|B|`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignReport {
    pub paths: usize,
    /// `max |X₁(−ω) − X₁(ω)|`.
    pub flip_defect: f64,
    /// `corr(sign B₁, X₁)`.
    pub corr_sign: f64,
    /// `corr(B₁², X₁²)`.
    pub corr_squares: f64,
    /// Four standard errors of a null correlation, `4/√paths`.
    pub corr_bound: f64,
}

pub fn sign_integral(draw: &BrownianDraw) -> f64 {
    let mut b = 0.0;
    let mut x = 0.0;
    for i in 0..draw.grid.steps() {
        let s = if b > 0.0 {
            1.0
        } else if b < 0.0 {
            -1.0
        } else {
            0.0
        };
        let d = draw.increment(i)[0];
        x += s * d;
        b += d;
    }
    x
}

pub fn sign_counterexample(steps: usize, paths: usize, seed: u64) -> Result<SignReport> {
    let grid = TimeGrid::new(steps)?;
    let rows = ensemble_map(paths, |p| {
        let draw = BrownianDraw::sample(grid, 1, seed, p)?;
        let mut flipped = draw.clone();
        flipped.increments.iter_mut().for_each(|x| *x = -*x);
        let b1 = draw.value_at(steps)[0];
        Ok((sign_integral(&draw), sign_integral(&flipped), b1))
    })?;
    let x: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let sgn: Vec<f64> = rows.iter().map(|r| r.2.signum()).collect();
    let x2: Vec<f64> = x.iter().map(|v| v * v).collect();
    let b2: Vec<f64> = rows.iter().map(|r| r.2 * r.2).collect();
    Ok(SignReport {
        paths,
        flip_defect: rows.iter().map(|r| (r.0 - r.1).abs()).fold(0.0, f64::max),
        corr_sign: correlation(&sgn, &x),
        corr_squares: correlation(&b2, &x2),
        corr_bound: 4.0 / (paths as f64).sqrt(),
    })
}
