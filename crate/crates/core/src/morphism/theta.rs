use crate::error::{Error, Result};
use crate::linalg::*;
use crate::sde::BrownianDraw;

use super::unitary::{orthogonality_defect, UnitaryRule, ORTHOGONALITY_TOL};

/// The rotated path `dB' = U⁻¹ dB` together with the `U` that produced it.
#[derive(Debug, Clone)]
pub struct MorphismRun {
    pub input: BrownianDraw,
    pub output: BrownianDraw,
    /// `max_i | |dB'_i|² − |dB_i|² |`.
    pub qv_defect: f64,
}

/// Applies a sampled adapted orthogonal process `U(t_i)` to a draw.
pub fn theta_apply_matrices(us: &[Matrix], draw: &BrownianDraw) -> Result<MorphismRun> {
    let n = draw.dims;
    let m = draw.grid.steps();
    if us.len() != m {
        return Err(Error::Contract(format!("{} matrices for a {m}-step grid", us.len())));
    }
    let mut out = Vec::with_capacity(m * n);
    let mut qv_defect: f64 = 0.0;
    for (i, u) in us.iter().enumerate() {
        let defect = orthogonality_defect(n, u);
        if defect > ORTHOGONALITY_TOL {
            return Err(Error::NotOrthogonal { step: i, defect });
        }
        let db = draw.increment(i);
        let mut before = 0.0;
        let mut after = 0.0;
        for a in 0..n {
            // U⁻¹ = ᵗU.
            let v: f64 = (0..n).map(|b| u[b][a] * db[b]).sum();
            out.push(v);
            after += v * v;
            before += db[a] * db[a];
        }
        qv_defect = qv_defect.max((after - before).abs());
    }
    let mut output = BrownianDraw::from_increments(draw.grid, n, out)?;
    output.seed = draw.seed;
    output.path_index = draw.path_index;
    Ok(MorphismRun {
        input: draw.clone(),
        output,
        qv_defect,
    })
}

pub fn theta_apply(rule: &UnitaryRule, draw: &BrownianDraw) -> Result<MorphismRun> {
    theta_apply_matrices(&rule.along(draw)?, draw)
}

/// `W(h) = Σ_i ḣ(t_i)·ΔB_i`, starting at step `from`.
pub fn wiener_integral<H: Fn(f64) -> Vector>(hdot: &H, draw: &BrownianDraw, from: usize) -> f64 {
    let n = draw.dims;
    (from..draw.grid.steps())
        .map(|i| {
            let h = hdot(draw.grid.t(i));
            draw.increment(i).iter().zip(&h[..n]).map(|(d, x)| d * x).sum::<f64>()
        })
        .sum()
}

/// `Σ_i |ḣ(t_i)|² dt`, the exact variance of [`wiener_integral`].
pub fn h_norm_sq<H: Fn(f64) -> Vector>(hdot: &H, n: usize, grid: crate::sde::TimeGrid, from: usize) -> f64 {
    (from..grid.steps()).map(|i| sum_sq(&hdot(grid.t(i))[..n])).sum::<f64>() * grid.dt()
}

/// Moments of `θ_U(W(h)) / |h|` over an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct LawReport {
    pub paths: usize,
    pub moments: Vec<super::MomentCheck>,
    pub qv_defect: f64,
}

impl LawReport {
    pub fn max_abs_z(&self) -> f64 {
        self.moments.iter().map(|m| m.z_score().abs()).fold(0.0, f64::max)
    }
}

pub fn gaussian_law_check<H>(rule: &UnitaryRule, hdot: &H, steps: usize, paths: usize, seed: u64, max_order: u32) -> Result<LawReport>
where
    H: Fn(f64) -> Vector + Sync,
{
    let grid = crate::sde::TimeGrid::new(steps)?;
    let n = rule.dim();
    let norm = h_norm_sq(hdot, n, grid, 0).sqrt();
    if norm == 0.0 {
        return Err(Error::Contract("h has zero norm".into()));
    }
    let rows = crate::path_space::ensemble_map(paths, |p| {
        let draw = BrownianDraw::sample(grid, n, seed, p)?;
        let run = theta_apply(rule, &draw)?;
        Ok((wiener_integral(hdot, &run.output, 0) / norm, run.qv_defect))
    })?;
    let z: Vec<f64> = rows.iter().map(|r| r.0).collect();
    Ok(LawReport {
        paths,
        moments: super::gaussian_moments(&z, max_order),
        qv_defect: rows.iter().map(|r| r.1).fold(0.0, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sde::TimeGrid;

    #[test]
    fn identity_rule_returns_the_input() {
        let draw = BrownianDraw::sample(TimeGrid::new(32).unwrap(), 2, 5, 1).unwrap();
        let run = theta_apply(&UnitaryRule::Identity { n: 2 }, &draw).unwrap();
        assert_eq!(run.output.increments, draw.increments);
        assert_eq!(run.qv_defect, 0.0);
    }

    #[test]
    fn output_is_adapted() {
        let draw = BrownianDraw::sample(TimeGrid::new(64).unwrap(), 2, 5, 1).unwrap();
        let cut = draw.truncated_after(20);
        for rule in [UnitaryRule::PathAngle, UnitaryRule::GaussianAngle { hdot: [0.3, 0.4] }] {
            let a = theta_apply(&rule, &draw).unwrap();
            let b = theta_apply(&rule, &cut).unwrap();
            assert_eq!(a.output.increments[..40], b.output.increments[..40]);
        }
    }

    #[test]
    fn quadratic_variation_is_preserved_per_step() {
        let draw = BrownianDraw::sample(TimeGrid::new(256).unwrap(), 2, 9, 0).unwrap();
        let run = theta_apply(&UnitaryRule::PathAngle, &draw).unwrap();
        assert!(run.qv_defect < 1e-15);
    }

    #[test]
    fn wrong_dimension_is_a_contract_error() {
        let draw = BrownianDraw::sample(TimeGrid::new(8).unwrap(), 2, 9, 0).unwrap();
        assert!(matches!(theta_apply(&UnitaryRule::Sign, &draw), Err(Error::Contract(_))));
    }
}
