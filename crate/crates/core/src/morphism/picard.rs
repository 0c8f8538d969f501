use crate::error::{Error, Result};
use crate::linalg::*;
use crate::path_space::ensemble_sum;
use crate::sde::{BrownianDraw, TimeGrid};

use super::theta::{h_norm_sq, theta_apply_matrices, wiener_integral};
use super::unitary::UnitaryRule;

/// Settings for the fixed-point search of the inverse morphism.
#[derive(Debug, Clone)]
pub struct PicardConfig {
    pub steps: usize,
    pub paths: usize,
    pub seed: u64,
    pub max_iterations: usize,
    /// Converged once the last iterate distance is below this.
    pub tolerance: f64,
    /// Lipschitz constant asserted by the caller; the contract is `factor ≤ k + 0.05`.
    pub k: f64,
}

impl Default for PicardConfig {
    fn default() -> Self {
        PicardConfig {
            steps: 512,
            paths: 10_000,
            seed: 7,
            max_iterations: 24,
            tolerance: 1e-10,
            k: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositionCheck {
    pub label: String,
    /// `sqrt(mean (θ_V θ_U W(h) − W(h))²)`.
    pub rms: f64,
    /// `|h| / sqrt(paths)`.
    pub mc_sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardReport {
    /// `d_m = sup_i sqrt(mean |V_{m+1}(t_i) − V_m(t_i)|_F²)`.
    pub distances: Vec<f64>,
    /// `d_{m+1} / d_m`, while both are above the rounding floor.
    pub factors: Vec<f64>,
    pub converged: bool,
    /// Three consecutive factors above one.
    pub diverged: bool,
    /// Distances decrease from the second iteration on.
    pub monotone: bool,
    pub k: f64,
    pub composition: Vec<CompositionCheck>,
}

impl PicardReport {
    pub fn max_factor(&self) -> f64 {
        self.factors.iter().cloned().fold(0.0, f64::max)
    }

    pub fn contraction_ok(&self) -> bool {
        !self.diverged && self.max_factor() <= self.k + 0.05
    }
}

/// One step of the map `V ↦ θ_V(U⁻¹)`: `U` evaluated on the path `dω'' = V⁻¹ dω`, transposed.
pub fn picard_step(rule: &UnitaryRule, v: &[Matrix], draw: &BrownianDraw) -> Result<Vec<Matrix>> {
    let n = draw.dims;
    let moved = theta_apply_matrices(v, draw)?;
    Ok(rule.along(&moved.output)?.iter().map(|u| transpose(n, u)).collect())
}

/// Runs `max_iterations` Picard steps on every path from `V = Id`.
pub fn picard_inverse(rule: &UnitaryRule, cfg: &PicardConfig) -> Result<PicardReport> {
    let n = rule.dim();
    let grid = TimeGrid::new(cfg.steps)?;
    let m = grid.steps();
    let iters = cfg.max_iterations;
    if iters == 0 || cfg.paths < 2 {
        return Err(Error::Contract("Picard inversion needs at least one iteration and two paths".into()));
    }
    let panel = composition_panel(n);
    let len = iters * m + panel.len();
    let sums = ensemble_sum(cfg.paths, len, |p| {
        let draw = BrownianDraw::sample(grid, n, cfg.seed, p)?;
        let mut row = vec![0.0; len];
        let mut v = vec![identity(n); m];
        for it in 0..iters {
            let next = picard_step(rule, &v, &draw)?;
            for (i, (a, b)) in next.iter().zip(&v).enumerate() {
                let mut d = 0.0;
                for r in 0..n {
                    for c in 0..n {
                        d += (a[r][c] - b[r][c]).powi(2);
                    }
                }
                row[it * m + i] = d;
            }
            v = next;
        }
        // θ_V ∘ θ_U on W(h): rotate by V⁻¹, then by U⁻¹ evaluated on the rotated path.
        let once = theta_apply_matrices(&v, &draw)?.output;
        let twice = theta_apply_matrices(&rule.along(&once)?, &once)?.output;
        for (k, (_, h)) in panel.iter().enumerate() {
            row[iters * m + k] = (wiener_integral(h, &twice, 0) - wiener_integral(h, &draw, 0)).powi(2);
        }
        Ok(row)
    })?;
    let np = cfg.paths as f64;
    let distances: Vec<f64> = (0..iters)
        .map(|it| sums[it * m..(it + 1) * m].iter().fold(0.0f64, |a, &s| a.max((s / np).sqrt())))
        .collect();
    let floor = 1e-13;
    let mut factors = Vec::new();
    for w in distances.windows(2) {
        if w[0] > floor && w[1] > floor {
            factors.push(w[1] / w[0]);
        }
    }
    let diverged = factors.windows(3).any(|w| w.iter().all(|f| *f > 1.0));
    let converged = !diverged && distances.last().is_some_and(|d| *d < cfg.tolerance);
    let monotone = distances.windows(2).skip(1).all(|w| w[1] < w[0] || w[1] <= floor);
    let composition = panel
        .iter()
        .enumerate()
        .map(|(k, (label, h))| CompositionCheck {
            label: label.clone(),
            rms: (sums[iters * m + k] / np).sqrt(),
            mc_sigma: (h_norm_sq(h, n, grid, 0) / np).sqrt(),
        })
        .collect();
    Ok(PicardReport {
        distances,
        factors,
        converged,
        diverged,
        monotone,
        k: cfg.k,
        composition,
    })
}

type PanelFn = Box<dyn Fn(f64) -> Vector + Sync>;

fn composition_panel(n: usize) -> Vec<(String, PanelFn)> {
    let mut out: Vec<(String, PanelFn)> = Vec::new();
    for a in 0..n {
        out.push((
            format!("e{a}"),
            Box::new(move |_| {
                let mut v = ZERO_VEC;
                v[a] = 1.0;
                v
            }),
        ));
    }
    out.push((
        "cos".into(),
        Box::new(move |t: f64| {
            let mut v = ZERO_VEC;
            v[0] = (std::f64::consts::PI * t).cos();
            if n > 1 {
                v[1] = (std::f64::consts::PI * t).sin();
            }
            v
        }),
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_rule_is_inverted_in_one_step() {
        let rule = UnitaryRule::DeterministicAngle { rate: 2.0 };
        let grid = TimeGrid::new(64).unwrap();
        let draw = BrownianDraw::sample(grid, 2, 1, 0).unwrap();
        let v1 = picard_step(&rule, &vec![identity(2); 64], &draw).unwrap();
        let want = rule.along(&draw).unwrap();
        for (a, u) in v1.iter().zip(&want) {
            assert_eq!(*a, transpose(2, u));
        }
    }

    #[test]
    fn gaussian_angle_contracts() {
        let rule = UnitaryRule::GaussianAngle { hdot: [0.3, 0.4] };
        let cfg = PicardConfig {
            steps: 64,
            paths: 400,
            ..Default::default()
        };
        let r = picard_inverse(&rule, &cfg).unwrap();
        assert!(r.converged, "{:?}", r.distances);
        assert!(r.contraction_ok(), "{:?}", r.factors);
        assert!(r.monotone);
        for c in &r.composition {
            assert!(c.rms < 1e-9, "{c:?}");
        }
    }
}
