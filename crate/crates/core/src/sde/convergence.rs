use rayon::prelude::*;

use crate::error::{Error, Result};

use super::brownian::{BrownianDraw, TimeGrid};
use super::integrator::{integrate_stratonovich, NoCharts, StratonovichSystem};

/// Least-squares line through `(ln dt, ln err)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderFit {
    pub slope: f64,
    pub std_error: f64,
    pub intercept: f64,
}

/// `None` if fewer than two points or any error is not strictly positive.
pub fn fit_loglog(dts: &[f64], errors: &[f64]) -> Option<OrderFit> {
    if dts.len() != errors.len() || dts.len() < 2 || errors.iter().any(|e| *e <= 0.0 || !e.is_finite()) {
        return None;
    }
    let xs: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let std_error = if xs.len() > 2 {
        let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Some(OrderFit {
        slope,
        std_error,
        intercept,
    })
}

/// Fit of `values[i]` against `dt = 1/steps[i]`.
pub fn halving_rate(steps: &[usize], values: &[f64]) -> Option<OrderFit> {
    let dts: Vec<f64> = steps.iter().map(|m| 1.0 / *m as f64).collect();
    fit_loglog(&dts, values)
}

/// At least three grids, increasing, each refining the previous by a power of two.
pub fn check_nested(steps: &[usize]) -> Result<()> {
    if steps.len() < 3 {
        return Err(Error::Contract(format!("a convergence ladder needs at least 3 grids, got {}", steps.len())));
    }
    for w in steps.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a < 2 || b <= a || b % a != 0 || !(b / a).is_power_of_two() {
            return Err(Error::Contract(format!("grids {a} and {b} are not nested by a power of two")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrongOrderReport {
    pub steps: Vec<usize>,
    /// `E‖X_M(1) − X(1)‖` per grid.
    pub errors: Vec<f64>,
    /// `None` when some error is exactly zero.
    pub fit: Option<OrderFit>,
}

/// Exact terminal value as a function of the finest draw.
pub type ExactSolution = dyn Fn(&BrownianDraw) -> Vec<f64> + Sync;

/// Strong error at t = 1 on nested grids sharing one increment stream per
/// path. Without an exact solution the reference is the Heun solution on a
/// grid twice as fine as the finest one.
pub fn estimate_strong_order<S>(
    system: &S,
    x0: &[f64],
    steps: &[usize],
    paths: usize,
    seed: u64,
    exact: Option<&ExactSolution>,
) -> Result<StrongOrderReport>
where
    S: StratonovichSystem + Sync,
{
    check_nested(steps)?;
    if paths == 0 {
        return Err(Error::Contract("need at least one path".into()));
    }
    let finest = *steps.last().expect("checked non-empty") * if exact.is_some() { 1 } else { 2 };
    let grid = TimeGrid::new(finest)?;
    let per_path: Vec<Vec<f64>> = (0..paths as u64)
        .into_par_iter()
        .map(|p| -> Result<Vec<f64>> {
            let draw = BrownianDraw::sample(grid, system.noise_dim(), seed, p)?;
            let reference = match exact {
                Some(f) => f(&draw),
                None => integrate_stratonovich(system, x0, 0, grid, &draw.increments, &mut NoCharts)?.last().to_vec(),
            };
            steps
                .iter()
                .map(|&m| {
                    let coarse = draw.coarsen_to(m)?;
                    let path = integrate_stratonovich(system, x0, 0, coarse.grid, &coarse.increments, &mut NoCharts)?;
                    let err: f64 = path.last().iter().zip(&reference).map(|(a, b)| (a - b) * (a - b)).sum();
                    Ok(err.sqrt())
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut errors = vec![0.0; steps.len()];
    for row in &per_path {
        for (acc, e) in errors.iter_mut().zip(row) {
            *acc += e;
        }
    }
    for e in errors.iter_mut() {
        *e /= paths as f64;
    }
    let fit = halving_rate(steps, &errors);
    Ok(StrongOrderReport {
        steps: steps.to_vec(),
        errors,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_is_recovered() {
        let dts = [0.1, 0.05, 0.025];
        let errs: Vec<f64> = dts.iter().map(|d: &f64| 3.0 * d.powf(1.5)).collect();
        let fit = fit_loglog(&dts, &errs).unwrap();
        assert!((fit.slope - 1.5).abs() < 1e-12);
        assert!(fit.std_error < 1e-10);
        assert!(fit_loglog(&dts, &[1.0, 0.0, 1.0]).is_none());
    }

    #[test]
    fn nesting_is_enforced() {
        assert!(check_nested(&[8, 16, 64]).is_ok());
        assert!(check_nested(&[8, 16]).is_err());
        assert!(check_nested(&[8, 12, 24]).is_err());
        assert!(check_nested(&[16, 8, 4]).is_err());
    }
}
