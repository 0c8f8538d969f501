use crate::error::{Error, Result};

use super::brownian::TimeGrid;

/// `dX = a(X) dt + b(X) ∘ dB` with the state possibly read in a chart.
pub trait StratonovichSystem {
    fn state_dim(&self) -> usize;
    fn noise_dim(&self) -> usize;
    fn drift(&self, chart: usize, t: f64, x: &[f64], out: &mut [f64]) -> Result<()>;
    /// Row-major `state_dim × noise_dim`.
    fn diffusion(&self, chart: usize, t: f64, x: &[f64], out: &mut [f64]) -> Result<()>;
}

/// Decides after every step whether the state moves to another chart.
pub trait ChartPolicy {
    fn after_step(&mut self, step: usize, chart: &mut usize, x: &mut [f64]) -> Result<()>;
}

/// For systems on a single chart.
pub struct NoCharts;

impl ChartPolicy for NoCharts {
    fn after_step(&mut self, _: usize, _: &mut usize, _: &mut [f64]) -> Result<()> {
        Ok(())
    }
}

/// Trajectory of an integrated system.
#[derive(Debug, Clone, PartialEq)]
pub struct StatePath {
    pub dim: usize,
    /// Chart of the state at every grid point.
    pub charts: Vec<usize>,
    /// Row-major `(steps + 1) × dim`.
    pub states: Vec<f64>,
}

impl StatePath {
    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    pub fn len(&self) -> usize {
        self.charts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.charts.is_empty()
    }

    pub fn last(&self) -> &[f64] {
        self.state(self.len() - 1)
    }
}

/// Heun scheme: Euler predictor, then the trapezoid average of drift and
/// diffusion at both ends. Consistent with the Stratonovich integral.
pub fn integrate_stratonovich<S, P>(
    system: &S,
    x0: &[f64],
    chart0: usize,
    grid: TimeGrid,
    increments: &[f64],
    policy: &mut P,
) -> Result<StatePath>
where
    S: StratonovichSystem + ?Sized,
    P: ChartPolicy + ?Sized,
{
    let d = system.state_dim();
    let m = system.noise_dim();
    let steps = grid.steps();
    if x0.len() != d {
        return Err(Error::Contract(format!("initial state has length {}, system has dimension {d}", x0.len())));
    }
    if increments.len() != steps * m {
        return Err(Error::Contract(format!("expected {} increments, got {}", steps * m, increments.len())));
    }
    let dt = grid.dt();
    let mut states = Vec::with_capacity((steps + 1) * d);
    let mut charts = Vec::with_capacity(steps + 1);
    states.extend_from_slice(x0);
    charts.push(chart0);

    let mut x = x0.to_vec();
    let mut chart = chart0;
    let mut a0 = vec![0.0; d];
    let mut a1 = vec![0.0; d];
    let mut b0 = vec![0.0; d * m];
    let mut b1 = vec![0.0; d * m];
    let mut pred = vec![0.0; d];

    let fail = |step: usize, e: Error| match e {
        Error::Domain { .. } => Error::Integration {
            step,
            reason: e.to_string(),
        },
        other => other,
    };

    for i in 0..steps {
        let t0 = grid.t(i);
        let t1 = grid.t(i + 1);
        let db = &increments[i * m..(i + 1) * m];
        system.drift(chart, t0, &x, &mut a0).map_err(|e| fail(i, e))?;
        system.diffusion(chart, t0, &x, &mut b0).map_err(|e| fail(i, e))?;
        for r in 0..d {
            let noise: f64 = (0..m).map(|c| b0[r * m + c] * db[c]).sum();
            pred[r] = x[r] + a0[r] * dt + noise;
        }
        system.drift(chart, t1, &pred, &mut a1).map_err(|e| fail(i, e))?;
        system.diffusion(chart, t1, &pred, &mut b1).map_err(|e| fail(i, e))?;
        for r in 0..d {
            let noise: f64 = (0..m).map(|c| (b0[r * m + c] + b1[r * m + c]) * db[c]).sum();
            x[r] += 0.5 * (a0[r] + a1[r]) * dt + 0.5 * noise;
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Integration {
                step: i + 1,
                reason: "state is not finite".into(),
            });
        }
        policy.after_step(i + 1, &mut chart, &mut x).map_err(|e| fail(i + 1, e))?;
        states.extend_from_slice(&x);
        charts.push(chart);
    }
    Ok(StatePath { dim: d, charts, states })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sde::BrownianDraw;

    struct Linear {
        a: f64,
        b: f64,
    }

    impl StratonovichSystem for Linear {
        fn state_dim(&self) -> usize {
            1
        }
        fn noise_dim(&self) -> usize {
            1
        }
        fn drift(&self, _: usize, _: f64, x: &[f64], out: &mut [f64]) -> Result<()> {
            out[0] = self.a * x[0];
            Ok(())
        }
        fn diffusion(&self, _: usize, _: f64, x: &[f64], out: &mut [f64]) -> Result<()> {
            out[0] = self.b * x[0];
            Ok(())
        }
    }

    struct Rotation;

    impl StratonovichSystem for Rotation {
        fn state_dim(&self) -> usize {
            2
        }
        fn noise_dim(&self) -> usize {
            1
        }
        fn drift(&self, _: usize, _: f64, _: &[f64], out: &mut [f64]) -> Result<()> {
            out.fill(0.0);
            Ok(())
        }
        fn diffusion(&self, _: usize, _: f64, x: &[f64], out: &mut [f64]) -> Result<()> {
            out[0] = -x[1];
            out[1] = x[0];
            Ok(())
        }
    }

    struct Identity(usize);

    impl StratonovichSystem for Identity {
        fn state_dim(&self) -> usize {
            self.0
        }
        fn noise_dim(&self) -> usize {
            self.0
        }
        fn drift(&self, _: usize, _: f64, _: &[f64], out: &mut [f64]) -> Result<()> {
            out.fill(0.0);
            Ok(())
        }
        fn diffusion(&self, _: usize, _: f64, _: &[f64], out: &mut [f64]) -> Result<()> {
            out.fill(0.0);
            for i in 0..self.0 {
                out[i * self.0 + i] = 1.0;
            }
            Ok(())
        }
    }

    #[test]
    fn identity_diffusion_sums_increments() {
        let grid = TimeGrid::new(32).unwrap();
        let draw = BrownianDraw::sample(grid, 3, 11, 0).unwrap();
        let path = integrate_stratonovich(&Identity(3), &[0.0; 3], 0, grid, &draw.increments, &mut NoCharts).unwrap();
        for i in [0, 5, 32] {
            let want = draw.value_at(i);
            for c in 0..3 {
                // The trapezoid averages 1 and 1, so the sum is reproduced exactly.
                assert_eq!(path.state(i)[c], want[c]);
            }
        }
    }

    #[test]
    fn rotation_nearly_preserves_norm() {
        let grid = TimeGrid::new(1024).unwrap();
        let draw = BrownianDraw::sample(grid, 1, 3, 0).unwrap();
        let path = integrate_stratonovich(&Rotation, &[1.0, 0.0], 0, grid, &draw.increments, &mut NoCharts).unwrap();
        for i in 0..=1024 {
            let x = path.state(i);
            assert!(((x[0] * x[0] + x[1] * x[1]).sqrt() - 1.0).abs() < 10.0 * grid.dt());
        }
    }

    #[test]
    fn scalar_exponential_is_close() {
        let grid = TimeGrid::new(4096).unwrap();
        let draw = BrownianDraw::sample(grid, 1, 8, 0).unwrap();
        let path = integrate_stratonovich(&Linear { a: 0.0, b: 1.0 }, &[1.0], 0, grid, &draw.increments, &mut NoCharts).unwrap();
        let exact = draw.value_at(4096)[0].exp();
        assert!((path.last()[0] - exact).abs() < 0.05 * exact);
    }

    #[test]
    fn non_finite_state_reports_step() {
        let grid = TimeGrid::new(4).unwrap();
        let err = integrate_stratonovich(&Linear { a: 1e308, b: 0.0 }, &[1e10], 0, grid, &[0.0; 4], &mut NoCharts).unwrap_err();
        assert!(matches!(err, Error::Integration { step: 1, .. }));
    }
}
