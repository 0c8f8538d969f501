use std::f64::consts::TAU;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};

/// Uniform grid on [0, 1] with `steps` intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TimeGrid {
    steps: usize,
}

impl TimeGrid {
    pub fn new(steps: usize) -> Result<Self> {
        if steps < 2 {
            return Err(Error::Contract(format!("time grid needs at least 2 steps, got {steps}")));
        }
        Ok(TimeGrid { steps })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.steps as f64
    }

    pub fn t(&self, i: usize) -> f64 {
        i as f64 / self.steps as f64
    }

    /// Index of `t` on the grid. No rounding to the nearest point beyond
    /// floating-point slack.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let x = t * self.steps as f64;
        let i = x.round();
        if !(0.0..=self.steps as f64).contains(&i) || (x - i).abs() > 1e-9 {
            return Err(Error::OffGrid { t, steps: self.steps });
        }
        Ok(i as usize)
    }
}

/// Turns two raw 64-bit words into one standard normal (Box–Muller, cosine
/// branch only, so every normal consumes exactly two words).
fn normal_from_words(a: u64, b: u64) -> f64 {
    let scale = 1.0 / (1u64 << 53) as f64;
    let u1 = ((a >> 11) + 1) as f64 * scale;
    let u2 = (b >> 11) as f64 * scale;
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

/// Brownian increments on a grid, reproducible from `(seed, path_index)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianDraw {
    pub grid: TimeGrid,
    pub dims: usize,
    /// Row-major `steps × dims`.
    pub increments: Vec<f64>,
    pub seed: u64,
    pub path_index: u64,
}

impl BrownianDraw {
    /// ChaCha20 keyed by `seed`, stream `path_index`; normal number
    /// `step·dims + component` is read from words `2k, 2k+1` of the stream.
    pub fn sample(grid: TimeGrid, dims: usize, seed: u64, path_index: u64) -> Result<Self> {
        if dims == 0 {
            return Err(Error::Contract("Brownian motion needs at least one dimension".into()));
        }
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(path_index);
        let sd = grid.dt().sqrt();
        let increments = (0..grid.steps() * dims)
            .map(|_| {
                let a = rng.next_u64();
                let b = rng.next_u64();
                sd * normal_from_words(a, b)
            })
            .collect();
        Ok(BrownianDraw {
            grid,
            dims,
            increments,
            seed,
            path_index,
        })
    }

    pub fn from_increments(grid: TimeGrid, dims: usize, increments: Vec<f64>) -> Result<Self> {
        if increments.len() != grid.steps() * dims {
            return Err(Error::Contract(format!(
                "expected {} increments, got {}",
                grid.steps() * dims,
                increments.len()
            )));
        }
        Ok(BrownianDraw {
            grid,
            dims,
            increments,
            seed: 0,
            path_index: 0,
        })
    }

    pub fn increment(&self, step: usize) -> &[f64] {
        &self.increments[step * self.dims..(step + 1) * self.dims]
    }

    /// `B(t_i)`.
    pub fn value_at(&self, i: usize) -> Vec<f64> {
        let mut b = vec![0.0; self.dims];
        for s in 0..i {
            for (c, d) in b.iter_mut().zip(self.increment(s)) {
                *c += d;
            }
        }
        b
    }

    /// The same path on the grid with half as many steps: increments summed pairwise.
    pub fn coarsen(&self) -> Result<Self> {
        let m = self.grid.steps();
        if !m.is_multiple_of(2) {
            return Err(Error::Contract(format!("cannot coarsen an odd grid of {m} steps")));
        }
        let grid = TimeGrid::new(m / 2)?;
        let mut increments = Vec::with_capacity(self.increments.len() / 2);
        for s in 0..m / 2 {
            let (a, b) = (self.increment(2 * s), self.increment(2 * s + 1));
            increments.extend(a.iter().zip(b).map(|(x, y)| x + y));
        }
        Ok(BrownianDraw {
            grid,
            increments,
            ..*self
        })
    }

    /// Coarsens repeatedly down to `steps`, which must divide the grid by a power of two.
    pub fn coarsen_to(&self, steps: usize) -> Result<Self> {
        let mut d = self.clone();
        while d.grid.steps() > steps {
            d = d.coarsen()?;
        }
        if d.grid.steps() != steps {
            return Err(Error::Contract(format!(
                "grid of {} steps is not nested in {} steps",
                steps,
                self.grid.steps()
            )));
        }
        Ok(d)
    }

    /// Copy with every increment from `step` onward set to zero.
    pub fn truncated_after(&self, step: usize) -> Self {
        let mut d = self.clone();
        for x in d.increments.iter_mut().skip(step * self.dims) {
            *x = 0.0;
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_key_gives_identical_bits() {
        let g = TimeGrid::new(64).unwrap();
        let a = BrownianDraw::sample(g, 3, 42, 7).unwrap();
        let b = BrownianDraw::sample(g, 3, 42, 7).unwrap();
        assert_eq!(a.increments, b.increments);
        let c = BrownianDraw::sample(g, 3, 42, 8).unwrap();
        assert_ne!(a.increments, c.increments);
    }

    #[test]
    fn prefix_does_not_depend_on_grid_length() {
        // Component k of step i is a pure function of (seed, path, i·n + k).
        let a = BrownianDraw::sample(TimeGrid::new(8).unwrap(), 2, 1, 0).unwrap();
        let b = BrownianDraw::sample(TimeGrid::new(16).unwrap(), 2, 1, 0).unwrap();
        let scale = (16.0f64 / 8.0).sqrt();
        for (x, y) in a.increments.iter().zip(&b.increments) {
            assert!((x / y - scale).abs() < 1e-12);
        }
    }

    #[test]
    fn coarsening_sums_pairs() {
        let d = BrownianDraw::sample(TimeGrid::new(16).unwrap(), 2, 5, 0).unwrap();
        let c = d.coarsen().unwrap();
        assert_eq!(c.grid.steps(), 8);
        assert_eq!(c.increment(3)[1], d.increment(6)[1] + d.increment(7)[1]);
        assert!(d.coarsen_to(6).is_err());
        assert_eq!(d.coarsen_to(4).unwrap().grid.steps(), 4);
    }

    #[test]
    fn grid_rejects_off_grid_times() {
        let g = TimeGrid::new(4).unwrap();
        assert_eq!(g.index_of(0.75).unwrap(), 3);
        assert!(matches!(g.index_of(0.3), Err(Error::OffGrid { .. })));
        assert!(g.index_of(1.5).is_err());
        assert!(TimeGrid::new(1).is_err());
    }
}
