use crate::error::Result;

use super::integrator::StratonovichSystem;

/// `dX = A X dt + Σ_ρ B_ρ X ∘ dB^ρ` with dense row-major matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub dim: usize,
    pub drift: Vec<f64>,
    pub noise: Vec<Vec<f64>>,
}

impl LinearSystem {
    /// `dX = X ∘ dB`, solved by `X₀ exp(B_t)`.
    pub fn scalar_exponential() -> Self {
        LinearSystem {
            dim: 1,
            drift: vec![0.0],
            noise: vec![vec![1.0]],
        }
    }

    /// Planar rotation `dX = J X ∘ dB`, which preserves `|X|`.
    pub fn rotation() -> Self {
        LinearSystem {
            dim: 2,
            drift: vec![0.0; 4],
            noise: vec![vec![0.0, -1.0, 1.0, 0.0]],
        }
    }

    /// Two non-commuting noise matrices; the Heun scheme drops to strong order ½.
    pub fn non_commutative() -> Self {
        LinearSystem {
            dim: 2,
            drift: vec![0.0; 4],
            noise: vec![vec![0.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 0.0]],
        }
    }

    /// `dX = −X dt` with no noise.
    pub fn decay() -> Self {
        LinearSystem {
            dim: 1,
            drift: vec![-1.0],
            noise: vec![vec![0.0]],
        }
    }

    fn apply(&self, m: &[f64], x: &[f64], out: &mut [f64], stride: usize, offset: usize) {
        for r in 0..self.dim {
            out[r * stride + offset] = (0..self.dim).map(|c| m[r * self.dim + c] * x[c]).sum();
        }
    }
}

impl StratonovichSystem for LinearSystem {
    fn state_dim(&self) -> usize {
        self.dim
    }

    fn noise_dim(&self) -> usize {
        self.noise.len()
    }

    fn drift(&self, _: usize, _: f64, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.apply(&self.drift, x, out, 1, 0);
        Ok(())
    }

    fn diffusion(&self, _: usize, _: f64, x: &[f64], out: &mut [f64]) -> Result<()> {
        let k = self.noise.len();
        for (rho, m) in self.noise.iter().enumerate() {
            self.apply(m, x, out, k, rho);
        }
        Ok(())
    }
}
