use std::f64::consts::{SQRT_2, TAU};

use crate::error::{Error, Result};
use crate::linalg::*;
use crate::sde::TimeGrid;

/// `v = f^μ(t) u_μ(t, ω)`: coefficient functions on the grid with `f(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct NcmVector {
    pub grid: TimeGrid,
    pub n: usize,
    /// `f(t_i)`.
    pub f: Vec<Vector>,
    /// `ḟ(t_i)`.
    pub fdot: Vec<Vector>,
    pub tag: Option<String>,
}

impl NcmVector {
    /// Samples `t ↦ (f(t), ḟ(t))`; `f(0)` is forced to zero.
    pub fn from_fn<F>(grid: TimeGrid, n: usize, tag: Option<String>, jet: F) -> Result<Self>
    where
        F: Fn(f64) -> (Vector, Vector),
    {
        if n == 0 || n > MAX_DIM {
            return Err(Error::Contract(format!("NCM vector needs 1 <= n <= {MAX_DIM}, got {n}")));
        }
        let mut f = Vec::with_capacity(grid.steps() + 1);
        let mut fdot = Vec::with_capacity(grid.steps() + 1);
        for i in 0..=grid.steps() {
            let (mut a, b) = jet(grid.t(i));
            if i == 0 {
                a = ZERO_VEC;
            }
            if a.iter().chain(b.iter()).any(|x| !x.is_finite()) {
                return Err(Error::Contract(format!("NCM coefficient is not finite at step {i}")));
            }
            f.push(a);
            fdot.push(b);
        }
        Ok(NcmVector { grid, n, f, fdot, tag })
    }

    pub fn zero(grid: TimeGrid, n: usize) -> Self {
        NcmVector {
            grid,
            n,
            f: vec![ZERO_VEC; grid.steps() + 1],
            fdot: vec![ZERO_VEC; grid.steps() + 1],
            tag: None,
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        let map = |v: &Vector| v.map(|x| a * x);
        NcmVector {
            f: self.f.iter().map(map).collect(),
            fdot: self.fdot.iter().map(map).collect(),
            tag: None,
            ..self.clone()
        }
    }

    pub fn add(&self, other: &NcmVector) -> Result<Self> {
        self.same_grid(other)?;
        let add = |a: &Vector, b: &Vector| {
            let mut s = *a;
            for (x, y) in s.iter_mut().zip(b) {
                *x += y;
            }
            s
        };
        Ok(NcmVector {
            f: self.f.iter().zip(&other.f).map(|(a, b)| add(a, b)).collect(),
            fdot: self.fdot.iter().zip(&other.fdot).map(|(a, b)| add(a, b)).collect(),
            tag: None,
            ..self.clone()
        })
    }

    fn same_grid(&self, other: &NcmVector) -> Result<()> {
        if self.grid != other.grid || self.n != other.n {
            return Err(Error::Contract(format!(
                "NCM vectors live on different grids ({} steps, n={} vs {} steps, n={})",
                self.grid.steps(),
                self.n,
                other.grid.steps(),
                other.n
            )));
        }
        Ok(())
    }
}

/// `Σ_μ ∫₀¹ ḟ₁^μ ḟ₂^μ dt` by the trapezoid rule.
pub fn ncm_inner(v: &NcmVector, w: &NcmVector) -> Result<f64> {
    v.same_grid(w)?;
    let m = v.grid.steps();
    let mut s = 0.0;
    for i in 0..=m {
        let weight = if i == 0 || i == m { 0.5 } else { 1.0 };
        s += weight * dot(v.n, &v.fdot[i], &w.fdot[i]);
    }
    Ok(s * v.grid.dt())
}

/// One scalar member of the Fourier family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FourierMode {
    /// `∫1`.
    Constant,
    /// `√2 ∫cos(2πl s) ds`.
    Cos(u32),
    /// `√2 ∫sin(2πk s) ds`.
    Sin(u32),
}

impl FourierMode {
    /// `(f(t), ḟ(t))`.
    pub fn jet(self, t: f64) -> (f64, f64) {
        match self {
            FourierMode::Constant => (t, 1.0),
            FourierMode::Cos(l) => {
                let w = TAU * l as f64;
                (SQRT_2 * (w * t).sin() / w, SQRT_2 * (w * t).cos())
            }
            FourierMode::Sin(k) => {
                let w = TAU * k as f64;
                (SQRT_2 * (1.0 - (w * t).cos()) / w, SQRT_2 * (w * t).sin())
            }
        }
    }

    /// Frequency label (0 for the constant mode).
    pub fn frequency(self) -> u32 {
        match self {
            FourierMode::Constant => 0,
            FourierMode::Cos(l) | FourierMode::Sin(l) => l,
        }
    }

    pub fn label(self) -> String {
        match self {
            FourierMode::Constant => "const".into(),
            FourierMode::Cos(l) => format!("cos{l}"),
            FourierMode::Sin(k) => format!("sin{k}"),
        }
    }
}

/// Fourier mode times a frame column.
pub fn basis_vector(grid: TimeGrid, n: usize, mode: FourierMode, mu: usize) -> Result<NcmVector> {
    if mu >= n {
        return Err(Error::Contract(format!("frame column {mu} out of range for n = {n}")));
    }
    NcmVector::from_fn(grid, n, Some(format!("{}@u{mu}", mode.label())), |t| {
        let (f, fd) = mode.jet(t);
        let mut a = ZERO_VEC;
        let mut b = ZERO_VEC;
        a[mu] = f;
        b[mu] = fd;
        (a, b)
    })
}

/// Default number of cosine (and sine) modes per frame column.
pub const DEFAULT_MODES: u32 = 8;

/// The truncated basis, ordered per column as `const, cos1, sin1, …, cosL, sinL`.
#[derive(Debug, Clone)]
pub struct NcmBasis {
    pub grid: TimeGrid,
    pub n: usize,
    pub modes: u32,
    pub elements: Vec<NcmVector>,
    /// `(mode, column)` of every element.
    pub labels: Vec<(FourierMode, usize)>,
}

impl NcmBasis {
    pub fn new(grid: TimeGrid, n: usize, modes: u32) -> Result<Self> {
        if 4 * modes as usize >= grid.steps() {
            return Err(Error::Contract(format!(
                "{modes} Fourier modes are not resolved by a {}-step grid",
                grid.steps()
            )));
        }
        let mut elements = Vec::new();
        let mut labels = Vec::new();
        for mu in 0..n {
            let mut push = |mode: FourierMode| -> Result<()> {
                elements.push(basis_vector(grid, n, mode, mu)?);
                labels.push((mode, mu));
                Ok(())
            };
            push(FourierMode::Constant)?;
            for l in 1..=modes {
                push(FourierMode::Cos(l))?;
                push(FourierMode::Sin(l))?;
            }
        }
        Ok(NcmBasis {
            grid,
            n,
            modes,
            elements,
            labels,
        })
    }

    /// `K = n(2L + 1)`.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Largest `|⟨v_i, v_j⟩ − δ_ij|` over the basis.
    pub fn orthonormality_defect(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (i, a) in self.elements.iter().enumerate() {
            for (j, b) in self.elements.iter().enumerate().skip(i) {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((ncm_inner(a, b)? - want).abs());
            }
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_mode_has_unit_norm() {
        let g = TimeGrid::new(256).unwrap();
        let v = basis_vector(g, 2, FourierMode::Constant, 0).unwrap();
        assert_eq!(ncm_inner(&v, &v).unwrap(), 1.0);
        assert_eq!(v.f[256][0], 1.0);
    }

    #[test]
    fn cosine_mode_norm_and_orthogonality() {
        let g = TimeGrid::new(512).unwrap();
        let c = basis_vector(g, 1, FourierMode::Cos(1), 0).unwrap();
        assert!((ncm_inner(&c, &c).unwrap() - 1.0).abs() < 1e-8);
        let s = basis_vector(g, 1, FourierMode::Sin(3), 0).unwrap();
        assert!(ncm_inner(&c, &s).unwrap().abs() < 1e-10);
    }

    #[test]
    fn default_basis_is_orthonormal() {
        let b = NcmBasis::new(TimeGrid::new(512).unwrap(), 2, DEFAULT_MODES).unwrap();
        assert_eq!(b.len(), 2 * 17);
        assert!(b.orthonormality_defect().unwrap() < 1e-10);
        assert!(NcmBasis::new(TimeGrid::new(16).unwrap(), 2, DEFAULT_MODES).is_err());
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = NcmVector::zero(TimeGrid::new(8).unwrap(), 2);
        let b = NcmVector::zero(TimeGrid::new(16).unwrap(), 2);
        assert!(matches!(ncm_inner(&a, &b), Err(Error::Contract(_))));
    }

    #[test]
    fn start_value_is_forced_to_zero() {
        let v = NcmVector::from_fn(TimeGrid::new(4).unwrap(), 1, None, |t| ([t + 1.0, 0.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0])).unwrap();
        assert_eq!(v.f[0][0], 0.0);
        assert_eq!(v.f[1][0], 1.25);
    }
}
