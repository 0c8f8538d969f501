use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::*;

use super::model::{ChartPoint, ManifoldModel, ModelKind};

/// Smooth scalar fields, defined on the ambient space and pulled back
/// through the chart embedding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestFunction {
    Constant(f64),
    /// The ambient coordinate `y^a`. On a sphere `y^n` is the height, an
    /// `l = 1` spherical harmonic.
    Ambient(usize),
    /// `y^a · y^b`.
    Product(usize, usize),
    /// `sin(2π k y^a)`, periodic on the torus.
    Wave { axis: usize, freq: u32 },
}

impl TestFunction {
    /// The height function of a sphere (last ambient coordinate).
    pub fn height(model: &ManifoldModel) -> Self {
        TestFunction::Ambient(model.ambient_dim() - 1)
    }

    /// Parses `const:<c>`, `height`, `y<a>`, `y<a>*y<b>` or `wave:<axis>:<k>`.
    pub fn parse(id: &str, model: &ManifoldModel) -> Result<Self> {
        let bad = |reason: &str| Error::InvalidId {
            id: id.to_string(),
            reason: reason.to_string(),
        };
        let id = id.trim();
        let f = if id == "height" {
            TestFunction::height(model)
        } else if let Some(c) = id.strip_prefix("const:") {
            let c: f64 = c.parse().map_err(|_| bad("constant is not a number"))?;
            if !c.is_finite() {
                return Err(bad("constant must be finite"));
            }
            TestFunction::Constant(c)
        } else if let Some(rest) = id.strip_prefix("wave:") {
            let (axis, freq) = rest.split_once(':').ok_or_else(|| bad("expected wave:<axis>:<k>"))?;
            TestFunction::Wave {
                axis: axis.parse().map_err(|_| bad("axis is not an integer"))?,
                freq: freq.parse().map_err(|_| bad("frequency is not an integer"))?,
            }
        } else if let Some((a, b)) = id.split_once('*') {
            TestFunction::Product(parse_coord(a).ok_or_else(|| bad("bad factor"))?, parse_coord(b).ok_or_else(|| bad("bad factor"))?)
        } else {
            TestFunction::Ambient(parse_coord(id).ok_or_else(|| bad("unknown test function"))?)
        };
        f.validate(model).map_err(|reason| bad(&reason))?;
        Ok(f)
    }

    fn validate(&self, model: &ManifoldModel) -> std::result::Result<(), String> {
        let m = model.ambient_dim();
        let ok = |a: usize| {
            if a < m {
                Ok(())
            } else {
                Err(format!("coordinate y{a} does not exist on {}", model.id()))
            }
        };
        if model.kind() == ModelKind::Torus && matches!(self, TestFunction::Ambient(_) | TestFunction::Product(..)) {
            return Err("coordinates are not periodic on the torus; use wave:<axis>:<k>".into());
        }
        match *self {
            TestFunction::Constant(_) => Ok(()),
            TestFunction::Ambient(a) => ok(a),
            TestFunction::Product(a, b) => ok(a).and(ok(b)),
            TestFunction::Wave { axis, .. } => {
                if model.kind() != ModelKind::Torus {
                    return Err("wave functions are only periodic on the torus".into());
                }
                ok(axis)
            }
        }
    }

    pub fn id(&self) -> String {
        match *self {
            TestFunction::Constant(c) => format!("const:{c}"),
            TestFunction::Ambient(a) => format!("y{a}"),
            TestFunction::Product(a, b) => format!("y{a}*y{b}"),
            TestFunction::Wave { axis, freq } => format!("wave:{axis}:{freq}"),
        }
    }

    /// Value, gradient and Hessian in ambient coordinates.
    pub fn ambient_jet(&self, y: &Vector) -> (f64, Vector, Matrix) {
        let mut grad = ZERO_VEC;
        let mut hess = ZERO_MAT;
        let value = match *self {
            TestFunction::Constant(c) => c,
            TestFunction::Ambient(a) => {
                grad[a] = 1.0;
                y[a]
            }
            TestFunction::Product(a, b) => {
                grad[a] += y[b];
                grad[b] += y[a];
                hess[a][b] += 1.0;
                hess[b][a] += 1.0;
                y[a] * y[b]
            }
            TestFunction::Wave { axis, freq } => {
                let w = 2.0 * PI * freq as f64;
                let (s, c) = (w * y[axis]).sin_cos();
                grad[axis] = w * c;
                hess[axis][axis] = -w * w * s;
                s
            }
        };
        (value, grad, hess)
    }

    /// Value, chart gradient `∂_i f` and chart Hessian `∂_i∂_j f`.
    pub fn chart_jet(&self, model: &ManifoldModel, cp: &ChartPoint) -> Result<(f64, Vector, Matrix)> {
        let n = model.dim();
        let m = model.ambient_dim();
        let y = model.embed(cp)?;
        let (value, fa, fab) = self.ambient_jet(&y);
        if model.is_flat() {
            return Ok((value, fa, fab));
        }
        let jac = model.embed_jacobian(cp)?;
        let hes = model.embed_hessian(cp)?;
        let mut grad = ZERO_VEC;
        let mut hess = ZERO_MAT;
        for i in 0..n {
            grad[i] = (0..m).map(|a| fa[a] * jac[a][i]).sum();
            for j in 0..n {
                let mut s = 0.0;
                for a in 0..m {
                    s += fa[a] * hes[a][i][j];
                    for b in 0..m {
                        s += fab[a][b] * jac[a][i] * jac[b][j];
                    }
                }
                hess[i][j] = s;
            }
        }
        Ok((value, grad, hess))
    }

    pub fn value(&self, model: &ManifoldModel, cp: &ChartPoint) -> Result<f64> {
        let y = model.embed(cp)?;
        Ok(self.ambient_jet(&y).0)
    }

    /// Eigenvalue of the Laplace–Beltrami operator when the function is an
    /// eigenfunction (height on Sⁿ: −n; waves on the torus: −(2πk)²).
    pub fn laplace_eigenvalue(&self, model: &ManifoldModel) -> Option<f64> {
        match (*self, model.kind()) {
            (TestFunction::Constant(_), _) => Some(0.0),
            (TestFunction::Ambient(_), ModelKind::Sphere { dim }) => Some(-(dim as f64)),
            (TestFunction::Ambient(_), ModelKind::Flat { .. }) => Some(0.0),
            (TestFunction::Wave { freq, .. }, ModelKind::Torus) => {
                let w = 2.0 * PI * freq as f64;
                Some(-w * w)
            }
            _ => None,
        }
    }
}

fn parse_coord(s: &str) -> Option<usize> {
    let idx = s.trim().strip_prefix('y')?;
    let a: usize = idx.parse().ok()?;
    (a < MAX_DIM).then_some(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trips() {
        let s2 = ManifoldModel::sphere(2).unwrap();
        for id in ["height", "y0", "y1*y2", "const:1.5"] {
            let f = TestFunction::parse(id, &s2).unwrap();
            if id != "height" {
                assert_eq!(f.id(), id);
            }
        }
        assert_eq!(TestFunction::parse("height", &s2).unwrap(), TestFunction::Ambient(2));
        assert!(TestFunction::parse("y3", &s2).is_err());
        assert!(TestFunction::parse("wave:0:1", &s2).is_err());
        let t2 = ManifoldModel::torus();
        assert!(TestFunction::parse("wave:1:2", &t2).is_ok());
        assert!(TestFunction::parse("const:nan", &t2).is_err());
    }

    #[test]
    fn chart_jet_matches_finite_differences() {
        let s3 = ManifoldModel::sphere(3).unwrap();
        let f = TestFunction::Product(0, 3);
        let cp = ChartPoint::new(1, &[0.3, -0.4, 0.7]);
        let (_, grad, hess) = f.chart_jet(&s3, &cp).unwrap();
        let h = 1e-5;
        for i in 0..3 {
            let mut plus = cp;
            let mut minus = cp;
            plus.x[i] += h;
            minus.x[i] -= h;
            let fd = (f.value(&s3, &plus).unwrap() - f.value(&s3, &minus).unwrap()) / (2.0 * h);
            assert!((fd - grad[i]).abs() < 1e-8);
            let (_, gp, _) = f.chart_jet(&s3, &plus).unwrap();
            let (_, gm, _) = f.chart_jet(&s3, &minus).unwrap();
            for j in 0..3 {
                assert!(((gp[j] - gm[j]) / (2.0 * h) - hess[i][j]).abs() < 1e-7);
            }
        }
    }
}
