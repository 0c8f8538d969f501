use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::*;

/// Radius beyond which a stereographic chart hands the point to the opposite chart.
pub const SPHERE_SWITCH_RADIUS: f64 = 1.5;
/// Stereographic charts are only trusted inside this radius.
pub const SPHERE_DOMAIN_RADIUS: f64 = 2.0;
const FLAT_DOMAIN_BOUND: f64 = 1e6;

/// A point read in one coordinate chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint {
    pub chart: usize,
    pub x: Vector,
}

impl ChartPoint {
    pub fn new(chart: usize, coords: &[f64]) -> Self {
        ChartPoint {
            chart,
            x: vector_from(coords),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Euclidean ℝⁿ, one global chart.
    Flat { dim: usize },
    /// ℝ²/ℤ² with the flat metric; coordinates are wrapped back into [0,1)².
    Torus,
    /// Unit round sphere Sⁿ with stereographic charts centred on the north
    /// pole (chart 0) and the south pole (chart 1).
    Sphere { dim: usize },
}

/// A compact (or flat) Riemannian manifold given by explicit charts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifoldModel {
    kind: ModelKind,
}

impl ManifoldModel {
    pub fn flat(dim: usize) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::Contract(format!("flat model needs 1 <= n <= {MAX_DIM}, got {dim}")));
        }
        Ok(ManifoldModel {
            kind: ModelKind::Flat { dim },
        })
    }

    pub fn torus() -> Self {
        ManifoldModel { kind: ModelKind::Torus }
    }

    pub fn sphere(dim: usize) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::Contract(format!("sphere model supports n = 2 or 3, got {dim}")));
        }
        Ok(ManifoldModel {
            kind: ModelKind::Sphere { dim },
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn id(&self) -> String {
        match self.kind {
            ModelKind::Flat { dim } => format!("r{dim}"),
            ModelKind::Torus => "t2".to_string(),
            ModelKind::Sphere { dim } => format!("s{dim}"),
        }
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            ModelKind::Flat { dim } | ModelKind::Sphere { dim } => dim,
            ModelKind::Torus => 2,
        }
    }

    /// Dimension of the space the model is embedded in (chart coordinates for flat models).
    pub fn ambient_dim(&self) -> usize {
        match self.kind {
            ModelKind::Flat { dim } => dim,
            ModelKind::Torus => 2,
            ModelKind::Sphere { dim } => dim + 1,
        }
    }

    pub fn chart_count(&self) -> usize {
        match self.kind {
            ModelKind::Sphere { .. } => 2,
            _ => 1,
        }
    }

    pub fn is_flat(&self) -> bool {
        !matches!(self.kind, ModelKind::Sphere { .. })
    }

    /// Orientation of a chart relative to chart 0. The stereographic
    /// transition is an inversion, which reverses orientation.
    pub fn orientation(&self, chart: usize) -> f64 {
        if chart == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn check_domain(&self, cp: &ChartPoint) -> Result<()> {
        let n = self.dim();
        let coords = &cp.x[..n];
        let inside = cp.chart < self.chart_count()
            && coords.iter().all(|c| c.is_finite())
            && match self.kind {
                ModelKind::Flat { .. } => coords.iter().all(|c| c.abs() <= FLAT_DOMAIN_BOUND),
                ModelKind::Torus => coords.iter().all(|c| (-1.0..=2.0).contains(c)),
                ModelKind::Sphere { .. } => norm(n, &cp.x) <= SPHERE_DOMAIN_RADIUS,
            };
        if inside {
            Ok(())
        } else {
            Err(Error::Domain {
                chart: cp.chart,
                point: coords.to_vec(),
            })
        }
    }

    /// Conformal factor φ with g = φ²·δ (1 for flat models).
    pub(crate) fn conformal(&self, cp: &ChartPoint) -> f64 {
        match self.kind {
            ModelKind::Sphere { dim } => 2.0 / (1.0 + dot(dim, &cp.x, &cp.x)),
            _ => 1.0,
        }
    }

    /// Gradient of σ = ln φ.
    pub(crate) fn log_conformal_grad(&self, cp: &ChartPoint) -> Vector {
        let mut g = ZERO_VEC;
        if let ModelKind::Sphere { dim } = self.kind {
            let u = 1.0 + dot(dim, &cp.x, &cp.x);
            for k in 0..dim {
                g[k] = -2.0 * cp.x[k] / u;
            }
        }
        g
    }

    /// Hessian of σ = ln φ.
    pub(crate) fn log_conformal_hessian(&self, cp: &ChartPoint) -> Matrix {
        let mut h = ZERO_MAT;
        if let ModelKind::Sphere { dim } = self.kind {
            let u = 1.0 + dot(dim, &cp.x, &cp.x);
            for a in 0..dim {
                for b in 0..dim {
                    let delta = if a == b { 1.0 } else { 0.0 };
                    h[a][b] = -2.0 * delta / u + 4.0 * cp.x[a] * cp.x[b] / (u * u);
                }
            }
        }
        h
    }

    pub fn metric(&self, cp: &ChartPoint) -> Result<Matrix> {
        self.check_domain(cp)?;
        let phi = self.conformal(cp);
        let mut g = identity(self.dim());
        for (i, row) in g.iter_mut().enumerate().take(self.dim()) {
            row[i] = phi * phi;
        }
        Ok(g)
    }

    pub fn metric_inverse(&self, cp: &ChartPoint) -> Result<Matrix> {
        self.check_domain(cp)?;
        let phi = self.conformal(cp);
        let mut g = identity(self.dim());
        for (i, row) in g.iter_mut().enumerate().take(self.dim()) {
            row[i] = 1.0 / (phi * phi);
        }
        Ok(g)
    }

    /// `d[k][i][j] = ∂_k g_ij`.
    pub fn metric_derivative(&self, cp: &ChartPoint) -> Result<Tensor3> {
        self.check_domain(cp)?;
        let n = self.dim();
        let phi = self.conformal(cp);
        let ds = self.log_conformal_grad(cp);
        let mut d = ZERO_T3;
        for k in 0..n {
            for i in 0..n {
                d[k][i][i] = 2.0 * phi * phi * ds[k];
            }
        }
        Ok(d)
    }

    /// Levi-Civita symbols `Γ[k][i][j] = Γ^k_{ij}` in closed form.
    pub fn lc_christoffel(&self, cp: &ChartPoint) -> Result<Tensor3> {
        self.check_domain(cp)?;
        let n = self.dim();
        let ds = self.log_conformal_grad(cp);
        let mut gamma = ZERO_T3;
        if self.is_flat() {
            return Ok(gamma);
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut v = 0.0;
                    if k == i {
                        v += ds[j];
                    }
                    if k == j {
                        v += ds[i];
                    }
                    if i == j {
                        v -= ds[k];
                    }
                    gamma[k][i][j] = v;
                }
            }
        }
        Ok(gamma)
    }

    /// `d[r][k][i][j] = ∂_r Γ^k_{ij}` for the Levi-Civita connection.
    pub fn lc_christoffel_derivative(&self, cp: &ChartPoint) -> Result<Tensor4> {
        self.check_domain(cp)?;
        let n = self.dim();
        let mut d = ZERO_T4;
        if self.is_flat() {
            return Ok(d);
        }
        let h = self.log_conformal_hessian(cp);
        for r in 0..n {
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let mut v = 0.0;
                        if k == i {
                            v += h[j][r];
                        }
                        if k == j {
                            v += h[i][r];
                        }
                        if i == j {
                            v -= h[k][r];
                        }
                        d[r][k][i][j] = v;
                    }
                }
            }
        }
        Ok(d)
    }

    /// Coordinates of `cp` in chart `to` together with the transition
    /// Jacobian `J[a][b] = ∂x'^a/∂x^b`.
    pub fn transition(&self, cp: &ChartPoint, to: usize) -> Result<(ChartPoint, Matrix)> {
        self.check_domain(cp)?;
        let n = self.dim();
        if to >= self.chart_count() {
            return Err(Error::Contract(format!("model {} has no chart {to}", self.id())));
        }
        if to == cp.chart {
            return Ok((*cp, identity(n)));
        }
        // Only spheres have two charts: x' = x/|x|².
        let r2 = dot(n, &cp.x, &cp.x);
        if r2 == 0.0 {
            return Err(Error::Domain {
                chart: to,
                point: cp.x[..n].to_vec(),
            });
        }
        let mut y = ZERO_VEC;
        let mut jac = ZERO_MAT;
        for a in 0..n {
            y[a] = cp.x[a] / r2;
            for b in 0..n {
                let delta = if a == b { 1.0 } else { 0.0 };
                jac[a][b] = (r2 * delta - 2.0 * cp.x[a] * cp.x[b]) / (r2 * r2);
            }
        }
        Ok((ChartPoint { chart: to, x: y }, jac))
    }

    /// The chart policy: returns the re-expressed point and Jacobian when the
    /// point should leave its current chart (or be wrapped, on the torus).
    pub fn chart_switch(&self, cp: &ChartPoint) -> Result<Option<(ChartPoint, Matrix)>> {
        let n = self.dim();
        match self.kind {
            ModelKind::Flat { .. } => Ok(None),
            ModelKind::Torus => {
                if cp.x[..n].iter().all(|c| (0.0..1.0).contains(c)) {
                    return Ok(None);
                }
                let mut y = cp.x;
                for c in y.iter_mut().take(n) {
                    *c -= c.floor();
                }
                Ok(Some((ChartPoint { chart: cp.chart, x: y }, identity(n))))
            }
            ModelKind::Sphere { .. } => {
                if norm(n, &cp.x) > SPHERE_SWITCH_RADIUS {
                    self.transition(cp, 1 - cp.chart).map(Some)
                } else {
                    Ok(None)
                }
            }
        }
    }

    /// Forces the same re-expression as [`Self::chart_switch`] regardless of the radius test.
    pub fn forced_switch(&self, cp: &ChartPoint) -> Result<(ChartPoint, Matrix)> {
        match self.kind {
            ModelKind::Sphere { .. } => self.transition(cp, 1 - cp.chart),
            ModelKind::Torus => {
                let mut y = cp.x;
                for c in y.iter_mut().take(2) {
                    *c -= c.floor();
                }
                Ok((ChartPoint { chart: cp.chart, x: y }, identity(2)))
            }
            ModelKind::Flat { dim } => Ok((*cp, identity(dim))),
        }
    }

    /// Position in the ambient space (chart coordinates for flat models).
    pub fn embed(&self, cp: &ChartPoint) -> Result<Vector> {
        self.check_domain(cp)?;
        let n = self.dim();
        match self.kind {
            ModelKind::Sphere { .. } => {
                let u = 1.0 + dot(n, &cp.x, &cp.x);
                let s = self.orientation(cp.chart);
                let mut y = ZERO_VEC;
                for a in 0..n {
                    y[a] = 2.0 * cp.x[a] / u;
                }
                y[n] = s * (2.0 / u - 1.0);
                Ok(y)
            }
            _ => Ok(cp.x),
        }
    }

    /// `J[a][i] = ∂ι^a/∂x^i`.
    pub fn embed_jacobian(&self, cp: &ChartPoint) -> Result<Matrix> {
        self.check_domain(cp)?;
        let n = self.dim();
        match self.kind {
            ModelKind::Sphere { .. } => {
                let u = 1.0 + dot(n, &cp.x, &cp.x);
                let s = self.orientation(cp.chart);
                let mut j = ZERO_MAT;
                for i in 0..n {
                    for a in 0..n {
                        let delta = if a == i { 1.0 } else { 0.0 };
                        j[a][i] = 2.0 * delta / u - 4.0 * cp.x[a] * cp.x[i] / (u * u);
                    }
                    j[n][i] = -4.0 * s * cp.x[i] / (u * u);
                }
                Ok(j)
            }
            _ => Ok(identity(n)),
        }
    }

    /// `H[a][i][j] = ∂_i∂_j ι^a`.
    pub fn embed_hessian(&self, cp: &ChartPoint) -> Result<Tensor3> {
        self.check_domain(cp)?;
        let n = self.dim();
        let mut h = ZERO_T3;
        if let ModelKind::Sphere { .. } = self.kind {
            let x = &cp.x;
            let u = 1.0 + dot(n, x, x);
            let (u2, u3) = (u * u, u * u * u);
            let s = self.orientation(cp.chart);
            let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
            for i in 0..n {
                for j in 0..n {
                    for a in 0..n {
                        h[a][i][j] = -4.0 * (d(a, i) * x[j] + d(a, j) * x[i] + d(i, j) * x[a]) / u2
                            + 16.0 * x[a] * x[i] * x[j] / u3;
                    }
                    h[n][i][j] = s * (-4.0 * d(i, j) / u2 + 16.0 * x[i] * x[j] / u3);
                }
            }
        }
        Ok(h)
    }

    /// Default start: north pole for spheres, the origin otherwise.
    pub fn origin(&self) -> ChartPoint {
        ChartPoint {
            chart: 0,
            x: ZERO_VEC,
        }
    }

    /// A point drawn uniformly from a coordinate ball (or the unit cell) of chart 0.
    pub fn sample_point<R: Rng>(&self, rng: &mut R) -> ChartPoint {
        let n = self.dim();
        let mut x = ZERO_VEC;
        match self.kind {
            ModelKind::Torus => {
                for c in x.iter_mut().take(n) {
                    *c = rng.random::<f64>();
                }
            }
            ModelKind::Flat { .. } | ModelKind::Sphere { .. } => {
                let radius = if self.is_flat() { 2.0 } else { SPHERE_SWITCH_RADIUS };
                loop {
                    for c in x.iter_mut().take(n) {
                        *c = radius * (2.0 * rng.random::<f64>() - 1.0);
                    }
                    if norm(n, &x) <= radius {
                        break;
                    }
                }
            }
        }
        ChartPoint { chart: 0, x }
    }

    /// The one-form `w` (and its chart derivative `dw[r][j] = ∂_r w_j`)
    /// used to build the vector-torsion control connection: the differential
    /// of the height function on spheres, `dx¹` otherwise.
    pub fn control_one_form(&self, cp: &ChartPoint) -> Result<(Vector, Matrix)> {
        match self.kind {
            ModelKind::Sphere { dim } => {
                let f = super::TestFunction::Ambient(dim);
                let (_, grad, hess) = f.chart_jet(self, cp)?;
                Ok((grad, hess))
            }
            _ => {
                self.check_domain(cp)?;
                let mut w = ZERO_VEC;
                w[0] = 1.0;
                Ok((w, ZERO_MAT))
            }
        }
    }
}
