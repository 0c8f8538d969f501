use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::linalg::*;

use super::model::{ChartPoint, ManifoldModel, ModelKind};

/// Lowered torsion field `T_{kij}` supplied by the caller.
pub type LoweredTorsionField = Arc<dyn Fn(&ManifoldModel, &ChartPoint) -> Tensor3 + Send + Sync>;

/// Step for central differences of user-supplied torsion fields.
const FD_STEP: f64 = 1e-5;
/// Points at which user-supplied torsion is checked for antisymmetry.
const ANTISYMMETRY_SAMPLES: usize = 32;
const ANTISYMMETRY_TOL: f64 = 1e-12;

/// The difference `K = ∇ − ∇^{LC}` between the connection and Levi-Civita.
#[derive(Clone)]
pub enum Contorsion {
    Zero,
    /// `T_{kij} = κ·vol_{kij}` on a 3-manifold, `K = ½ g⁻¹T`. Totally
    /// antisymmetric, so the Driver condition holds.
    Volume { kappa: f64 },
    /// `K^k_{ij} = c(δ^k_i w_j − g_{ij} w^k)` for a fixed one-form `w`.
    /// Metric compatible but its torsion `c(u w(v) − v w(u))` violates the
    /// Driver condition: the negative control.
    Vector { strength: f64 },
    /// `K = ½ g⁻¹T` for a caller-supplied totally antisymmetric field.
    Lowered(LoweredTorsionField),
}

impl fmt::Debug for Contorsion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Contorsion::Zero => write!(f, "Zero"),
            Contorsion::Volume { kappa } => write!(f, "Volume {{ kappa: {kappa} }}"),
            Contorsion::Vector { strength } => write!(f, "Vector {{ strength: {strength} }}"),
            Contorsion::Lowered(_) => write!(f, "Lowered(..)"),
        }
    }
}

/// A metric-compatible connection on a [`ManifoldModel`].
#[derive(Debug, Clone)]
pub struct ConnectionSpec {
    model: ManifoldModel,
    contorsion: Contorsion,
    id: String,
}

impl ConnectionSpec {
    pub fn levi_civita(model: &ManifoldModel) -> Self {
        ConnectionSpec {
            model: model.clone(),
            contorsion: Contorsion::Zero,
            id: "lc".to_string(),
        }
    }

    /// `Γ = Γ_LC + ½ g^{kl} T_{lij}` for a totally antisymmetric lowered
    /// torsion. The field is checked at deterministic sample points.
    pub fn with_torsion(lc: &ConnectionSpec, torsion_lowered: LoweredTorsionField) -> Result<Self> {
        if !matches!(lc.contorsion, Contorsion::Zero) {
            return Err(Error::Contract("with_torsion expects a Levi-Civita base connection".into()));
        }
        let model = &lc.model;
        let n = model.dim();
        let mut rng = ChaCha20Rng::seed_from_u64(0x7045_1d00);
        let mut points = vec![model.origin()];
        points.extend((0..ANTISYMMETRY_SAMPLES).map(|_| model.sample_point(&mut rng)));
        let mut all_zero = true;
        for cp in &points {
            let t = torsion_lowered(model, cp);
            check_total_antisymmetry(n, &t)?;
            all_zero &= (0..n).all(|k| (0..n).all(|i| (0..n).all(|j| t[k][i][j] == 0.0)));
        }
        if all_zero {
            return Ok(lc.clone());
        }
        Ok(ConnectionSpec {
            model: model.clone(),
            contorsion: Contorsion::Lowered(torsion_lowered),
            id: "custom".to_string(),
        })
    }

    /// Torsion proportional to the volume form on a 3-manifold.
    pub fn volume(model: &ManifoldModel, kappa: f64) -> Result<Self> {
        if model.dim() != 3 {
            return Err(Error::Contract(format!("volume torsion needs a 3-manifold, {} has dimension {}", model.id(), model.dim())));
        }
        Ok(ConnectionSpec {
            model: model.clone(),
            contorsion: Contorsion::Volume { kappa },
            id: format!("volume:kappa={kappa}"),
        })
    }

    /// `T(X,Y) = λ[X,Y]` on left-invariant fields of S³ ≅ SU(2). For the unit
    /// sphere `[X_i, X_j] = 2ε_{ijk}X_k` in an orthonormal left-invariant
    /// frame, so this is the volume torsion with `κ = 2λ`.
    pub fn structure(model: &ManifoldModel, lambda: f64) -> Result<Self> {
        if model.kind() != (ModelKind::Sphere { dim: 3 }) {
            return Err(Error::Contract(format!("structure-constant torsion needs s3, got {}", model.id())));
        }
        let mut c = Self::volume(model, 2.0 * lambda)?;
        c.id = format!("structure:lambda={lambda}");
        Ok(c)
    }

    pub fn vector(model: &ManifoldModel, strength: f64) -> Self {
        ConnectionSpec {
            model: model.clone(),
            contorsion: Contorsion::Vector { strength },
            id: format!("vector:strength={strength}"),
        }
    }

    pub fn model(&self) -> &ManifoldModel {
        &self.model
    }

    pub fn contorsion_kind(&self) -> &Contorsion {
        &self.contorsion
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    /// Whether the construction guarantees `g(T(u,v),u) = 0`.
    pub fn is_driver(&self) -> bool {
        !matches!(self.contorsion, Contorsion::Vector { strength } if strength != 0.0)
    }

    pub fn is_levi_civita(&self) -> bool {
        matches!(self.contorsion, Contorsion::Zero)
    }

    /// `K^k_{ij}`.
    pub fn contorsion(&self, cp: &ChartPoint) -> Result<Tensor3> {
        self.model.check_domain(cp)?;
        let n = self.dim();
        let mut k = ZERO_T3;
        match &self.contorsion {
            Contorsion::Zero => {}
            Contorsion::Volume { kappa } => {
                // g = φ²δ: g^{kl}√det g ε_{lij} = φ^{n-2} ε_{kij}, n = 3.
                let c = 0.5 * kappa * self.model.orientation(cp.chart) * self.model.conformal(cp);
                for (a, ka) in k.iter_mut().enumerate().take(3) {
                    for (i, kai) in ka.iter_mut().enumerate().take(3) {
                        for (j, v) in kai.iter_mut().enumerate().take(3) {
                            *v = c * levi_civita3(a, i, j);
                        }
                    }
                }
            }
            Contorsion::Vector { strength } => {
                let (w, _) = self.model.control_one_form(cp)?;
                let g = self.model.metric(cp)?;
                let ginv = self.model.metric_inverse(cp)?;
                let wu = mat_vec(n, &ginv, &w);
                for a in 0..n {
                    for i in 0..n {
                        for j in 0..n {
                            let delta = if a == i { w[j] } else { 0.0 };
                            k[a][i][j] = strength * (delta - g[i][j] * wu[a]);
                        }
                    }
                }
            }
            Contorsion::Lowered(field) => {
                k = raise_half(n, &self.model.metric_inverse(cp)?, &field(&self.model, cp));
            }
        }
        Ok(k)
    }

    /// `d[r][k][i][j] = ∂_r K^k_{ij}`.
    pub fn contorsion_derivative(&self, cp: &ChartPoint) -> Result<Tensor4> {
        self.model.check_domain(cp)?;
        let n = self.dim();
        let mut d = ZERO_T4;
        match &self.contorsion {
            Contorsion::Zero => {}
            Contorsion::Volume { kappa } => {
                let c = 0.5 * kappa * self.model.orientation(cp.chart) * self.model.conformal(cp);
                let ds = self.model.log_conformal_grad(cp);
                for (r, dr) in d.iter_mut().enumerate().take(3) {
                    for (a, da) in dr.iter_mut().enumerate().take(3) {
                        for (i, dai) in da.iter_mut().enumerate().take(3) {
                            for (j, v) in dai.iter_mut().enumerate().take(3) {
                                *v = c * ds[r] * levi_civita3(a, i, j);
                            }
                        }
                    }
                }
            }
            Contorsion::Vector { strength } => {
                let (w, dw) = self.model.control_one_form(cp)?;
                let g = self.model.metric(cp)?;
                let dg = self.model.metric_derivative(cp)?;
                let ginv = self.model.metric_inverse(cp)?;
                let ds = self.model.log_conformal_grad(cp);
                let wu = mat_vec(n, &ginv, &w);
                for r in 0..n {
                    // w^k = φ⁻² w_k, so ∂_r w^k = φ⁻²(∂_r w_k − 2 ∂_rσ w_k).
                    let mut dwu = ZERO_VEC;
                    for a in 0..n {
                        dwu[a] = ginv[a][a] * (dw[r][a] - 2.0 * ds[r] * w[a]);
                    }
                    for a in 0..n {
                        for i in 0..n {
                            for j in 0..n {
                                let delta = if a == i { dw[r][j] } else { 0.0 };
                                d[r][a][i][j] = strength * (delta - dg[r][i][j] * wu[a] - g[i][j] * dwu[a]);
                            }
                        }
                    }
                }
            }
            Contorsion::Lowered(_) => {
                d = richardson_derivative(n, cp, |p| self.contorsion(p))?;
            }
        }
        Ok(d)
    }

    /// `Γ^k_{ij}` with `∇_{∂_i}∂_j = Γ^k_{ij}∂_k`.
    pub fn christoffel(&self, cp: &ChartPoint) -> Result<Tensor3> {
        let mut g = self.model.lc_christoffel(cp)?;
        if self.is_levi_civita() {
            return Ok(g);
        }
        let k = self.contorsion(cp)?;
        add3(self.dim(), &mut g, &k);
        Ok(g)
    }

    /// `d[r][k][i][j] = ∂_r Γ^k_{ij}`.
    pub fn christoffel_derivative(&self, cp: &ChartPoint) -> Result<Tensor4> {
        let mut d = self.model.lc_christoffel_derivative(cp)?;
        if self.is_levi_civita() {
            return Ok(d);
        }
        let dk = self.contorsion_derivative(cp)?;
        let n = self.dim();
        for r in 0..n {
            add3(n, &mut d[r], &dk[r]);
        }
        Ok(d)
    }

    /// `T^k_{ij} = Γ^k_{ij} − Γ^k_{ji}`.
    pub fn torsion(&self, cp: &ChartPoint) -> Result<Tensor3> {
        Ok(antisymmetrize(self.dim(), &self.christoffel(cp)?))
    }

    /// `T_{kij} = g_{kl} T^l_{ij}`.
    pub fn torsion_lowered(&self, cp: &ChartPoint) -> Result<Tensor3> {
        let n = self.dim();
        let t = self.torsion(cp)?;
        let g = self.model.metric(cp)?;
        let mut out = ZERO_T3;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    out[k][i][j] = (0..n).map(|l| g[k][l] * t[l][i][j]).sum();
                }
            }
        }
        Ok(out)
    }

    /// `R[k][s][r][i] = R^k_{sri}`, the components of `R(∂_s,∂_r)∂_i`:
    /// `∂_sΓ^k_{ri} − ∂_rΓ^k_{si} + Γ^n_{ri}Γ^k_{sn} − Γ^k_{rn}Γ^n_{si}`.
    pub fn curvature(&self, cp: &ChartPoint) -> Result<Tensor4> {
        let n = self.dim();
        let g = self.christoffel(cp)?;
        let dg = self.christoffel_derivative(cp)?;
        let mut r_out = ZERO_T4;
        for k in 0..n {
            for s in 0..n {
                for r in 0..n {
                    for i in 0..n {
                        let mut v = dg[s][k][r][i] - dg[r][k][s][i];
                        for m in 0..n {
                            v += g[m][r][i] * g[k][s][m] - g[k][r][m] * g[m][s][i];
                        }
                        r_out[k][s][r][i] = v;
                    }
                }
            }
        }
        Ok(r_out)
    }

    /// `NT[r][k][s][i] = (∇_r T)^k_{si}`:
    /// `∂_rT^k_{si} + Γ^k_{rn}T^n_{si} − Γ^n_{rs}T^k_{ni} − Γ^n_{ri}T^k_{sn}`.
    pub fn nabla_torsion(&self, cp: &ChartPoint) -> Result<Tensor4> {
        let n = self.dim();
        let mut out = ZERO_T4;
        if self.is_levi_civita() {
            self.model.check_domain(cp)?;
            return Ok(out);
        }
        let g = self.christoffel(cp)?;
        let t = antisymmetrize(n, &g);
        let dk = self.contorsion_derivative(cp)?;
        for r in 0..n {
            let dt = antisymmetrize(n, &dk[r]);
            for k in 0..n {
                for s in 0..n {
                    for i in 0..n {
                        let mut v = dt[k][s][i];
                        for m in 0..n {
                            v += g[k][r][m] * t[m][s][i] - g[m][r][s] * t[k][m][i] - g[m][r][i] * t[k][s][m];
                        }
                        out[r][k][s][i] = v;
                    }
                }
            }
        }
        Ok(out)
    }

    /// `T(u, v)` as a vector.
    pub fn torsion_apply(&self, cp: &ChartPoint, u: &Vector, v: &Vector) -> Result<Vector> {
        let n = self.dim();
        let t = self.torsion(cp)?;
        let mut out = ZERO_VEC;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    out[k] += t[k][i][j] * u[i] * v[j];
                }
            }
        }
        Ok(out)
    }

    /// `max |∂_k g_{ij} − Γ^l_{ki} g_{lj} − Γ^l_{kj} g_{il}|`.
    pub fn metric_compatibility_defect(&self, cp: &ChartPoint) -> Result<f64> {
        let n = self.dim();
        let g = self.model.metric(cp)?;
        let dg = self.model.metric_derivative(cp)?;
        let gamma = self.christoffel(cp)?;
        let mut worst: f64 = 0.0;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut v = dg[k][i][j];
                    for l in 0..n {
                        v -= gamma[l][k][i] * g[l][j] + gamma[l][k][j] * g[i][l];
                    }
                    worst = worst.max(v.abs());
                }
            }
        }
        Ok(worst)
    }
}

fn add3(n: usize, a: &mut Tensor3, b: &Tensor3) {
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                a[k][i][j] += b[k][i][j];
            }
        }
    }
}

/// `out[k][i][j] = t[k][i][j] − t[k][j][i]`.
fn antisymmetrize(n: usize, t: &Tensor3) -> Tensor3 {
    let mut out = ZERO_T3;
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                out[k][i][j] = t[k][i][j] - t[k][j][i];
            }
        }
    }
    out
}

/// `½ g^{kl} T_{lij}`.
fn raise_half(n: usize, ginv: &Matrix, t: &Tensor3) -> Tensor3 {
    let mut out = ZERO_T3;
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                out[k][i][j] = 0.5 * (0..n).map(|l| ginv[k][l] * t[l][i][j]).sum::<f64>();
            }
        }
    }
    out
}

/// Rejects `T` unless it flips sign under every transposition of indices.
pub fn check_total_antisymmetry(n: usize, t: &Tensor3) -> Result<()> {
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let v = t[k][i][j];
                let swaps = [((0, 1), t[i][k][j]), ((1, 2), t[k][j][i]), ((0, 2), t[j][i][k])];
                for ((a, b), w) in swaps {
                    let gap = (v + w).abs();
                    if gap > ANTISYMMETRY_TOL * (1.0 + v.abs()) || !gap.is_finite() {
                        return Err(Error::NotAntisymmetric { k, i, j, a, b, gap });
                    }
                }
            }
        }
    }
    Ok(())
}

/// Central differences with one Richardson extrapolation step.
fn richardson_derivative<F>(n: usize, cp: &ChartPoint, f: F) -> Result<Tensor4>
where
    F: Fn(&ChartPoint) -> Result<Tensor3>,
{
    let mut out = ZERO_T4;
    for r in 0..n {
        let central = |h: f64| -> Result<Tensor3> {
            let mut plus = *cp;
            let mut minus = *cp;
            plus.x[r] += h;
            minus.x[r] -= h;
            let (a, b) = (f(&plus)?, f(&minus)?);
            let mut d = ZERO_T3;
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        d[k][i][j] = (a[k][i][j] - b[k][i][j]) / (2.0 * h);
                    }
                }
            }
            Ok(d)
        };
        let coarse = central(FD_STEP)?;
        let fine = central(FD_STEP / 2.0)?;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    out[r][k][i][j] = (4.0 * fine[k][i][j] - coarse[k][i][j]) / 3.0;
                }
            }
        }
    }
    Ok(out)
}
