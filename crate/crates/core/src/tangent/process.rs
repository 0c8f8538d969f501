//! The pair `(A(v), h₁(v))` attached to an NCM vector along one path.
//!
//! Writing the perturbed driving noise as `dB + ε(ḟ dt + A ∘ dB)` and asking
//! the perturbed path to move along `v = f^μ u_μ` gives, in frame components,
//!
//! ```text
//! dA^α_μ = a^α_μ dt + b^α_{μ,ρ} ∘ dB^ρ
//! a^α_μ     = (u⁻¹ T(ḟ^λ u_λ, u_μ))^α
//! b^α_{μ,ρ} = (Z⁻¹)^α_k (R^k_{sri} + ∇_r T^k_{si}) v^s Z^i_μ Z^r_ρ
//! ḣ₁^α      = ḟ^α + ½ Σ_μ b^α_{μ,μ}
//! ```
//!
//! Under the Driver condition both coefficients are antisymmetric in
//! `(α, μ)`, hence so is `A`.

use crate::error::{Error, Result};
use crate::geometry::{ChartPoint, ConnectionSpec, ManifoldModel, ModelKind};
use crate::linalg::*;
use crate::path_space::{simulate_forced, PathBundle, MAX_FRAME_CONDITION};
use crate::sde::BrownianDraw;

use super::ncm::NcmVector;

/// Default finite-difference step of the variational check.
pub const DV_EPSILON: f64 = 1e-6;

/// Per-step tensors shared by every NCM vector on the same path; the
/// coefficients `a` and `b` are linear in `f`.
pub struct FrameTensors {
    n: usize,
    pub zinv: Vec<Matrix>,
    /// `q[α][μ][ρ][λ]`, so that `b^α_{μ,ρ} = Σ_λ f^λ q[α][μ][ρ][λ]`.
    q: Vec<Tensor4>,
    /// `s[α][μ][λ] = (Z⁻¹ T(u_λ, u_μ))^α`.
    s: Vec<Tensor3>,
}

impl FrameTensors {
    pub fn new(bundle: &PathBundle, conn: &ConnectionSpec) -> Result<Self> {
        let n = conn.dim();
        let len = bundle.p.len();
        let mut zinv = Vec::with_capacity(len);
        let mut q = Vec::with_capacity(len);
        let mut s = Vec::with_capacity(len);
        for i in 0..len {
            let z = &bundle.z[i];
            let inv = inverse(n, z).ok_or(Error::IllConditioned {
                step: i,
                condition: f64::INFINITY,
            })?;
            let condition = condition_estimate(n, z, &inv);
            if condition >= MAX_FRAME_CONDITION {
                return Err(Error::IllConditioned { step: i, condition });
            }
            let cp = bundle.point(i);
            let r = conn.curvature(&cp)?;
            let nt = conn.nabla_torsion(&cp)?;
            let t = conn.torsion(&cp)?;

            // w[k][s][r][j] = R^k_{srj} + ∇_r T^k_{sj}, contracted one index at a time.
            let mut w1 = ZERO_T4;
            for k in 0..n {
                for sx in 0..n {
                    for rx in 0..n {
                        for mu in 0..n {
                            w1[k][sx][rx][mu] = (0..n).map(|j| (r[k][sx][rx][j] + nt[rx][k][sx][j]) * z[j][mu]).sum();
                        }
                    }
                }
            }
            let mut w2 = ZERO_T4;
            for k in 0..n {
                for sx in 0..n {
                    for rho in 0..n {
                        for mu in 0..n {
                            w2[k][sx][rho][mu] = (0..n).map(|rx| w1[k][sx][rx][mu] * z[rx][rho]).sum();
                        }
                    }
                }
            }
            let mut w3 = ZERO_T4;
            for k in 0..n {
                for lam in 0..n {
                    for rho in 0..n {
                        for mu in 0..n {
                            w3[k][lam][rho][mu] = (0..n).map(|sx| w2[k][sx][rho][mu] * z[sx][lam]).sum();
                        }
                    }
                }
            }
            let mut qi = ZERO_T4;
            for a in 0..n {
                for mu in 0..n {
                    for rho in 0..n {
                        for lam in 0..n {
                            qi[a][mu][rho][lam] = (0..n).map(|k| inv[a][k] * w3[k][lam][rho][mu]).sum();
                        }
                    }
                }
            }
            let mut si = ZERO_T3;
            for lam in 0..n {
                for mu in 0..n {
                    let mut tv = ZERO_VEC;
                    for (k, tk) in tv.iter_mut().enumerate().take(n) {
                        for a in 0..n {
                            for b in 0..n {
                                *tk += t[k][a][b] * z[a][lam] * z[b][mu];
                            }
                        }
                    }
                    let fr = mat_vec(n, &inv, &tv);
                    for a in 0..n {
                        si[a][mu][lam] = fr[a];
                    }
                }
            }
            zinv.push(inv);
            q.push(qi);
            s.push(si);
        }
        Ok(FrameTensors { n, zinv, q, s })
    }

    /// `b^α_{μ,ρ}` at step `i` for coefficients `f`.
    fn b(&self, i: usize, f: &Vector) -> Tensor3 {
        let n = self.n;
        let mut b = ZERO_T3;
        for a in 0..n {
            for mu in 0..n {
                for rho in 0..n {
                    b[a][mu][rho] = (0..n).map(|lam| f[lam] * self.q[i][a][mu][rho][lam]).sum();
                }
            }
        }
        b
    }

    /// `a^α_μ` at step `i` for derivatives `ḟ`.
    fn a(&self, i: usize, fdot: &Vector) -> Matrix {
        let n = self.n;
        let mut a = ZERO_MAT;
        for al in 0..n {
            for mu in 0..n {
                a[al][mu] = (0..n).map(|lam| fdot[lam] * self.s[i][al][mu][lam]).sum();
            }
        }
        a
    }
}

/// `A(v)` and `ḣ₁(v)` on the grid of one path.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentProcess {
    pub n: usize,
    /// `A[i][α][μ]`.
    pub a: Vec<Matrix>,
    pub h1dot: Vec<Vector>,
    pub seed: u64,
    pub path_index: u64,
    pub tag: Option<String>,
    /// False when the connection is not known to satisfy the Driver
    /// condition; the process is still built, for negative controls.
    pub driver: bool,
}

impl TangentProcess {
    /// `sup_t max |A + ᵗA|`.
    pub fn antisymmetry_defect(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for a in &self.a {
            for i in 0..n {
                for j in 0..n {
                    worst = worst.max((a[i][j] + a[j][i]).abs());
                }
            }
        }
        worst
    }

    /// `½(A − ᵗA)` at step `i`.
    pub fn skew(&self, i: usize) -> Matrix {
        let n = self.n;
        let a = &self.a[i];
        let mut s = ZERO_MAT;
        for r in 0..n {
            for c in 0..n {
                s[r][c] = 0.5 * (a[r][c] - a[c][r]);
            }
        }
        s
    }
}

pub fn build_with_tensors(bundle: &PathBundle, tensors: &FrameTensors, conn: &ConnectionSpec, v: &NcmVector) -> Result<TangentProcess> {
    let n = conn.dim();
    if v.n != n || v.grid != bundle.grid {
        return Err(Error::Contract("NCM vector does not match the bundle's grid or dimension".into()));
    }
    let m = bundle.grid.steps();
    let dt = bundle.grid.dt();
    let mut a_path = Vec::with_capacity(m + 1);
    let mut h1dot = Vec::with_capacity(m + 1);
    let mut acc = ZERO_MAT;
    let mut b_prev = tensors.b(0, &v.f[0]);
    let mut a_prev = tensors.a(0, &v.fdot[0]);
    a_path.push(acc);
    h1dot.push(half_trace_plus(n, &v.fdot[0], &b_prev));
    for i in 0..m {
        let b_next = tensors.b(i + 1, &v.f[i + 1]);
        let a_next = tensors.a(i + 1, &v.fdot[i + 1]);
        let db = bundle.draw.increment(i);
        for al in 0..n {
            for mu in 0..n {
                let noise: f64 = (0..n).map(|rho| (b_prev[al][mu][rho] + b_next[al][mu][rho]) * db[rho]).sum();
                acc[al][mu] += 0.5 * (a_prev[al][mu] + a_next[al][mu]) * dt + 0.5 * noise;
            }
        }
        a_path.push(acc);
        h1dot.push(half_trace_plus(n, &v.fdot[i + 1], &b_next));
        b_prev = b_next;
        a_prev = a_next;
    }
    Ok(TangentProcess {
        n,
        a: a_path,
        h1dot,
        seed: bundle.seed(),
        path_index: bundle.path_index(),
        tag: v.tag.clone(),
        driver: conn.is_driver(),
    })
}

/// `ḟ + ½ Σ_μ b_{μ,μ}`.
fn half_trace_plus(n: usize, fdot: &Vector, b: &Tensor3) -> Vector {
    let mut h = *fdot;
    for (al, x) in h.iter_mut().enumerate().take(n) {
        *x += 0.5 * (0..n).map(|mu| b[al][mu][mu]).sum::<f64>();
    }
    h
}

pub fn build_tangent_process(bundle: &PathBundle, conn: &ConnectionSpec, v: &NcmVector) -> Result<TangentProcess> {
    let tensors = FrameTensors::new(bundle, conn)?;
    build_with_tensors(bundle, &tensors, conn, v)
}

/// How the rotation part enters the perturbed noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extension {
    /// `Ã = ½(A − ᵗA)`: the only choice giving a zero-divergence vector field.
    Skew,
    /// The raw `A`; reproduces `D_v p = v` for every metric connection.
    Full,
}

/// `sup_t ‖(D_v p)(t) − v(t)‖`, measured in the ambient space. `D_v p` is the
/// central difference of paths driven by `dB + ±ε(Δf + ½(A_i + A_{i+1})ΔB_i)`.
pub fn verify_dv_consistency(bundle: &PathBundle, conn: &ConnectionSpec, v: &NcmVector, process: &TangentProcess, ext: Extension, eps: f64) -> Result<f64> {
    let model = conn.model();
    let n = model.dim();
    let m = bundle.grid.steps();
    let rot = |i: usize| match ext {
        Extension::Skew => process.skew(i),
        Extension::Full => process.a[i],
    };
    let mut direction = vec![0.0; m * n];
    let mut r_prev = rot(0);
    for i in 0..m {
        let r_next = rot(i + 1);
        let db = bundle.draw.increment(i);
        for al in 0..n {
            let turn: f64 = (0..n).map(|mu| (r_prev[al][mu] + r_next[al][mu]) * db[mu]).sum();
            direction[i * n + al] = v.f[i + 1][al] - v.f[i][al] + 0.5 * turn;
        }
        r_prev = r_next;
    }
    let perturbed = |sign: f64| -> Result<Vec<ChartPoint>> {
        let inc: Vec<f64> = bundle.draw.increments.iter().zip(&direction).map(|(b, d)| b + sign * eps * d).collect();
        let draw = BrownianDraw::from_increments(bundle.grid, n, inc)?;
        simulate_forced(conn, &draw, bundle.start, bundle.frame0, &bundle.switches)
    };
    let plus = perturbed(1.0)?;
    let minus = perturbed(-1.0)?;
    let amb = model.ambient_dim();
    let mut worst: f64 = 0.0;
    for i in 0..=m {
        let yp = model.embed(&plus[i])?;
        let ym = model.embed(&minus[i])?;
        let base = bundle.point(i);
        let jac = model.embed_jacobian(&base)?;
        let vi = mat_vec(n, &bundle.z[i], &v.f[i]);
        let mut err = 0.0;
        for a in 0..amb {
            let mut diff = yp[a] - ym[a];
            if model.kind() == ModelKind::Torus {
                diff -= diff.round();
            }
            let dv: f64 = (0..n).map(|k| jac[a][k] * vi[k]).sum();
            err += (diff / (2.0 * eps) - dv).powi(2);
        }
        worst = worst.max(err.sqrt());
    }
    Ok(worst)
}

/// A covariant 2-tensor field for the tensor-derivative formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CovariantTensor {
    Metric,
    /// Constant components in every chart.
    Constant(Matrix),
}

impl CovariantTensor {
    fn components(&self, model: &ManifoldModel, cp: &ChartPoint) -> Result<Matrix> {
        match self {
            CovariantTensor::Metric => model.metric(cp),
            CovariantTensor::Constant(c) => Ok(*c),
        }
    }

    /// `d[r][a][b] = ∂_r C_ab`.
    fn derivative(&self, model: &ManifoldModel, cp: &ChartPoint) -> Result<Tensor3> {
        match self {
            CovariantTensor::Metric => model.metric_derivative(cp),
            CovariantTensor::Constant(_) => Ok(ZERO_T3),
        }
    }
}

/// `(∇_v C)(x₁, x₂) − C(T(x₁,v) + Z Ã Z⁻¹ x₁, x₂) − C(x₁, T(x₂,v) + Z Ã Z⁻¹ x₂)`
/// at grid time `t`, where `x₁, x₂` are transported vectors on the bundle.
pub fn tensor_dv(
    bundle: &PathBundle,
    conn: &ConnectionSpec,
    v: &NcmVector,
    process: &TangentProcess,
    c: &CovariantTensor,
    xs: &[Vec<Vector>],
    t: f64,
) -> Result<f64> {
    if xs.len() != 2 {
        return Err(Error::Contract(format!("tensor arity is 2, got {} vectors", xs.len())));
    }
    let model = conn.model();
    let n = model.dim();
    let i = bundle.grid.index_of(t)?;
    let cp = bundle.point(i);
    let z = &bundle.z[i];
    let zinv = inverse(n, z).ok_or(Error::IllConditioned {
        step: i,
        condition: f64::INFINITY,
    })?;
    let vi = mat_vec(n, z, &v.f[i]);
    let gamma = conn.christoffel(&cp)?;
    let cc = c.components(model, &cp)?;
    let dc = c.derivative(model, &cp)?;
    let (x1, x2) = (xs[0][i], xs[1][i]);

    let mut nabla = 0.0;
    for r in 0..n {
        for a in 0..n {
            for b in 0..n {
                let mut d = dc[r][a][b];
                for l in 0..n {
                    d -= gamma[l][r][a] * cc[l][b] + gamma[l][r][b] * cc[a][l];
                }
                nabla += vi[r] * d * x1[a] * x2[b];
            }
        }
    }
    let rot = mat_mul(n, z, &mat_mul(n, &process.skew(i), &zinv));
    let moved = |x: &Vector| -> Result<Vector> {
        let mut y = conn.torsion_apply(&cp, x, &vi)?;
        let r = mat_vec(n, &rot, x);
        for k in 0..n {
            y[k] += r[k];
        }
        Ok(y)
    };
    let y1 = moved(&x1)?;
    let y2 = moved(&x2)?;
    Ok(nabla - quad(n, &cc, &y1, &x2) - quad(n, &cc, &x1, &y2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{parse_connection, parse_model};
    use crate::path_space::{frame_defect, simulate_default, simulate_with_draw};
    use crate::sde::TimeGrid;
    use crate::tangent::{basis_vector, FourierMode};

    fn setup(model: &str, conn: &str, steps: usize) -> (ConnectionSpec, PathBundle) {
        let m = parse_model(model).unwrap();
        let c = parse_connection(conn, &m).unwrap();
        let b = simulate_default(&c, TimeGrid::new(steps).unwrap(), 42, 0).unwrap();
        (c, b)
    }

    #[test]
    fn flat_levi_civita_gives_zero_rotation() {
        let (c, b) = setup("t2", "lc", 256);
        let v = basis_vector(b.grid, 2, FourierMode::Sin(2), 1).unwrap();
        let tp = build_tangent_process(&b, &c, &v).unwrap();
        assert!(tp.a.iter().all(|a| a.iter().flatten().all(|x| *x == 0.0)));
        assert_eq!(tp.h1dot, v.fdot);
    }

    #[test]
    fn process_is_linear_in_the_direction() {
        let (c, b) = setup("s2", "lc", 256);
        let v = basis_vector(b.grid, 2, FourierMode::Cos(1), 0).unwrap();
        let w = basis_vector(b.grid, 2, FourierMode::Sin(3), 1).unwrap();
        let ft = FrameTensors::new(&b, &c).unwrap();
        let a = build_with_tensors(&b, &ft, &c, &v).unwrap();
        let a2 = build_with_tensors(&b, &ft, &c, &v.scaled(2.0)).unwrap();
        for (x, y) in a.a.iter().zip(&a2.a) {
            for r in 0..2 {
                for s in 0..2 {
                    assert_eq!(2.0 * x[r][s], y[r][s]);
                }
            }
        }
        let aw = build_with_tensors(&b, &ft, &c, &w).unwrap();
        let sum = build_with_tensors(&b, &ft, &c, &v.add(&w).unwrap()).unwrap();
        for i in 0..=256 {
            for r in 0..2 {
                for s in 0..2 {
                    assert!((a.a[i][r][s] + aw.a[i][r][s] - sum.a[i][r][s]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn process_is_adapted() {
        let (c, b) = setup("s2", "lc", 256);
        let cut = simulate_with_draw(&c, b.draw.truncated_after(100), b.start, b.frame0).unwrap();
        let v = basis_vector(b.grid, 2, FourierMode::Cos(2), 1).unwrap();
        let full = build_tangent_process(&b, &c, &v).unwrap();
        let early = build_tangent_process(&cut, &c, &v).unwrap();
        assert_eq!(full.a[..=100], early.a[..=100]);
    }

    #[test]
    fn driver_connection_gives_antisymmetric_rotation() {
        for (model, conn) in [("s2", "lc"), ("s3", "structure:lambda=1")] {
            let (c, b) = setup(model, conn, 1024);
            let n = c.dim();
            let v = basis_vector(b.grid, n, FourierMode::Cos(1), 0).unwrap();
            let tp = build_tangent_process(&b, &c, &v).unwrap();
            let fd = frame_defect(&b, c.model()).unwrap();
            assert!(tp.antisymmetry_defect() <= 10.0 * fd.max(1e-12), "{model} {conn}");
        }
    }

    #[test]
    fn vector_torsion_control_is_not_antisymmetric() {
        let (c, b) = setup("s2", "vector:strength=1", 1024);
        let v = basis_vector(b.grid, 2, FourierMode::Cos(1), 0).unwrap();
        let tp = build_tangent_process(&b, &c, &v).unwrap();
        assert!(!tp.driver);
        assert!(tp.antisymmetry_defect() > 0.1);
    }

    #[test]
    fn metric_is_annihilated_along_driver_directions() {
        let (c, b) = setup("s3", "structure:lambda=1", 1024);
        let v = basis_vector(b.grid, 3, FourierMode::Sin(1), 2).unwrap();
        let tp = build_tangent_process(&b, &c, &v).unwrap();
        let x0 = [column(3, &b.z[0], 0), column(3, &b.z[0], 1)];
        let xs = crate::path_space::spt_transport_many(&b, &c, &x0).unwrap();
        let r = tensor_dv(&b, &c, &v, &tp, &CovariantTensor::Metric, &xs, 0.5).unwrap();
        assert!(r.abs() < 1e-3, "{r}");
    }
}
