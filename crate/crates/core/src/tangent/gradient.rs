use crate::error::{Error, Result};
use crate::geometry::{ManifoldModel, TestFunction};
use crate::linalg::*;
use crate::path_space::PathBundle;

use super::ncm::{ncm_inner, NcmBasis, NcmVector};

/// `D_v F_{f,t} = ⟨grad f, v(t, ω)⟩` with `v(t) = f^μ(t) Z e_μ`.
pub fn apply_dv_cylinder(bundle: &PathBundle, model: &ManifoldModel, v: &NcmVector, f: &TestFunction, t: f64) -> Result<f64> {
    let i = bundle.grid.index_of(t)?;
    if v.grid != bundle.grid {
        return Err(Error::Contract("NCM vector and bundle use different grids".into()));
    }
    let n = model.dim();
    let (_, grad, _) = f.chart_jet(model, &bundle.point(i))?;
    let vi = mat_vec(n, &bundle.z[i], &v.f[i]);
    Ok(dot(n, &grad, &vi))
}

/// Coefficients `D_{v_i} F_{f,t}` of the truncated gradient in the basis.
pub fn new_grad(bundle: &PathBundle, model: &ManifoldModel, f: &TestFunction, t: f64, basis: &NcmBasis) -> Result<Vec<f64>> {
    let i = bundle.grid.index_of(t)?;
    if basis.grid != bundle.grid {
        return Err(Error::Contract("basis and bundle use different grids".into()));
    }
    let n = model.dim();
    let (_, grad, _) = f.chart_jet(model, &bundle.point(i))?;
    // df(u_μ(t)) once, then every basis element is f_k^μ(t)·df(u_μ).
    let mut du = ZERO_VEC;
    for (mu, d) in du.iter_mut().enumerate().take(n) {
        *d = dot(n, &grad, &column(n, &bundle.z[i], mu));
    }
    Ok(basis.elements.iter().map(|e| dot(n, &e.f[i], &du)).collect())
}

/// `q(df, dg) = Σ_i (D_{v_i} f)(D_{v_i} g)` for coefficient vectors of equal truncation.
pub fn standard_form_q(grad_f: &[f64], grad_g: &[f64]) -> Result<f64> {
    if grad_f.len() != grad_g.len() {
        return Err(Error::Contract(format!(
            "gradients truncated differently ({} vs {} terms)",
            grad_f.len(),
            grad_g.len()
        )));
    }
    Ok(grad_f.iter().zip(grad_g).map(|(a, b)| a * b).sum())
}

/// `⟨w, grad F⟩_H̃` for the truncated gradient with coefficients `coeffs`.
pub fn pair_with_gradient(w: &NcmVector, basis: &NcmBasis, coeffs: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for (e, c) in basis.elements.iter().zip(coeffs) {
        s += c * ncm_inner(w, e)?;
    }
    Ok(s)
}

/// The limit of `q` as the truncation grows: by Parseval on the
/// Cameron–Martin kernel, `t·g(∇f, ∇g)` at `p(t)`.
pub fn q_limit(bundle: &PathBundle, model: &ManifoldModel, f: &TestFunction, g: &TestFunction, t: f64) -> Result<f64> {
    let i = bundle.grid.index_of(t)?;
    let cp = bundle.point(i);
    let n = model.dim();
    let (_, df, _) = f.chart_jet(model, &cp)?;
    let (_, dg, _) = g.chart_jet(model, &cp)?;
    let ginv = model.metric_inverse(&cp)?;
    Ok(t * quad(n, &ginv, &df, &dg))
}
