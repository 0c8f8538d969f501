use crate::error::{Error, Result};
use crate::linalg::*;
use crate::sde::BrownianDraw;

/// Orthogonality tolerance for `ᵗU U = Id`.
pub const ORTHOGONALITY_TOL: f64 = 1e-12;

/// Planar rotation by `angle`.
pub fn rotation(angle: f64) -> Matrix {
    let (s, c) = angle.sin_cos();
    let mut r = ZERO_MAT;
    r[0][0] = c;
    r[0][1] = -s;
    r[1][0] = s;
    r[1][1] = c;
    r
}

/// How `U(t, ω)` is computed from the path prefix.
#[derive(Debug, Clone, PartialEq)]
pub enum UnitaryRule {
    Identity { n: usize },
    Constant { n: usize, matrix: Matrix },
    /// `U(t) = R(rate·t)`, deterministic, n = 2.
    DeterministicAngle { rate: f64 },
    /// `U(t) = R(W_t(h)) = R(ḣ·B_t)` for constant `ḣ`, n = 2.
    GaussianAngle { hdot: [f64; 2] },
    /// `U(t) = R(arg B_t)`, `U = Id` while `B_t = 0`, n = 2.
    PathAngle,
    /// `U(t) = sign(B_t)` with `sign(0) = +1`, n = 1.
    Sign,
}

impl UnitaryRule {
    pub fn dim(&self) -> usize {
        match self {
            UnitaryRule::Identity { n } | UnitaryRule::Constant { n, .. } => *n,
            UnitaryRule::Sign => 1,
            _ => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            UnitaryRule::Identity { .. } | UnitaryRule::Constant { .. } => "constant",
            UnitaryRule::DeterministicAngle { .. } => "deterministic-path",
            _ => "state-dependent",
        }
    }

    pub fn is_deterministic(&self) -> bool {
        !matches!(self.kind(), "state-dependent")
    }

    /// `U(t_i)` given `t_i` and `B(t_i)`, which only involves increments before step `i`.
    pub fn at(&self, t: f64, b: &[f64]) -> Matrix {
        match self {
            UnitaryRule::Identity { n } => identity(*n),
            UnitaryRule::Constant { matrix, .. } => *matrix,
            UnitaryRule::DeterministicAngle { rate } => rotation(rate * t),
            UnitaryRule::GaussianAngle { hdot } => rotation(hdot[0] * b[0] + hdot[1] * b[1]),
            UnitaryRule::PathAngle => {
                let delta = (b[0] * b[0] + b[1] * b[1]).sqrt();
                if delta == 0.0 {
                    identity(2)
                } else {
                    // Rows (B¹, −B²)/Δ and (B², B¹)/Δ: rotation by +arg B.
                    let (c, s) = (b[0] / delta, b[1] / delta);
                    let mut u = ZERO_MAT;
                    u[0][0] = c;
                    u[0][1] = -s;
                    u[1][0] = s;
                    u[1][1] = c;
                    u
                }
            }
            UnitaryRule::Sign => {
                let mut u = ZERO_MAT;
                u[0][0] = if b[0] >= 0.0 { 1.0 } else { -1.0 };
                u
            }
        }
    }

    /// `U(t_i)` for `i = 0..M−1`, checked for orthogonality.
    pub fn along(&self, draw: &BrownianDraw) -> Result<Vec<Matrix>> {
        let n = self.dim();
        if draw.dims != n {
            return Err(Error::Contract(format!("rule acts on R^{n}, draw has {} components", draw.dims)));
        }
        let m = draw.grid.steps();
        let mut b = vec![0.0; n];
        let mut out = Vec::with_capacity(m);
        for i in 0..m {
            let u = self.at(draw.grid.t(i), &b);
            let defect = orthogonality_defect(n, &u);
            if defect > ORTHOGONALITY_TOL {
                return Err(Error::NotOrthogonal { step: i, defect });
            }
            out.push(u);
            for (c, d) in b.iter_mut().zip(draw.increment(i)) {
                *c += d;
            }
        }
        Ok(out)
    }
}

/// `max |ᵗU U − Id|`.
pub fn orthogonality_defect(n: usize, u: &Matrix) -> f64 {
    let g = mat_mul(n, &transpose(n, u), u);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[i][j] - want).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sde::TimeGrid;

    #[test]
    fn path_angle_is_identity_at_start_and_rotates_b_onto_axis() {
        let grid = TimeGrid::new(16).unwrap();
        let draw = BrownianDraw::sample(grid, 2, 3, 0).unwrap();
        let us = UnitaryRule::PathAngle.along(&draw).unwrap();
        assert_eq!(us[0], identity(2));
        let b = draw.value_at(5);
        // U⁻¹B = ᵗU B lies on the positive first axis.
        let ub = mat_vec(2, &transpose(2, &us[5]), &vector_from(&b));
        assert!(ub[1].abs() < 1e-15 && ub[0] > 0.0);
    }

    #[test]
    fn non_orthogonal_constant_is_rejected() {
        let grid = TimeGrid::new(4).unwrap();
        let draw = BrownianDraw::sample(grid, 2, 3, 0).unwrap();
        let mut m = identity(2);
        m[0][1] = 0.1;
        let err = UnitaryRule::Constant { n: 2, matrix: m }.along(&draw).unwrap_err();
        assert!(matches!(err, Error::NotOrthogonal { step: 0, .. }));
    }

    #[test]
    fn sign_rule_uses_plus_one_at_zero() {
        assert_eq!(UnitaryRule::Sign.at(0.0, &[0.0])[0][0], 1.0);
        assert_eq!(UnitaryRule::Sign.at(0.5, &[-1e-9])[0][0], -1.0);
    }
}
