//! Small dense tensors over at most four dimensions.
//!
//! Every geometric object in the crate lives on a manifold of dimension
//! `n <= MAX_DIM`, so tensors are stored in fixed-size stack arrays and only
//! the leading `n` slots are meaningful. The hot Heun loops never allocate.

pub const MAX_DIM: usize = 4;

pub type Vector = [f64; MAX_DIM];
/// Row-major: `m[row][col]`.
pub type Matrix = [[f64; MAX_DIM]; MAX_DIM];
/// `t[k][i][j]`.
pub type Tensor3 = [[[f64; MAX_DIM]; MAX_DIM]; MAX_DIM];
/// `t[a][b][c][d]`.
pub type Tensor4 = [[[[f64; MAX_DIM]; MAX_DIM]; MAX_DIM]; MAX_DIM];

pub const ZERO_VEC: Vector = [0.0; MAX_DIM];
pub const ZERO_MAT: Matrix = [[0.0; MAX_DIM]; MAX_DIM];
pub const ZERO_T3: Tensor3 = [[[0.0; MAX_DIM]; MAX_DIM]; MAX_DIM];
pub const ZERO_T4: Tensor4 = [[[[0.0; MAX_DIM]; MAX_DIM]; MAX_DIM]; MAX_DIM];

pub fn identity(n: usize) -> Matrix {
    let mut m = ZERO_MAT;
    for (i, row) in m.iter_mut().enumerate().take(n) {
        row[i] = 1.0;
    }
    m
}

pub fn vector_from(slice: &[f64]) -> Vector {
    let mut v = ZERO_VEC;
    v[..slice.len()].copy_from_slice(slice);
    v
}

pub fn dot(n: usize, a: &Vector, b: &Vector) -> f64 {
    (0..n).map(|i| a[i] * b[i]).sum()
}

pub fn norm(n: usize, a: &Vector) -> f64 {
    dot(n, a, a).sqrt()
}

pub fn mat_vec(n: usize, m: &Matrix, v: &Vector) -> Vector {
    let mut out = ZERO_VEC;
    for i in 0..n {
        out[i] = (0..n).map(|j| m[i][j] * v[j]).sum();
    }
    out
}

pub fn mat_mul(n: usize, a: &Matrix, b: &Matrix) -> Matrix {
    let mut out = ZERO_MAT;
    for i in 0..n {
        for j in 0..n {
            out[i][j] = (0..n).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn transpose(n: usize, m: &Matrix) -> Matrix {
    let mut out = ZERO_MAT;
    for i in 0..n {
        for j in 0..n {
            out[i][j] = m[j][i];
        }
    }
    out
}

/// Column `c` of `m`.
pub fn column(n: usize, m: &Matrix, c: usize) -> Vector {
    let mut v = ZERO_VEC;
    for (i, x) in v.iter_mut().enumerate().take(n) {
        *x = m[i][c];
    }
    v
}

pub fn set_column(n: usize, m: &mut Matrix, c: usize, v: &Vector) {
    for i in 0..n {
        m[i][c] = v[i];
    }
}

/// Bilinear form `aᵀ g b`.
pub fn quad(n: usize, g: &Matrix, a: &Vector, b: &Vector) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += a[i] * g[i][j] * b[j];
        }
    }
    s
}

pub fn max_abs(n: usize, m: &Matrix) -> f64 {
    let mut s: f64 = 0.0;
    for row in m.iter().take(n) {
        for x in row.iter().take(n) {
            s = s.max(x.abs());
        }
    }
    s
}

pub fn frobenius(n: usize, m: &Matrix) -> f64 {
    let mut s = 0.0;
    for row in m.iter().take(n) {
        for x in row.iter().take(n) {
            s += x * x;
        }
    }
    s.sqrt()
}

/// Gauss-Jordan inverse with partial pivoting; `None` when singular.
pub fn inverse(n: usize, m: &Matrix) -> Option<Matrix> {
    let mut a = *m;
    let mut inv = identity(n);
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 || !a[pivot][col].is_finite() {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col];
        for j in 0..n {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for r in 0..n {
            if r != col {
                let f = a[r][col];
                if f != 0.0 {
                    for j in 0..n {
                        a[r][j] -= f * a[col][j];
                        inv[r][j] -= f * inv[col][j];
                    }
                }
            }
        }
    }
    Some(inv)
}

/// Frobenius condition estimate `‖m‖_F ‖m⁻¹‖_F`, an upper bound for the
/// spectral condition number.
pub fn condition_estimate(n: usize, m: &Matrix, inv: &Matrix) -> f64 {
    frobenius(n, m) * frobenius(n, inv)
}

/// Determinant by LU without pivot bookkeeping beyond sign.
pub fn determinant(n: usize, m: &Matrix) -> f64 {
    let mut a = *m;
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap_or(col);
        if a[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            a.swap(col, pivot);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for j in col..n {
                a[r][j] -= f * a[col][j];
            }
        }
    }
    det
}

/// Levi-Civita symbol on three indices.
pub fn levi_civita3(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// `Σ_k x[k]·x[k]` over a flattened slice, used by estimators.
pub fn sum_sq(xs: &[f64]) -> f64 {
    xs.iter().map(|x| x * x).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_round_trips() {
        let m = [
            [2.0, 1.0, 0.5, 0.0],
            [0.0, 3.0, 1.0, 0.0],
            [1.0, 0.0, 1.5, 0.0],
            [0.0; 4],
        ];
        let inv = inverse(3, &m).unwrap();
        let id = mat_mul(3, &m, &inv);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((id[i][j] - want).abs() < 1e-14);
            }
        }
        assert!((determinant(3, &m) - (2.0 * 4.5 + 1.0 - 0.5 * 3.0)).abs() < 1e-12);
    }

    #[test]
    fn singular_matrix_has_no_inverse() {
        let m = [[1.0, 2.0, 0.0, 0.0], [2.0, 4.0, 0.0, 0.0], [0.0; 4], [0.0; 4]];
        assert!(inverse(2, &m).is_none());
    }
}
