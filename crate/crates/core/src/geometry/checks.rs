use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::linalg::*;

use super::connection::ConnectionSpec;
use super::functions::TestFunction;
use super::model::{ChartPoint, ManifoldModel};

const WITNESS_COUNT: usize = 5;

/// One sample of the Driver check.
#[derive(Debug, Clone, PartialEq)]
pub struct DriverWitness {
    pub point: ChartPoint,
    pub u: Vector,
    pub v: Vector,
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriverReport {
    pub max_violation: f64,
    pub sample_count: usize,
    /// Largest violations first.
    pub witnesses: Vec<DriverWitness>,
}

/// Gram–Schmidt on the coordinate vectors taken in `order`, so the frame is
/// deterministic. Columns are the frame vectors.
pub fn orthonormal_frame(model: &ManifoldModel, cp: &ChartPoint, order: &[usize]) -> Result<Matrix> {
    let n = model.dim();
    if order.len() != n || (0..n).any(|i| !order.contains(&i)) {
        return Err(Error::Contract(format!("frame order {order:?} is not a permutation of 0..{n}")));
    }
    let g = model.metric(cp)?;
    let mut frame = ZERO_MAT;
    for (slot, &axis) in order.iter().enumerate() {
        let mut v = ZERO_VEC;
        v[axis] = 1.0;
        for prev in 0..slot {
            let e = column(n, &frame, prev);
            let c = quad(n, &g, &v, &e);
            for a in 0..n {
                v[a] -= c * e[a];
            }
        }
        let len = quad(n, &g, &v, &v).sqrt();
        for a in 0..n {
            v[a] /= len;
        }
        set_column(n, &mut frame, slot, &v);
    }
    Ok(frame)
}

/// The default frame: Gram–Schmidt in index order.
pub fn default_frame(model: &ManifoldModel, cp: &ChartPoint) -> Result<Matrix> {
    let order: Vec<usize> = (0..model.dim()).collect();
    orthonormal_frame(model, cp, &order)
}

fn random_unit<R: Rng>(rng: &mut R, n: usize, g: &Matrix) -> Vector {
    loop {
        let mut v = ZERO_VEC;
        for c in v.iter_mut().take(n) {
            *c = 2.0 * rng.random::<f64>() - 1.0;
        }
        let len = quad(n, g, &v, &v).sqrt();
        if len > 1e-3 {
            for c in v.iter_mut().take(n) {
                *c /= len;
            }
            return v;
        }
    }
}

/// Evaluates `|g(T(u,v),u)|` over random points and unit vector pairs.
pub fn check_driver(conn: &ConnectionSpec, samples: usize, seed: u64) -> Result<DriverReport> {
    if samples == 0 {
        return Err(Error::Contract("check_driver needs at least one sample".into()));
    }
    let model = conn.model();
    let n = model.dim();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut witnesses = Vec::with_capacity(samples);
    for idx in 0..samples {
        let mut point = model.sample_point(&mut rng);
        point.chart = idx % model.chart_count();
        let g = model.metric(&point)?;
        let u = random_unit(&mut rng, n, &g);
        let v = random_unit(&mut rng, n, &g);
        let tuv = conn.torsion_apply(&point, &u, &v)?;
        let violation = quad(n, &g, &tuv, &u).abs();
        witnesses.push(DriverWitness { point, u, v, violation });
    }
    witnesses.sort_by(|a, b| b.violation.total_cmp(&a.violation));
    witnesses.truncate(WITNESS_COUNT);
    Ok(DriverReport {
        max_violation: witnesses[0].violation,
        sample_count: samples,
        witnesses,
    })
}

/// `Δf = Σ_i e_i(e_i f) − (∇_{e_i}e_i) f` in the frame built from `order`.
/// The derivatives of the frame cancel between the two terms, leaving
/// `Σ_i e_i^a e_i^b (∂_a∂_b f − Γ^c_{ab} ∂_c f)`.
pub fn laplacian_in_frame(conn: &ConnectionSpec, f: &TestFunction, cp: &ChartPoint, order: &[usize]) -> Result<f64> {
    let model = conn.model();
    let n = model.dim();
    let frame = orthonormal_frame(model, cp, order)?;
    let gamma = conn.christoffel(cp)?;
    let (_, grad, hess) = f.chart_jet(model, cp)?;
    let mut total = 0.0;
    for i in 0..n {
        let e = column(n, &frame, i);
        for a in 0..n {
            for b in 0..n {
                let mut v = hess[a][b];
                for c in 0..n {
                    v -= gamma[c][a][b] * grad[c];
                }
                total += e[a] * e[b] * v;
            }
        }
    }
    Ok(total)
}

pub fn laplacian(conn: &ConnectionSpec, f: &TestFunction, cp: &ChartPoint) -> Result<f64> {
    let order: Vec<usize> = (0..conn.dim()).collect();
    laplacian_in_frame(conn, f, cp, &order)
}

/// `max |Δ₁f − Δ₂f|` over `points`.
pub fn laplacian_compare(c1: &ConnectionSpec, c2: &ConnectionSpec, f: &TestFunction, points: &[ChartPoint]) -> Result<f64> {
    if c1.model() != c2.model() {
        return Err(Error::Contract(format!(
            "connections live on different metrics ({} vs {})",
            c1.model().id(),
            c2.model().id()
        )));
    }
    let mut worst: f64 = 0.0;
    for cp in points {
        let d = laplacian(c1, f, cp)? - laplacian(c2, f, cp)?;
        worst = worst.max(d.abs());
    }
    Ok(worst)
}

/// Deterministic sample points spread over both charts of a model.
pub fn sample_points(model: &ManifoldModel, count: usize, seed: u64) -> Vec<ChartPoint> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let mut cp = model.sample_point(&mut rng);
            cp.chart = i % model.chart_count();
            cp
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levi_civita_driver_violation_is_exactly_zero() {
        for m in [ManifoldModel::sphere(2).unwrap(), ManifoldModel::sphere(3).unwrap(), ManifoldModel::torus()] {
            let r = check_driver(&ConnectionSpec::levi_civita(&m), 200, 7).unwrap();
            assert_eq!(r.max_violation, 0.0);
        }
    }

    #[test]
    fn driver_report_is_sorted_and_deterministic() {
        let s2 = ManifoldModel::sphere(2).unwrap();
        let c = ConnectionSpec::vector(&s2, 1.0);
        let a = check_driver(&c, 100, 3).unwrap();
        let b = check_driver(&c, 100, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.witnesses.windows(2).all(|w| w[0].violation >= w[1].violation));
        assert!(a.max_violation > 0.1);
    }

    #[test]
    fn structure_torsion_satisfies_driver() {
        let s3 = ManifoldModel::sphere(3).unwrap();
        let r = check_driver(&ConnectionSpec::structure(&s3, 1.0).unwrap(), 500, 1).unwrap();
        assert!(r.max_violation < 1e-12);
    }

    #[test]
    fn frame_is_orthonormal() {
        let s3 = ManifoldModel::sphere(3).unwrap();
        for cp in sample_points(&s3, 10, 2) {
            let e = orthonormal_frame(&s3, &cp, &[2, 0, 1]).unwrap();
            let g = s3.metric(&cp).unwrap();
            let gram = mat_mul(3, &transpose(3, &e), &mat_mul(3, &g, &e));
            for i in 0..3 {
                for j in 0..3 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((gram[i][j] - want).abs() < 1e-14);
                }
            }
        }
        assert!(orthonormal_frame(&s3, &s3.origin(), &[0, 0, 1]).is_err());
    }

    #[test]
    fn laplacian_of_height_is_eigenfunction() {
        for n in [2, 3] {
            let m = ManifoldModel::sphere(n).unwrap();
            let c = ConnectionSpec::levi_civita(&m);
            let f = TestFunction::height(&m);
            for cp in sample_points(&m, 20, 3) {
                let lap = laplacian(&c, &f, &cp).unwrap();
                let val = f.value(&m, &cp).unwrap();
                assert!((lap + n as f64 * val).abs() < 1e-12, "{lap} vs {}", -(n as f64) * val);
            }
        }
    }

    #[test]
    fn laplacian_is_frame_independent() {
        let s3 = ManifoldModel::sphere(3).unwrap();
        let c = ConnectionSpec::vector(&s3, 0.5);
        let f = TestFunction::Product(0, 3);
        for cp in sample_points(&s3, 10, 4) {
            let a = laplacian_in_frame(&c, &f, &cp, &[0, 1, 2]).unwrap();
            let b = laplacian_in_frame(&c, &f, &cp, &[2, 1, 0]).unwrap();
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn mismatched_models_are_a_contract_error() {
        let a = ConnectionSpec::levi_civita(&ManifoldModel::sphere(2).unwrap());
        let b = ConnectionSpec::levi_civita(&ManifoldModel::torus());
        assert!(matches!(
            laplacian_compare(&a, &b, &TestFunction::Constant(1.0), &[]),
            Err(Error::Contract(_))
        ));
    }
}
