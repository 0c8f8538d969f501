use pathlab_core::geometry::{check_total_antisymmetry, parse_connection, parse_model, ChartPoint};
use pathlab_core::linalg::{mat_mul, max_abs, transpose, Matrix, ZERO_MAT};
use pathlab_core::morphism::rotation;
use proptest::prelude::*;

const SPHERE_CONNECTIONS: &[(&str, &str)] = &[
    ("s2", "lc"),
    ("s2", "vector:strength=1"),
    ("s3", "lc"),
    ("s3", "structure:lambda=1"),
    ("s3", "vector:strength=0.5"),
];

/// Chart coordinates whose image in the opposite chart is also trusted.
fn chart_point(n: usize) -> impl Strategy<Value = ChartPoint> {
    (0usize..2, prop::collection::vec(-1.0f64..1.0, n), 0.6f64..1.6).prop_filter_map("zero direction", move |(chart, dir, r)| {
        let len = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        (len > 1e-3).then(|| ChartPoint::new(chart, &dir.iter().map(|x| x * r / len).collect::<Vec<_>>()))
    })
}

fn gap(n: usize, a: &Matrix, b: &Matrix) -> f64 {
    let mut d = ZERO_MAT;
    for i in 0..n {
        for j in 0..n {
            d[i][j] = a[i][j] - b[i][j];
        }
    }
    max_abs(n, &d)
}

proptest! {
    #[test]
    fn sphere_transition_is_an_isometric_involution(cp in chart_point(2)) {
        let m = parse_model("s2").unwrap();
        let other = 1 - cp.chart;
        let (y, jac) = m.transition(&cp, other).unwrap();
        let (back, _) = m.transition(&y, cp.chart).unwrap();
        prop_assert!((back.x[0] - cp.x[0]).abs() < 1e-12 && (back.x[1] - cp.x[1]).abs() < 1e-12);
        let e1 = m.embed(&cp).unwrap();
        let e2 = m.embed(&y).unwrap();
        prop_assert!((0..3).all(|k| (e1[k] - e2[k]).abs() < 1e-12));
        // Jᵀ g' J = g.
        let pulled = mat_mul(2, &transpose(2, &jac), &mat_mul(2, &m.metric(&y).unwrap(), &jac));
        prop_assert!(gap(2, &pulled, &m.metric(&cp).unwrap()) < 1e-12);
    }

    #[test]
    fn built_in_connections_are_metric(k in 0usize..SPHERE_CONNECTIONS.len(), seed in chart_point(3)) {
        let (model_id, conn_id) = SPHERE_CONNECTIONS[k];
        let m = parse_model(model_id).unwrap();
        let n = m.dim();
        let cp = ChartPoint::new(seed.chart, &seed.x[..n]);
        let conn = parse_connection(conn_id, &m).unwrap();
        prop_assert!(conn.metric_compatibility_defect(&cp).unwrap() < 1e-9);
        let lowered = conn.torsion_lowered(&cp).unwrap();
        prop_assert_eq!(check_total_antisymmetry(n, &lowered).is_ok(), conn.is_driver());
    }

    #[test]
    fn connection_ids_round_trip(k in 0usize..SPHERE_CONNECTIONS.len()) {
        let (model_id, conn_id) = SPHERE_CONNECTIONS[k];
        let m = parse_model(model_id).unwrap();
        let conn = parse_connection(conn_id, &m).unwrap();
        let again = parse_connection(conn.id(), &m).unwrap();
        prop_assert_eq!(again.id(), conn.id());
        prop_assert_eq!(again.is_driver(), conn.is_driver());
    }

    #[test]
    fn plane_rotations_compose(a in -7.0f64..7.0, b in -7.0f64..7.0) {
        let ab = mat_mul(2, &rotation(a), &rotation(b));
        prop_assert!(gap(2, &ab, &rotation(a + b)) < 1e-12);
        let rrt = mat_mul(2, &rotation(a), &transpose(2, &rotation(a)));
        prop_assert!(gap(2, &rrt, &pathlab_core::linalg::identity(2)) < 1e-15);
    }
}
