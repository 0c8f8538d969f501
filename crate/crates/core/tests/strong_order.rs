use pathlab_core::sde::*;

fn exp_of_b1(d: &BrownianDraw) -> Vec<f64> {
    vec![d.value_at(d.grid.steps())[0].exp()]
}

#[test]
fn scalar_exponential_converges() {
    let sys = LinearSystem::scalar_exponential();
    let r = estimate_strong_order(&sys, &[1.0], &[64, 128, 256, 512, 1024], 400, 5, Some(&exp_of_b1)).unwrap();
    let fit = r.fit.unwrap();
    // Scalar noise commutes with itself, so Heun reaches order one here.
    assert!(fit.slope >= 0.45, "{fit:?}");
    assert!(fit.slope < 1.3, "{fit:?}");
}

#[test]
fn non_commutative_noise_has_order_one_half() {
    let sys = LinearSystem::non_commutative();
    let r = estimate_strong_order(&sys, &[1.0, 1.0], &[64, 128, 256, 512, 1024], 400, 5, None).unwrap();
    let fit = r.fit.unwrap();
    assert!((0.4..=0.7).contains(&fit.slope), "{fit:?}");
}

#[test]
fn deterministic_limit_has_order_two() {
    let sys = LinearSystem::decay();
    let exact = |_: &BrownianDraw| vec![(-1.0f64).exp()];
    let r = estimate_strong_order(&sys, &[1.0], &[8, 16, 32, 64], 1, 0, Some(&exact)).unwrap();
    assert!((r.fit.unwrap().slope - 2.0).abs() < 0.3);
}

#[test]
fn identity_map_has_no_error() {
    let sys = LinearSystem {
        dim: 1,
        drift: vec![0.0],
        noise: vec![vec![0.0]],
    };
    let exact = |_: &BrownianDraw| vec![3.0];
    let r = estimate_strong_order(&sys, &[3.0], &[8, 16, 32], 10, 0, Some(&exact)).unwrap();
    assert!(r.errors.iter().all(|e| *e == 0.0));
}

#[test]
fn rotation_flow_nearly_preserves_the_norm() {
    let sys = LinearSystem::rotation();
    let mut worst = Vec::new();
    for m in [256, 1024] {
        let grid = TimeGrid::new(m).unwrap();
        let d = BrownianDraw::sample(grid, 1, 9, 0).unwrap();
        let path = integrate_stratonovich(&sys, &[1.0, 0.0], 0, grid, &d.increments, &mut NoCharts).unwrap();
        let w = (0..=m).map(|i| (path.state(i).iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs()).fold(0.0, f64::max);
        worst.push(w);
    }
    assert!(worst[0] < 0.05, "{worst:?}");
    assert!(worst[1] < worst[0]);
}

#[test]
fn zero_drift_identity_diffusion_is_a_cumulative_sum() {
    struct Identity;
    impl StratonovichSystem for Identity {
        fn state_dim(&self) -> usize {
            2
        }
        fn noise_dim(&self) -> usize {
            2
        }
        fn drift(&self, _: usize, _: f64, _: &[f64], out: &mut [f64]) -> pathlab_core::Result<()> {
            out.fill(0.0);
            Ok(())
        }
        fn diffusion(&self, _: usize, _: f64, _: &[f64], out: &mut [f64]) -> pathlab_core::Result<()> {
            out.copy_from_slice(&[1.0, 0.0, 0.0, 1.0]);
            Ok(())
        }
    }
    let grid = TimeGrid::new(128).unwrap();
    let d = BrownianDraw::sample(grid, 2, 1, 3).unwrap();
    let path = integrate_stratonovich(&Identity, &[0.0, 0.0], 0, grid, &d.increments, &mut NoCharts).unwrap();
    for i in [1, 64, 128] {
        assert_eq!(path.state(i), d.value_at(i).as_slice());
    }
}
