use num::{BigInt, Zero};
use pathlab_chaos::{
    adjointness_defect, clark_ocone_defect, grad, leibniz_defect, AntisymOperator, Caps, ChaosFunction, Derivation, MultiIndex, Rational,
    VectorField,
};
use proptest::prelude::*;

const N: usize = 3;

fn rational(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Random polynomial in three coordinates of order at most three.
fn poly() -> impl Strategy<Value = ChaosFunction<Rational>> {
    prop::collection::vec((prop::array::uniform3(0u8..=3), -6i64..=6, 1i64..=4), 1..6).prop_map(|terms| {
        let terms = terms
            .into_iter()
            .filter(|(a, _, _)| a.iter().map(|&x| x as usize).sum::<usize>() <= 3)
            .map(|(a, p, q)| (a.to_vec() as MultiIndex, rational(p, q)));
        ChaosFunction::from_terms(N, Caps::default(), terms).unwrap()
    })
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, N)
}

proptest! {
    #[test]
    fn product_matches_pointwise_product(f in poly(), g in poly(), w in point()) {
        let fg = f.product(&g).unwrap();
        let expected = f.eval(&w) * g.eval(&w);
        prop_assert!((fg.eval(&w) - expected).abs() <= 1e-9 * (1.0 + expected.abs()));
        prop_assert_eq!(fg, g.product(&f).unwrap());
    }

    #[test]
    fn gradient_divergence_adjoint(f in poly(), g in poly(), phi in poly()) {
        let x = VectorField::new(vec![f, g, ChaosFunction::zero(N, Caps::default()).unwrap()]).unwrap();
        prop_assert!(adjointness_defect(&x, &phi).unwrap().is_zero());
        let gx = grad(&phi).unwrap();
        prop_assert!(adjointness_defect(&gx, &phi).unwrap().is_zero());
    }

    #[test]
    fn ou_powers_invert(f in poly(), z in 1i32..4) {
        prop_assert_eq!(f.ou_power(z).unwrap().ou_power(-z).unwrap(), f);
    }

    #[test]
    fn conditional_expectation_is_a_projection(f in poly(), k in 0usize..=N) {
        let e = f.cond_expect(k).unwrap();
        prop_assert_eq!(e.cond_expect(k).unwrap(), e.clone());
        prop_assert_eq!(e.mean(), f.mean());
    }

    #[test]
    fn clark_ocone_reconstructs(f in poly()) {
        prop_assert!(clark_ocone_defect(&f).unwrap().is_zero());
    }

    #[test]
    fn div_a_grad_is_a_derivation(f in poly(), g in poly()) {
        let d = Derivation::DivAGrad(AntisymOperator::rotation_pairs(N, 1).unwrap());
        prop_assert!(leibniz_defect(&d, &f, &g).unwrap().is_zero());
    }
}
