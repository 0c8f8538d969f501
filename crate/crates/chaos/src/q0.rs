use crate::coeff::Coeff;
use crate::error::{ChaosError, Result};
use crate::field::{grad, pair, partial};
use crate::function::ChaosFunction;

/// `α = Σ_j h_j d g_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Covector<C: Coeff> {
    pub terms: Vec<(ChaosFunction<C>, ChaosFunction<C>)>,
}

impl<C: Coeff> Covector<C> {
    /// `df`.
    pub fn exact(f: &ChaosFunction<C>) -> Result<Self> {
        let one = ChaosFunction::constant(f.n(), f.caps(), C::one())?;
        Ok(Covector {
            terms: vec![(one, f.clone())],
        })
    }

    pub fn n(&self) -> Option<usize> {
        self.terms.first().map(|(h, _)| h.n())
    }

    /// `α(e_i) = Σ_j h_j ∂_i g_j`.
    pub fn on_coordinate(&self, i: usize) -> Result<ChaosFunction<C>> {
        let (first, _) = self.terms.first().ok_or_else(|| ChaosError::Invalid("empty covector".into()))?;
        let mut acc = ChaosFunction::zero(first.n(), first.caps())?;
        for (h, g) in &self.terms {
            acc = acc.add(&h.product(&partial(g, i)?)?)?;
        }
        Ok(acc)
    }
}

/// `q₀(α, β) = Σ_i α(e_i) β(e_i)`.
pub fn fundamental_q0<C: Coeff>(alpha: &Covector<C>, beta: &Covector<C>) -> Result<ChaosFunction<C>> {
    let n = match (alpha.n(), beta.n()) {
        (Some(a), Some(b)) if a == b => a,
        (Some(a), Some(b)) => return Err(ChaosError::Dimension(a, b)),
        _ => return Err(ChaosError::Invalid("empty covector".into())),
    };
    let caps = alpha.terms[0].0.caps();
    let mut acc = ChaosFunction::zero(n, caps)?;
    for i in 0..n {
        acc = acc.add(&alpha.on_coordinate(i)?.product(&beta.on_coordinate(i)?)?)?;
    }
    Ok(acc)
}

/// `q₀(df, dg) − ⟨grad f, grad g⟩`.
pub fn q0_gradient_defect<C: Coeff>(f: &ChaosFunction<C>, g: &ChaosFunction<C>) -> Result<C> {
    let q = fundamental_q0(&Covector::exact(f)?, &Covector::exact(g)?)?;
    q.distance_sq(&pair(&grad(f)?, &grad(g)?)?)
}

/// Finite-N non-degeneracy: `q₀(α, α) = 0` exactly when every `α(e_i)` vanishes,
/// and otherwise `E q₀(α, α) > 0`.
pub fn q0_nondegenerate<C: Coeff>(alpha: &Covector<C>) -> Result<bool> {
    let n = alpha.n().ok_or_else(|| ChaosError::Invalid("empty covector".into()))?;
    let q = fundamental_q0(alpha, alpha)?;
    let annihilates = (0..n).map(|i| alpha.on_coordinate(i).map(|c| c.is_zero())).collect::<Result<Vec<_>>>()?;
    let all_zero = annihilates.iter().all(|z| *z);
    Ok(if all_zero { q.is_zero() } else { q.mean() > C::zero() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Rational;
    use crate::function::Caps;

    type F = ChaosFunction<Rational>;

    #[test]
    fn examples() {
        let caps = Caps::default();
        let w = F::coordinate(1, caps, 0).unwrap();
        let dw = Covector::exact(&w).unwrap();
        assert_eq!(fundamental_q0(&dw, &dw).unwrap(), F::constant(1, caps, Rational::from_i64(1)).unwrap());
        let dw2 = Covector::exact(&w.product(&w).unwrap()).unwrap();
        assert_eq!(fundamental_q0(&dw2, &dw).unwrap(), w.scale(&Rational::from_i64(2)));
    }

    #[test]
    fn vanishing_combination_is_detected() {
        // d(W1 W2) − W2 dW1 − W1 dW2 = 0.
        let caps = Caps::default();
        let w1 = F::coordinate(2, caps, 0).unwrap();
        let w2 = F::coordinate(2, caps, 1).unwrap();
        let one = F::constant(2, caps, Rational::from_i64(1)).unwrap();
        let alpha = Covector {
            terms: vec![
                (one, w1.product(&w2).unwrap()),
                (w2.scale(&Rational::from_i64(-1)), w1.clone()),
                (w1.scale(&Rational::from_i64(-1)), w2.clone()),
            ],
        };
        assert!(fundamental_q0(&alpha, &alpha).unwrap().is_zero());
        assert!(q0_nondegenerate(&alpha).unwrap());
        assert!(q0_nondegenerate(&Covector::exact(&w1).unwrap()).unwrap());
    }
}
