use crate::coeff::Coeff;
use crate::error::Result;
use crate::field::partial;
use crate::function::ChaosFunction;

/// Martingale representation of `f` over unit increments `W(e_1), …, W(e_N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClarkOcone<C: Coeff> {
    pub mean: C,
    /// `g_i = E[∂_i f | F_{i−1}]`, the integrand of the `i`-th increment.
    pub integrands: Vec<ChaosFunction<C>>,
    /// `E[f|F_i] − E[f|F_{i−1}] − g_i W(e_i)`: terms of degree ≥ 2 in the `i`-th
    /// increment, the discrete Itô correction.
    pub corrections: Vec<ChaosFunction<C>>,
}

impl<C: Coeff> ClarkOcone<C> {
    /// `E f + Σ g_i W(e_i) + Σ corrections_i`.
    pub fn reconstruct(&self, caps: crate::function::Caps) -> Result<ChaosFunction<C>> {
        let n = self.integrands.len();
        let mut acc = ChaosFunction::constant(n, caps, self.mean.clone())?;
        for (i, (g, c)) in self.integrands.iter().zip(&self.corrections).enumerate() {
            acc = acc.add(&g.product(&ChaosFunction::coordinate(n, caps, i)?)?)?.add(c)?;
        }
        Ok(acc)
    }

    /// True when every correction vanishes, so the first-order formula alone reconstructs `f`.
    pub fn is_first_order(&self) -> bool {
        self.corrections.iter().all(|c| c.is_zero())
    }
}

pub fn clark_ocone<C: Coeff>(f: &ChaosFunction<C>) -> Result<ClarkOcone<C>> {
    let n = f.n();
    let mut integrands = Vec::with_capacity(n);
    let mut corrections = Vec::with_capacity(n);
    for i in 0..n {
        integrands.push(partial(f, i)?.cond_expect(i)?);
        corrections.push(f.filter(|a| a[i] >= 2 && a[i + 1..].iter().all(|&x| x == 0)));
    }
    Ok(ClarkOcone {
        mean: f.mean(),
        integrands,
        corrections,
    })
}

/// `E[(f − reconstruction)²]`.
pub fn clark_ocone_defect<C: Coeff>(f: &ChaosFunction<C>) -> Result<C> {
    let co = clark_ocone(f)?;
    f.distance_sq(&co.reconstruct(f.caps())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Rational;
    use crate::function::Caps;

    type F = ChaosFunction<Rational>;

    #[test]
    fn single_coordinate() {
        let f = F::coordinate(3, Caps::default(), 0).unwrap();
        let co = clark_ocone(&f).unwrap();
        assert_eq!(co.integrands[0], F::constant(3, Caps::default(), Rational::from_i64(1)).unwrap());
        assert!(co.integrands[1].is_zero() && co.integrands[2].is_zero());
        assert!(co.is_first_order());
    }

    #[test]
    fn mixed_product() {
        let caps = Caps::default();
        let w1 = F::coordinate(2, caps, 0).unwrap();
        let f = w1.product(&F::coordinate(2, caps, 1).unwrap()).unwrap();
        let co = clark_ocone(&f).unwrap();
        assert!(co.integrands[0].is_zero());
        assert_eq!(co.integrands[1], w1);
    }

    #[test]
    fn terminal_square_is_the_discrete_ito_identity() {
        let caps = Caps::default();
        let n = 4;
        let mut b = F::zero(n, caps).unwrap();
        for i in 0..n {
            b = b.add(&F::coordinate(n, caps, i).unwrap()).unwrap();
        }
        let f = b.product(&b).unwrap();
        let co = clark_ocone(&f).unwrap();
        let mut prefix = F::zero(n, caps).unwrap();
        for i in 0..n {
            assert_eq!(co.integrands[i], prefix.scale(&Rational::from_i64(2)));
            assert_eq!(co.corrections[i], F::hermite(n, caps, i, 2).unwrap());
            prefix = prefix.add(&F::coordinate(n, caps, i).unwrap()).unwrap();
        }
        assert_eq!(clark_ocone_defect(&f).unwrap(), Rational::from_i64(0));
    }
}
