use crate::coeff::Coeff;
use crate::error::{ChaosError, Result};
use crate::function::{Caps, ChaosFunction};

/// `X = Σ_i X_i e_i` with chaos-function components.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField<C: Coeff> {
    pub components: Vec<ChaosFunction<C>>,
}

impl<C: Coeff> VectorField<C> {
    pub fn new(components: Vec<ChaosFunction<C>>) -> Result<Self> {
        let n = components.len();
        if let Some(bad) = components.iter().find(|c| c.n() != n) {
            return Err(ChaosError::Dimension(n, bad.n()));
        }
        Ok(VectorField { components })
    }

    /// The constant field `Σ h_i e_i`.
    pub fn constant(caps: Caps, h: &[C]) -> Result<Self> {
        let n = h.len();
        Self::new(h.iter().map(|c| ChaosFunction::constant(n, caps, c.clone())).collect::<Result<_>>()?)
    }

    pub fn n(&self) -> usize {
        self.components.len()
    }

    /// `X·f = Σ_i X_i ∂_i f`.
    pub fn apply(&self, f: &ChaosFunction<C>) -> Result<ChaosFunction<C>> {
        let g = grad(f)?;
        pair(self, &g)
    }
}

/// `∂_i f` from `He_k' = k He_{k−1}`.
pub fn partial<C: Coeff>(f: &ChaosFunction<C>, i: usize) -> Result<ChaosFunction<C>> {
    if i >= f.n() {
        return Err(ChaosError::Coordinate { index: i, n: f.n() });
    }
    f.map_terms(|a, c| {
        if a[i] == 0 {
            return vec![];
        }
        let mut b = a.to_vec();
        b[i] -= 1;
        vec![(b, c.clone() * C::from_i64(a[i] as i64))]
    })
}

pub fn grad<C: Coeff>(f: &ChaosFunction<C>) -> Result<VectorField<C>> {
    VectorField::new((0..f.n()).map(|i| partial(f, i)).collect::<Result<_>>()?)
}

/// Skorokhod integral of `F e_i`: `F W(e_i) − ∂_i F`, which raises `α_i` by one.
pub fn div_component<C: Coeff>(f: &ChaosFunction<C>, i: usize) -> Result<ChaosFunction<C>> {
    if i >= f.n() {
        return Err(ChaosError::Coordinate { index: i, n: f.n() });
    }
    f.map_terms(|a, c| {
        let mut b = a.to_vec();
        b[i] += 1;
        vec![(b, c.clone())]
    })
}

/// `div X = Σ_i δ(X_i e_i)`; `E⟨X, grad φ⟩ = E[(div X) φ]`.
pub fn div<C: Coeff>(x: &VectorField<C>) -> Result<ChaosFunction<C>> {
    let n = x.n();
    let caps = x.components.first().map(|c| c.caps()).unwrap_or_default();
    let mut acc = ChaosFunction::zero(n, caps)?;
    for (i, xi) in x.components.iter().enumerate() {
        acc = acc.add(&div_component(xi, i)?)?;
    }
    Ok(acc)
}

/// Pointwise `⟨X, Y⟩ = Σ_i X_i Y_i`.
pub fn pair<C: Coeff>(x: &VectorField<C>, y: &VectorField<C>) -> Result<ChaosFunction<C>> {
    if x.n() != y.n() {
        return Err(ChaosError::Dimension(x.n(), y.n()));
    }
    let caps = x.components.first().map(|c| c.caps()).unwrap_or_default();
    let mut acc = ChaosFunction::zero(x.n(), caps)?;
    for (a, b) in x.components.iter().zip(&y.components) {
        acc = acc.add(&a.product(b)?)?;
    }
    Ok(acc)
}

/// `E⟨X, grad φ⟩ − E[(div X) φ]`.
pub fn adjointness_defect<C: Coeff>(x: &VectorField<C>, phi: &ChaosFunction<C>) -> Result<C> {
    let lhs = pair(x, &grad(phi)?)?.mean();
    let rhs = div(x)?.inner(phi)?;
    Ok(lhs - rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Rational;
    use crate::function::MultiIndex;
    use num::Zero;

    type F = ChaosFunction<Rational>;

    #[test]
    fn gradient_of_square() {
        let caps = Caps::default();
        let w = F::coordinate(2, caps, 0).unwrap();
        let g = grad(&w.product(&w).unwrap()).unwrap();
        assert_eq!(g.components[0], w.scale(&Rational::from_i64(2)));
        assert!(g.components[1].is_zero());
    }

    #[test]
    fn divergence_of_constant_field_is_the_coordinate() {
        let caps = Caps::default();
        let e1 = VectorField::constant(caps, &[Rational::from_i64(1)]).unwrap();
        assert_eq!(div(&e1).unwrap(), F::coordinate(1, caps, 0).unwrap());
    }

    fn monomials(n: usize, max: u8) -> Vec<MultiIndex> {
        let mut out = vec![vec![]];
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|a: MultiIndex| {
                    (0..=max).map(move |k| {
                        let mut b = a.clone();
                        b.push(k);
                        b
                    })
                })
                .collect();
        }
        out.retain(|a| crate::function::order(a) <= max as usize);
        out
    }

    #[test]
    fn adjointness_is_exact_for_two_coordinates() {
        let caps = Caps::default();
        let basis = monomials(2, 3);
        for xa in &basis {
            for i in 0..2 {
                let mut comps = vec![F::zero(2, caps).unwrap(), F::zero(2, caps).unwrap()];
                comps[i] = F::from_terms(2, caps, [(xa.clone(), Rational::from_i64(1))]).unwrap();
                let x = VectorField::new(comps).unwrap();
                for pa in &basis {
                    let phi = F::from_terms(2, caps, [(pa.clone(), Rational::from_i64(1))]).unwrap();
                    assert!(adjointness_defect(&x, &phi).unwrap().is_zero());
                }
            }
        }
    }

    #[test]
    fn integration_by_parts_oracle_in_one_dimension() {
        // E[φ'(W)] = E[W φ(W)].
        let caps = Caps::default();
        for k in 0..=3u8 {
            let phi = F::hermite(1, caps, 0, k).unwrap();
            let lhs = partial(&phi, 0).unwrap().mean();
            let rhs = F::coordinate(1, caps, 0).unwrap().inner(&phi).unwrap();
            assert_eq!(lhs, rhs);
        }
    }
}
