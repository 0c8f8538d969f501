use crate::coeff::Coeff;
use crate::error::{ChaosError, Result};
use crate::field::{div, grad, VectorField};
use crate::function::{Caps, ChaosFunction};

/// Real antisymmetric matrix acting on the coordinate span; column `j` is `A e_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct AntisymOperator<C: Coeff> {
    entries: Vec<Vec<C>>,
}

impl<C: Coeff> AntisymOperator<C> {
    pub fn new(entries: Vec<Vec<C>>) -> Result<Self> {
        let n = entries.len();
        for (i, row) in entries.iter().enumerate() {
            if row.len() != n {
                return Err(ChaosError::Invalid(format!("row {i} has {} entries, expected {n}", row.len())));
            }
        }
        for i in 0..n {
            for j in 0..n {
                if !(entries[i][j].clone() + entries[j][i].clone()).is_zero() {
                    return Err(ChaosError::NotAntisymmetric { i, j });
                }
            }
        }
        Ok(AntisymOperator { entries })
    }

    pub fn zero(n: usize) -> Self {
        AntisymOperator {
            entries: vec![vec![C::zero(); n]; n],
        }
    }

    /// `e_{2j} ↦ e_{2j+1}`, `e_{2j+1} ↦ −e_{2j}` on the first `2·pairs` coordinates.
    pub fn rotation_pairs(n: usize, pairs: usize) -> Result<Self> {
        if 2 * pairs > n {
            return Err(ChaosError::Invalid(format!("{pairs} rotation pairs need at least {} coordinates", 2 * pairs)));
        }
        let mut a = Self::zero(n);
        for j in 0..pairs {
            a.entries[2 * j + 1][2 * j] = C::one();
            a.entries[2 * j][2 * j + 1] = -C::one();
        }
        Ok(a)
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> &C {
        &self.entries[i][j]
    }

    pub fn apply(&self, x: &VectorField<C>) -> Result<VectorField<C>> {
        let n = self.n();
        if x.n() != n {
            return Err(ChaosError::Dimension(n, x.n()));
        }
        let caps = x.components.first().map(|c| c.caps()).unwrap_or_default();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut acc = ChaosFunction::zero(n, caps)?;
            for j in 0..n {
                if !self.entries[i][j].is_zero() {
                    acc = acc.add(&x.components[j].scale(&self.entries[i][j]))?;
                }
            }
            out.push(acc);
        }
        VectorField::new(out)
    }
}

/// `δf = div(A grad f)`.
pub fn derivation_div_a_grad<C: Coeff>(a: &AntisymOperator<C>, f: &ChaosFunction<C>) -> Result<ChaosFunction<C>> {
    div(&a.apply(&grad(f)?)?)
}

/// A derivation given either as `div A grad` or by a vector field.
#[derive(Debug, Clone, PartialEq)]
pub enum Derivation<C: Coeff> {
    DivAGrad(AntisymOperator<C>),
    Field(VectorField<C>),
}

impl<C: Coeff> Derivation<C> {
    pub fn apply(&self, f: &ChaosFunction<C>) -> Result<ChaosFunction<C>> {
        match self {
            Derivation::DivAGrad(a) => derivation_div_a_grad(a, f),
            Derivation::Field(x) => x.apply(f),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Derivation::DivAGrad(a) => a.n(),
            Derivation::Field(x) => x.n(),
        }
    }
}

/// `δ(fg) − f δg − g δf`.
pub fn leibniz_defect<C: Coeff>(d: &Derivation<C>, f: &ChaosFunction<C>, g: &ChaosFunction<C>) -> Result<ChaosFunction<C>> {
    let lhs = d.apply(&f.product(g)?)?;
    lhs.sub(&f.product(&d.apply(g)?)?)?.sub(&g.product(&d.apply(f)?)?)
}

/// Partial sums `Σ_{i≤m} ‖δ W(e_i)‖²` for `δ = div A grad` with `m` rotation pairs over `2m` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceWitness<C: Coeff> {
    pub m: usize,
    pub partial_sum: C,
}

pub fn not_a_vector_field<C: Coeff>(ladder: &[usize]) -> Result<Vec<DivergenceWitness<C>>> {
    ladder
        .iter()
        .map(|&m| {
            let n = 2 * m;
            let caps = Caps::wide();
            let a = AntisymOperator::<C>::rotation_pairs(n, m)?;
            let mut s = C::zero();
            for i in 0..m {
                s = s + derivation_div_a_grad(&a, &ChaosFunction::coordinate(n, caps, i)?)?.norm_sq();
            }
            Ok(DivergenceWitness { m, partial_sum: s })
        })
        .collect()
}

/// `‖δf − X_N·f‖²` for each test function at one truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxStep<C: Coeff> {
    pub truncation: usize,
    pub field: VectorField<C>,
    pub errors: Vec<C>,
}

/// `X_N = Σ_{i≤N} E[δ W(e_i) | F_N] e_i` along a ladder of truncations.
pub fn approx_derivation<C: Coeff>(d: &Derivation<C>, ladder: &[usize], panel: &[ChaosFunction<C>]) -> Result<Vec<ApproxStep<C>>> {
    let n = d.n();
    let caps = panel.first().map(|f| f.caps()).unwrap_or_default();
    let images: Vec<ChaosFunction<C>> = (0..n)
        .map(|i| d.apply(&ChaosFunction::coordinate(n, caps, i)?))
        .collect::<Result<_>>()?;
    let targets: Vec<ChaosFunction<C>> = panel.iter().map(|f| d.apply(f)).collect::<Result<_>>()?;
    ladder
        .iter()
        .map(|&big_n| {
            if big_n > n {
                return Err(ChaosError::Coordinate { index: big_n, n });
            }
            let comps = (0..n)
                .map(|i| {
                    if i < big_n {
                        images[i].cond_expect(big_n)
                    } else {
                        ChaosFunction::zero(n, caps)
                    }
                })
                .collect::<Result<_>>()?;
            let field = VectorField::new(comps)?;
            let errors = panel
                .iter()
                .zip(&targets)
                .map(|(f, t)| t.distance_sq(&field.apply(f)?))
                .collect::<Result<_>>()?;
            Ok(ApproxStep {
                truncation: big_n,
                field,
                errors,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Rational;

    type F = ChaosFunction<Rational>;

    fn q(a: i64) -> Rational {
        Rational::from_i64(a)
    }

    #[test]
    fn rotation_maps_coordinates() {
        let caps = Caps::default();
        let a = AntisymOperator::<Rational>::rotation_pairs(2, 1).unwrap();
        let w1 = F::coordinate(2, caps, 0).unwrap();
        let w2 = F::coordinate(2, caps, 1).unwrap();
        assert_eq!(derivation_div_a_grad(&a, &w1).unwrap(), w2);
        assert_eq!(derivation_div_a_grad(&a, &w2).unwrap(), w1.scale(&q(-1)));
        assert!(derivation_div_a_grad(&AntisymOperator::zero(2), &w1).unwrap().is_zero());
    }

    #[test]
    fn symmetric_input_is_rejected() {
        let m = vec![vec![q(0), q(1)], vec![q(1), q(0)]];
        assert!(matches!(AntisymOperator::new(m), Err(ChaosError::NotAntisymmetric { .. })));
    }

    #[test]
    fn partial_sums_grow_linearly() {
        let w = not_a_vector_field::<Rational>(&[2, 4, 8, 16]).unwrap();
        for x in &w {
            assert_eq!(x.partial_sum, q(x.m as i64));
        }
    }

    #[test]
    fn rotation_is_recovered_at_two_coordinates() {
        let caps = Caps::default();
        let a = AntisymOperator::<Rational>::rotation_pairs(4, 2).unwrap();
        let f = F::coordinate(4, caps, 0).unwrap().product(&F::coordinate(4, caps, 1).unwrap()).unwrap();
        let steps = approx_derivation(&Derivation::DivAGrad(a), &[1, 2, 3, 4], &[f]).unwrap();
        assert_ne!(steps[0].errors[0], q(0));
        for s in &steps[1..] {
            assert_eq!(s.errors[0], q(0));
        }
    }

    #[test]
    fn constant_field_is_its_own_approximation() {
        let caps = Caps::default();
        let x = VectorField::constant(caps, &[q(1), q(-2), q(3)]).unwrap();
        let f = F::hermite(3, caps, 1, 2).unwrap();
        let steps = approx_derivation(&Derivation::Field(x), &[2, 3], &[f]).unwrap();
        assert!(steps.iter().all(|s| s.errors[0] == q(0)));
    }
}
