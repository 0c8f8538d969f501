use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::clark_ocone::{clark_ocone, ClarkOcone};
use crate::coeff::{Coeff, Rational};
use crate::derivation::{derivation_div_a_grad, leibniz_defect, AntisymOperator, Derivation};
use crate::field::{div, grad, pair, VectorField};
use crate::function::{Caps, ChaosFunction, MultiIndex};
use crate::error::Result;

/// Float results must match the exact ones to this absolute tolerance.
pub const FLOAT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteCheck {
    pub name: &'static str,
    pub cases: usize,
    /// Cases whose exact defect is not identically zero.
    pub exact_failures: usize,
    pub max_float_gap: f64,
}

impl SuiteCheck {
    pub fn passed(&self) -> bool {
        self.cases > 0 && self.exact_failures == 0 && self.max_float_gap <= FLOAT_TOL
    }
}

/// Every monomial over `n` coordinates of total order at most `max_order`.
pub fn monomials(n: usize, max_order: usize) -> Vec<MultiIndex> {
    let mut out: Vec<MultiIndex> = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|a| {
                let used = crate::function::order(&a);
                (0..=(max_order - used) as u8).map(move |k| {
                    let mut b = a.clone();
                    b.push(k);
                    b
                })
            })
            .collect();
    }
    out
}

/// Dyadic coefficient `p / 2^q` with small `p`, so float mode sees exact inputs.
fn dyadic<R: Rng>(rng: &mut R) -> Rational {
    let p: i64 = rng.random_range(-4..=4);
    let q: u32 = rng.random_range(0..=2);
    Rational::from_ratio(p, 1 << q)
}

/// A polynomial with a handful of random dyadic coefficients up to `max_order`.
pub fn random_function<R: Rng>(rng: &mut R, n: usize, max_order: usize, caps: Caps) -> Result<ChaosFunction<Rational>> {
    let basis = monomials(n, max_order);
    let k = rng.random_range(1..=4usize.min(basis.len()));
    let terms: Vec<(MultiIndex, Rational)> = (0..k).map(|_| (basis[rng.random_range(0..basis.len())].clone(), dyadic(rng))).collect();
    ChaosFunction::from_terms(n, caps, terms)
}

pub fn random_antisym<R: Rng>(rng: &mut R, n: usize) -> Result<AntisymOperator<Rational>> {
    let mut m = vec![vec![Rational::from_i64(0); n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = dyadic(rng);
            m[j][i] = -v.clone();
            m[i][j] = v;
        }
    }
    AntisymOperator::new(m)
}

fn float_field(x: &VectorField<Rational>) -> VectorField<f64> {
    VectorField {
        components: x.components.iter().map(|c| c.to_f64()).collect(),
    }
}

fn float_antisym(a: &AntisymOperator<Rational>) -> Result<AntisymOperator<f64>> {
    let n = a.n();
    AntisymOperator::new((0..n).map(|i| (0..n).map(|j| a.entry(i, j).to_f64()).collect()).collect())
}

struct Tally {
    check: SuiteCheck,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally {
            check: SuiteCheck {
                name,
                cases: 0,
                exact_failures: 0,
                max_float_gap: 0.0,
            },
        }
    }

    /// One case: the exact defect must be the zero function, and the float
    /// computation must agree with the exact value of the same quantity.
    fn record(&mut self, exact_defect: &ChaosFunction<Rational>, exact_value: &ChaosFunction<Rational>, float_value: &ChaosFunction<f64>) {
        self.check.cases += 1;
        if !exact_defect.is_zero() {
            self.check.exact_failures += 1;
        }
        let gap = exact_value.to_f64().max_gap(float_value);
        self.check.max_float_gap = self.check.max_float_gap.max(gap);
    }
}

fn ou_ce<C: Coeff>(f: &ChaosFunction<C>, k: usize) -> Result<(ChaosFunction<C>, ChaosFunction<C>)> {
    let lhs = f.cond_expect(k)?.number_operator()?;
    let rhs = f.number_operator()?.cond_expect(k)?;
    Ok((lhs.sub(&rhs)?, lhs))
}

/// `‖L E[f|F_k] − E[Lf|F_k]‖²`.
pub fn check_ou_ce_commute<C: Coeff>(f: &ChaosFunction<C>, k: usize) -> Result<C> {
    Ok(ou_ce(f, k)?.0.norm_sq())
}

fn reconstruct_parts<C: Coeff>(f: &ChaosFunction<C>) -> Result<(ChaosFunction<C>, ClarkOcone<C>)> {
    let co = clark_ocone(f)?;
    Ok((co.reconstruct(f.caps())?, co))
}

/// Runs every exact identity over random panels for `N = 1..=max_n`, orders up to `max_order`.
pub fn run_suite(max_n: usize, max_order: usize, seed: u64, per_n: usize) -> Result<Vec<SuiteCheck>> {
    let caps = Caps::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ou = Tally::new("ou-conditional-expectation-commute");
    let mut adj = Tally::new("grad-div-adjointness");
    let mut leib = Tally::new("leibniz-div-a-grad");
    let mut zero_div = Tally::new("zero-divergence-div-a-grad");
    let mut co = Tally::new("clark-ocone-reconstruction");

    for n in 1..=max_n {
        for _ in 0..per_n {
            let f = random_function(&mut rng, n, max_order, caps)?;
            let ff = f.to_f64();

            for k in 0..=n {
                let (d, v) = ou_ce(&f, k)?;
                let (_, vf) = ou_ce(&ff, k)?;
                ou.record(&d, &v, &vf);
            }

            let x = VectorField::new((0..n).map(|_| random_function(&mut rng, n, max_order - 1, caps)).collect::<Result<_>>()?)?;
            let phi = random_function(&mut rng, n, max_order, caps)?;
            let lhs = pair(&x, &grad(&phi)?)?.mean();
            let rhs = div(&x)?.inner(&phi)?;
            let d = ChaosFunction::constant(n, caps, lhs.clone() - rhs)?;
            let lhs_f = pair(&float_field(&x), &grad(&phi.to_f64())?)?.mean();
            adj.record(&d, &ChaosFunction::constant(n, caps, lhs)?, &ChaosFunction::constant(n, caps, lhs_f)?);

            let a = random_antisym(&mut rng, n)?;
            let af = float_antisym(&a)?;
            let split = rng.random_range(0..=max_order);
            let g = random_function(&mut rng, n, max_order - split, caps)?;
            let f1 = random_function(&mut rng, n, split, caps)?;
            let der = Derivation::DivAGrad(a.clone());
            let derf = Derivation::DivAGrad(af.clone());
            let prod = f1.product(&g)?;
            leib.record(
                &leibniz_defect(&der, &f1, &g)?,
                &der.apply(&prod)?,
                &derf.apply(&prod.to_f64())?,
            );

            let df = derivation_div_a_grad(&a, &f)?;
            let dff = derivation_div_a_grad(&af, &ff)?;
            let mean = ChaosFunction::constant(n, caps, df.mean())?;
            zero_div.record(&mean, &df, &dff);

            let (rec, _) = reconstruct_parts(&f)?;
            let (recf, _) = reconstruct_parts(&ff)?;
            co.record(&rec.sub(&f)?, &rec, &recf);
        }
    }
    Ok(vec![ou.check, adj.check, leib.check, zero_div.check, co.check])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_enumeration_counts() {
        // C(n + k, k) monomials of order ≤ k.
        assert_eq!(monomials(2, 3).len(), 10);
        assert_eq!(monomials(4, 5).len(), 126);
    }

    #[test]
    fn small_suite_passes() {
        let checks = run_suite(3, 4, 1, 3).unwrap();
        for c in &checks {
            assert!(c.passed(), "{c:?}");
        }
    }
}
