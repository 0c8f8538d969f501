use std::collections::BTreeMap;

use crate::coeff::Coeff;
use crate::error::{ChaosError, Result};

/// Size limits enforced on every operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    pub max_coordinates: usize,
    pub max_order: usize,
    pub max_terms: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_coordinates: 12,
            max_order: 8,
            max_terms: 1_000_000,
        }
    }
}

impl Caps {
    /// Many coordinates at low order, for truncation ladders.
    pub fn wide() -> Self {
        Caps {
            max_coordinates: 64,
            max_order: 4,
            max_terms: 1_000_000,
        }
    }
}

/// Exponents `α_i` of `Π_i He_{α_i}(W(e_i))`.
pub type MultiIndex = Vec<u8>;

pub fn order(alpha: &[u8]) -> usize {
    alpha.iter().map(|&a| a as usize).sum()
}

/// `α! = Π α_i!`, the squared norm of the basis monomial.
pub fn alpha_factorial(alpha: &[u8]) -> u64 {
    alpha.iter().map(|&a| factorial(a as u64)).product()
}

pub fn factorial(k: u64) -> u64 {
    (1..=k).product()
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// `He_a He_b = Σ_r r! C(a,r) C(b,r) He_{a+b−2r}` as `(degree, weight)` pairs.
pub fn hermite_linearization(a: u8, b: u8) -> Vec<(u8, u64)> {
    let (a64, b64) = (a as u64, b as u64);
    (0..=a.min(b))
        .map(|r| {
            let r64 = r as u64;
            (a + b - 2 * r, factorial(r64) * binomial(a64, r64) * binomial(b64, r64))
        })
        .collect()
}

/// A polynomial in `N` independent standard Gaussians in the Hermite basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ChaosFunction<C: Coeff> {
    n: usize,
    caps: Caps,
    coeffs: BTreeMap<MultiIndex, C>,
}

impl<C: Coeff> ChaosFunction<C> {
    pub fn zero(n: usize, caps: Caps) -> Result<Self> {
        if n > caps.max_coordinates {
            return Err(ChaosError::Cap {
                what: "coordinates",
                value: n,
                limit: caps.max_coordinates,
            });
        }
        Ok(ChaosFunction {
            n,
            caps,
            coeffs: BTreeMap::new(),
        })
    }

    pub fn constant(n: usize, caps: Caps, c: C) -> Result<Self> {
        Self::zero(n, caps)?.with_terms([(vec![0; n], c)])
    }

    /// `W(e_i)`.
    pub fn coordinate(n: usize, caps: Caps, i: usize) -> Result<Self> {
        Self::hermite(n, caps, i, 1)
    }

    /// `He_k(W(e_i))`.
    pub fn hermite(n: usize, caps: Caps, i: usize, k: u8) -> Result<Self> {
        if i >= n {
            return Err(ChaosError::Coordinate { index: i, n });
        }
        let mut alpha = vec![0; n];
        alpha[i] = k;
        Self::zero(n, caps)?.with_terms([(alpha, C::one())])
    }

    pub fn from_terms<I: IntoIterator<Item = (MultiIndex, C)>>(n: usize, caps: Caps, terms: I) -> Result<Self> {
        Self::zero(n, caps)?.with_terms(terms)
    }

    /// Adds the terms into a copy, dropping zeros and enforcing the caps.
    fn with_terms<I: IntoIterator<Item = (MultiIndex, C)>>(mut self, terms: I) -> Result<Self> {
        for (alpha, c) in terms {
            if alpha.len() != self.n {
                return Err(ChaosError::Invalid(format!(
                    "multi-index of length {} for N = {}",
                    alpha.len(),
                    self.n
                )));
            }
            if c.is_zero() {
                continue;
            }
            let ord = order(&alpha);
            if ord > self.caps.max_order {
                return Err(ChaosError::Cap {
                    what: "order",
                    value: ord,
                    limit: self.caps.max_order,
                });
            }
            let slot = self.coeffs.entry(alpha).or_insert_with(C::zero);
            *slot = slot.clone() + c;
        }
        self.coeffs.retain(|_, c| !c.is_zero());
        if self.coeffs.len() > self.caps.max_terms {
            return Err(ChaosError::Cap {
                what: "terms",
                value: self.coeffs.len(),
                limit: self.caps.max_terms,
            });
        }
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn caps(&self) -> Caps {
        self.caps
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &C)> {
        self.coeffs.iter()
    }

    pub fn coefficient(&self, alpha: &[u8]) -> C {
        self.coeffs.get(alpha).cloned().unwrap_or_else(C::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest grade present, 0 for the zero function.
    pub fn grade(&self) -> usize {
        self.coeffs.keys().map(|a| order(a)).max().unwrap_or(0)
    }

    /// Component in the `k`-th chaos.
    pub fn grade_part(&self, k: usize) -> Self {
        self.filter(|a| order(a) == k)
    }

    pub fn mean(&self) -> C {
        self.coefficient(&vec![0; self.n])
    }

    pub(crate) fn filter<F: Fn(&[u8]) -> bool>(&self, keep: F) -> Self {
        ChaosFunction {
            coeffs: self.coeffs.iter().filter(|(a, _)| keep(a)).map(|(a, c)| (a.clone(), c.clone())).collect(),
            ..self.clone()
        }
    }

    pub(crate) fn map_terms<F: Fn(&[u8], &C) -> Vec<(MultiIndex, C)>>(&self, f: F) -> Result<Self> {
        let out = Self::zero(self.n, self.caps)?;
        out.with_terms(self.coeffs.iter().flat_map(|(a, c)| f(a, c)))
    }

    fn same_space(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(ChaosError::Dimension(self.n, other.n));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_space(other)?;
        self.clone().with_terms(other.coeffs.iter().map(|(a, c)| (a.clone(), c.clone())))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-C::one()))
    }

    pub fn scale(&self, s: &C) -> Self {
        ChaosFunction {
            coeffs: self
                .coeffs
                .iter()
                .map(|(a, c)| (a.clone(), c.clone() * s.clone()))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
            ..self.clone()
        }
    }

    /// Exact product in the Hermite basis.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.same_space(other)?;
        let ord = self.grade() + other.grade();
        if !self.is_zero() && !other.is_zero() && ord > self.caps.max_order {
            return Err(ChaosError::Cap {
                what: "order",
                value: ord,
                limit: self.caps.max_order,
            });
        }
        let mut acc: BTreeMap<MultiIndex, C> = BTreeMap::new();
        for (a, ca) in &self.coeffs {
            for (b, cb) in &other.coeffs {
                // Product over coordinates of the one-dimensional linearizations.
                let mut partial: Vec<(MultiIndex, u64)> = vec![(Vec::with_capacity(self.n), 1)];
                for i in 0..self.n {
                    let lin = hermite_linearization(a[i], b[i]);
                    partial = partial
                        .iter()
                        .flat_map(|(idx, w)| {
                            lin.iter().map(move |(d, lw)| {
                                let mut next = idx.clone();
                                next.push(*d);
                                (next, w * lw)
                            })
                        })
                        .collect();
                }
                let base = ca.clone() * cb.clone();
                for (idx, w) in partial {
                    let slot = acc.entry(idx).or_insert_with(C::zero);
                    *slot = slot.clone() + base.clone() * C::from_i64(w as i64);
                }
            }
        }
        Self::zero(self.n, self.caps)?.with_terms(acc)
    }

    /// `E[f g] = Σ_α f_α g_α α!`.
    pub fn inner(&self, other: &Self) -> Result<C> {
        self.same_space(other)?;
        let mut s = C::zero();
        for (a, c) in &self.coeffs {
            if let Some(d) = other.coeffs.get(a) {
                s = s + c.clone() * d.clone() * C::from_i64(alpha_factorial(a) as i64);
            }
        }
        Ok(s)
    }

    pub fn norm_sq(&self) -> C {
        self.inner(self).unwrap_or_else(|_| C::zero())
    }

    /// `E[(f − g)²]`, zero exactly when the coefficient tables agree.
    pub fn distance_sq(&self, other: &Self) -> Result<C> {
        Ok(self.sub(other)?.norm_sq())
    }

    /// `E[f | F_k]` with `F_k = σ(W(e_1), …, W(e_k))`: drops every term touching coordinates `> k`.
    pub fn cond_expect(&self, k: usize) -> Result<Self> {
        if k > self.n {
            return Err(ChaosError::Coordinate { index: k, n: self.n });
        }
        Ok(self.filter(|a| a[k..].iter().all(|&x| x == 0)))
    }

    /// `L f = −Σ n f_n`.
    pub fn number_operator(&self) -> Result<Self> {
        self.map_terms(|a, c| vec![(a.to_vec(), -(c.clone() * C::from_i64(order(a) as i64)))])
    }

    /// `(1 − L)^{−z} f` for integer `z`, exact in every coefficient field.
    pub fn ou_power(&self, z: i32) -> Result<Self> {
        self.map_terms(|a, c| {
            let base = C::from_i64(1 + order(a) as i64);
            let mut w = C::one();
            for _ in 0..z.unsigned_abs() {
                w = w * base.clone();
            }
            let w = if z > 0 { C::one() / w } else { w };
            vec![(a.to_vec(), c.clone() * w)]
        })
    }

    pub fn to_f64(&self) -> ChaosFunction<f64> {
        ChaosFunction {
            n: self.n,
            caps: self.caps,
            coeffs: self.coeffs.iter().map(|(a, c)| (a.clone(), c.to_f64())).collect(),
        }
    }

    /// Evaluates the polynomial at a point of `R^N`.
    pub fn eval(&self, w: &[f64]) -> f64 {
        self.coeffs
            .iter()
            .map(|(a, c)| c.to_f64() * a.iter().zip(w).map(|(&k, &x)| hermite_value(k, x)).product::<f64>())
            .sum()
    }
}

impl ChaosFunction<f64> {
    /// `(1 − L)^{−z} f` for real `z`.
    pub fn ou_apply(&self, z: f64) -> Result<Self> {
        self.map_terms(|a, c| vec![(a.to_vec(), c * (1.0 + order(a) as f64).powf(-z))])
    }

    /// Largest coefficient gap to `other`.
    pub fn max_gap(&self, other: &Self) -> f64 {
        let mut keys: Vec<&MultiIndex> = self.coeffs.keys().chain(other.coeffs.keys()).collect();
        keys.dedup();
        keys.iter().map(|k| (self.coefficient(k) - other.coefficient(k)).abs()).fold(0.0, f64::max)
    }
}

/// Probabilists' Hermite polynomial by the three-term recurrence.
pub fn hermite_value(k: u8, x: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, x);
    if k == 0 {
        return h0;
    }
    for j in 1..k {
        let h2 = x * h1 - j as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}
