/// Two-sample Kolmogorov–Smirnov statistic and asymptotic p-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n1: usize,
    pub n2: usize,
}

pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n1, n2) = (x.len(), y.len());
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < n1 && j < n2 {
        let v = x[i].min(y[j]);
        while i < n1 && x[i] <= v {
            i += 1;
        }
        while j < n2 && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n1 as f64 - j as f64 / n2 as f64).abs());
    }
    let ne = (n1 * n2) as f64 / (n1 + n2) as f64;
    let p = if n1 == 0 || n2 == 0 {
        1.0
    } else {
        kolmogorov_tail((ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d)
    };
    KsResult {
        statistic: d,
        p_value: p,
        n1,
        n2,
    }
}

/// `P(K > λ) = 2 Σ_{k≥1} (−1)^{k−1} e^{−2k²λ²}`.
pub fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-300 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

pub fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len()) as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// `E Z^k` for standard normal `Z`.
pub fn normal_moment(k: u32) -> f64 {
    if k % 2 == 1 {
        0.0
    } else {
        (1..k).step_by(2).map(|j| j as f64).product()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentCheck {
    pub order: u32,
    pub sample: f64,
    pub expected: f64,
    pub sigma: f64,
}

impl MomentCheck {
    pub fn z_score(&self) -> f64 {
        (self.sample - self.expected) / self.sigma
    }
}

/// Raw moments 1..=max_order of standardized samples against N(0,1), with
/// Monte Carlo σ from the exact variance of `Z^k`.
pub fn gaussian_moments(z: &[f64], max_order: u32) -> Vec<MomentCheck> {
    let n = z.len() as f64;
    (1..=max_order)
        .map(|k| {
            let sample = z.iter().map(|x| x.powi(k as i32)).sum::<f64>() / n;
            let expected = normal_moment(k);
            let var = normal_moment(2 * k) - expected * expected;
            MomentCheck {
                order: k,
                sample,
                expected,
                sigma: (var / n).sqrt(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_moments() {
        assert_eq!(normal_moment(2), 1.0);
        assert_eq!(normal_moment(4), 3.0);
        assert_eq!(normal_moment(6), 15.0);
        assert_eq!(normal_moment(12), 10395.0);
        assert_eq!(normal_moment(5), 0.0);
    }

    #[test]
    fn kolmogorov_tail_known_values() {
        // Tabulated: P(K > 1.36) ≈ 0.049, P(K > 1.63) ≈ 0.0098.
        assert!((kolmogorov_tail(1.36) - 0.0494).abs() < 1e-3);
        assert!((kolmogorov_tail(1.63) - 0.0098).abs() < 5e-4);
    }

    #[test]
    fn ks_identical_and_shifted_samples() {
        let a: Vec<f64> = (0..1000).map(|i| i as f64 / 1000.0).collect();
        let r = ks_two_sample(&a, &a);
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        let b: Vec<f64> = a.iter().map(|x| x + 0.5).collect();
        let r = ks_two_sample(&a, &b);
        assert!((r.statistic - 0.5).abs() <= 1.5e-3);
        assert!(r.p_value < 1e-50);
    }
}
