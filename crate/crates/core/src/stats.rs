//! Wilson score intervals and a pooled chi-square goodness-of-fit test.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{invalid, Result};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;
/// One-sided 95% normal quantile.
pub const Z95_ONE_SIDED: f64 = 1.6448536269514722;

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub bins: usize,
}

/// Pearson test of observed counts against `probs`, with adjacent bins
/// pooled until each expected count is at least `min_expected`. Mass of
/// `probs` short of one, and observations past the end of `probs`, go to
/// the last bin.
pub fn chi_square_pooled(observed: &[u64], probs: &[f64], min_expected: f64) -> Result<ChiSquareTest> {
    let n: u64 = observed.iter().sum();
    if n == 0 {
        return Err(invalid("observed", 0.0, "no observations"));
    }
    let nf = n as f64;
    let len = probs.len().max(observed.len());
    let prob_at = |j: usize| probs.get(j).copied().unwrap_or(0.0);
    let obs_at = |j: usize| observed.get(j).copied().unwrap_or(0) as f64;

    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let (mut e, mut o) = (0.0, 0.0);
    for j in 0..len {
        e += prob_at(j) * nf;
        o += obs_at(j);
        if e >= min_expected {
            pooled.push((e, o));
            e = 0.0;
            o = 0.0;
        }
    }
    let leftover = (1.0 - probs.iter().sum::<f64>()).max(0.0) * nf;
    e += leftover;
    match pooled.last_mut() {
        Some(last) if e < min_expected => {
            last.0 += e;
            last.1 += o;
        }
        _ => pooled.push((e, o)),
    }
    if pooled.len() < 2 {
        return Err(invalid("probs", pooled.len() as f64, "fewer than two bins after pooling"));
    }
    let statistic: f64 = pooled.iter().map(|(e, o)| (o - e) * (o - e) / e).sum();
    let dof = pooled.len() - 1;
    let dist = ChiSquared::new(dof as f64).expect("dof is positive");
    Ok(ChiSquareTest {
        statistic,
        dof,
        p_value: dist.sf(statistic),
        bins: pooled.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_reference_values() {
        // 10 of 100: (0.05523, 0.17437)
        let (lo, hi) = wilson(10, 100, Z95);
        assert!((lo - 0.055229).abs() < 1e-5);
        assert!((hi - 0.174367).abs() < 1e-5);
        let (lo, hi) = wilson(0, 1000, Z95_ONE_SIDED);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.003);
        let (lo, hi) = wilson(50, 50, Z95);
        assert!(lo < 1.0 && hi == 1.0);
    }

    #[test]
    fn chi_square_exact_fit_and_misfit() {
        let probs = [0.25, 0.25, 0.25, 0.25];
        let t = chi_square_pooled(&[250, 250, 250, 250], &probs, 5.0).unwrap();
        assert_eq!(t.statistic, 0.0);
        assert!((t.p_value - 1.0).abs() < 1e-12);
        assert_eq!(t.dof, 3);
        let t = chi_square_pooled(&[400, 200, 200, 200], &probs, 5.0).unwrap();
        assert!(t.p_value < 1e-6);
    }

    #[test]
    fn sparse_bins_are_pooled() {
        let probs = [0.5, 0.49, 0.005, 0.004, 0.001];
        let t = chi_square_pooled(&[50, 49, 1, 0, 0], &probs, 5.0).unwrap();
        assert_eq!(t.bins, 2);
    }
}
