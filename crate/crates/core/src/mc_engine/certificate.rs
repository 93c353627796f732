//! Deterministic coefficient configurations on which one monomial term
//! dominates the rest of the series on `|z| = r`, forcing exactly `m` zeros.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fft::circle_values;
use crate::gaf_model::{coefficient_sq_iter, expected_zero_count, GafParams, GafSample};
use crate::rng::{open01, stream};
use crate::zero_counter::{count_winding, CountConfig};

const CONTOUR_NODES: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub coeffs: Vec<Complex64>,
    pub m: usize,
    /// `min over the contour grid of |c_m z^m| - |f(z) - c_m z^m|`
    pub rouche_margin: f64,
    /// `|c_m| r^m - sum_{n != m} |c_n| r^n`, a margin valid on the whole circle
    pub uniform_margin: f64,
    pub verified_count: u64,
}

/// Builds coefficients meeting the four dominance events with slack and
/// verifies the zero count in `|z| <= r`.
///
/// Moduli: `|xi_n| a_n r^n = sqrt(1-r) a_m r^m / 2` below `m`,
/// `|xi_m| = 8 m sqrt(1-r)`, `|xi_n| a_n = a_m r^m / 2` on `(m, 2m]`, and
/// `|xi_n| = sqrt(n) / 2` beyond. Phases come from `seed`.
pub fn build_certificate(l: f64, r: f64, m: usize, seed: u64) -> Result<CertificateReport> {
    GafParams::new(l, r, 1e-12)?;
    let fail = |margin: f64, point: Complex64, reason: &'static str| Error::CertificateFailed {
        m,
        margin,
        point,
        reason,
    };
    let need = (4.0 * expected_zero_count(l, r)).max(8.0);
    if (m as f64) < need || r < 0.5 {
        return Err(fail(f64::NAN, Complex64::new(0.0, 0.0), "m or r below the admissible regime"));
    }

    let root = (1.0 - r).sqrt();
    let a: Vec<f64> = coefficient_sq_iter(l).take(2 * m + 1).map(f64::sqrt).collect();
    let am_rm = a[m] * r.powi(m as i32);
    let mut moduli: Vec<f64> = Vec::with_capacity(4 * m);
    for n in 0..m {
        moduli.push(0.5 * root * a[m] * r.powi((m - n) as i32));
    }
    moduli.push(8.0 * m as f64 * root * a[m]);
    for _ in m + 1..=2 * m {
        moduli.push(0.5 * am_rm);
    }
    // sqrt(n)/2 * a_n until the terms on |z| = r are negligible
    let main = moduli[m] * r.powi(m as i32);
    let mut n = 2 * m + 1;
    let mut a2 = a[2 * m] * a[2 * m];
    let mut rn = r.powi(n as i32);
    loop {
        a2 *= (l + n as f64 - 1.0) / n as f64;
        let c = 0.5 * (n as f64).sqrt() * a2.sqrt();
        if c * rn < 1e-18 * main && (l + n as f64) / (n as f64 + 1.0) * r < 1.0 {
            break;
        }
        moduli.push(c);
        rn *= r;
        n += 1;
    }

    let mut rng = stream(seed);
    let coeffs: Vec<Complex64> = moduli
        .iter()
        .map(|&c| Complex64::from_polar(c, std::f64::consts::TAU * open01(&mut rng)))
        .collect();

    let mut rest = coeffs.clone();
    rest[m] = Complex64::new(0.0, 0.0);
    let values = circle_values(&rest, r, CONTOUR_NODES);
    let (worst, max_rest) = values
        .iter()
        .enumerate()
        .map(|(j, v)| (j, v.norm()))
        .fold((0, 0.0), |best, x| if x.1 > best.1 { x } else { best });
    let rouche_margin = main - max_rest;
    let uniform_margin = main
        - moduli
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != m)
            .map(|(k, c)| c * r.powi(k as i32))
            .sum::<f64>();
    if !(rouche_margin > 0.0) {
        let theta = std::f64::consts::TAU * worst as f64 / CONTOUR_NODES as f64;
        return Err(fail(rouche_margin, Complex64::from_polar(r, theta), "dominance fails on the contour"));
    }

    let sample = GafSample::from_coeffs(coeffs.clone());
    let verified_count = count_winding(&sample, &CountConfig::new(r)?)?.count;
    if verified_count != m as u64 {
        return Err(Error::InternalConsistency("positive Rouché margin but count differs from m"));
    }
    Ok(CertificateReport {
        coeffs,
        m,
        rouche_margin,
        uniform_margin,
        verified_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn certificates_pin_the_count() {
        for (l, r, m) in [(1.0, 0.99, 800), (0.5, 0.98, 400), (2.0, 0.95, 200)] {
            let rep = build_certificate(l, r, m, 9).unwrap();
            assert!(rep.rouche_margin > 0.0);
            assert!(rep.uniform_margin > 0.0);
            assert_eq!(rep.verified_count, m as u64);
        }
    }

    #[test]
    fn small_m_is_rejected() {
        assert!(matches!(build_certificate(1.0, 0.9, 2, 1), Err(Error::CertificateFailed { .. })));
    }
}
