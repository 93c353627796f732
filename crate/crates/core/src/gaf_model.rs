//! Coefficient law of the hyperbolic GAF
//! `f_L(z) = sum_n xi_n a_n z^n`, `a_n^2 = L(L+1)...(L+n-1)/n!`,
//! truncated sampling with a certified tail-variance budget, moment formulas
//! and the spectrum of the covariance of `f` on an equispaced circle grid.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::rng;

/// Hard cap on the truncation degree.
pub const MAX_DEGREE: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GafParams {
    /// Intensity parameter `L > 0`.
    pub l: f64,
    /// Radius up to which the truncated series is used, `0 < r < 1`.
    pub r: f64,
    /// Tail-variance budget relative to `Var f(z) = (1 - r^2)^(-L)` at `|z| = r`.
    pub epsilon_tail: f64,
}

impl GafParams {
    pub fn new(l: f64, r: f64, epsilon_tail: f64) -> Result<Self> {
        let p = GafParams { l, r, epsilon_tail };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l > 0.0) || !self.l.is_finite() {
            return Err(invalid("L", self.l, "must be positive and finite"));
        }
        if !(self.r > 0.0 && self.r < 1.0) {
            return Err(invalid("r", self.r, "must lie in (0, 1)"));
        }
        if !(self.epsilon_tail > 0.0 && self.epsilon_tail < 1.0) {
            return Err(invalid("epsilon_tail", self.epsilon_tail, "must lie in (0, 1)"));
        }
        Ok(())
    }

    /// `Var f(z)` at `|z| = r`.
    pub fn sigma2(&self) -> f64 {
        (1.0 - self.r * self.r).powf(-self.l)
    }
}

/// A truncated realization `sum_{n <= N} coeffs[n] z^n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GafSample {
    pub coeffs: Vec<Complex64>,
    pub truncation_degree: usize,
    pub seed: u64,
    /// Upper bound on `sum_{n > N} a_n^2 r^(2n)`.
    pub tail_sigma2: f64,
    /// Radius of validity of the tail bound (`inf` for exact polynomials).
    pub radius: f64,
    /// Intensity parameter of the generating law (`NaN` for exact polynomials).
    pub l: f64,
}

impl GafSample {
    /// Wraps an explicit polynomial; it has no truncation tail and is valid
    /// on the whole plane.
    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Self {
        let n = coeffs.len().saturating_sub(1);
        GafSample {
            coeffs,
            truncation_degree: n,
            seed: 0,
            tail_sigma2: 0.0,
            radius: f64::INFINITY,
            l: f64::NAN,
        }
    }

    /// Root-mean-square size of the omitted tail on the validity circle.
    pub fn tail_amplitude(&self) -> f64 {
        self.tail_sigma2.sqrt()
    }
}

/// `a_n^2 = L(L+1)...(L+n-1)/n!` by the recurrence `a_n^2 = a_{n-1}^2 (L+n-1)/n`.
pub fn coefficient_sq(l: f64, n: usize) -> f64 {
    let mut a = 1.0;
    for k in 1..=n {
        a *= (l + k as f64 - 1.0) / k as f64;
    }
    a
}

/// Iterator over `a_n^2`, `n = 0, 1, 2, ...`.
pub(crate) fn coefficient_sq_iter(l: f64) -> impl Iterator<Item = f64> {
    let mut a = 1.0;
    let mut n = 0usize;
    std::iter::from_fn(move || {
        let out = a;
        n += 1;
        a *= (l + n as f64 - 1.0) / n as f64;
        Some(out)
    })
}

/// Smallest truncation degree whose tail bound fits the budget, with the bound.
///
/// Successive terms `t_n = a_n^2 r^(2n)` have ratio `(L+n)/(n+1) r^2`, which
/// decreases in `n` for `L >= 1` and increases to `r^2` for `L < 1`, so the
/// tail after `N` is at most `t_{N+1} / (1 - q)` with `q` the sup of the ratio.
pub fn truncation_degree(params: &GafParams) -> Result<(usize, f64)> {
    params.validate()?;
    let l = params.l;
    let r2 = params.r * params.r;
    let budget = params.epsilon_tail * params.sigma2();
    // t holds t_{N+1}
    let mut t = l * r2;
    let mut n = 0usize;
    loop {
        let next_ratio = (l + n as f64 + 1.0) / (n as f64 + 2.0) * r2;
        let q = if l >= 1.0 { next_ratio } else { r2 };
        if q < 1.0 {
            let bound = t / (1.0 - q);
            if bound <= budget {
                return Ok((n, bound));
            }
        }
        if n >= MAX_DEGREE {
            return Err(Error::Resource {
                what: "truncation degree",
                required: n as u64 + 1,
                cap: MAX_DEGREE as u64,
            });
        }
        t *= next_ratio;
        n += 1;
    }
}

/// Draws a truncated GAF realization. Pure in `(params, seed)`.
pub fn sample_gaf(params: &GafParams, seed: u64) -> Result<GafSample> {
    let (degree, tail) = truncation_degree(params)?;
    let mut rng = rng::stream(seed);
    let coeffs = coefficient_sq_iter(params.l)
        .take(degree + 1)
        .map(|a2| rng::complex_normal(&mut rng) * a2.sqrt())
        .collect();
    Ok(GafSample {
        coeffs,
        truncation_degree: degree,
        seed,
        tail_sigma2: tail,
        radius: params.r,
        l: params.l,
    })
}

/// Horner evaluation of the truncated series; `|z|` may not exceed the
/// sample's validity radius.
pub fn evaluate(sample: &GafSample, z: Complex64) -> Result<Complex64> {
    let modulus = z.norm();
    if modulus > sample.radius * (1.0 + 1e-12) {
        return Err(Error::OutOfDomain {
            modulus,
            radius: sample.radius,
        });
    }
    Ok(horner(&sample.coeffs, z))
}

pub(crate) fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
}

/// `E n_L(r) = L r^2 / (1 - r^2)`.
pub fn expected_zero_count(l: f64, r: f64) -> f64 {
    let r2 = r * r;
    l * r2 / (1.0 - r2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VarianceRegime {
    /// `L > 1/2`: `v_L(r) ~ c_L (1-r)^-1`.
    Super,
    /// `L = 1/2`: `v_L(r) ~ c (1-r)^-1 log(1/(1-r))`.
    Critical,
    /// `L < 1/2`: `v_L(r) ~ c_L (1-r)^-(2-2L)`.
    Sub,
}

/// Growth regime of `Var n_L(r)` as `r -> 1` and its power of `1/(1-r)`.
pub fn variance_regime(l: f64) -> (VarianceRegime, f64) {
    if (l - 0.5).abs() <= 1e-12 {
        (VarianceRegime::Critical, 1.0)
    } else if l > 0.5 {
        (VarianceRegime::Super, 1.0)
    } else {
        (VarianceRegime::Sub, 2.0 - 2.0 * l)
    }
}

/// `Var n_1(r) = r^2 / (1 - r^4)`.
pub fn variance_l1(r: f64) -> f64 {
    let r2 = r * r;
    r2 / (1.0 - r2 * r2)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigSpectrum {
    pub lambdas: Vec<f64>,
    pub n: usize,
    pub r0: f64,
    pub l: f64,
}

/// Eigenvalues `lambda_m = N sum_{n = m mod N} a_n^2 r0^(2n)` of the
/// covariance of `f` at the `N` points `r0 e(j/N)`.
pub fn eigen_spectrum(l: f64, r0: f64, n: usize) -> Result<EigSpectrum> {
    if n == 0 {
        return Err(invalid("N", 0.0, "must be positive"));
    }
    if !(r0 > 0.0 && r0 < 1.0) {
        return Err(invalid("r0", r0, "must lie in (0, 1)"));
    }
    if !(l > 0.0) {
        return Err(invalid("L", l, "must be positive"));
    }
    let sums = residue_sums(l, r0, n)?;
    Ok(EigSpectrum {
        lambdas: sums.into_iter().map(|s| s * n as f64).collect(),
        n,
        r0,
        l,
    })
}

/// `sum_{k = m mod N} a_k^2 r0^(2k)` for each residue `m`, summed until the
/// terms stop changing the smallest residue sum.
fn residue_sums(l: f64, r0: f64, n: usize) -> Result<Vec<f64>> {
    let r2 = r0 * r0;
    let mut sums = vec![0.0; n];
    let mut term = 1.0;
    let mut k = 0usize;
    loop {
        sums[k % n] += term;
        let ratio = (l + k as f64) / (k as f64 + 1.0) * r2;
        term *= ratio;
        k += 1;
        if k >= n && ratio < 1.0 {
            let min = sums.iter().cloned().fold(f64::INFINITY, f64::min);
            // remaining tail is below term/(1 - q), q the sup of later ratios
            let q = if l >= 1.0 { ratio } else { r2 };
            if term / (1.0 - q) <= 1e-17 * min {
                break;
            }
        }
        if k > 100 * MAX_DEGREE {
            return Err(Error::Resource {
                what: "eigenvalue tail terms",
                required: k as u64,
                cap: 100 * MAX_DEGREE as u64,
            });
        }
    }
    Ok(sums)
}

impl EigSpectrum {
    pub fn trace(&self) -> f64 {
        self.lambdas.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.lambdas.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Constants for [`spectrum_bounds_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsConfig {
    /// `C` in `Lambda <= C N max(1, delta^(1-L))`.
    pub c_lambda: f64,
    /// `C_margin` in `log det >= -4 delta N^2 + L N log N - C_margin N`.
    pub c_margin: f64,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        BoundsConfig {
            c_lambda: 10.0,
            c_margin: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumBounds {
    pub lambda_ok: bool,
    pub logdet: f64,
    pub logdet_lower: f64,
}

impl SpectrumBounds {
    pub fn logdet_ok(&self) -> bool {
        self.logdet >= self.logdet_lower
    }
}

/// Checks the largest eigenvalue and `log det` against the explicit forms of
/// the covariance bounds, with `delta = 1 - r0`.
pub fn spectrum_bounds_check(spec: &EigSpectrum, delta: f64, cfg: &BoundsConfig) -> Result<SpectrumBounds> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta", delta, "must lie in (0, 1)"));
    }
    let mut logdet = 0.0;
    for (index, &value) in spec.lambdas.iter().enumerate() {
        if !(value > 0.0) {
            return Err(Error::DegenerateSpectrum { index, value });
        }
        logdet += value.ln();
    }
    let n = spec.n as f64;
    let lambda_cap = cfg.c_lambda * n * delta.powf(1.0 - spec.l).max(1.0);
    let logdet_lower = -4.0 * delta * n * n + spec.l * n * n.ln() - cfg.c_margin * n;
    Ok(SpectrumBounds {
        lambda_ok: spec.max() <= lambda_cap,
        logdet,
        logdet_lower,
    })
}
