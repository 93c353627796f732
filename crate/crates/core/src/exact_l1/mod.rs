//! Exact law of the L = 1 zero count as a sum of independent
//! Bernoulli(r^{2k}) variables: pmf, tails, sampling and log-MGF.

mod tilted;

pub use tilted::{tail_certified, CertifiedTail, TailSide};

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::rng::{open01, stream};
use crate::sum::{log_add_exp, KahanSum};

/// Cap on the number of Bernoulli terms in a model.
pub const MAX_TERMS: usize = 100_000_000;
/// Cap on the number of terms accepted by the quadratic pmf convolution.
pub const MAX_PMF_TERMS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoissonBinomialModel {
    pub r: f64,
    /// `probs[k - 1] = r^{2k}`
    pub probs: Vec<f64>,
    /// total-variation distance to the untruncated law is at most this
    pub tv_bound: f64,
}

fn check_r(r: f64) -> Result<()> {
    if !(r > 0.0 && r < 1.0) {
        return Err(invalid("r", r, "must lie in (0, 1)"));
    }
    Ok(())
}

/// `r^{2(k+1)} / (1 - r^2)`, the mass of the Bernoullis beyond index `k`.
fn omitted_mass(r: f64, k: usize) -> f64 {
    (2.0 * (k as f64 + 1.0) * r.ln()).exp() / (1.0 - r * r)
}

/// Smallest model whose total-variation distance to the full law is at most
/// `epsilon_tv`.
pub fn build_model(r: f64, epsilon_tv: f64) -> Result<PoissonBinomialModel> {
    check_r(r)?;
    if !(epsilon_tv > 0.0 && epsilon_tv < 1.0) {
        return Err(invalid("epsilon_tv", epsilon_tv, "must lie in (0, 1)"));
    }
    let guess = ((epsilon_tv * (1.0 - r * r)).ln() / (2.0 * r.ln()) - 1.0).ceil();
    if !(guess <= MAX_TERMS as f64) {
        return Err(Error::Resource {
            what: "Bernoulli terms",
            required: guess.min(u64::MAX as f64) as u64,
            cap: MAX_TERMS as u64,
        });
    }
    let mut k = guess.max(0.0) as usize;
    while k > 0 && omitted_mass(r, k - 1) <= epsilon_tv {
        k -= 1;
    }
    while omitted_mass(r, k) > epsilon_tv {
        k += 1;
    }
    with_terms(r, k)
}

/// Model with exactly `k` terms.
pub fn with_terms(r: f64, k: usize) -> Result<PoissonBinomialModel> {
    check_r(r)?;
    if k > MAX_TERMS {
        return Err(Error::Resource {
            what: "Bernoulli terms",
            required: k as u64,
            cap: MAX_TERMS as u64,
        });
    }
    let r2 = r * r;
    let mut probs = Vec::with_capacity(k);
    let mut p = 1.0;
    for _ in 0..k {
        p *= r2;
        probs.push(p);
    }
    Ok(PoissonBinomialModel {
        r,
        probs,
        tv_bound: omitted_mass(r, k),
    })
}

impl PoissonBinomialModel {
    pub fn terms(&self) -> usize {
        self.probs.len()
    }

    /// Mean of the truncated sum.
    pub fn mean(&self) -> f64 {
        self.probs.iter().copied().collect::<KahanSum>().value()
    }

    /// Variance of the truncated sum.
    pub fn variance(&self) -> f64 {
        self.probs.iter().map(|p| p * (1.0 - p)).collect::<KahanSum>().value()
    }

    /// `r^2 / (1 - r^2)`, the mean of the full law.
    pub fn mu(&self) -> f64 {
        let r2 = self.r * self.r;
        r2 / (1.0 - r2)
    }

    /// `r^2 / (1 - r^4)`, the variance of the full law.
    pub fn v1(&self) -> f64 {
        let r2 = self.r * self.r;
        r2 / (1.0 - r2 * r2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pmf {
    pub values: Vec<f64>,
    pub tv_bound: f64,
}

impl Pmf {
    pub fn total(&self) -> f64 {
        self.values.iter().copied().collect::<KahanSum>().value()
    }

    pub fn mean(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(j, p)| j as f64 * p)
            .collect::<KahanSum>()
            .value()
    }
}

fn check_pmf_size(model: &PoissonBinomialModel) -> Result<()> {
    if model.terms() > MAX_PMF_TERMS {
        return Err(Error::Resource {
            what: "pmf convolution terms",
            required: model.terms() as u64,
            cap: MAX_PMF_TERMS as u64,
        });
    }
    Ok(())
}

pub fn pmf(model: &PoissonBinomialModel) -> Result<Pmf> {
    check_pmf_size(model)?;
    let k = model.terms();
    let mut v = vec![0.0; k + 1];
    v[0] = 1.0;
    for (i, &p) in model.probs.iter().enumerate() {
        let q = 1.0 - p;
        for j in (1..=i + 1).rev() {
            v[j] = v[j] * q + v[j - 1] * p;
        }
        v[0] *= q;
    }
    Ok(Pmf {
        values: v,
        tv_bound: model.tv_bound,
    })
}

/// `log P[n >= v]` under the truncated model, summed from the far end.
pub fn tail_exact(model: &PoissonBinomialModel, v: u64) -> Result<f64> {
    let law = pmf(model)?;
    if v == 0 {
        return Ok(0.0);
    }
    if v as usize > model.terms() {
        return Ok(f64::NEG_INFINITY);
    }
    let s: KahanSum = law.values[v as usize..].iter().rev().copied().collect();
    Ok(s.value().ln())
}

/// `log P[n <= v]` under the truncated model.
pub fn lower_tail_exact(model: &PoissonBinomialModel, v: u64) -> Result<f64> {
    let law = pmf(model)?;
    let end = (v as usize).min(model.terms());
    let s: KahanSum = law.values[..=end].iter().copied().collect();
    Ok(s.value().ln().min(0.0))
}

/// One draw of the count: a sum of independent Bernoulli draws.
pub fn sample_count(model: &PoissonBinomialModel, seed: u64) -> u64 {
    let mut rng = stream(seed);
    draw(&model.probs, &mut rng)
}

pub(crate) fn draw<R: rand_core::RngCore>(probs: &[f64], rng: &mut R) -> u64 {
    probs.iter().filter(|&&p| open01(rng) < p).count() as u64
}

/// `log(1 - p + p e^s)`
fn log_bernoulli_mgf(p: f64, s: f64) -> f64 {
    if s <= 1.0 {
        (p * s.exp_m1()).ln_1p()
    } else {
        log_add_exp((-p).ln_1p(), p.ln() + s)
    }
}

/// Tilted success probability `p e^s / (1 - p + p e^s)`.
pub fn tilted_prob(p: f64, s: f64) -> f64 {
    if s > 0.0 {
        p / (p + (1.0 - p) * (-s).exp())
    } else {
        let e = s.exp();
        p * e / (1.0 - p + p * e)
    }
}

/// Log-MGF of the uncentered truncated sum.
pub fn log_mgf_raw(model: &PoissonBinomialModel, s: f64) -> Result<f64> {
    if !s.is_finite() {
        return Err(invalid("s", s, "must be finite"));
    }
    let out = model
        .probs
        .iter()
        .map(|&p| log_bernoulli_mgf(p, s))
        .collect::<KahanSum>()
        .value();
    if !out.is_finite() {
        return Err(Error::NumericRange("log_mgf_raw"));
    }
    Ok(out)
}

/// `sum_k [log(1 + p_k (e^s - 1)) - p_k s]`
pub fn log_mgf_centered(model: &PoissonBinomialModel, s: f64) -> Result<f64> {
    if !s.is_finite() {
        return Err(invalid("s", s, "must be finite"));
    }
    let out = model
        .probs
        .iter()
        .map(|&p| log_bernoulli_mgf(p, s) - p * s)
        .collect::<KahanSum>()
        .value();
    if !out.is_finite() {
        return Err(Error::NumericRange("log_mgf_centered"));
    }
    Ok(out)
}

/// Derivative of [`log_mgf_centered`]: the mean shift under tilt `s`.
pub fn log_mgf_centered_derivative(model: &PoissonBinomialModel, s: f64) -> f64 {
    model
        .probs
        .iter()
        .map(|&p| tilted_prob(p, s) - p)
        .collect::<KahanSum>()
        .value()
}

/// Tilt `s` in `[0, 50]` whose tilted mean equals `v`, by bisection.
pub fn solve_tilt(model: &PoissonBinomialModel, v: u64) -> Result<f64> {
    let (lo, hi) = (0.0, 50.0);
    let target = v as f64 - model.mean();
    let f = |s: f64| log_mgf_centered_derivative(model, s) - target;
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (f(a), f(b));
    if fa > 0.0 || fb < 0.0 {
        return Err(Error::TiltInfeasible { threshold: v, lo, hi });
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if f(m) < 0.0 {
            a = m;
        } else {
            b = m;
        }
        if b - a <= 1e-14 * b.max(1.0) {
            break;
        }
    }
    Ok(0.5 * (a + b))
}

/// `v1^{-(2 alpha - 1)} log_mgf_centered(v1^{alpha - 1} lambda)`
pub fn scaled_log_mgf(model: &PoissonBinomialModel, alpha: f64, lambda: f64) -> Result<f64> {
    if !(alpha > 0.5) {
        return Err(invalid("alpha", alpha, "must exceed 1/2"));
    }
    let v = model.v1();
    let s = v.powf(alpha - 1.0) * lambda;
    Ok(v.powf(-(2.0 * alpha - 1.0)) * log_mgf_centered(model, s)?)
}
