//! Replicated experiments: zero-count moments, overcrowding tail estimates,
//! deviation and overcrowding scaling tables at L = 1, and the Rouché
//! overcrowding certificate.
//!
//! Replicate `i` draws from `replicate_seed(seed, i, attempt)`, so results
//! do not depend on how replicates are spread over workers.

mod certificate;
mod scaling;

pub use certificate::{build_certificate, CertificateReport};
pub use scaling::{
    deviation_scaling_l1, overcrowding_row, overcrowding_scaling_l1, DeviationRow, OvercrowdingRow, VRule,
    DEFAULT_ASSUMPTION_CONSTANT,
};

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::exact_l1::{self, log_mgf_raw, solve_tilt, tilted_prob, PoissonBinomialModel};
use crate::exec::Exec;
use crate::gaf_model::{sample_gaf, GafParams};
use crate::rng::{replicate_seed, stream};
use crate::stats::{wilson, Z95, Z95_ONE_SIDED};
use crate::sum::KahanSum;
use crate::zero_counter::{count_zeros, CountConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    pub exec: Exec,
    /// relative tail budget for GAF truncation
    pub epsilon_tail: f64,
    /// draws per replicate before it is declared unreliable
    pub max_attempts: u32,
    /// abort when more than this fraction of replicates stays unreliable
    pub max_unreliable_fraction: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            exec: Exec::default(),
            epsilon_tail: 1e-12,
            max_attempts: 8,
            max_unreliable_fraction: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TailMethod {
    ExactDP,
    PlainMC,
    TiltedMC,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailEstimate {
    pub p_hat: f64,
    pub log_p: f64,
    pub stderr: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub replicates: u64,
    pub method: TailMethod,
    /// no replicate hit the event; `ci_high` is a one-sided 95% bound
    pub zero_hits: bool,
    /// replicates redrawn after an unreliable contour
    pub resampled: u64,
    /// replicates dropped as unreliable after all attempts
    pub unreliable: u64,
    pub tilt: Option<f64>,
    /// mean likelihood ratio, which should be close to 1
    pub weight_mean: Option<f64>,
    pub weight_stderr: Option<f64>,
    pub tv_bound: Option<f64>,
}

impl TailEstimate {
    fn base(method: TailMethod) -> Self {
        TailEstimate {
            p_hat: 0.0,
            log_p: f64::NEG_INFINITY,
            stderr: 0.0,
            ci_low: 0.0,
            ci_high: 0.0,
            replicates: 0,
            method,
            zero_hits: false,
            resampled: 0,
            unreliable: 0,
            tilt: None,
            weight_mean: None,
            weight_stderr: None,
            tv_bound: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub stderr_mean: f64,
    /// replicates that produced a count
    pub trials: u64,
    pub resampled: u64,
    pub unreliable: u64,
}

#[derive(Debug, Clone, Copy)]
enum Outcome {
    Count { value: u64, attempts: u32 },
    Unreliable,
}

/// Zero counts of `trials` independent replicates at radius `r`, with
/// redraws for unreliable contours.
fn replicate_counts(
    l: f64,
    r: f64,
    trials: u64,
    seed: u64,
    cfg: &EngineConfig,
) -> Result<(Vec<Option<u64>>, u64, u64)> {
    let params = GafParams::new(l, r, cfg.epsilon_tail)?;
    let count_cfg = CountConfig::new(r)?;
    let run = |i: u64| -> Result<Outcome> {
        for attempt in 0..cfg.max_attempts {
            let sample = sample_gaf(&params, replicate_seed(seed, i, attempt))?;
            match count_zeros(&sample, &count_cfg) {
                Ok(res) => {
                    return Ok(Outcome::Count {
                        value: res.count,
                        attempts: attempt + 1,
                    })
                }
                Err(Error::UnreliableContour { .. }) | Err(Error::BoundaryAmbiguous { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        Ok(Outcome::Unreliable)
    };
    let outcomes = cfg.exec.map(trials, run);
    let mut counts = Vec::with_capacity(trials as usize);
    let (mut resampled, mut unreliable) = (0u64, 0u64);
    for o in outcomes {
        match o? {
            Outcome::Count { value, attempts } => {
                resampled += u64::from(attempts > 1);
                counts.push(Some(value));
            }
            Outcome::Unreliable => {
                resampled += 1;
                unreliable += 1;
                counts.push(None);
            }
        }
    }
    if unreliable as f64 > cfg.max_unreliable_fraction * trials as f64 {
        return Err(Error::ExperimentAborted { unreliable, trials });
    }
    Ok((counts, resampled, unreliable))
}

/// Sample mean, variance and standard error of the zero count `n_L(r)`.
pub fn empirical_moments(l: f64, r: f64, trials: u64, seed: u64, cfg: &EngineConfig) -> Result<Moments> {
    if trials < 100 {
        return Err(invalid("trials", trials as f64, "at least 100 replicates are required"));
    }
    let (counts, resampled, unreliable) = replicate_counts(l, r, trials, seed, cfg)?;
    let (n, s, ss) = counts
        .iter()
        .flatten()
        .fold((0u128, 0u128, 0u128), |(n, s, ss), &c| (n + 1, s + c as u128, ss + (c as u128) * (c as u128)));
    let nf = n as f64;
    let mean = s as f64 / nf;
    let variance = (n * ss - s * s) as f64 / (nf * (nf - 1.0));
    Ok(Moments {
        mean,
        variance,
        stderr_mean: (variance / nf).sqrt(),
        trials: n as u64,
        resampled,
        unreliable,
    })
}

/// Histogram of zero counts (index = count) over reliable replicates.
pub fn count_histogram(l: f64, r: f64, trials: u64, seed: u64, cfg: &EngineConfig) -> Result<Vec<u64>> {
    let (counts, _, _) = replicate_counts(l, r, trials, seed, cfg)?;
    let mut hist = Vec::new();
    for c in counts.into_iter().flatten() {
        let c = c as usize;
        if hist.len() <= c {
            hist.resize(c + 1, 0);
        }
        hist[c] += 1;
    }
    Ok(hist)
}

fn binomial_estimate(hits: u64, trials: u64, method: TailMethod) -> TailEstimate {
    let p = hits as f64 / trials as f64;
    let mut est = TailEstimate::base(method);
    est.p_hat = p;
    est.log_p = p.ln();
    est.stderr = (p * (1.0 - p) / trials as f64).sqrt();
    est.replicates = trials;
    if hits == 0 {
        est.zero_hits = true;
        est.ci_low = 0.0;
        est.ci_high = wilson(0, trials, Z95_ONE_SIDED).1;
    } else {
        let (lo, hi) = wilson(hits, trials, Z95);
        est.ci_low = lo.min(p);
        est.ci_high = hi.max(p);
    }
    est
}

/// Indicator-mean estimate of `P[n_L(r) >= v]` with a Wilson interval.
pub fn tail_plain_mc(l: f64, r: f64, v: u64, trials: u64, seed: u64, cfg: &EngineConfig) -> Result<TailEstimate> {
    if trials < 1000 {
        return Err(invalid("trials", trials as f64, "at least 1000 replicates are required"));
    }
    GafParams::new(l, r, cfg.epsilon_tail)?;
    if v == 0 {
        return Ok(binomial_estimate(trials, trials, TailMethod::PlainMC));
    }
    let (counts, resampled, unreliable) = replicate_counts(l, r, trials, seed, cfg)?;
    let used = trials - unreliable;
    let hits = counts.iter().flatten().filter(|&&c| c >= v).count() as u64;
    let mut est = binomial_estimate(hits, used, TailMethod::PlainMC);
    est.resampled = resampled;
    est.unreliable = unreliable;
    Ok(est)
}

/// `P[n >= v]` from the exact pmf of the truncated L = 1 model.
pub fn tail_exact_dp(model: &PoissonBinomialModel, v: u64) -> Result<TailEstimate> {
    let log_p = exact_l1::tail_exact(model, v)?;
    let p = log_p.exp();
    let mut est = TailEstimate::base(TailMethod::ExactDP);
    est.p_hat = p;
    est.log_p = log_p;
    est.ci_low = p;
    est.ci_high = p;
    est.tv_bound = Some(model.tv_bound);
    Ok(est)
}

/// Importance-sampling estimate of `P[n >= v]` at L = 1 under the
/// exponential tilt that moves the mean to `v`.
///
/// Thresholds at or below the model mean use no tilt. The interval is the
/// normal approximation `p_hat +- 1.96 stderr`, clipped to `[0, 1]`.
pub fn tail_tilted_l1(model: &PoissonBinomialModel, v: u64, trials: u64, seed: u64, exec: Exec) -> Result<TailEstimate> {
    if v as usize > model.terms() {
        return Err(invalid("V", v as f64, "exceeds the number of model terms"));
    }
    if trials < 2 {
        return Err(invalid("trials", trials as f64, "at least 2 replicates are required"));
    }
    let s = if v as f64 <= model.mean() { 0.0 } else { solve_tilt(model, v)? };
    let q: Vec<f64> = model.probs.iter().map(|&p| tilted_prob(p, s)).collect();
    let lambda = log_mgf_raw(model, s)?;

    // (indicator * weight, weight) per replicate
    let draws = exec.map(trials, |i| {
        let mut rng = stream(replicate_seed(seed, i, 0));
        let c = exact_l1::draw(&q, &mut rng);
        let w = (lambda - s * c as f64).exp();
        (if c >= v { w } else { 0.0 }, w)
    });
    let n = trials as f64;
    let mean_sd = |xs: &mut dyn Iterator<Item = f64>| {
        let xs: Vec<f64> = xs.collect();
        let m = xs.iter().copied().collect::<KahanSum>().value() / n;
        let var = xs.iter().map(|x| (x - m) * (x - m)).collect::<KahanSum>().value() / (n - 1.0);
        (m, (var / n).sqrt())
    };
    let (p, se) = mean_sd(&mut draws.iter().map(|d| d.0));
    let (wm, wse) = mean_sd(&mut draws.iter().map(|d| d.1));

    let mut est = TailEstimate::base(TailMethod::TiltedMC);
    est.p_hat = p.min(1.0);
    est.log_p = p.ln();
    est.stderr = se;
    est.ci_low = (p - Z95 * se).max(0.0);
    est.ci_high = (p + Z95 * se).min(1.0).max(est.p_hat);
    est.replicates = trials;
    est.zero_hits = p == 0.0;
    est.tilt = Some(s);
    est.weight_mean = Some(wm);
    est.weight_stderr = Some(wse);
    est.tv_bound = Some(model.tv_bound);
    Ok(est)
}
