//! Deep tails of the full (untruncated) law by an exponentially tilted
//! convolution, with a certified bound on the error in `log P`.
//!
//! Under the tilt `s` each term becomes Bernoulli(q_k) with
//! `q_k = p_k e^s / (1 - p_k + p_k e^s)` and
//! `P[n = j] = Q[n = j] exp(Lambda(s) - s j)`. Choosing `s` so the tilted
//! mean sits at the threshold keeps the convolution inside a window of a
//! few tilted standard deviations, so tails far below `1e-300` come out
//! in log form without underflow.
//!
//! Upper tails: the truncated count `n_K` is dominated by the full count,
//! and log-concavity of the tail `G` gives
//! `G_full(V) <= G_K(V) * prod_{k>K} (1 + p_k (rho - 1))` with
//! `rho = G_K(V-1) / G_K(V)`. Lower tails:
//! `H_K(V) prod_{k>K} (1 - p_k) <= H_full(V) <= H_K(V)`.

use serde::Serialize;

use super::{log_bernoulli_mgf, tilted_prob};
use crate::error::{invalid, Error, Result};
use crate::sum::KahanSum;

/// Cap on `terms * window`, the work of one tilted convolution.
const MAX_WORK: f64 = 2e10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TailSide {
    /// `P[n >= v]`
    Upper,
    /// `P[n <= v]`
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertifiedTail {
    pub log_p: f64,
    /// bound on `|log P_full - log_p|`
    pub log_err: f64,
    /// Bernoulli terms retained
    pub terms: usize,
    pub tilt: f64,
}

/// Tilted mean of the full law.
fn full_tilted_mean(r2: f64, s: f64) -> f64 {
    let mut sum = KahanSum::default();
    let mut p = r2;
    loop {
        let q = tilted_prob(p, s);
        sum.add(q);
        if p * s.exp().max(1.0) < 1e-18 * sum.value().max(1e-300) || p == 0.0 {
            break;
        }
        p *= r2;
    }
    sum.value()
}

fn solve_full_tilt(r2: f64, v: f64, threshold: u64) -> Result<f64> {
    let mean0 = r2 / (1.0 - r2);
    let f = |s: f64| full_tilted_mean(r2, s) - v;
    let (mut lo, mut hi) = if v >= mean0 { (0.0, 1.0) } else { (-1.0, 0.0) };
    if v >= mean0 {
        while f(hi) < 0.0 {
            lo = hi;
            hi *= 2.0;
            if hi > 1e5 {
                return Err(Error::TiltInfeasible { threshold, lo: 0.0, hi });
            }
        }
    } else {
        while f(lo) > 0.0 {
            hi = lo;
            lo *= 2.0;
            if lo < -1e5 {
                return Err(Error::TiltInfeasible { threshold, lo, hi: 0.0 });
            }
        }
    }
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if f(m) < 0.0 {
            lo = m;
        } else {
            hi = m;
        }
        if hi - lo <= 1e-13 * hi.abs().max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

struct TiltedLaw {
    /// `values[i]` is `Q[n = base + offset + i]`
    values: Vec<f64>,
    base: usize,
    offset: i64,
    /// tilted mass pushed out of the window
    lost: f64,
    log_mgf: f64,
}

impl TiltedLaw {
    fn index_of(&self, n: i64) -> i64 {
        n - self.base as i64 - self.offset
    }

    /// `sum over n in event of Q[n] e^{-s (n - v)}`, where the event is
    /// `n >= v` or `n <= v`.
    fn weighted(&self, side: TailSide, s: f64, v: i64) -> f64 {
        let len = self.values.len() as i64;
        let at = self.index_of(v);
        let range = match side {
            TailSide::Upper => at.max(0)..len,
            TailSide::Lower => 0..(at + 1).min(len),
        };
        let mut sum = KahanSum::default();
        for i in range {
            let n = self.base as i64 + self.offset + i;
            sum.add(self.values[i as usize] * (-s * (n - v) as f64).exp());
        }
        sum.value()
    }
}

fn tilted_law(probs: &[f64], s: f64) -> Result<TiltedLaw> {
    let q: Vec<f64> = probs.iter().map(|&p| tilted_prob(p, s)).collect();
    let base = q.iter().take_while(|&&x| x > 0.5).count();
    let fail_mean: f64 = q[..base].iter().map(|x| 1.0 - x).sum();
    let succ_mean: f64 = q[base..].iter().sum();
    let sd = q.iter().map(|x| x * (1.0 - x)).sum::<f64>().sqrt();
    let pad = (20.0 * sd + 30.0).ceil();
    let lo = -(fail_mean + pad).ceil() as i64;
    let hi = (succ_mean + pad).ceil() as i64;
    let width = (hi - lo + 1) as usize;
    if q.len() as f64 * width as f64 > MAX_WORK {
        return Err(Error::Resource {
            what: "tilted convolution work",
            required: (q.len() as f64 * width as f64) as u64,
            cap: MAX_WORK as u64,
        });
    }

    // x[i] is the tilted probability of (successes - base) = lo + i
    let mut x = vec![0.0; width];
    let zero = (-lo) as usize;
    x[zero] = 1.0;
    let mut lost = KahanSum::default();
    for &qk in &q[..base] {
        let fail = 1.0 - qk;
        if fail == 0.0 {
            continue;
        }
        lost.add(x[0] * fail);
        for i in 0..width - 1 {
            x[i] = x[i] * qk + x[i + 1] * fail;
        }
        x[width - 1] *= qk;
    }
    for &qk in &q[base..] {
        if qk == 0.0 {
            continue;
        }
        let stay = 1.0 - qk;
        lost.add(x[width - 1] * qk);
        for i in (1..width).rev() {
            x[i] = x[i] * stay + x[i - 1] * qk;
        }
        x[0] *= stay;
    }
    let log_mgf = probs
        .iter()
        .map(|&p| log_bernoulli_mgf(p, s))
        .collect::<KahanSum>()
        .value();
    Ok(TiltedLaw {
        values: x,
        base,
        offset: lo,
        lost: lost.value(),
        log_mgf,
    })
}

fn terms_for(r: f64, excess: f64, tol: f64) -> usize {
    // smallest k with excess * r^{2(k+1)} / (1 - r^2) <= tol
    let k = ((tol * (1.0 - r * r) / excess).ln() / (2.0 * r.ln()) - 1.0).ceil();
    k.max(1.0) as usize
}

/// `log P[n >= v]` or `log P[n <= v]` for the full L = 1 law at radius `r`.
/// Truncation and window errors are driven below `tol`; the reported
/// `log_err` also carries a floating-point roundoff allowance growing with
/// the number of terms.
pub fn tail_certified(r: f64, v: u64, side: TailSide, tol: f64) -> Result<CertifiedTail> {
    super::check_r(r)?;
    if !(tol > 0.0 && tol < 1.0) {
        return Err(invalid("tol", tol, "must lie in (0, 1)"));
    }
    let r2 = r * r;

    match side {
        TailSide::Upper if v == 0 => {
            return Ok(CertifiedTail {
                log_p: 0.0,
                log_err: 0.0,
                terms: 0,
                tilt: 0.0,
            })
        }
        TailSide::Lower if v == 0 => {
            // P[n = 0] = prod (1 - r^{2k})
            let k = terms_for(r, 1.0, 0.5 * tol);
            let model = super::with_terms(r, k)?;
            let log_p = model.probs.iter().map(|&p| (-p).ln_1p()).collect::<KahanSum>().value();
            let rest = model.tv_bound / (1.0 - r2.powi(k as i32 + 1).min(0.5));
            return Ok(CertifiedTail {
                log_p,
                log_err: rest + 1e-15 * k as f64,
                terms: k,
                tilt: f64::NEG_INFINITY,
            });
        }
        _ => {}
    }

    let raw = solve_full_tilt(r2, v as f64, v)?;
    let s = match side {
        TailSide::Upper => raw.max(0.0),
        TailSide::Lower => raw.min(0.0),
    };
    let v = v as i64;

    let mut k = match side {
        TailSide::Upper => terms_for(r, s.exp() * std::f64::consts::E, 0.5 * tol).max(v as usize + 1),
        TailSide::Lower => terms_for(r, 2.0, 0.5 * tol),
    };
    let roundoff = |k: usize| 8.0 * f64::EPSILON * k as f64;

    for _ in 0..30 {
        let model = super::with_terms(r, k)?;
        let law = tilted_law(&model.probs, s)?;
        let w = law.weighted(side, s, v);
        if !(w > 0.0) {
            return Err(Error::NumericRange("tilted tail weight underflow"));
        }
        let log_p = law.log_mgf - s * v as f64 + w.ln();
        let window_err = law.lost / w;
        let trunc_err = match side {
            TailSide::Upper => {
                let w_prev = law.weighted(side, s, v - 1);
                let log_rho = s + (w_prev / w).ln();
                log_rho.exp_m1() * model.tv_bound
            }
            TailSide::Lower => model.tv_bound / (1.0 - model.probs.last().copied().unwrap_or(0.0)),
        };
        // roundoff is reported but cannot be reduced by adding terms
        let log_err = trunc_err + 2.0 * window_err + roundoff(k);
        if trunc_err <= 0.5 * tol && window_err <= 0.25 * tol {
            return Ok(CertifiedTail {
                log_p,
                log_err,
                terms: k,
                tilt: s,
            });
        }
        let grow = ((trunc_err / (0.25 * tol)).ln() / (-2.0 * r.ln())).ceil().max(1.0) as usize;
        k += grow;
    }
    Err(Error::NonConvergent {
        what: "certified tail truncation",
        iterations: k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_l1::{build_model, lower_tail_exact, tail_exact};

    #[test]
    fn matches_plain_pmf_where_both_apply() {
        for r in [0.5, 0.8, 0.9, 0.95] {
            let m = build_model(r, 1e-15).unwrap();
            let mu = m.mu();
            for v in [1u64, mu.ceil() as u64, (2.0 * mu) as u64 + 1, (4.0 * mu) as u64 + 3] {
                let exact = tail_exact(&m, v).unwrap();
                let cert = tail_certified(r, v, TailSide::Upper, 1e-10).unwrap();
                assert!(cert.log_err <= 1e-10);
                assert!((cert.log_p - exact).abs() < 1e-9 * exact.abs().max(1.0), "r {r} v {v}: {} {exact}", cert.log_p);
            }
            for v in [0u64, 1, (0.5 * mu) as u64] {
                let exact = lower_tail_exact(&m, v).unwrap();
                let cert = tail_certified(r, v, TailSide::Lower, 1e-10).unwrap();
                assert!((cert.log_p - exact).abs() < 1e-9 * exact.abs().max(1.0), "r {r} v {v}");
            }
        }
    }

    #[test]
    fn reaches_far_below_double_range() {
        let r = 1.0 - 2f64.powi(-8);
        let t = tail_certified(r, 4000, TailSide::Upper, 1e-9).unwrap();
        assert!(t.log_p < -1000.0 && t.log_p.is_finite());
        assert!(t.log_err <= 1e-9);
        assert!(t.terms > 4000);
        let further = tail_certified(r, 4001, TailSide::Upper, 1e-9).unwrap();
        assert!(further.log_p < t.log_p);
    }

    #[test]
    fn tail_is_monotone() {
        let r = 0.97;
        let mut last = 0.0;
        for v in (0..200).step_by(7) {
            let t = tail_certified(r, v, TailSide::Upper, 1e-10).unwrap().log_p;
            assert!(t <= last + 1e-12);
            last = t;
        }
    }
}
