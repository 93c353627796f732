//! Limiting log-MGF, rate functions in the three scaling regimes, the
//! deviation constant `c(t)`, and a numeric Legendre transform oracle.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::specials::{dilog, lambert_w, Branch, ZETA2};

/// `pi^2 / 3`, the alpha = 1 rate at the left end of its finite domain.
pub const BRANCH_POINT_RATE: f64 = PI * PI / 3.0;

const BRANCH_POINT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// `1/2 < alpha < 1`
    AlphaLow,
    AlphaOne,
    /// `alpha > 1`
    AlphaHigh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RateBranch {
    W0,
    Wm1,
    BranchPoint,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateResult {
    /// possibly `+inf`
    pub value: f64,
    pub regime: Regime,
    pub branch: RateBranch,
}

pub fn regime(alpha: f64) -> Result<Regime> {
    if !(alpha > 0.5) || !alpha.is_finite() {
        return Err(invalid("alpha", alpha, "must exceed 1/2"));
    }
    Ok(if alpha < 1.0 {
        Regime::AlphaLow
    } else if alpha == 1.0 {
        Regime::AlphaOne
    } else {
        Regime::AlphaHigh
    })
}

/// `Li2(1 - e^y)`, stable for large `|y|`.
fn dilog_one_minus_exp(y: f64) -> f64 {
    if y > 30.0 {
        // inversion: Li2(-z) = -pi^2/6 - log^2(z)/2 - Li2(-1/z) with z = e^y - 1
        let log_z = y + (-(-y).exp()).ln_1p();
        let inv = -(-y).exp() / (-(-y).exp()).ln_1p().exp();
        -ZETA2 - 0.5 * log_z * log_z - dilog(inv).unwrap_or(0.0)
    } else {
        dilog(-y.exp_m1()).expect("argument is at most 1")
    }
}

/// `Lambda(lambda)`: `lambda^2/2`, `-2 lambda - 2 Li2(1 - e^lambda)` or
/// `lambda^2 1{lambda > 0}` by regime.
pub fn limiting_log_mgf(alpha: f64, lambda: f64) -> Result<f64> {
    Ok(match regime(alpha)? {
        Regime::AlphaLow => 0.5 * lambda * lambda,
        Regime::AlphaOne => -2.0 * lambda - 2.0 * dilog_one_minus_exp(lambda),
        Regime::AlphaHigh => {
            if lambda > 0.0 {
                lambda * lambda
            } else {
                0.0
            }
        }
    })
}

/// `h(y, x) = y (x + 2) + 2 Li2(1 - e^y)`
pub fn h(y: f64, x: f64) -> f64 {
    y * (x + 2.0) + 2.0 * dilog_one_minus_exp(y)
}

/// Maximizer `lambda_j(x) = u + W_j(-u e^{-u})`, `u = (x + 2)/2`, of
/// `h(., x)` for `x > -2`, with the branch used.
pub fn alpha_one_maximizer(x: f64) -> Result<(f64, RateBranch)> {
    if !(x > -2.0) {
        return Err(invalid("x", x, "maximizer exists only for x > -2"));
    }
    let u = 0.5 * (x + 2.0);
    let arg = -u * (-u).exp();
    let (branch, tag) = if x >= 0.0 {
        (Branch::Principal, RateBranch::W0)
    } else {
        (Branch::Lower, RateBranch::Wm1)
    };
    let w = lambert_w(branch, arg)?;
    Ok((u + w, tag))
}

pub fn rate_function(alpha: f64, x: f64) -> Result<RateResult> {
    if x.is_nan() {
        return Err(invalid("x", x, "must not be NaN"));
    }
    let regime = regime(alpha)?;
    let (value, branch) = match regime {
        Regime::AlphaLow => (0.5 * x * x, RateBranch::NotApplicable),
        Regime::AlphaHigh => {
            if x >= 0.0 {
                (0.25 * x * x, RateBranch::NotApplicable)
            } else {
                (f64::INFINITY, RateBranch::NotApplicable)
            }
        }
        Regime::AlphaOne => {
            if (x + 2.0).abs() < BRANCH_POINT_TOL {
                (BRANCH_POINT_RATE, RateBranch::BranchPoint)
            } else if x < -2.0 {
                (f64::INFINITY, RateBranch::NotApplicable)
            } else if x == f64::INFINITY {
                (f64::INFINITY, RateBranch::W0)
            } else {
                let (y, branch) = alpha_one_maximizer(x)?;
                (h(y, x).max(0.0), branch)
            }
        }
    };
    Ok(RateResult { value, regime, branch })
}

/// Deviation constant: `t^2/2`, the closed W0/Li2 expression, or `t^2/4`.
pub fn c_of_t(alpha: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(invalid("t", t, "must be positive and finite"));
    }
    Ok(match regime(alpha)? {
        Regime::AlphaLow => 0.5 * t * t,
        Regime::AlphaHigh => 0.25 * t * t,
        Regime::AlphaOne => {
            let u = 0.5 * (t + 2.0);
            let w = lambert_w(Branch::Principal, -u * (-u).exp())
                .map_err(|_| Error::InternalConsistency("W0 argument below -1/e"))?;
            0.5 * (t + 2.0) * (t + 2.0) + 2.0 * dilog_one_minus_exp(u + w) + (t + 2.0) * w
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Legendre {
    /// `+inf` when `diverged`
    pub value: f64,
    pub argmax: f64,
    pub diverged: bool,
}

const GOLDEN_TOL: f64 = 1e-12;
const BRACKET_CAP: f64 = 1e4;
const DIVERGENCE_LEVEL: f64 = 1e12;

/// `sup_lambda { lambda x - Lambda(lambda) }` by golden-section search on an
/// adaptively widened bracket.
pub fn legendre_numeric(alpha: f64, x: f64) -> Result<Legendre> {
    regime(alpha)?;
    if !x.is_finite() {
        return Err(invalid("x", x, "must be finite"));
    }
    let obj = |l: f64| l * x - limiting_log_mgf(alpha, l).expect("alpha validated");
    let diverged = |argmax| Legendre {
        value: f64::INFINITY,
        argmax,
        diverged: true,
    };

    let (mut lo, mut hi) = (-50.0f64, 50.0f64);
    loop {
        let (arg, val) = golden_max(&obj, lo, hi);
        if val > DIVERGENCE_LEVEL {
            return Ok(diverged(arg));
        }
        let span = hi - lo;
        let at_lo = arg - lo <= 1e-6 * span;
        let at_hi = hi - arg <= 1e-6 * span;
        if !at_lo && !at_hi {
            return Ok(Legendre {
                value: val,
                argmax: arg,
                diverged: false,
            });
        }
        if (at_lo && lo <= -BRACKET_CAP) || (at_hi && hi >= BRACKET_CAP) {
            return Ok(diverged(arg));
        }
        // widen toward the side the maximizer is pressing against, unless the
        // objective is flat there
        let widened = if at_lo { lo * 2.0 } else { hi * 2.0 };
        let probe = if at_lo { obj(widened.max(-BRACKET_CAP)) } else { obj(widened.min(BRACKET_CAP)) };
        if probe <= val + 1e-15 * val.abs().max(1.0) {
            return Ok(Legendre {
                value: val,
                argmax: arg,
                diverged: false,
            });
        }
        if at_lo {
            lo = widened.max(-BRACKET_CAP);
        } else {
            hi = widened.min(BRACKET_CAP);
        }
    }
}

fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > GOLDEN_TOL * (1.0 + a.abs().max(b.abs())) {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    // the endpoints are candidates too, so a monotone objective is caught
    [(a, f(a)), (b, f(b)), (c, fc), (d, fd)]
        .into_iter()
        .fold((a, f64::NEG_INFINITY), |best, p| if p.1 > best.1 { p } else { best })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
        let n = ((hi - lo) / step).round() as i64;
        (0..=n).map(|i| lo + i as f64 * step).collect()
    }

    #[test]
    fn log_mgf_cases() {
        for a in [0.6, 1.0, 3.0] {
            assert_eq!(limiting_log_mgf(a, 0.0).unwrap(), 0.0);
        }
        assert_eq!(limiting_log_mgf(2.0, -3.0).unwrap(), 0.0);
        assert_eq!(limiting_log_mgf(2.0, 3.0).unwrap(), 9.0);
        let h = 1e-3;
        let f = |l| limiting_log_mgf(1.0, l).unwrap();
        let second = (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
        assert!((second - 1.0).abs() < 1e-5);
        assert!(limiting_log_mgf(0.5, 1.0).is_err());
    }

    #[test]
    fn large_lambda_is_continuous() {
        let f = |l| limiting_log_mgf(1.0, l).unwrap();
        for l in [29.999, 30.0, 30.001] {
            let direct = -2.0 * l - 2.0 * dilog(-f64::exp_m1(l)).unwrap();
            assert!((f(l) - direct).abs() < 1e-9 * direct.abs());
        }
        assert!(f(800.0).is_finite() && f(800.0) > 0.0);
    }

    #[test]
    fn anchors() {
        let r = rate_function(1.0, -2.0).unwrap();
        assert!((r.value - 3.289868133696453).abs() < 1e-12);
        assert_eq!(r.branch, RateBranch::BranchPoint);
        assert!(rate_function(1.0, 0.0).unwrap().value.abs() < 1e-12);
        assert!((rate_function(0.75, 1.4).unwrap().value - 0.98).abs() < 1e-15);
        assert_eq!(rate_function(1.0, -2.5).unwrap().value, f64::INFINITY);
        assert_eq!(rate_function(2.0, -0.1).unwrap().value, f64::INFINITY);
        assert_eq!(rate_function(1.0, -1.0).unwrap().branch, RateBranch::Wm1);
        assert_eq!(rate_function(1.0, 1.0).unwrap().branch, RateBranch::W0);
    }

    #[test]
    fn c_of_t_cases() {
        for t in [1.0, 2.0, 3.0] {
            assert_eq!(c_of_t(2.0, t).unwrap(), t * t / 4.0);
        }
        assert_eq!(c_of_t(0.75, 2.0).unwrap(), 2.0);
        for t in [0.5, 1.0, 2.0, 5.0] {
            let diff = c_of_t(1.0, t).unwrap() - rate_function(1.0, t).unwrap().value;
            assert!(diff.abs() <= 1e-12);
        }
        assert!(c_of_t(1.0, 0.0).is_err());
    }

    #[test]
    fn oracle_agrees_with_closed_form() {
        let cases = [
            (1.0, grid(-1.95, 6.0, 0.05)),
            (0.75, grid(-5.0, 5.0, 0.05)),
            (2.0, grid(0.0, 6.0, 0.05)),
        ];
        for (alpha, xs) in cases {
            for x in xs {
                let closed = rate_function(alpha, x).unwrap().value;
                let num = legendre_numeric(alpha, x).unwrap();
                assert!(!num.diverged, "alpha {alpha} x {x}");
                assert!((closed - num.value).abs() <= 1e-8 * closed.max(1.0), "alpha {alpha} x {x}: {closed} {}", num.value);
            }
        }
    }

    #[test]
    fn oracle_divergence_and_anchors() {
        for a in [0.75, 1.0, 2.0] {
            assert!(legendre_numeric(a, 0.0).unwrap().value.abs() < 1e-12);
        }
        assert!((legendre_numeric(1.0, -2.0).unwrap().value - BRANCH_POINT_RATE).abs() < 1e-6);
        assert!(legendre_numeric(2.0, -0.5).unwrap().diverged);
        assert!(legendre_numeric(1.0, -2.5).unwrap().diverged);
    }

    #[test]
    fn maximizer_is_stationary() {
        for x in grid(-1.95, 6.0, 0.05) {
            if x.abs() < 1e-12 {
                continue;
            }
            let (y, _) = alpha_one_maximizer(x).unwrap();
            let d = 1e-6;
            let deriv = (h(y + d, x) - h(y - d, x)) / (2.0 * d);
            assert!(deriv.abs() <= 1e-6, "x {x}: {deriv}");
            if x < 0.0 {
                assert!(y <= 0.0);
            } else {
                assert!(y >= 0.0);
            }
        }
    }

    #[test]
    fn convex_nonnegative_minimum_at_zero() {
        for alpha in [0.75, 1.0, 2.0] {
            let xs = grid(-1.9, 6.0, 0.05);
            let vals: Vec<f64> = xs
                .iter()
                .map(|&x| rate_function(alpha, x).unwrap().value)
                .collect();
            let finite: Vec<f64> = vals.iter().copied().filter(|v| v.is_finite()).collect();
            assert!(finite.iter().all(|&v| v >= 0.0));
            for w in finite.windows(3) {
                assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-12);
            }
            assert!(rate_function(alpha, 0.0).unwrap().value.abs() < 1e-12);
        }
    }

    #[test]
    fn asymmetry_and_limits() {
        for t in [0.5, 1.0, 1.5, 1.9] {
            assert!(rate_function(1.0, t).unwrap().value < rate_function(1.0, -t).unwrap().value);
        }
        let mut prev = 0.0;
        for k in 1..=9 {
            let x = -2.0 + 10f64.powi(-k);
            let v = rate_function(1.0, x).unwrap().value;
            let gap = (BRANCH_POINT_RATE - v).abs();
            if k > 1 {
                assert!(gap <= prev);
            }
            prev = gap;
        }
        assert!(prev < 1e-6);
        let mut last = 0.0;
        for x in [1.0, 10.0, 100.0, 1e3, 1e4] {
            let v = rate_function(1.0, x).unwrap().value;
            assert!(v > last);
            last = v;
        }
        assert!(last > 1e4);
    }
}
