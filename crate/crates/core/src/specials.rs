//! Real Lambert W (principal and lower branches) and the real dilogarithm.

use std::f64::consts::{E, PI};

use serde::Serialize;

use crate::error::{Error, Result};

/// `1/e`, the magnitude of the common branch point of `W_0` and `W_{-1}`.
pub const INV_E: f64 = 1.0 / E;

/// `pi^2 / 6 = Li2(1)`.
pub const ZETA2: f64 = PI * PI / 6.0;

const BRANCH_TOL: f64 = 1e-14;
const HALLEY_CAP: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Branch {
    /// `W_0`, defined on `[-1/e, inf)`, values `>= -1`.
    Principal,
    /// `W_{-1}`, defined on `[-1/e, 0)`, values `<= -1`.
    Lower,
}

/// Real Lambert W on the requested branch: the `w` with `w e^w = x`.
///
/// Inputs less than `1e-14` below `-1/e` are clamped onto the branch point.
pub fn lambert_w(branch: Branch, x: f64) -> Result<f64> {
    let domain_err = || Error::LambertDomain { x, branch };
    if !x.is_finite() {
        return Err(domain_err());
    }
    // distance above the branch point, scaled so that it is 1 at x = 0
    let lift = E * x + 1.0;
    if x < -INV_E {
        if -INV_E - x <= BRANCH_TOL {
            return Ok(-1.0);
        }
        return Err(domain_err());
    }
    if branch == Branch::Lower && x >= 0.0 {
        return Err(domain_err());
    }
    if lift <= 0.0 {
        return Ok(-1.0);
    }
    if x == 0.0 {
        return Ok(0.0);
    }

    let mut w = initial_guess(branch, x, lift);
    for _ in 0..HALLEY_CAP {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        if denom == 0.0 || !denom.is_finite() {
            break;
        }
        let step = f / denom;
        let next = w - step;
        // keep the iterate on its branch
        let next = match branch {
            Branch::Principal if next < -1.0 => 0.5 * (w - 1.0),
            Branch::Lower if next > -1.0 => 0.5 * (w - 1.0),
            _ => next,
        };
        let done = (next - w).abs() <= 4.0 * f64::EPSILON * (1.0 + next.abs());
        w = next;
        if done {
            break;
        }
    }
    Ok(w)
}

fn initial_guess(branch: Branch, x: f64, lift: f64) -> f64 {
    if lift < 0.3 {
        // series about the branch point in p = +-sqrt(2(ex + 1))
        let p = (2.0 * lift).sqrt();
        let p = if branch == Branch::Principal { p } else { -p };
        return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
    }
    match branch {
        Branch::Principal => {
            if x > E {
                let l1 = x.ln();
                let l2 = l1.ln();
                l1 - l2 + l2 / l1
            } else {
                x.ln_1p() * 0.8
            }
        }
        Branch::Lower => {
            let l1 = (-x).ln();
            let l2 = (-l1).ln();
            l1 - l2 + l2 / l1
        }
    }
}

/// Real dilogarithm `Li2(x) = -int_0^x log(1-u)/u du` for `x <= 1`.
pub fn dilog(x: f64) -> Result<f64> {
    if x.is_nan() || x > 1.0 {
        return Err(Error::DilogDomain(x));
    }
    if x == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(dilog_unchecked(x))
}

fn dilog_unchecked(x: f64) -> f64 {
    if x == 1.0 {
        ZETA2
    } else if x < -1.0 {
        // inversion: Li2(x) + Li2(1/x) = -pi^2/6 - log^2(-x)/2
        let l = (-x).ln();
        -ZETA2 - 0.5 * l * l - dilog_unchecked(1.0 / x)
    } else if x < -0.5 {
        // Landen: Li2(x) = -Li2(x/(x-1)) - log^2(1-x)/2, with x/(x-1) in (1/3, 1/2]
        let l = (-x).ln_1p();
        -dilog_series(x / (x - 1.0)) - 0.5 * l * l
    } else if x <= 0.5 {
        dilog_series(x)
    } else {
        // reflection: Li2(x) + Li2(1-x) = pi^2/6 - log(x) log(1-x)
        let y = 1.0 - x;
        ZETA2 - x.ln() * y.ln() - dilog_series(y)
    }
}

/// Defining power series `sum x^k / k^2`, for `|x| <= 1/2`.
fn dilog_series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut pow = x;
    let mut k = 1.0f64;
    while k < 200.0 {
        let term = pow / (k * k);
        sum += term;
        if term.abs() <= 1e-18 * sum.abs().max(1e-300) {
            break;
        }
        pow *= x;
        k += 1.0;
    }
    sum
}

/// `Li2(-T) + log^2(T)/2`, the bounded remainder of the large-argument
/// asymptotic `Li2(-T) ~ -log^2(T)/2`. Requires `T > 10`.
pub fn dilog_asymptotic_check(t: f64) -> Result<f64> {
    if !(t > 10.0) || !t.is_finite() {
        return Err(Error::InvalidParameter {
            name: "T",
            value: t,
            reason: "must be a finite value above 10",
        });
    }
    let l = t.ln();
    Ok(dilog(-t)? + 0.5 * l * l)
}
