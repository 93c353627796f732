//! Exact L = 1 scaling tables for deviations and overcrowding.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::exact_l1::{tail_certified, TailSide};
use crate::ldp_rates::c_of_t;
use crate::sum::log_add_exp;

/// Constant `C` in the admissibility condition `V >= C (1/(1-r)) log(1/(1-r))`.
pub const DEFAULT_ASSUMPTION_CONSTANT: f64 = 2.0;

fn mean_and_variance(r: f64) -> (f64, f64) {
    let r2 = r * r;
    (r2 / (1.0 - r2), r2 / (1.0 - r2 * r2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviationRow {
    pub j: u32,
    pub r: f64,
    pub mu: f64,
    pub v1: f64,
    /// `ceil(mu + t v1^alpha)`
    pub upper_threshold: u64,
    /// `floor(mu - t v1^alpha)`, negative when the lower event is empty
    pub lower_threshold: i64,
    /// `log P[|n - mu| >= t v1^alpha]`
    pub log_p: f64,
    /// bound on the error of `log_p`
    pub log_err: f64,
    /// `-log_p / (c(t) v1^{2 alpha - 1})`
    pub ratio: f64,
}

/// Two-sided deviation probabilities at `r_j = 1 - 2^{-j}` against the
/// predicted exponential scale `c(t) v1^{2 alpha - 1}`.
pub fn deviation_scaling_l1(
    alpha: f64,
    t: f64,
    j_range: std::ops::RangeInclusive<u32>,
    epsilon: f64,
) -> Result<Vec<DeviationRow>> {
    let c = c_of_t(alpha, t)?;
    let mut rows = Vec::new();
    for j in j_range {
        if j == 0 || j > 40 {
            return Err(invalid("j", j as f64, "must lie in 1..=40"));
        }
        let r = 1.0 - 2f64.powi(-(j as i32));
        let (mu, v1) = mean_and_variance(r);
        let dev = t * v1.powf(alpha);
        let upper_threshold = (mu + dev).ceil() as u64;
        let lower = (mu - dev).floor();
        let up = tail_certified(r, upper_threshold, TailSide::Upper, epsilon)?;
        let (log_p, log_err) = if lower >= 0.0 {
            let lo = tail_certified(r, lower as u64, TailSide::Lower, epsilon)?;
            (log_add_exp(up.log_p, lo.log_p), up.log_err.max(lo.log_err))
        } else {
            (up.log_p, up.log_err)
        };
        rows.push(DeviationRow {
            j,
            r,
            mu,
            v1,
            upper_threshold,
            lower_threshold: lower as i64,
            log_p,
            log_err,
            ratio: -log_p / (c * v1.powf(2.0 * alpha - 1.0)),
        });
    }
    Ok(rows)
}

/// Threshold rule for overcrowding tables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum VRule {
    /// `V = ceil(C (1/(1-r)) log(1/(1-r)))`
    Assumption { constant: f64 },
    Fixed(u64),
}

impl Default for VRule {
    fn default() -> Self {
        VRule::Assumption {
            constant: DEFAULT_ASSUMPTION_CONSTANT,
        }
    }
}

fn assumption_level(r: f64, constant: f64) -> f64 {
    let inv = 1.0 / (1.0 - r);
    constant * inv * inv.ln()
}

impl VRule {
    pub fn threshold(&self, r: f64) -> u64 {
        match *self {
            VRule::Assumption { constant } => assumption_level(r, constant).ceil().max(0.0) as u64,
            VRule::Fixed(v) => v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OvercrowdingRow {
    pub r: f64,
    pub v: u64,
    /// `-log P[n >= V]`
    pub neg_log_p: f64,
    pub log_err: f64,
    /// `-log P / ((1 - r) V^2)`
    pub normalized: f64,
    /// `V` meets the default admissibility condition
    pub admissible: bool,
}

pub fn overcrowding_row(r: f64, v: u64, epsilon: f64) -> Result<OvercrowdingRow> {
    let tail = tail_certified(r, v, TailSide::Upper, epsilon)?;
    let neg_log_p = -tail.log_p;
    Ok(OvercrowdingRow {
        r,
        v,
        neg_log_p,
        log_err: tail.log_err,
        normalized: neg_log_p / ((1.0 - r) * (v as f64).powi(2)),
        admissible: v as f64 >= assumption_level(r, DEFAULT_ASSUMPTION_CONSTANT),
    })
}

/// Exact overcrowding probabilities at L = 1 along `r_grid`. With an
/// `Assumption` rule every threshold must be positive.
pub fn overcrowding_scaling_l1(r_grid: &[f64], rule: &VRule, epsilon: f64) -> Result<Vec<OvercrowdingRow>> {
    r_grid
        .iter()
        .map(|&r| {
            let v = rule.threshold(r);
            if let VRule::Assumption { constant } = rule {
                if !(*constant > 0.0) || v == 0 {
                    return Err(invalid("V", v as f64, "threshold rule must give V > 0"));
                }
            }
            overcrowding_row(r, v, epsilon)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_l1::{build_model, lower_tail_exact, tail_exact};

    #[test]
    fn deviation_rows_match_pmf_at_small_j() {
        let rows = deviation_scaling_l1(1.0, 1.0, 3..=5, 1e-10).unwrap();
        for row in &rows {
            let m = build_model(row.r, 1e-14).unwrap();
            let up = tail_exact(&m, row.upper_threshold).unwrap();
            let lo = if row.lower_threshold >= 0 {
                lower_tail_exact(&m, row.lower_threshold as u64).unwrap()
            } else {
                f64::NEG_INFINITY
            };
            let want = log_add_exp(up, lo);
            assert!((row.log_p - want).abs() < 1e-8 * want.abs().max(1.0), "{row:?} {want}");
        }
    }

    #[test]
    fn overcrowding_rows() {
        let rows = overcrowding_scaling_l1(&[0.875, 0.9375], &VRule::default(), 1e-10).unwrap();
        assert!(rows.iter().all(|r| r.admissible && r.neg_log_p > 0.0 && r.normalized.is_finite()));
        assert!(overcrowding_scaling_l1(&[0.9], &VRule::Assumption { constant: 0.0 }, 1e-10).is_err());
        let zero = overcrowding_row(0.9, 0, 1e-10).unwrap();
        assert_eq!(zero.neg_log_p, 0.0);
        assert!(!zero.admissible);
    }
}
