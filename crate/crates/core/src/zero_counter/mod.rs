//! Zero counting for truncated GAF realizations: winding number on a
//! circle, polynomial roots as an independent check, and Jensen-formula
//! diagnostics.

mod roots;

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::fft::circle_values;
use crate::gaf_model::GafSample;
use crate::sum::KahanSum;

const BOUNDARY_TOL: f64 = 1e-9;
const INCLUSION_SLACK: f64 = 1e-12;
const MAX_GRID_NODES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountConfig {
    pub r: f64,
    pub initial_nodes: usize,
    pub max_nodes: usize,
    /// required ratio between min |f| on the contour and the tail amplitude
    pub min_modulus_factor: f64,
}

impl CountConfig {
    pub fn new(r: f64) -> Result<Self> {
        let cfg = CountConfig {
            r,
            initial_nodes: 512,
            max_nodes: 1 << 20,
            min_modulus_factor: 10.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.r < 1.0) {
            return Err(invalid("r", self.r, "must lie in (0, 1)"));
        }
        if self.initial_nodes < 16 {
            return Err(invalid("initial_nodes", self.initial_nodes as f64, "must be at least 16"));
        }
        if self.max_nodes < self.initial_nodes {
            return Err(invalid("max_nodes", self.max_nodes as f64, "must be at least initial_nodes"));
        }
        if !(self.min_modulus_factor > 1.0) {
            return Err(invalid("min_modulus_factor", self.min_modulus_factor, "must exceed 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CountMethod {
    Winding,
    Roots,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountResult {
    pub count: u64,
    pub method: CountMethod,
    /// contour nodes for `Winding`, iteration sweeps for `Roots`
    pub nodes_used: usize,
    /// NaN for `Roots`
    pub contour_min_modulus: f64,
}

fn check_radius(sample: &GafSample, r: f64) -> Result<()> {
    if r > sample.radius {
        return Err(Error::OutOfDomain {
            modulus: r,
            radius: sample.radius,
        });
    }
    Ok(())
}

/// Number of zeros in `|z| <= cfg.r` by the argument principle.
pub fn count_winding(sample: &GafSample, cfg: &CountConfig) -> Result<CountResult> {
    cfg.validate()?;
    check_radius(sample, cfg.r)?;
    let threshold = cfg.min_modulus_factor * sample.tail_amplitude();

    // a grid coarser than the degree can alias a fast-turning phase into
    // steps that look small, so start above twice the degree and confirm
    // every resolved count on the doubled grid
    let degree = sample.coeffs.len().saturating_sub(1);
    let mut nodes = cfg
        .initial_nodes
        .max((2 * (degree + 1)).next_power_of_two())
        .min(cfg.max_nodes);
    let mut pending: Option<u64> = None;
    loop {
        let values = circle_values(&sample.coeffs, cfg.r, nodes);
        let min_modulus = values.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
        if !(min_modulus > threshold) {
            return Err(Error::UnreliableContour {
                min_modulus,
                threshold,
            });
        }
        let mut phase = KahanSum::default();
        let mut resolved = true;
        for j in 0..nodes {
            let step = (values[(j + 1) % nodes] / values[j]).arg();
            if step.abs() > FRAC_PI_2 {
                resolved = false;
                break;
            }
            phase.add(step);
        }
        if resolved {
            let turns = phase.value() / TAU;
            let count = turns.round();
            if (turns - count).abs() > 0.01 {
                return Err(Error::InternalConsistency("winding phase is not an integer multiple of 2 pi"));
            }
            if count >= 0.0 && count <= degree as f64 {
                let count = count as u64;
                if pending == Some(count) {
                    return Ok(CountResult {
                        count,
                        method: CountMethod::Winding,
                        nodes_used: nodes,
                        contour_min_modulus: min_modulus,
                    });
                }
                pending = Some(count);
            } else {
                pending = None;
            }
        } else {
            pending = None;
        }
        if nodes >= cfg.max_nodes {
            return Err(Error::NonConvergent {
                what: "winding-number node refinement",
                iterations: nodes,
            });
        }
        nodes = (nodes * 2).min(cfg.max_nodes);
    }
}

fn roots_checked(sample: &GafSample, r: f64) -> Result<(Vec<Complex64>, usize)> {
    let found = roots::polynomial_roots(&sample.coeffs)?;
    if let Some(z) = found
        .roots
        .iter()
        .find(|z| (z.norm() - r).abs() < BOUNDARY_TOL)
    {
        return Err(Error::BoundaryAmbiguous { root: *z, radius: r });
    }
    Ok((found.roots, found.sweeps))
}

/// Number of zeros in `|z| <= cfg.r` from the roots of the truncated
/// polynomial.
pub fn count_roots(sample: &GafSample, cfg: &CountConfig) -> Result<CountResult> {
    cfg.validate()?;
    check_radius(sample, cfg.r)?;
    let (roots, sweeps) = roots_checked(sample, cfg.r)?;
    let limit = cfg.r * (1.0 + INCLUSION_SLACK);
    let count = roots.iter().filter(|z| z.norm() <= limit).count() as u64;
    Ok(CountResult {
        count,
        method: CountMethod::Roots,
        nodes_used: sweeps,
        contour_min_modulus: f64::NAN,
    })
}

/// Winding count, falling back to roots when the node budget runs out.
/// `UnreliableContour` is passed through so the caller can resample.
pub fn count_zeros(sample: &GafSample, cfg: &CountConfig) -> Result<CountResult> {
    match count_winding(sample, cfg) {
        Err(Error::NonConvergent { .. }) => count_roots(sample, cfg),
        other => other,
    }
}

/// Plain trapezoid doubling gives up here and hands over to singularity
/// subtraction.
const PLAIN_QUADRATURE_NODES: usize = 1 << 16;
/// Roots with `min(|l|, r) / max(|l|, r)` above this are divided out.
const NEAR_RATIO: f64 = 0.9;

/// Trapezoidal circle averages of `g` with node doubling until two
/// successive levels agree.
fn doubled_mean<F: Fn(usize) -> f64>(level: F, initial: usize, max: usize) -> Option<f64> {
    let mut nodes = initial;
    let mut prev = level(nodes);
    while nodes < max {
        nodes *= 2;
        let cur = level(nodes);
        if cur.is_finite() && prev.is_finite() && (cur - prev).abs() <= 1e-12 * cur.abs().max(1.0) {
            return Some(cur);
        }
        prev = cur;
    }
    None
}

/// Circle average of `log|f|` on `|z| = r`.
///
/// A zero close to the circle makes the Fourier coefficients of `log|f|`
/// decay slowly. When plain doubling stalls, the linear factors of the
/// near roots are divided out and their exact means `max(log r, log|l|)`
/// added back, leaving a smooth integrand.
fn circle_log_mean<R>(coeffs: &[Complex64], r: f64, initial: usize, max: usize, roots: R) -> Result<f64>
where
    R: FnOnce() -> Result<Vec<Complex64>>,
{
    let plain = |nodes: usize| -> f64 {
        let values = circle_values(coeffs, r, nodes);
        let s: KahanSum = values.iter().map(|v| v.norm().ln()).collect();
        s.value() / nodes as f64
    };
    if let Some(mean) = doubled_mean(plain, initial, max.min(PLAIN_QUADRATURE_NODES)) {
        return Ok(mean);
    }

    let near: Vec<Complex64> = roots()?
        .into_iter()
        .filter(|l| {
            let m = l.norm();
            m.min(r) / m.max(r) > NEAR_RATIO
        })
        .collect();
    let smooth = |nodes: usize| -> f64 {
        let values = circle_values(coeffs, r, nodes);
        let mut s = KahanSum::default();
        for (j, v) in values.iter().enumerate() {
            let z = Complex64::from_polar(r, std::f64::consts::TAU * j as f64 / nodes as f64);
            s.add(v.norm().ln());
            for l in &near {
                s.add(-(z - l).norm().ln());
            }
        }
        s.value() / nodes as f64
    };
    let restored: f64 = near.iter().map(|l| l.norm().max(r).ln()).sum();
    doubled_mean(smooth, initial, max)
        .map(|m| m + restored)
        .ok_or(Error::NonConvergent {
            what: "circle average of log|f|",
            iterations: max,
        })
}

/// `|LHS - RHS|` of Jensen's formula on the disk of radius `r`.
pub fn jensen_residual(sample: &GafSample, r: f64) -> Result<f64> {
    let cfg = CountConfig::new(r)?;
    check_radius(sample, r)?;
    let c0 = sample.coeffs.first().map_or(0.0, |c| c.norm());
    if !(c0 > 1e-12) {
        return Err(invalid("coeffs[0]", c0, "Jensen's formula needs f(0) != 0"));
    }
    let (roots, _) = roots_checked(sample, r)?;
    let mut lhs = KahanSum::default();
    lhs.add(c0.ln());
    for z in roots.iter().filter(|z| z.norm() <= r * (1.0 + INCLUSION_SLACK)) {
        lhs.add((r / z.norm()).ln());
    }
    let rhs = circle_log_mean(&sample.coeffs, r, cfg.initial_nodes, cfg.max_nodes, || Ok(roots.clone()))?;
    Ok((lhs.value() - rhs).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// `n(r) log(R/r) <= log max_{|z|=R} |f| - mean_{|z|=r} log|f|` with
/// `R = (1 + r)/2`.
pub fn integral_inequality_check(sample: &GafSample, r: f64) -> Result<InequalityCheck> {
    let cfg = CountConfig::new(r)?;
    let big_r = 0.5 * (1.0 + r);
    check_radius(sample, big_r)?;
    let count = count_zeros(sample, &cfg)?.count;
    let max_modulus = circle_values(&sample.coeffs, big_r, MAX_GRID_NODES)
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    let mean = circle_log_mean(&sample.coeffs, r, cfg.initial_nodes, cfg.max_nodes, || {
        Ok(roots::polynomial_roots(&sample.coeffs)?.roots)
    })?;
    let lhs = count as f64 * (big_r / r).ln();
    let rhs = max_modulus.ln() - mean;
    Ok(InequalityCheck {
        lhs,
        rhs,
        ok: lhs <= rhs + 1e-6,
    })
}
