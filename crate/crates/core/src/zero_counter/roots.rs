//! Simultaneous polynomial root finding: Aberth-Ehrlich sweeps with a
//! Durand-Kerner fallback, followed by Newton polishing.

use num_complex::Complex64;

use crate::error::{Error, Result};

const ABERTH_SWEEPS: usize = 500;
const DK_SWEEPS: usize = 500;
const NEGLIGIBLE: f64 = 1e-300;

#[derive(Debug, Clone)]
pub(crate) struct Roots {
    pub roots: Vec<Complex64>,
    pub sweeps: usize,
}

/// All roots of `sum coeffs[k] z^k`, with multiplicity. Trailing
/// coefficients below `1e-300` are dropped; vanishing low-order
/// coefficients become roots at the origin.
pub(crate) fn polynomial_roots(coeffs: &[Complex64]) -> Result<Roots> {
    let top = coeffs
        .iter()
        .rposition(|c| c.norm() >= NEGLIGIBLE)
        .ok_or(Error::InvalidParameter {
            name: "coeffs",
            value: 0.0,
            reason: "polynomial is identically zero",
        })?;
    let low = coeffs.iter().position(|c| c.norm() >= NEGLIGIBLE).unwrap_or(0);
    let mut roots = vec![Complex64::new(0.0, 0.0); low];
    let poly = Poly::new(&coeffs[low..=top]);
    if poly.degree() == 0 {
        return Ok(Roots { roots, sweeps: 0 });
    }
    let (found, sweeps) = poly.solve()?;
    roots.extend(found);
    Ok(Roots { roots, sweeps })
}

struct Poly {
    /// scaled so the largest coefficient has modulus one
    c: Vec<Complex64>,
    /// reversed coefficients for evaluation outside the unit disk
    rev: Vec<Complex64>,
}

struct Eval {
    /// `p / p'`
    ratio: Complex64,
    /// `|p|` is within its own rounding-error bound
    at_noise: bool,
    /// `|p(z)| / max(1, |z|)^d`
    residual: f64,
}

impl Poly {
    fn new(c: &[Complex64]) -> Self {
        let scale = c.iter().map(|x| x.norm()).fold(0.0, f64::max);
        let c: Vec<Complex64> = c.iter().map(|x| x / scale).collect();
        let rev = c.iter().rev().cloned().collect();
        Poly { c, rev }
    }

    fn degree(&self) -> usize {
        self.c.len() - 1
    }

    fn eval(&self, z: Complex64) -> Eval {
        let d = self.degree() as f64;
        let big = z.norm() > 1.0;
        let (coeffs, x) = if big { (&self.rev, z.inv()) } else { (&self.c, z) };
        let ax = x.norm();
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        let mut bound = 0.0;
        for c in coeffs.iter().rev() {
            dp = dp * x + p;
            p = p * x + c;
            bound = bound * ax + c.norm();
        }
        let at_noise = p.norm() <= 4.0 * d * f64::EPSILON * bound;
        let ratio = if big {
            // p(z) = z^d q(1/z), so p/p' = 1 / (w (d - w q'/q)) with w = 1/z
            let w = x;
            (w * (Complex64::new(d, 0.0) - w * dp / p)).inv()
        } else {
            p / dp
        };
        Eval {
            ratio,
            at_noise,
            residual: p.norm(),
        }
    }

    fn initial(&self) -> Vec<Complex64> {
        let d = self.degree();
        let radius = (self.c[0].norm() / self.c[d].norm()).powf(1.0 / d as f64);
        (0..d)
            .map(|k| {
                let jitter = 0.3 * ((k as f64 * 0.618_033_988_749_895).fract() - 0.5);
                let theta = std::f64::consts::TAU * (k as f64 + jitter) / d as f64 + 0.4;
                Complex64::from_polar(radius, theta)
            })
            .collect()
    }

    fn solve(&self) -> Result<(Vec<Complex64>, usize)> {
        let mut z = self.initial();
        let d = z.len();
        let mut done = vec![false; d];
        let mut sweeps = 0;
        let mut converged = false;

        while sweeps < ABERTH_SWEEPS {
            sweeps += 1;
            let mut all = true;
            for i in 0..d {
                if done[i] {
                    continue;
                }
                let e = self.eval(z[i]);
                if e.at_noise {
                    done[i] = true;
                    continue;
                }
                let zi = z[i];
                let mut s = Complex64::new(0.0, 0.0);
                for (j, zj) in z.iter().enumerate() {
                    if j != i {
                        let diff = zi - zj;
                        s += diff.conj() / diff.norm_sqr().max(NEGLIGIBLE);
                    }
                }
                let w = e.ratio / (Complex64::new(1.0, 0.0) - e.ratio * s);
                if !w.re.is_finite() || !w.im.is_finite() {
                    all = false;
                    z[i] = zi * Complex64::from_polar(1.0 + 1e-3, 0.1);
                    continue;
                }
                z[i] = zi - w;
                if w.norm() <= 2.0 * f64::EPSILON * z[i].norm() {
                    done[i] = true;
                } else {
                    all = false;
                }
            }
            if all {
                converged = true;
                break;
            }
        }

        if !converged {
            converged = self.durand_kerner(&mut z, &mut sweeps);
        }
        if !converged {
            return Err(Error::NonConvergent {
                what: "polynomial root iteration",
                iterations: sweeps,
            });
        }
        self.polish(&mut z);
        Ok((z, sweeps))
    }

    fn durand_kerner(&self, z: &mut [Complex64], sweeps: &mut usize) -> bool {
        let lead = self.c[self.degree()];
        for _ in 0..DK_SWEEPS {
            *sweeps += 1;
            let mut max_rel = 0.0f64;
            for i in 0..z.len() {
                let zi = z[i];
                let p = crate::gaf_model::horner(&self.c, zi);
                let mut denom = lead;
                for (j, zj) in z.iter().enumerate() {
                    if j != i {
                        denom *= zi - zj;
                    }
                }
                let step = p / denom;
                if step.re.is_finite() && step.im.is_finite() {
                    z[i] = zi - step;
                    max_rel = max_rel.max(step.norm() / zi.norm().max(1e-300));
                }
            }
            if max_rel <= 4.0 * f64::EPSILON {
                return true;
            }
        }
        false
    }

    fn polish(&self, z: &mut [Complex64]) {
        for zi in z.iter_mut() {
            for _ in 0..4 {
                let e = self.eval(*zi);
                if e.at_noise || e.residual <= 1e-10 {
                    break;
                }
                let next = *zi - e.ratio;
                if !next.re.is_finite() || !next.im.is_finite() {
                    break;
                }
                *zi = next;
            }
        }
    }
}
