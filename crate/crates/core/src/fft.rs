use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Values of `sum_n c_n z^n` at `z_j = radius * exp(2 pi i j / nodes)`,
/// `j = 0..nodes`. Coefficients are folded modulo `nodes`, which is exact
/// on the grid, so any degree is accepted.
pub(crate) fn circle_values(coeffs: &[Complex64], radius: f64, nodes: usize) -> Vec<Complex64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); nodes];
    let mut scale = 1.0;
    for (n, c) in coeffs.iter().enumerate() {
        buf[n % nodes] += c * scale;
        scale *= radius;
    }
    PLANNER.with(|p| {
        let plan = p.borrow_mut().plan_fft_inverse(nodes);
        plan.process(&mut buf);
    });
    buf
}

#[cfg(test)]
mod tests {
    use super::*;

    fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
        coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    #[test]
    fn matches_horner_including_aliased_degrees() {
        let coeffs: Vec<Complex64> = (0..40)
            .map(|n| Complex64::new((n as f64 * 0.37).sin(), (n as f64 * 0.11).cos()))
            .collect();
        for &nodes in &[16usize, 64] {
            let vals = circle_values(&coeffs, 0.8, nodes);
            for (j, v) in vals.iter().enumerate() {
                let z = Complex64::from_polar(0.8, std::f64::consts::TAU * j as f64 / nodes as f64);
                assert!((v - horner(&coeffs, z)).norm() < 1e-12);
            }
        }
    }
}
