//! Seed derivation and the Gaussian transform.
//!
//! Every replicate draws from its own ChaCha8 stream keyed by
//! `(master_seed, replicate_index, attempt)`, so results do not depend on how
//! replicates are scheduled across workers.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replicate `index`, resampling attempt `attempt`, under `master`.
pub fn replicate_seed(master: u64, index: u64, attempt: u32) -> u64 {
    let a = splitmix64(master);
    let b = splitmix64(a ^ index.wrapping_mul(GOLDEN));
    splitmix64(b ^ u64::from(attempt).wrapping_mul(0xD1B5_4A32_D192_ED03))
}

pub fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform on the open interval (0, 1).
#[inline]
pub fn open01<R: RngCore>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Standard complex Gaussian with `E|xi|^2 = 1` by Box-Muller.
#[inline]
pub fn complex_normal<R: RngCore>(rng: &mut R) -> Complex64 {
    let u1 = open01(rng);
    let u2 = open01(rng);
    let radius = (-u1.ln()).sqrt();
    let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
    Complex64::new(radius * c, radius * s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_differ_across_index_and_attempt() {
        let a = replicate_seed(1, 0, 0);
        assert_ne!(a, replicate_seed(1, 1, 0));
        assert_ne!(a, replicate_seed(1, 0, 1));
        assert_ne!(a, replicate_seed(2, 0, 0));
        assert_eq!(a, replicate_seed(1, 0, 0));
    }

    #[test]
    fn open_uniform_never_hits_endpoints() {
        let mut rng = stream(3);
        for _ in 0..100_000 {
            let u = open01(&mut rng);
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn complex_normal_moments() {
        let mut rng = stream(11);
        let n = 200_000;
        let (mut re2, mut im2, mut reim) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let z = complex_normal(&mut rng);
            re2 += z.re * z.re;
            im2 += z.im * z.im;
            reim += z.re * z.im;
        }
        let n = n as f64;
        assert!((re2 / n - 0.5).abs() < 0.01);
        assert!((im2 / n - 0.5).abs() < 0.01);
        assert!((reim / n).abs() < 0.01);
    }
}
