//! Seeded sampling: Ginibre matrices, Haar unitaries (QR with phase fix),
//! Haar-random pure states, and the sub-seed scheme that keeps parallel
//! restarts deterministic.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::state::State;
use crate::C64;

/// Seed used by every entry point when the caller does not supply one.
pub const DEFAULT_SEED: u64 = 0x5EED;

/// The deterministic generator used throughout the crate.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Draws `count` independent sub-seeds from a master seed.
///
/// Work items (restarts, ensemble members) each get their own generator
/// seeded from this list, so results do not depend on scheduling order.
pub fn sub_seeds(seed: u64, count: usize) -> Vec<u64> {
    let mut rng = rng_from_seed(seed);
    (0..count).map(|_| rng.random::<u64>()).collect()
}

/// Complex standard-Gaussian (Ginibre) matrix: entries (x + iy)/√2.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<C64> {
    let inv = 1.0 / 2f64.sqrt();
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * inv, im * inv)
    })
}

/// Haar-distributed d×d unitary.
///
/// QR of a Ginibre matrix, with the Q columns multiplied by the phases
/// r_ii/|r_ii| so the distribution is exactly the Haar measure rather than
/// the QR-convention-dependent one.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<C64> {
    let g = ginibre(d, d, rng);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        let rjj = r[(j, j)];
        let mag = rjj.norm();
        let phase = if mag > 0.0 {
            rjj / C64::new(mag, 0.0)
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Haar-random pure state: d^N complex Gaussians, normalized.
pub fn random_haar_state<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> State {
    let dim = d.pow(n as u32);
    let amps: Vec<C64> = (0..dim)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im)
        })
        .collect();
    // A zero draw has probability zero; from_amplitudes guards it anyway.
    State::from_amplitudes(n, d, amps).expect("Gaussian draw cannot be all zero")
}

/// Haar-random unit vector in C^d (a single-qudit pure state's coefficients).
pub fn random_unit_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> nalgebra::DVector<C64> {
    loop {
        let v = nalgebra::DVector::from_fn(d, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im)
        });
        let norm = v.norm();
        if norm > 1e-12 {
            return v / C64::new(norm, 0.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::is_unitary;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sub_seeds_are_deterministic() {
        let a = sub_seeds(7, 5);
        let b = sub_seeds(7, 5);
        assert_eq!(a, b);
        let c = sub_seeds(8, 5);
        assert_ne!(a, c);
    }

    #[test]
    fn unitary_d1_is_unit_modulus() {
        let mut rng = rng_from_seed(1);
        let u = random_unitary(1, &mut rng);
        assert_abs_diff_eq!(u[(0, 0)].norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn unitary_passes_unitarity() {
        let mut rng = rng_from_seed(2);
        for d in [2usize, 3, 4] {
            let u = random_unitary(d, &mut rng);
            assert!(is_unitary(&u, 1e-12));
        }
    }

    #[test]
    fn haar_first_moment_of_u00() {
        // E|u₀₀|² = 1/d for Haar; d=4 over 10⁴ samples within 3 SE.
        let mut rng = rng_from_seed(3);
        let samples = 10_000;
        let vals: Vec<f64> = (0..samples)
            .map(|_| random_unitary(4, &mut rng)[(0, 0)].norm_sqr())
            .collect();
        let mean: f64 = vals.iter().sum::<f64>() / samples as f64;
        let var: f64 =
            vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (samples - 1) as f64;
        let se = (var / samples as f64).sqrt();
        assert!(
            (mean - 0.25).abs() <= 3.0 * se,
            "mean {} deviates from 1/4 by more than 3 SE {}",
            mean,
            se
        );
    }

    #[test]
    fn composed_unitaries_keep_first_moment() {
        let mut rng = rng_from_seed(4);
        let samples = 10_000;
        let vals: Vec<f64> = (0..samples)
            .map(|_| {
                let u = random_unitary(3, &mut rng) * random_unitary(3, &mut rng);
                u[(0, 0)].norm_sqr()
            })
            .collect();
        let mean: f64 = vals.iter().sum::<f64>() / samples as f64;
        let var: f64 =
            vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (samples - 1) as f64;
        let se = (var / samples as f64).sqrt();
        assert!((mean - 1.0 / 3.0).abs() <= 3.0 * se);
    }

    #[test]
    fn haar_state_is_normalized() {
        let mut rng = rng_from_seed(5);
        let s = random_haar_state(3, 2, &mut rng);
        assert_abs_diff_eq!(s.amplitudes().norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn haar_state_ipr_second_moment() {
        // E[Σ p²] = 2/(D+1); D = 8 → 2/9 over 10⁴ samples within 3 SE.
        let mut rng = rng_from_seed(6);
        let samples = 10_000;
        let vals: Vec<f64> = (0..samples)
            .map(|_| {
                let s = random_haar_state(3, 2, &mut rng);
                s.probabilities().iter().map(|p| p * p).sum::<f64>()
            })
            .collect();
        let mean: f64 = vals.iter().sum::<f64>() / samples as f64;
        let var: f64 =
            vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (samples - 1) as f64;
        let se = (var / samples as f64).sqrt();
        let expect = 2.0 / 9.0;
        assert!(
            (mean - expect).abs() <= 3.0 * se,
            "mean {} deviates from {} by more than 3 SE {}",
            mean,
            expect,
            se
        );
    }
}
