#![allow(dead_code)]

pub mod dense;

use nalgebra::DMatrix;
use num_complex::Complex64;
use qrelay::fock::{BasisMode, OccupationConfig, PhotonicState, SpatialMode};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Haar-like random unitary from the QR factor of a complex Gaussian matrix.
pub fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(n, n, |_, _| Complex64::new(gaussian(rng), gaussian(rng)));
    g.qr().q()
}

/// Every occupation configuration of exactly `photons` photons over `modes`.
pub fn all_configs(modes: &[BasisMode], photons: u8) -> Vec<OccupationConfig> {
    fn rec(modes: &[BasisMode], left: u8, acc: &mut Vec<(BasisMode, u8)>, out: &mut Vec<OccupationConfig>) {
        match modes.split_first() {
            None => {
                if left == 0 {
                    out.push(OccupationConfig::from_counts(acc.iter().cloned()));
                }
            }
            Some((m, rest)) => {
                for n in 0..=left {
                    acc.push((m.clone(), n));
                    rec(rest, left - n, acc, out);
                    acc.pop();
                }
            }
        }
    }
    let mut out = Vec::new();
    rec(modes, photons, &mut Vec::new(), &mut out);
    out
}

pub fn random_state(modes: &[BasisMode], max_photons: u8, rng: &mut ChaCha8Rng) -> PhotonicState {
    let mut terms = Vec::new();
    for n in 0..=max_photons {
        for c in all_configs(modes, n) {
            if rng.gen_bool(0.6) {
                terms.push((c, Complex64::new(gaussian(rng), gaussian(rng))));
            }
        }
    }
    if terms.is_empty() {
        terms.push((OccupationConfig::vacuum(), Complex64::new(1.0, 0.0)));
    }
    PhotonicState::from_terms(modes.iter().cloned(), terms)
        .unwrap()
        .normalized()
        .unwrap()
}

pub fn random_qubit_amplitudes(rng: &mut ChaCha8Rng) -> (Complex64, Complex64) {
    let a = Complex64::new(gaussian(rng), gaussian(rng));
    let b = Complex64::new(gaussian(rng), gaussian(rng));
    let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
    (a / n, b / n)
}

pub fn spatial(label: &'static str) -> SpatialMode {
    SpatialMode::from_static(label)
}
