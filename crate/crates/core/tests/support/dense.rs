//! Dense brute-force Fock evolution from matrix permanents.

use nalgebra::DMatrix;
use num_complex::Complex64;
use qrelay::fock::{BasisMode, OccupationConfig, PhotonicState};

use super::{all_configs, spatial};

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

pub fn permanent(m: &DMatrix<Complex64>) -> Complex64 {
    let n = m.nrows();
    permutations(n)
        .into_iter()
        .map(|p| (0..n).map(|i| m[(i, p[i])]).product::<Complex64>())
        .sum()
}

pub fn expand(config: &OccupationConfig, modes: &[BasisMode]) -> Vec<usize> {
    let mut idx = Vec::new();
    for (i, m) in modes.iter().enumerate() {
        for _ in 0..config.count(m) {
            idx.push(i);
        }
    }
    idx
}

pub fn factorials(config: &OccupationConfig) -> f64 {
    config
        .iter()
        .map(|(_, n)| (1..=n as u32).product::<u32>() as f64)
        .product()
}

/// Dense evolution of `state` under the full unitary `u` over `modes`.
pub fn dense_apply(state: &PhotonicState, modes: &[BasisMode], u: &DMatrix<Complex64>) -> PhotonicState {
    let max_n = state.terms().map(|(c, _)| c.total()).max().unwrap_or(0) as u8;
    let mut terms = Vec::new();
    for photons in 0..=max_n {
        for out in all_configs(modes, photons) {
            let rows = expand(&out, modes);
            let mut amp = Complex64::new(0.0, 0.0);
            for (input, a) in state.terms() {
                if input.total() != photons as u32 {
                    continue;
                }
                let cols = expand(input, modes);
                let sub = DMatrix::from_fn(rows.len(), cols.len(), |r, c| u[(rows[r], cols[c])]);
                amp += a * permanent(&sub) / (factorials(input) * factorials(&out)).sqrt();
            }
            terms.push((out, amp));
        }
    }
    PhotonicState::from_terms(modes.iter().cloned(), terms).unwrap()
}

pub fn six_modes() -> Vec<BasisMode> {
    ["0", "a", "1"].into_iter().flat_map(|l| spatial(l).pair()).collect()
}
