//! Monte Carlo estimate of a chain's receiver statistics, for validating the
//! exact propagation at short range.
//!
//! Trials are split into fixed chunks of [`CHUNK_TRIALS`]. Chunk `k` draws
//! from `ChaCha8Rng::seed_from_u64(seed)` on stream `k`, and chunk results are
//! integer counts summed in chunk order, so a report depends only on
//! `(config, n_trials, seed)` and not on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::ChainConfig;
use crate::chain::{self, ChannelEventState, ReceiverReport};
use crate::error::{domain, Result};
use crate::qnd::{DarkCountGating, QndChannelParams};

pub const CHUNK_TRIALS: u64 = 1 << 16;

/// Slot category, indexed like [`ChannelEventState::as_array`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Sig = 0,
    Rnd = 1,
    Empty = 2,
    NoGate = 3,
}

const SLOTS: [Slot; 4] = [Slot::Sig, Slot::Rnd, Slot::Empty, Slot::NoGate];

fn basis(slot: Slot) -> ChannelEventState {
    let mut p = [0.0; 4];
    p[slot as usize] = 1.0;
    ChannelEventState {
        p_sig: p[0],
        p_rnd: p[1],
        p_empty: p[2],
        p_nogate: p[3],
    }
}

/// Cumulative transition table: row `i` holds the running sums of the map
/// applied to category `i`.
#[derive(Debug, Clone, Copy)]
struct Transition([[f64; 4]; 4]);

impl Transition {
    fn from_map<F>(map: F) -> Result<Self>
    where
        F: Fn(&ChannelEventState) -> Result<ChannelEventState>,
    {
        let mut table = [[0.0; 4]; 4];
        for slot in SLOTS {
            let column = map(&basis(slot))?.as_array();
            let mut acc = 0.0;
            for (j, p) in column.iter().enumerate() {
                acc += p;
                table[slot as usize][j] = acc;
            }
        }
        Ok(Transition(table))
    }

    fn step<R: Rng>(&self, slot: Slot, rng: &mut R) -> Slot {
        let row = &self.0[slot as usize];
        let u: f64 = rng.gen::<f64>() * row[3];
        SLOTS.into_iter().find(|s| u < row[*s as usize]).unwrap_or(slot)
    }
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
struct Tally {
    categories: [u64; 4],
    signal: u64,
    noise: u64,
    noise_sq: u64,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.categories.iter_mut().zip(other.categories) {
            *a += b;
        }
        self.signal += other.signal;
        self.noise += other.noise;
        self.noise_sq += other.noise_sq;
        self
    }
}

/// Sampled receiver statistics with one-sigma standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub trials: u64,
    pub seed: u64,
    /// Receiver-input categories: signal, random photon, empty gated, vetoed.
    pub categories: [u64; 4],
    pub signal_counts: u64,
    pub noise_counts: u64,
    pub p_s: f64,
    pub p_n: f64,
    pub sigma_p_s: f64,
    pub sigma_p_n: f64,
    pub receiver: ReceiverReport,
}

impl SampleReport {
    /// Whether `exact` lies within `k` standard errors for both `p_s` and
    /// `p_n`. A zero standard error accepts only an exact match.
    pub fn agrees_with(&self, exact: &ReceiverReport, k: f64) -> bool {
        (self.p_s - exact.p_s).abs() <= k * self.sigma_p_s && (self.p_n - exact.p_n).abs() <= k * self.sigma_p_n
    }
}

fn run_chunk(stages: &[Transition], p_dark: f64, seed: u64, chunk: u64, trials: u64) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    let mut tally = Tally::default();
    for _ in 0..trials {
        let mut slot = Slot::Sig;
        for stage in stages {
            slot = stage.step(slot, &mut rng);
        }
        tally.categories[slot as usize] += 1;
        let mut noise = u64::from(slot == Slot::Rnd);
        if slot != Slot::NoGate {
            noise += u64::from(rng.gen::<f64>() < p_dark) + u64::from(rng.gen::<f64>() < p_dark);
        }
        tally.signal += u64::from(slot == Slot::Sig);
        tally.noise += noise;
        tally.noise_sq += noise * noise;
    }
    tally
}

/// Samples `n_trials` slots through the chain with relays at `positions_km`.
pub fn sample_chain_at(config: &ChainConfig, positions_km: &[f64], n_trials: u64, seed: u64) -> Result<SampleReport> {
    if n_trials == 0 {
        return Err(domain("n_trials must be at least 1"));
    }
    // Validates the configuration and positions.
    chain::chain_states(config, positions_km)?;
    let params = QndChannelParams::new(config.eta, config.p_dark).map_err(|e| domain(e.to_string()))?;
    let a = config.atten_per_km;
    let mut stages = Vec::with_capacity(2 * positions_km.len() + 1);
    let mut prev = 0.0;
    for &p in positions_km {
        let seg = a * (p - prev);
        stages.push(Transition::from_map(|s| chain::propagate_segment(s, seg))?);
        stages.push(Transition::from_map(|s| {
            chain::apply_relay_with(s, &params, DarkCountGating::default())
        })?);
        prev = p;
    }
    let seg = a * (config.distance_km - prev);
    stages.push(Transition::from_map(|s| chain::propagate_segment(s, seg))?);

    let chunks = n_trials.div_ceil(CHUNK_TRIALS);
    let tally = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let trials = CHUNK_TRIALS.min(n_trials - k * CHUNK_TRIALS);
            run_chunk(&stages, config.p_dark, seed, k, trials)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Tally::default(), Tally::merge);

    let n = n_trials as f64;
    let p_s = tally.signal as f64 / n;
    let p_n = tally.noise as f64 / n;
    let sigma_p_s = (p_s * (1.0 - p_s) / n).sqrt();
    let var_n = (tally.noise_sq as f64 / n - p_n * p_n).max(0.0);
    let sigma_p_n = (var_n / n).sqrt();
    Ok(SampleReport {
        trials: n_trials,
        seed,
        categories: tally.categories,
        signal_counts: tally.signal,
        noise_counts: tally.noise,
        p_s,
        p_n,
        sigma_p_s,
        sigma_p_n,
        receiver: ReceiverReport::from_probabilities(p_s, p_n),
    })
}

/// Samples with configured or optimal relay positions.
pub fn sample_chain(config: &ChainConfig, n_trials: u64, seed: u64) -> Result<SampleReport> {
    let positions = chain::resolve_positions(config)?;
    sample_chain_at(config, &positions, n_trials, seed)
}
