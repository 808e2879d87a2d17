//! Exact propagation of one time slot through fiber segments, relays and the
//! gated receiver.

use serde::{Deserialize, Serialize};

use crate::analytics::{self, ChainConfig};
use crate::error::{domain, Result};
use crate::qnd::{DarkCountGating, QndChannelParams};

const SUM_TOLERANCE: f64 = 1e-12;

/// Probability distribution of what a slot carries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelEventState {
    /// Signal photon present, gate chain alive.
    pub p_sig: f64,
    /// Randomly polarized spurious photon present, gate chain alive.
    pub p_rnd: f64,
    /// Gate chain alive, no photon.
    pub p_empty: f64,
    /// Slot vetoed by some relay.
    pub p_nogate: f64,
}

impl ChannelEventState {
    pub fn new(p_sig: f64, p_rnd: f64, p_empty: f64, p_nogate: f64) -> Result<Self> {
        let s = ChannelEventState {
            p_sig,
            p_rnd,
            p_empty,
            p_nogate,
        };
        s.validate()?;
        Ok(s)
    }

    /// One signal photon emitted per slot.
    pub fn initial() -> Self {
        ChannelEventState {
            p_sig: 1.0,
            p_rnd: 0.0,
            p_empty: 0.0,
            p_nogate: 0.0,
        }
    }

    pub fn total(&self) -> f64 {
        self.p_sig + self.p_rnd + self.p_empty + self.p_nogate
    }

    /// Probability that the gate chain is still alive.
    pub fn gated(&self) -> f64 {
        self.p_sig + self.p_rnd + self.p_empty
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.p_sig, self.p_rnd, self.p_empty, self.p_nogate]
    }

    pub fn validate(&self) -> Result<()> {
        let parts = self.as_array();
        if parts.iter().any(|p| !(*p >= 0.0)) {
            return Err(domain(format!("negative or NaN event probability in {parts:?}")));
        }
        if (self.total() - 1.0).abs() > SUM_TOLERANCE {
            return Err(domain(format!(
                "event probabilities sum to {}, expected 1",
                self.total()
            )));
        }
        Ok(())
    }
}

pub fn initial_state() -> ChannelEventState {
    ChannelEventState::initial()
}

/// Fiber attenuation over a segment of dimensionless length `alpha_x`.
/// Lost photons leave the gate untouched.
pub fn propagate_segment(state: &ChannelEventState, alpha_x: f64) -> Result<ChannelEventState> {
    if !(alpha_x >= 0.0) {
        return Err(domain(format!("segment attenuation must be >= 0, got {alpha_x}")));
    }
    let t = (-alpha_x).exp();
    let lost = (1.0 - t) * (state.p_sig + state.p_rnd);
    Ok(ChannelEventState {
        p_sig: t * state.p_sig,
        p_rnd: t * state.p_rnd,
        p_empty: state.p_empty + lost,
        p_nogate: state.p_nogate,
    })
}

pub fn apply_relay(state: &ChannelEventState, params: &QndChannelParams) -> Result<ChannelEventState> {
    apply_relay_with(state, params, DarkCountGating::default())
}

/// One relay: photons pass with a gate with probability `eta`, dark counts
/// emit a randomly polarized photon with a gate, everything else is vetoed.
pub fn apply_relay_with(
    state: &ChannelEventState,
    params: &QndChannelParams,
    gating: DarkCountGating,
) -> Result<ChannelEventState> {
    let eta = params.eta;
    let q = params.false_gate_probability();
    let photons = state.p_sig + state.p_rnd;
    let q_photon = match gating {
        DarkCountGating::Unconditional => {
            if eta + q > 1.0 + SUM_TOLERANCE {
                return Err(domain(format!(
                    "eta + 2 p_dark = {} exceeds 1; use on-failure gating",
                    eta + q
                )));
            }
            q
        }
        DarkCountGating::OnFailure => (1.0 - eta) * q,
    };
    let spurious = q_photon * photons + q * state.p_empty;
    Ok(ChannelEventState {
        p_sig: eta * state.p_sig,
        p_rnd: eta * state.p_rnd + spurious,
        p_empty: 0.0,
        p_nogate: state.p_nogate + ((1.0 - eta - q_photon) * photons).max(0.0) + (1.0 - q) * state.p_empty,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReceiverReport {
    pub p_s: f64,
    pub p_n: f64,
    /// `p_s / p_n`; infinite when `p_n` is zero.
    pub s: f64,
    pub q_b: f64,
}

impl ReceiverReport {
    pub fn from_probabilities(p_s: f64, p_n: f64) -> Self {
        let s = if p_n > 0.0 { p_s / p_n } else { f64::INFINITY };
        let q_b = if p_n > 0.0 { 0.5 * p_n / (p_n + p_s) } else { 0.0 };
        ReceiverReport { p_s, p_n, s, q_b }
    }
}

/// Two-detector receiver with unit efficiency. Dark counts only register in
/// gated slots and add to any photon detection.
pub fn receiver_detect(state: &ChannelEventState, p_dark: f64) -> Result<ReceiverReport> {
    if !(0.0..1.0).contains(&p_dark) {
        return Err(domain(format!("p_dark must be in [0, 1), got {p_dark}")));
    }
    let p_n = state.p_rnd + 2.0 * p_dark * state.gated();
    Ok(ReceiverReport::from_probabilities(state.p_sig, p_n))
}

fn params(config: &ChainConfig) -> Result<QndChannelParams> {
    QndChannelParams::new(config.eta, config.p_dark).map_err(|e| domain(e.to_string()))
}

/// States after the source, after each relay and at the receiver input.
pub fn chain_states(config: &ChainConfig, positions_km: &[f64]) -> Result<Vec<ChannelEventState>> {
    config.validate()?;
    analytics::check_positions(positions_km, positions_km.len(), config.distance_km)?;
    let params = params(config)?;
    let a = config.atten_per_km;
    let mut trace = Vec::with_capacity(positions_km.len() + 2);
    let mut state = initial_state();
    trace.push(state);
    let mut prev = 0.0;
    for &p in positions_km {
        state = propagate_segment(&state, a * (p - prev))?;
        state = apply_relay(&state, &params)?;
        trace.push(state);
        prev = p;
    }
    state = propagate_segment(&state, a * (config.distance_km - prev))?;
    trace.push(state);
    Ok(trace)
}

/// Receiver report for relays at the given positions.
pub fn run_chain_at(config: &ChainConfig, positions_km: &[f64]) -> Result<ReceiverReport> {
    let trace = chain_states(config, positions_km)?;
    receiver_detect(trace.last().expect("trace holds the source state"), config.p_dark)
}

/// Receiver report with configured or optimal relay positions.
pub fn run_chain(config: &ChainConfig) -> Result<ReceiverReport> {
    let positions = resolve_positions(config)?;
    run_chain_at(config, &positions)
}

pub fn resolve_positions(config: &ChainConfig) -> Result<Vec<f64>> {
    config.validate()?;
    match &config.positions_km {
        Some(p) => Ok(p.clone()),
        None => analytics::optimal_positions(config),
    }
}

/// Receiver noise of the exact chain; infinite for invalid positions so the
/// optimizer can probe freely.
pub fn exact_noise(config: &ChainConfig, positions_km: &[f64]) -> f64 {
    match run_chain_at(config, positions_km) {
        Ok(r) => r.p_n,
        Err(_) => f64::INFINITY,
    }
}
