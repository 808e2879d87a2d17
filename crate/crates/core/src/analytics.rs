//! Closed-form relay-chain model: error rate, signal-to-noise ratio with and
//! without relays, relay placement and range enhancement.
//!
//! Distances are in km and `atten_per_km` is the fiber's amplitude-free
//! attenuation coefficient, so a photon survives `x` km with probability
//! `exp(-atten_per_km * x)`. Most formulas take the dimensionless range
//! `alpha_x = atten_per_km * x` directly.

use serde::{Deserialize, Serialize};

use crate::chain;
use crate::error::{domain, Result};
use crate::optimize::{minimize_ordered, Optimum};

pub const DEFAULT_ETA: f64 = 0.5;
pub const DEFAULT_P_DARK: f64 = 1e-5;
/// Attenuation coefficient of a 0.2 dB/km fiber, rounded.
pub const DEFAULT_ATTEN_PER_KM: f64 = 0.05;

/// Fiber channel with `n_relays` QND relays between transmitter and receiver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub distance_km: f64,
    pub atten_per_km: f64,
    pub n_relays: usize,
    pub eta: f64,
    pub p_dark: f64,
    /// Relay distances from the transmitter, non-decreasing within
    /// `[0, distance_km]`. Computed optimally when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions_km: Option<Vec<f64>>,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            distance_km: 0.0,
            atten_per_km: DEFAULT_ATTEN_PER_KM,
            n_relays: 0,
            eta: DEFAULT_ETA,
            p_dark: DEFAULT_P_DARK,
            positions_km: None,
        }
    }
}

impl ChainConfig {
    pub fn new(distance_km: f64, n_relays: usize) -> Self {
        ChainConfig {
            distance_km,
            n_relays,
            ..ChainConfig::default()
        }
    }

    /// Chain of dimensionless range `alpha_x` at the default attenuation.
    pub fn from_alpha_x(alpha_x: f64, n_relays: usize) -> Self {
        ChainConfig::new(alpha_x / DEFAULT_ATTEN_PER_KM, n_relays)
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_p_dark(mut self, p_dark: f64) -> Self {
        self.p_dark = p_dark;
        self
    }

    pub fn with_atten_per_km(mut self, atten_per_km: f64) -> Self {
        self.atten_per_km = atten_per_km;
        self
    }

    pub fn with_positions(mut self, positions_km: Vec<f64>) -> Self {
        self.n_relays = positions_km.len();
        self.positions_km = Some(positions_km);
        self
    }

    /// Same chain stretched to a new range, with positions recomputed.
    pub fn at_alpha_x(&self, alpha_x: f64) -> Self {
        ChainConfig {
            distance_km: alpha_x / self.atten_per_km,
            positions_km: None,
            ..self.clone()
        }
    }

    pub fn alpha_x(&self) -> f64 {
        self.distance_km * self.atten_per_km
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.distance_km >= 0.0) || !self.distance_km.is_finite() {
            return Err(domain(format!("distance_km must be >= 0, got {}", self.distance_km)));
        }
        if !(self.atten_per_km > 0.0) || !self.atten_per_km.is_finite() {
            return Err(domain(format!("atten_per_km must be > 0, got {}", self.atten_per_km)));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(domain(format!("eta must be in (0, 1], got {}", self.eta)));
        }
        if !(0.0..1.0).contains(&self.p_dark) {
            return Err(domain(format!("p_dark must be in [0, 1), got {}", self.p_dark)));
        }
        if self.n_relays > 0 && self.eta + 2.0 * self.p_dark > 1.0 {
            return Err(domain(format!(
                "relays need eta + 2 p_dark <= 1, got {}",
                self.eta + 2.0 * self.p_dark
            )));
        }
        if let Some(p) = &self.positions_km {
            check_positions(p, self.n_relays, self.distance_km)?;
        }
        Ok(())
    }
}

pub(crate) fn check_positions(positions: &[f64], n_relays: usize, distance_km: f64) -> Result<()> {
    if positions.len() != n_relays {
        return Err(domain(format!(
            "{} positions given for {} relays",
            positions.len(),
            n_relays
        )));
    }
    let mut prev = 0.0;
    for &p in positions {
        if !(p >= prev) || p > distance_km {
            return Err(domain(format!(
                "relay positions must be non-decreasing within [0, {distance_km}], got {positions:?}"
            )));
        }
        prev = p;
    }
    Ok(())
}

/// Error rate when half of all noise clicks happen to be correct:
/// `1 / (2 (1 + s))`.
pub fn qber_from_snr(s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(domain(format!("signal-to-noise ratio must be >= 0, got {s}")));
    }
    if s.is_infinite() {
        return Ok(0.0);
    }
    Ok(0.5 / (1.0 + s))
}

/// `S_0 = exp(-alpha_x) / (2 p_dark)`. Infinite when `p_dark` is zero.
pub fn snr_no_relay(p_dark: f64, alpha_x: f64) -> Result<f64> {
    if !(p_dark >= 0.0) {
        return Err(domain(format!("p_dark must be >= 0, got {p_dark}")));
    }
    if p_dark == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(0.5 / p_dark * (-alpha_x).exp())
}

/// Receiver noise with one relay at `x1_km` from the transmitter and `x2_km`
/// from the receiver: gated receiver dark counts plus attenuated spurious
/// relay photons, `2 p_dark (eta exp(-a x1) + exp(-a x2))`.
pub fn noise_single_relay(x1_km: f64, x2_km: f64, config: &ChainConfig) -> Result<f64> {
    if x1_km < 0.0 || x2_km < 0.0 {
        return Err(domain(format!("negative relay distances ({x1_km}, {x2_km})")));
    }
    if (x1_km + x2_km - config.distance_km).abs() > 1e-9 * config.distance_km.max(1.0) {
        return Err(domain(format!(
            "x1 + x2 = {} does not match the channel length {}",
            x1_km + x2_km,
            config.distance_km
        )));
    }
    let a = config.atten_per_km;
    Ok(2.0 * config.p_dark * (config.eta * (-a * x1_km).exp() + (-a * x2_km).exp()))
}

/// Stationary point of [`noise_single_relay`]: `(x + ln(eta) / a) / 2`.
pub fn unclamped_position_single(config: &ChainConfig) -> f64 {
    0.5 * (config.distance_km + config.eta.ln() / config.atten_per_km)
}

/// Best single-relay position, clamped to the channel.
pub fn optimal_position_single(config: &ChainConfig) -> f64 {
    unclamped_position_single(config).clamp(0.0, config.distance_km)
}

/// Optimal-placement SNR with `n` relays:
/// `S_0 eta^(n/(n+1)) exp(alpha_x n/(n+1)) / (n + 1)`.
pub fn snr_n_relays(alpha_x: f64, n: usize, eta: f64, p_dark: f64) -> Result<f64> {
    let s0 = snr_no_relay(p_dark, alpha_x)?;
    if n == 0 {
        return Ok(s0);
    }
    let k = n as f64 / (n as f64 + 1.0);
    Ok(s0 * eta.powf(k) * (alpha_x * k).exp() / (n as f64 + 1.0))
}

/// Single-relay closed form `S_0 sqrt(eta) exp(alpha_x / 2) / 2`.
pub fn snr_single_relay(alpha_x: f64, eta: f64, p_dark: f64) -> Result<f64> {
    Ok(snr_no_relay(p_dark, alpha_x)? * 0.5 * eta.sqrt() * (0.5 * alpha_x).exp())
}

/// Receiver noise to first order in `p_dark` for relays at `positions_km`.
///
/// Gated receiver dark counts scale with the probability that a signal
/// photon reached and passed the last relay; relay `k` emits a spurious
/// photon with probability `2 p_dark` whenever the gate chain reaching it is
/// alive, and that photon must then survive the rest of the channel. With one
/// relay this is exactly [`noise_single_relay`].
pub fn first_order_noise(config: &ChainConfig, positions_km: &[f64]) -> f64 {
    let a = config.atten_per_km;
    let x = config.distance_km;
    let n = positions_km.len() as i32;
    let eta = config.eta;
    let alive = |k: usize| -> f64 {
        // Gate alive on arrival at relay k (0-based): signal passed relays 0..k.
        if k == 0 {
            1.0
        } else {
            eta.powi(k as i32) * (-a * positions_km[k - 1]).exp()
        }
    };
    let last = positions_km.last().copied().unwrap_or(0.0);
    let gated = eta.powi(n) * (-a * last).exp();
    let spurious: f64 = positions_km
        .iter()
        .enumerate()
        .map(|(k, &p)| alive(k) * eta.powi(n - 1 - k as i32) * (-a * (x - p)).exp())
        .sum();
    2.0 * config.p_dark * (gated + spurious)
}

/// First-order optimal placement: `n` equal leading segments of length
/// `(x + ln(eta)/a) / (n + 1)` followed by a final segment of length
/// `(x - n ln(eta)/a) / (n + 1)`. When the leading segments would be
/// negative every relay sits at the transmitter.
pub fn analytic_positions(config: &ChainConfig) -> Vec<f64> {
    let n = config.n_relays;
    let d = (config.distance_km + config.eta.ln() / config.atten_per_km) / (n as f64 + 1.0);
    let d = d.max(0.0);
    (1..=n).map(|k| (k as f64 * d).min(config.distance_km)).collect()
}

/// Length of the segment between the last relay and the receiver under the
/// first-order optimal placement.
pub fn analytic_last_segment(config: &ChainConfig) -> f64 {
    let n = config.n_relays as f64;
    (config.distance_km - n * config.eta.ln() / config.atten_per_km) / (n + 1.0)
}

/// Numeric minimizer of `objective` over ordered positions, started from the
/// first-order placement.
pub fn optimize_positions_numeric<F>(config: &ChainConfig, objective: F) -> Result<Optimum>
where
    F: Fn(&[f64]) -> f64,
{
    optimize_positions_from(config, objective, &analytic_positions(config))
}

pub fn optimize_positions_from<F>(config: &ChainConfig, objective: F, start: &[f64]) -> Result<Optimum>
where
    F: Fn(&[f64]) -> f64,
{
    config.validate()?;
    if start.len() != config.n_relays {
        return Err(domain(format!(
            "{} start positions for {} relays",
            start.len(),
            config.n_relays
        )));
    }
    if config.n_relays == 0 || config.distance_km == 0.0 {
        let positions = vec![0.0; config.n_relays];
        let objective = objective(&positions);
        return Ok(Optimum {
            positions,
            objective,
            sweeps: 0,
        });
    }
    minimize_ordered(objective, start, config.distance_km)
}

/// Positions minimizing the exact receiver noise of the propagated chain.
pub fn optimal_positions(config: &ChainConfig) -> Result<Vec<f64>> {
    let opt = optimize_positions_numeric(config, |p| chain::exact_noise(config, p))?;
    Ok(opt.positions)
}

/// Range at which the optimal-placement SNR equals `s_target`, from the
/// closed form.
pub fn alpha_x_at_snr(n: usize, eta: f64, p_dark: f64, s_target: f64) -> Result<f64> {
    let n1 = n as f64 + 1.0;
    let k = n as f64 / n1;
    let arg = 2.0 * p_dark * s_target * n1 * eta.powf(-k);
    if !(arg > 0.0 && arg < 1.0) {
        return Err(domain(format!(
            "no positive range reaches S = {s_target} with {n} relays (log argument {arg})"
        )));
    }
    Ok(-n1 * arg.ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RangeEnhancement {
    /// Ratio with the factor-2 terms dropped.
    pub approx: f64,
    /// Ratio of the closed-form ranges at the target SNR.
    pub exact: f64,
}

/// Range reached with `n` relays relative to none, at a fixed target SNR.
pub fn range_enhancement(n: usize, eta: f64, p_dark: f64, s_target: f64) -> Result<RangeEnhancement> {
    let ps = p_dark * s_target;
    if !(ps > 0.0 && ps < 1.0) {
        return Err(domain(format!("p_dark * S must be in (0, 1), got {ps}")));
    }
    let n1 = n as f64 + 1.0;
    let arg = n1 * eta.powf(-(n as f64) / n1) * ps;
    if !(arg > 0.0 && arg < 1.0) {
        return Err(domain(format!(
            "approximate range ratio undefined (log argument {arg})"
        )));
    }
    let approx = n1 * arg.ln() / ps.ln();
    let exact = alpha_x_at_snr(n, eta, p_dark, s_target)? / alpha_x_at_snr(0, eta, p_dark, s_target)?;
    Ok(RangeEnhancement { approx, exact })
}

/// Range below which `n` optimally placed relays do worse than none.
pub fn crossover_alpha_x(n: usize, eta: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n1 = n as f64 + 1.0;
    n1 / n as f64 * n1.ln() - eta.ln()
}

/// Detections per second of an otherwise perfect system: `clock exp(-alpha_x)`.
pub fn raw_rate(clock_hz: f64, alpha_x: f64) -> Result<f64> {
    if !(clock_hz > 0.0) {
        return Err(domain(format!("clock must be positive, got {clock_hz}")));
    }
    Ok(clock_hz * (-alpha_x).exp())
}
