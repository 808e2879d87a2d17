//! Secret-key throughput after error correction and privacy amplification.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::{qber_from_snr, ChainConfig};
use crate::chain;
use crate::error::{domain, Result};

pub const DEFAULT_F_EC: f64 = 1.16;
const BISECTION_TOLERANCE: f64 = 1e-12;

/// Key-fraction formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KeyFractionModel {
    /// Single-photon BB84: `1 - f h(e) - log2(1 + 4e - 4e^2)`.
    #[default]
    Bb84SinglePhoton,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EcPaParams {
    /// Error-correction inefficiency relative to the Shannon limit.
    pub f_ec: f64,
    pub model: KeyFractionModel,
}

impl Default for EcPaParams {
    fn default() -> Self {
        EcPaParams {
            f_ec: DEFAULT_F_EC,
            model: KeyFractionModel::default(),
        }
    }
}

impl EcPaParams {
    pub fn new(f_ec: f64) -> Result<Self> {
        if !(f_ec >= 1.0) || !f_ec.is_finite() {
            return Err(domain(format!("f_ec must be >= 1, got {f_ec}")));
        }
        Ok(EcPaParams {
            f_ec,
            model: KeyFractionModel::default(),
        })
    }
}

pub fn binary_entropy(e: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&e) {
        return Err(domain(format!("binary entropy needs e in [0, 1], got {e}")));
    }
    if e == 0.0 || e == 1.0 {
        return Ok(0.0);
    }
    Ok(-e * e.log2() - (1.0 - e) * (1.0 - e).log2())
}

/// Key fraction before clamping; negative beyond the critical error rate.
pub fn key_fraction_unclamped(e: f64, params: &EcPaParams) -> Result<f64> {
    if !(0.0..=0.5).contains(&e) {
        return Err(domain(format!("error rate must be in [0, 1/2], got {e}")));
    }
    match params.model {
        KeyFractionModel::Bb84SinglePhoton => {
            Ok(1.0 - params.f_ec * binary_entropy(e)? - (1.0 + 4.0 * e - 4.0 * e * e).log2())
        }
    }
}

pub fn key_fraction(e: f64, params: &EcPaParams) -> Result<f64> {
    Ok(key_fraction_unclamped(e, params)?.max(0.0))
}

/// Error rate where the key fraction reaches zero.
pub fn critical_qber(params: &EcPaParams) -> Result<f64> {
    let (mut lo, mut hi) = (0.0, 0.5);
    if key_fraction_unclamped(hi, params)? > 0.0 {
        return Err(domain("key fraction stays positive up to e = 1/2"));
    }
    while hi - lo > BISECTION_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if key_fraction_unclamped(mid, params)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Signal-to-noise ratio at the critical error rate: `1/(2 e*) - 1`.
pub fn critical_snr(params: &EcPaParams) -> Result<f64> {
    Ok(0.5 / critical_qber(params)? - 1.0)
}

/// Throughput per sifted detection: the key fraction at the error rate
/// implied by `s`.
pub fn normalized_throughput(s: f64, params: &EcPaParams) -> Result<f64> {
    key_fraction(qber_from_snr(s)?, params)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThroughputRow {
    pub alpha_x: f64,
    pub s: f64,
    pub q_b: f64,
    /// Throughput per detected signal photon.
    pub t_n: f64,
    /// Throughput per photon surviving the fiber, counting relay losses:
    /// `t_n * p_s / exp(-alpha_x)`.
    pub t_n_alt: f64,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(domain("grid values must be finite and >= 0"));
    }
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(domain("grid must be sorted"));
    }
    Ok(())
}

pub fn throughput_point(config: &ChainConfig, alpha_x: f64, params: &EcPaParams) -> Result<ThroughputRow> {
    let report = chain::run_chain(&config.at_alpha_x(alpha_x))?;
    let t_n = normalized_throughput(report.s, params)?;
    Ok(ThroughputRow {
        alpha_x,
        s: report.s,
        q_b: report.q_b,
        t_n,
        t_n_alt: t_n * report.p_s * alpha_x.exp(),
    })
}

/// Throughput along a sorted `alpha_x` grid with optimally placed relays.
pub fn throughput_curve(config: &ChainConfig, grid: &[f64], params: &EcPaParams) -> Result<Vec<ThroughputRow>> {
    check_grid(grid)?;
    grid.par_iter()
        .map(|&ax| throughput_point(config, ax, params))
        .collect()
}

/// First grid point where the throughput has dropped to zero.
pub fn grid_cutoff(rows: &[ThroughputRow]) -> Option<f64> {
    rows.iter().find(|r| r.t_n == 0.0).map(|r| r.alpha_x)
}

/// Range at which the exact chain reaches the critical signal-to-noise
/// ratio, by bisection over `[0, alpha_x_max]`.
pub fn cutoff_alpha_x(config: &ChainConfig, params: &EcPaParams, alpha_x_max: f64) -> Result<f64> {
    let s_crit = critical_snr(params)?;
    let s_at = |ax: f64| chain::run_chain(&config.at_alpha_x(ax)).map(|r| r.s);
    let (mut lo, mut hi) = (0.0, alpha_x_max);
    if s_at(lo)? <= s_crit {
        return Ok(0.0);
    }
    if s_at(hi)? > s_crit {
        return Err(domain(format!("no cutoff below alpha_x = {alpha_x_max}")));
    }
    while hi - lo > 1e-9 * alpha_x_max {
        let mid = 0.5 * (lo + hi);
        if s_at(mid)? > s_crit {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
