//! Run configuration: defaults, a flat JSON file, then command-line
//! overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analytics::{ChainConfig, DEFAULT_ATTEN_PER_KM, DEFAULT_ETA, DEFAULT_P_DARK};
use crate::throughput::DEFAULT_F_EC;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Every setting optional; used for both the config file and the flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub p_dark: Option<f64>,
    pub eta: Option<f64>,
    pub n_relays: Option<Vec<usize>>,
    pub distance_km: Option<f64>,
    pub atten_per_km: Option<f64>,
    pub alpha_x: Option<f64>,
    pub alpha_x_min: Option<f64>,
    pub alpha_x_max: Option<f64>,
    pub steps: Option<usize>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub f_ec: Option<f64>,
    pub format: Option<OutputFormat>,
    pub output: Option<PathBuf>,
}

impl PartialConfig {
    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("config: {e}"))
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        PartialConfig::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Values set in `other` replace those in `self`.
    pub fn overlay(self, other: PartialConfig) -> PartialConfig {
        PartialConfig {
            p_dark: other.p_dark.or(self.p_dark),
            eta: other.eta.or(self.eta),
            n_relays: other.n_relays.or(self.n_relays),
            distance_km: other.distance_km.or(self.distance_km),
            atten_per_km: other.atten_per_km.or(self.atten_per_km),
            alpha_x: other.alpha_x.or(self.alpha_x),
            alpha_x_min: other.alpha_x_min.or(self.alpha_x_min),
            alpha_x_max: other.alpha_x_max.or(self.alpha_x_max),
            steps: other.steps.or(self.steps),
            seed: other.seed.or(self.seed),
            trials: other.trials.or(self.trials),
            f_ec: other.f_ec.or(self.f_ec),
            format: other.format.or(self.format),
            output: other.output.or(self.output),
        }
    }
}

/// Fully resolved settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub p_dark: f64,
    pub eta: f64,
    pub n_relays: Option<Vec<usize>>,
    pub atten_per_km: f64,
    /// Single evaluation range, from `alpha_x` or `distance_km`.
    pub alpha_x: Option<f64>,
    pub alpha_x_min: f64,
    pub alpha_x_max: f64,
    pub steps: usize,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub f_ec: f64,
    pub format: OutputFormat,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn resolve(p: PartialConfig) -> Result<RunConfig, String> {
        let atten_per_km = p.atten_per_km.unwrap_or(DEFAULT_ATTEN_PER_KM);
        if !(atten_per_km > 0.0) {
            return Err(format!("atten_per_km must be > 0, got {atten_per_km}"));
        }
        let alpha_x = match (p.alpha_x, p.distance_km) {
            (Some(_), Some(_)) => return Err("set at most one of alpha_x and distance_km".into()),
            (Some(ax), None) => Some(ax),
            (None, Some(d)) => Some(d * atten_per_km),
            (None, None) => None,
        };
        if let Some(ax) = alpha_x {
            if !(ax >= 0.0 && ax.is_finite()) {
                return Err(format!("range must be finite and >= 0, got alpha_x = {ax}"));
            }
        }
        let cfg = RunConfig {
            p_dark: p.p_dark.unwrap_or(DEFAULT_P_DARK),
            eta: p.eta.unwrap_or(DEFAULT_ETA),
            n_relays: p.n_relays,
            atten_per_km,
            alpha_x,
            alpha_x_min: p.alpha_x_min.unwrap_or(0.0),
            alpha_x_max: p.alpha_x_max.unwrap_or(40.0),
            steps: p.steps.unwrap_or(100),
            seed: p.seed,
            trials: p.trials,
            f_ec: p.f_ec.unwrap_or(DEFAULT_F_EC),
            format: p.format.unwrap_or_default(),
            output: p.output,
        };
        if cfg.steps < 2 {
            return Err(format!("steps must be >= 2, got {}", cfg.steps));
        }
        if !(cfg.alpha_x_min >= 0.0 && cfg.alpha_x_min < cfg.alpha_x_max && cfg.alpha_x_max.is_finite()) {
            return Err(format!(
                "need 0 <= alpha_x_min < alpha_x_max, got [{}, {}]",
                cfg.alpha_x_min, cfg.alpha_x_max
            ));
        }
        if !(cfg.eta > 0.0 && cfg.eta <= 1.0) {
            return Err(format!("eta must be in (0, 1], got {}", cfg.eta));
        }
        if !(0.0..1.0).contains(&cfg.p_dark) {
            return Err(format!("p_dark must be in [0, 1), got {}", cfg.p_dark));
        }
        if !(cfg.f_ec >= 1.0) {
            return Err(format!("f_ec must be >= 1, got {}", cfg.f_ec));
        }
        Ok(cfg)
    }

    /// The evaluation grid: the single range if one was set, otherwise
    /// `steps` evenly spaced points.
    pub fn grid(&self) -> Vec<f64> {
        if let Some(ax) = self.alpha_x {
            return vec![ax];
        }
        let span = self.alpha_x_max - self.alpha_x_min;
        (0..self.steps)
            .map(|i| self.alpha_x_min + span * i as f64 / (self.steps - 1) as f64)
            .collect()
    }

    pub fn relay_counts(&self, default: &[usize]) -> Vec<usize> {
        self.n_relays.clone().unwrap_or_else(|| default.to_vec())
    }

    pub fn chain(&self, alpha_x: f64, n_relays: usize) -> ChainConfig {
        ChainConfig {
            distance_km: alpha_x / self.atten_per_km,
            atten_per_km: self.atten_per_km,
            n_relays,
            eta: self.eta,
            p_dark: self.p_dark,
            positions_km: None,
        }
    }
}
