//! Invariant suite for the QND device.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::fock::Polarization;
use crate::qnd::{
    gate_probability, qnd_measure, qnd_multiphoton_gate_probability, qnd_vacuum_gate_probability, two_photon_input,
    Channel, DetectorPlacement, FeedForwardTable, QndReport, Result, SignAction,
};

pub const PROBABILITY_TOLERANCE: f64 = 1e-12;
pub const FIDELITY_TOLERANCE: f64 = 1e-12;

pub const EXPECTED_TABLE: [((Channel, Channel), SignAction); 4] = [
    ((Channel::F, Channel::F), SignAction::Keep),
    ((Channel::S, Channel::S), SignAction::Keep),
    ((Channel::S, Channel::F), SignAction::Flip),
    ((Channel::F, Channel::S), SignAction::Flip),
];

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchLine {
    pub herald: String,
    pub encoder: String,
    pub probability: f64,
    pub action: String,
    pub fidelity: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CircuitVerification {
    pub checks: Vec<Check>,
    /// Per-branch detail for an explicitly requested input.
    pub branches: Vec<BranchLine>,
    /// Vacuum false-gate probability with the herald package on mode `1`.
    pub diagnostic_vacuum_gate: Option<f64>,
}

impl CircuitVerification {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{} {}: {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            );
        }
        for b in &self.branches {
            let _ = writeln!(
                out,
                "branch D2={} Db={} p={:.6} action={} fidelity={:.15}",
                b.herald, b.encoder, b.probability, b.action, b.fidelity
            );
        }
        if let Some(p) = self.diagnostic_vacuum_gate {
            let _ = writeln!(out, "DIAGNOSTIC herald on mode 1: vacuum false-gate probability {p:.6}");
        }
        let _ = writeln!(out, "{}", if self.passed() { "PASS" } else { "FAIL" });
        out
    }
}

fn random_amplitudes(rng: &mut ChaCha8Rng) -> (Complex64, Complex64) {
    let mut c = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    (c(), c())
}

fn check_report(report: &QndReport) -> (f64, f64) {
    (report.success_probability, report.min_fidelity())
}

/// Runs the device checks on `n_random` seeded random inputs plus `input`,
/// if given.
pub fn verify_circuit(
    n_random: usize,
    seed: u64,
    input: Option<(Complex64, Complex64)>,
    diagnostic_mode1: bool,
) -> Result<CircuitVerification> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reports = Vec::with_capacity(n_random + 1);
    for _ in 0..n_random {
        let (a, b) = random_amplitudes(&mut rng);
        reports.push(qnd_measure(a, b)?);
    }
    let mut branches = Vec::new();
    if let Some((a, b)) = input {
        let report = qnd_measure(a, b)?;
        branches = report
            .outcomes
            .iter()
            .map(|o| BranchLine {
                herald: o.herald.to_string(),
                encoder: o.encoder.to_string(),
                probability: o.probability,
                action: o.action.to_string(),
                fidelity: o.fidelity,
            })
            .collect();
        reports.push(report);
    }

    let mut checks = Vec::new();
    let (mut worst_p, mut worst_f) = (0.0f64, 0.0f64);
    for r in &reports {
        let (p, f) = check_report(r);
        worst_p = worst_p.max((p - 0.5).abs());
        worst_f = worst_f.max((1.0 - f).abs());
    }
    checks.push(Check {
        name: "success probability".into(),
        passed: worst_p <= PROBABILITY_TOLERANCE,
        detail: format!("{} inputs, max |p - 1/2| = {worst_p:.3e}", reports.len()),
    });
    checks.push(Check {
        name: "corrected fidelity".into(),
        passed: worst_f <= FIDELITY_TOLERANCE,
        detail: format!("max |1 - F| = {worst_f:.3e}"),
    });

    let vacuum = qnd_vacuum_gate_probability(DetectorPlacement::Mode2)?;
    checks.push(Check {
        name: "vacuum rejection".into(),
        passed: vacuum == 0.0,
        detail: format!("gate probability {vacuum}"),
    });

    let two = [
        qnd_multiphoton_gate_probability(2, Polarization::H)?,
        qnd_multiphoton_gate_probability(2, Polarization::V)?,
        gate_probability(
            &two_photon_input(
                Complex64::new(0.5, 0.0),
                Complex64::new(0.5, 0.5),
                Complex64::new(-0.5, 0.0),
            )?,
            DetectorPlacement::Mode2,
        )?,
    ];
    let worst_two = two.iter().copied().fold(0.0, f64::max);
    checks.push(Check {
        name: "two-photon rejection".into(),
        passed: worst_two == 0.0,
        detail: format!("max gate probability {worst_two}"),
    });

    let table = FeedForwardTable::shared()?;
    let derived: Vec<String> = table.iter().map(|((h, e), a)| format!("{h}{e}:{a}")).collect();
    checks.push(Check {
        name: "feed-forward table".into(),
        passed: EXPECTED_TABLE
            .iter()
            .all(|((h, e), a)| table.action(*h, *e) == Some(*a)),
        detail: derived.join(" "),
    });

    let diagnostic_vacuum_gate = if diagnostic_mode1 {
        Some(qnd_vacuum_gate_probability(DetectorPlacement::Mode1)?)
    } else {
        None
    };
    Ok(CircuitVerification {
        checks,
        branches,
        diagnostic_vacuum_gate,
    })
}
