use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64;

use super::{BasisMode, FockError, OccupationConfig, PhotonicState, Result, SpatialMode};

/// Photon counts registered on a set of measured modes. Modes that are not
/// listed registered zero photons.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct DetectionPattern {
    counts: BTreeMap<BasisMode, u8>,
}

impl DetectionPattern {
    pub fn new<I: IntoIterator<Item = (BasisMode, u8)>>(counts: I) -> Self {
        let mut pattern = DetectionPattern::default();
        for (mode, n) in counts {
            if n > 0 {
                *pattern.counts.entry(mode).or_insert(0) += n;
            }
        }
        pattern
    }

    fn from_config(config: &OccupationConfig) -> Self {
        DetectionPattern::new(config.iter().map(|(m, n)| (m.clone(), n)))
    }

    pub fn count(&self, mode: &BasisMode) -> u8 {
        self.counts.get(mode).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u32 {
        self.counts.values().map(|&n| u32::from(n)).sum()
    }

    /// Photons registered on either polarization slot of `spatial`.
    pub fn total_on(&self, spatial: &SpatialMode) -> u32 {
        spatial.pair().iter().map(|m| u32::from(self.count(m))).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BasisMode, u8)> {
        self.counts.iter().map(|(m, n)| (m, *n))
    }
}

impl fmt::Display for DetectionPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.counts.is_empty() {
            return f.write_str("{}");
        }
        let parts: Vec<String> = self.counts.iter().map(|(m, n)| format!("{m}:{n}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Result of post-selecting on one detection pattern.
#[derive(Debug, Clone)]
pub struct Projection {
    pub probability: f64,
    /// Renormalized state of the unmeasured modes; empty when the pattern has
    /// zero probability.
    pub state: PhotonicState,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub pattern: DetectionPattern,
    pub probability: f64,
    pub state: PhotonicState,
}

fn check_measurement(state: &PhotonicState, measured: &[BasisMode]) -> Result<()> {
    if let Some(m) = measured.iter().find(|m| !state.modes().contains(*m)) {
        return Err(FockError::InvalidInput(format!(
            "measured mode {m} is not declared on the state"
        )));
    }
    if !state.is_normalized() {
        return Err(FockError::ContractViolation(format!(
            "measurement needs a normalized state, norm is {:.15}",
            state.norm()
        )));
    }
    Ok(())
}

fn remaining_modes(state: &PhotonicState, measured: &[BasisMode]) -> BTreeSet<BasisMode> {
    state
        .modes()
        .iter()
        .filter(|m| !measured.contains(m))
        .cloned()
        .collect()
}

fn condition(
    modes: BTreeSet<BasisMode>,
    amplitudes: BTreeMap<OccupationConfig, Complex64>,
    cap: u32,
) -> (f64, PhotonicState) {
    let unnormalized = PhotonicState::assemble(modes.clone(), amplitudes, cap);
    let probability = unnormalized.norm().powi(2);
    if unnormalized.is_empty() {
        return (0.0, PhotonicState::empty(modes));
    }
    let scale = Complex64::new(1.0 / unnormalized.norm(), 0.0);
    (probability, unnormalized.scaled(scale))
}

/// Projects `state` onto `pattern` on the `measured` modes.
pub fn measure_pattern(
    state: &PhotonicState,
    measured: &[BasisMode],
    pattern: &DetectionPattern,
) -> Result<Projection> {
    check_measurement(state, measured)?;
    if let Some((m, _)) = pattern.iter().find(|(m, _)| !measured.contains(*m)) {
        return Err(FockError::InvalidInput(format!(
            "pattern counts photons on unmeasured mode {m}"
        )));
    }
    let mut kept = BTreeMap::new();
    for (config, amp) in state.terms() {
        let (inside, outside) = config.split(measured);
        if DetectionPattern::from_config(&inside) == *pattern {
            kept.insert(outside, *amp);
        }
    }
    let (probability, state) = condition(remaining_modes(state, measured), kept, state.photon_cap());
    Ok(Projection { probability, state })
}

/// Every detection pattern on `measured` with nonzero probability, in
/// pattern order.
pub fn enumerate_outcomes(state: &PhotonicState, measured: &[BasisMode]) -> Result<Vec<Outcome>> {
    check_measurement(state, measured)?;
    let mut groups: BTreeMap<DetectionPattern, BTreeMap<OccupationConfig, Complex64>> = BTreeMap::new();
    for (config, amp) in state.terms() {
        let (inside, outside) = config.split(measured);
        groups
            .entry(DetectionPattern::from_config(&inside))
            .or_default()
            .insert(outside, *amp);
    }
    let modes = remaining_modes(state, measured);
    Ok(groups
        .into_iter()
        .map(|(pattern, amplitudes)| {
            let (probability, state) = condition(modes.clone(), amplitudes, state.photon_cap());
            Outcome {
                pattern,
                probability,
                state,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{make_bell_phi_plus, make_qubit};

    const M0: SpatialMode = SpatialMode::from_static("0");
    const MA: SpatialMode = SpatialMode::from_static("a");
    const M1: SpatialMode = SpatialMode::from_static("1");

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn single_qubit_outcomes() {
        let q = make_qubit(c(0.6), c(0.8), &M0).unwrap();
        let outcomes = enumerate_outcomes(&q, &M0.pair()).unwrap();
        assert_eq!(outcomes.len(), 2);
        assert!((outcomes[0].probability - 0.36).abs() < 1e-15);
        assert!((outcomes[1].probability - 0.64).abs() < 1e-15);
        for o in &outcomes {
            assert!(o.state.is_normalized());
        }
    }

    #[test]
    fn vacuum_has_one_outcome() {
        let vac = PhotonicState::vacuum(M0.pair());
        let outcomes = enumerate_outcomes(&vac, &M0.pair()).unwrap();
        assert_eq!(outcomes.len(), 1);
        assert_eq!(outcomes[0].pattern.total(), 0);
        assert_eq!(outcomes[0].probability, 1.0);
    }

    #[test]
    fn pattern_covering_support() {
        let phi = make_bell_phi_plus(&MA, &M1).unwrap();
        let q = make_qubit(c(1.0), c(0.0), &M0).unwrap();
        let joint = q.tensor(&phi).unwrap();
        let pattern = DetectionPattern::new([(M0.h(), 1)]);
        let p = measure_pattern(&joint, &M0.pair(), &pattern).unwrap();
        assert!((p.probability - 1.0).abs() < 1e-15);
        assert!(p.state.max_abs_diff(&phi) < 1e-15);
    }

    #[test]
    fn pattern_disjoint_from_support() {
        let q = make_qubit(c(1.0), c(0.0), &M0).unwrap();
        let p = measure_pattern(&q, &M0.pair(), &DetectionPattern::new([(M0.v(), 1)])).unwrap();
        assert_eq!(p.probability, 0.0);
        assert!(p.state.is_empty());
    }

    #[test]
    fn bell_measurement_collapses_partner() {
        let phi = make_bell_phi_plus(&MA, &M1).unwrap();
        let p = measure_pattern(&phi, &MA.pair(), &DetectionPattern::new([(MA.v(), 1)])).unwrap();
        assert!((p.probability - 0.5).abs() < 1e-15);
        assert_eq!(p.state.amplitude(&OccupationConfig::single(M1.v())), c(1.0));
    }

    #[test]
    fn unnormalized_input_rejected() {
        let q = make_qubit(c(1.0), c(0.0), &M0).unwrap().scaled(c(2.0));
        assert!(matches!(
            enumerate_outcomes(&q, &M0.pair()),
            Err(FockError::ContractViolation(_))
        ));
    }

    #[test]
    fn undeclared_measured_mode_rejected() {
        let q = make_qubit(c(1.0), c(0.0), &M0).unwrap();
        assert!(enumerate_outcomes(&q, &MA.pair()).is_err());
    }
}
