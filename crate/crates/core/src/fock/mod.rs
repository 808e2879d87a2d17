//! Exact few-photon simulation over polarization-resolved optical modes.
//!
//! States are sparse maps from occupation-number configurations to complex
//! amplitudes. Linear optical elements act on creation operators, so a
//! transform is a unitary matrix over [`BasisMode`]s and applying it expands
//! each configuration's monomial in creation operators, with the usual
//! `sqrt(n!)` bookkeeping between monomials and normalized Fock kets.
//!
//! Everything in here is an immutable value; all operations are pure.

mod measure;
mod state;
mod transform;

use std::borrow::Cow;
use std::fmt;

use thiserror::Error;

pub use measure::{enumerate_outcomes, measure_pattern, DetectionPattern, Outcome, Projection};
pub use state::{make_bell_phi_plus, make_qubit, PhotonicState, Qubit};
pub use transform::{apply_transform, basis_rotate_fs, pbs_hv, phase_flip_v, LinearModeTransform};

/// Amplitudes with magnitude at or below this are dropped from a state.
pub const PRUNE_THRESHOLD: f64 = 1e-14;

/// Default bound on the total photon number of a state.
pub const DEFAULT_PHOTON_CAP: u32 = 4;

/// Tolerance used when checking that a transform is unitary.
pub const UNITARY_TOLERANCE: f64 = 1e-12;

/// Tolerance used when checking that a state is normalized.
pub const NORM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FockError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("photon cap exceeded: state holds {total} photons, cap is {cap}")]
    PhotonCapExceeded { total: u32, cap: u32 },
    #[error("contract violation: {0}")]
    ContractViolation(String),
}

pub type Result<T> = std::result::Result<T, FockError>;

/// Spatial mode label, e.g. `0`, `a`, `1`, `2`, `b` for the QND circuit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpatialMode(Cow<'static, str>);

impl SpatialMode {
    pub const fn from_static(label: &'static str) -> Self {
        SpatialMode(Cow::Borrowed(label))
    }

    pub fn new(label: impl Into<String>) -> Self {
        SpatialMode(Cow::Owned(label.into()))
    }

    pub fn label(&self) -> &str {
        &self.0
    }

    pub fn h(&self) -> BasisMode {
        BasisMode::new(self.clone(), Polarization::H)
    }

    pub fn v(&self) -> BasisMode {
        BasisMode::new(self.clone(), Polarization::V)
    }

    /// Both polarization modes of this spatial mode, H first.
    pub fn pair(&self) -> [BasisMode; 2] {
        [self.h(), self.v()]
    }
}

impl fmt::Display for SpatialMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Polarization slot of a spatial mode.
///
/// After a detector package rotates a mode into the diagonal basis, the `H`
/// slot holds the F component and the `V` slot holds the S component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarization {
    H,
    V,
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Polarization::H => f.write_str("H"),
            Polarization::V => f.write_str("V"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisMode {
    pub spatial: SpatialMode,
    pub polarization: Polarization,
}

impl BasisMode {
    pub fn new(spatial: SpatialMode, polarization: Polarization) -> Self {
        BasisMode { spatial, polarization }
    }
}

impl fmt::Display for BasisMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.polarization, self.spatial)
    }
}

/// Photon counts per basis mode. Only occupied modes are stored, sorted by
/// mode, so two configurations compare equal iff they describe the same ket.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct OccupationConfig {
    counts: Vec<(BasisMode, u8)>,
}

impl OccupationConfig {
    pub fn vacuum() -> Self {
        OccupationConfig::default()
    }

    /// Builds a configuration from arbitrary `(mode, count)` pairs; repeated
    /// modes accumulate and zero counts are dropped.
    pub fn from_counts<I>(counts: I) -> Self
    where
        I: IntoIterator<Item = (BasisMode, u8)>,
    {
        let mut config = OccupationConfig::vacuum();
        for (mode, n) in counts {
            for _ in 0..n {
                config.add_photon(&mode);
            }
        }
        config
    }

    pub fn single(mode: BasisMode) -> Self {
        OccupationConfig {
            counts: vec![(mode, 1)],
        }
    }

    pub fn count(&self, mode: &BasisMode) -> u8 {
        match self.counts.binary_search_by(|(m, _)| m.cmp(mode)) {
            Ok(i) => self.counts[i].1,
            Err(_) => 0,
        }
    }

    pub fn total(&self) -> u32 {
        self.counts.iter().map(|&(_, n)| u32::from(n)).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BasisMode, u8)> {
        self.counts.iter().map(|(m, n)| (m, *n))
    }

    pub fn is_vacuum(&self) -> bool {
        self.counts.is_empty()
    }

    pub(crate) fn add_photon(&mut self, mode: &BasisMode) {
        match self.counts.binary_search_by(|(m, _)| m.cmp(mode)) {
            Ok(i) => self.counts[i].1 += 1,
            Err(i) => self.counts.insert(i, (mode.clone(), 1)),
        }
    }

    /// Product of `n!` over all modes.
    pub fn factorial_product(&self) -> f64 {
        self.counts
            .iter()
            .map(|&(_, n)| (1..=u32::from(n)).product::<u32>() as f64)
            .product()
    }

    /// Splits into the part on `modes` and the part on every other mode.
    pub(crate) fn split(&self, modes: &[BasisMode]) -> (OccupationConfig, OccupationConfig) {
        let (inside, outside): (Vec<_>, Vec<_>) = self.counts.iter().cloned().partition(|(m, _)| modes.contains(m));
        (
            OccupationConfig { counts: inside },
            OccupationConfig { counts: outside },
        )
    }

    pub(crate) fn merge(&self, other: &OccupationConfig) -> OccupationConfig {
        let mut merged = self.clone();
        for (mode, n) in other.iter() {
            for _ in 0..n {
                merged.add_photon(mode);
            }
        }
        merged
    }
}

impl fmt::Display for OccupationConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.counts.is_empty() {
            return f.write_str("|vac>");
        }
        f.write_str("|")?;
        for (i, (mode, n)) in self.counts.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            if *n == 1 {
                write!(f, "{mode}")?;
            } else {
                write!(f, "{n}{mode}")?;
            }
        }
        f.write_str(">")
    }
}
