use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64;

use super::{
    BasisMode, FockError, OccupationConfig, Polarization, Result, SpatialMode, DEFAULT_PHOTON_CAP, NORM_TOLERANCE,
    PRUNE_THRESHOLD,
};

/// Pure state of photons in a declared set of basis modes.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonicState {
    modes: BTreeSet<BasisMode>,
    amplitudes: BTreeMap<OccupationConfig, Complex64>,
    norm: f64,
    cap: u32,
}

impl PhotonicState {
    /// Builds a state from `(config, amplitude)` terms. Repeated configurations
    /// are summed and negligible amplitudes pruned.
    pub fn from_terms<M, T>(modes: M, terms: T) -> Result<Self>
    where
        M: IntoIterator<Item = BasisMode>,
        T: IntoIterator<Item = (OccupationConfig, Complex64)>,
    {
        Self::from_terms_with_cap(modes, terms, DEFAULT_PHOTON_CAP)
    }

    pub fn from_terms_with_cap<M, T>(modes: M, terms: T, cap: u32) -> Result<Self>
    where
        M: IntoIterator<Item = BasisMode>,
        T: IntoIterator<Item = (OccupationConfig, Complex64)>,
    {
        let modes: BTreeSet<BasisMode> = modes.into_iter().collect();
        let mut amplitudes = BTreeMap::new();
        for (config, amp) in terms {
            if let Some((mode, _)) = config.iter().find(|(m, _)| !modes.contains(*m)) {
                return Err(FockError::InvalidInput(format!(
                    "configuration {config} occupies undeclared mode {mode}"
                )));
            }
            let total = config.total();
            if total > cap {
                return Err(FockError::PhotonCapExceeded { total, cap });
            }
            *amplitudes.entry(config).or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        Ok(Self::assemble(modes, amplitudes, cap))
    }

    pub(crate) fn assemble(
        modes: BTreeSet<BasisMode>,
        mut amplitudes: BTreeMap<OccupationConfig, Complex64>,
        cap: u32,
    ) -> Self {
        amplitudes.retain(|_, a| a.norm() > PRUNE_THRESHOLD);
        let norm = amplitudes.values().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        PhotonicState {
            modes,
            amplitudes,
            norm,
            cap,
        }
    }

    /// The vacuum over the given modes.
    pub fn vacuum<M: IntoIterator<Item = BasisMode>>(modes: M) -> Self {
        let mut amplitudes = BTreeMap::new();
        amplitudes.insert(OccupationConfig::vacuum(), Complex64::new(1.0, 0.0));
        Self::assemble(modes.into_iter().collect(), amplitudes, DEFAULT_PHOTON_CAP)
    }

    /// A state with no amplitudes at all, returned by projections that have
    /// zero probability.
    pub fn empty<M: IntoIterator<Item = BasisMode>>(modes: M) -> Self {
        Self::assemble(modes.into_iter().collect(), BTreeMap::new(), DEFAULT_PHOTON_CAP)
    }

    pub fn modes(&self) -> &BTreeSet<BasisMode> {
        &self.modes
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn photon_cap(&self) -> u32 {
        self.cap
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm - 1.0).abs() <= NORM_TOLERANCE
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitude(&self, config: &OccupationConfig) -> Complex64 {
        self.amplitudes.get(config).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&OccupationConfig, &Complex64)> {
        self.amplitudes.iter()
    }

    pub fn with_photon_cap(mut self, cap: u32) -> Result<Self> {
        if let Some(total) = self.amplitudes.keys().map(|c| c.total()).max() {
            if total > cap {
                return Err(FockError::PhotonCapExceeded { total, cap });
            }
        }
        self.cap = cap;
        Ok(self)
    }

    /// Adds modes to the declared set without changing any amplitude.
    pub fn declare_modes<M: IntoIterator<Item = BasisMode>>(mut self, modes: M) -> Self {
        self.modes.extend(modes);
        self
    }

    /// Removes modes from the declared set. They must be unoccupied in every
    /// term.
    pub fn discard_modes(mut self, modes: &[BasisMode]) -> Result<Self> {
        for mode in modes {
            if self.amplitudes.keys().any(|c| c.count(mode) > 0) {
                return Err(FockError::InvalidInput(format!("cannot discard occupied mode {mode}")));
            }
            self.modes.remove(mode);
        }
        Ok(self)
    }

    /// Rescaled copy with unit norm.
    pub fn normalized(&self) -> Result<Self> {
        if self.norm <= PRUNE_THRESHOLD {
            return Err(FockError::InvalidInput("cannot normalize a zero state".into()));
        }
        Ok(self.scaled(Complex64::new(1.0 / self.norm, 0.0)))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let amplitudes = self.amplitudes.iter().map(|(c, a)| (c.clone(), a * factor)).collect();
        Self::assemble(self.modes.clone(), amplitudes, self.cap)
    }

    /// Tensor product with a state on disjoint modes.
    pub fn tensor(&self, other: &PhotonicState) -> Result<Self> {
        if let Some(shared) = self.modes.intersection(&other.modes).next() {
            return Err(FockError::InvalidInput(format!("tensor factors share mode {shared}")));
        }
        let cap = self.cap.max(other.cap);
        let modes = self.modes.union(&other.modes).cloned().collect();
        let mut amplitudes = BTreeMap::new();
        for (c1, a1) in &self.amplitudes {
            for (c2, a2) in &other.amplitudes {
                let config = c1.merge(c2);
                let total = config.total();
                if total > cap {
                    return Err(FockError::PhotonCapExceeded { total, cap });
                }
                amplitudes.insert(config, a1 * a2);
            }
        }
        Ok(Self::assemble(modes, amplitudes, cap))
    }

    /// `<self|other>`.
    pub fn overlap(&self, other: &PhotonicState) -> Complex64 {
        self.amplitudes
            .iter()
            .filter_map(|(c, a)| other.amplitudes.get(c).map(|b| a.conj() * b))
            .sum()
    }

    /// `|<self|other>|^2 / (|self|^2 |other|^2)`.
    pub fn fidelity(&self, other: &PhotonicState) -> f64 {
        let denom = self.norm * self.norm * other.norm * other.norm;
        if denom == 0.0 {
            return 0.0;
        }
        self.overlap(other).norm_sqr() / denom
    }

    /// Largest amplitude difference over the union of both supports.
    pub fn max_abs_diff(&self, other: &PhotonicState) -> f64 {
        let configs: BTreeSet<&OccupationConfig> = self.amplitudes.keys().chain(other.amplitudes.keys()).collect();
        configs
            .into_iter()
            .map(|c| (self.amplitude(c) - other.amplitude(c)).norm())
            .fold(0.0, f64::max)
    }

    /// Probability weight carried by each total photon number.
    pub fn photon_number_distribution(&self) -> BTreeMap<u32, f64> {
        let mut dist = BTreeMap::new();
        for (c, a) in &self.amplitudes {
            *dist.entry(c.total()).or_insert(0.0) += a.norm_sqr();
        }
        dist
    }

    /// Reads a single-photon state of `spatial` back as `(alpha, beta)`.
    pub fn as_qubit(&self, spatial: &SpatialMode) -> Result<Qubit> {
        let h = OccupationConfig::single(spatial.h());
        let v = OccupationConfig::single(spatial.v());
        if self.amplitudes.keys().any(|c| *c != h && *c != v) {
            return Err(FockError::InvalidInput(format!(
                "state is not a single-photon qubit in mode {spatial}"
            )));
        }
        Qubit::new(self.amplitude(&h), self.amplitude(&v))
    }
}

impl fmt::Display for PhotonicState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.amplitudes.is_empty() {
            return f.write_str("0");
        }
        for (i, (config, amp)) in self.amplitudes.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({:.6}{:+.6}i){}", amp.re, amp.im, config)?;
        }
        Ok(())
    }
}

/// Polarization qubit `alpha|H> + beta|V>`, normalized on construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Qubit {
    pub alpha: Complex64,
    pub beta: Complex64,
    /// Factor the raw amplitudes were multiplied by to reach unit norm.
    pub applied_scale: f64,
}

impl Qubit {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if norm <= PRUNE_THRESHOLD || !norm.is_finite() {
            return Err(FockError::InvalidInput("qubit amplitudes must not both be zero".into()));
        }
        let scale = 1.0 / norm;
        Ok(Qubit {
            alpha: alpha * scale,
            beta: beta * scale,
            applied_scale: scale,
        })
    }

    pub fn from_real(alpha: f64, beta: f64) -> Result<Self> {
        Qubit::new(Complex64::new(alpha, 0.0), Complex64::new(beta, 0.0))
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &Qubit) -> f64 {
        (self.alpha.conj() * other.alpha + self.beta.conj() * other.beta).norm_sqr()
    }

    pub fn to_state(&self, spatial: &SpatialMode) -> PhotonicState {
        let terms = [
            (OccupationConfig::single(spatial.h()), self.alpha),
            (OccupationConfig::single(spatial.v()), self.beta),
        ];
        let mut amplitudes = BTreeMap::new();
        for (c, a) in terms {
            amplitudes.insert(c, a);
        }
        PhotonicState::assemble(spatial.pair().into_iter().collect(), amplitudes, DEFAULT_PHOTON_CAP)
    }
}

/// `alpha|H> + beta|V>` in `spatial`, auto-normalized.
pub fn make_qubit(alpha: Complex64, beta: Complex64, spatial: &SpatialMode) -> Result<PhotonicState> {
    Ok(Qubit::new(alpha, beta)?.to_state(spatial))
}

/// `(|H_a H_1> + |V_a V_1>)/sqrt(2)`.
pub fn make_bell_phi_plus(spatial_a: &SpatialMode, spatial_1: &SpatialMode) -> Result<PhotonicState> {
    if spatial_a == spatial_1 {
        return Err(FockError::InvalidInput(format!(
            "Bell pair needs two distinct modes, got {spatial_a} twice"
        )));
    }
    let amp = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let term = |p: Polarization| {
        OccupationConfig::from_counts([
            (BasisMode::new(spatial_a.clone(), p), 1),
            (BasisMode::new(spatial_1.clone(), p), 1),
        ])
    };
    PhotonicState::from_terms(
        spatial_a.pair().into_iter().chain(spatial_1.pair()),
        [(term(Polarization::H), amp), (term(Polarization::V), amp)],
    )
}
