//! The linear-optics encoder and the QND device built from it.
//!
//! An input qubit in mode `0` meets one photon of a `φ+` pair (modes `a`,
//! `1`) on a polarizing beam splitter whose outputs are `2` and `b`. A
//! detector package (diagonal-basis rotation plus two counters) sits on `b`;
//! the QND variant adds a second package on `2`. Requiring exactly one photon
//! in every package heralds the input photon and leaves its polarization in
//! mode `1`, up to a sign that the feed-forward table undoes.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use num_complex::Complex64;
use thiserror::Error;

use crate::chain::{apply_relay_with, ChannelEventState};
use crate::fock::{
    apply_transform, basis_rotate_fs, enumerate_outcomes, make_bell_phi_plus, make_qubit, pbs_hv, phase_flip_v,
    BasisMode, DetectionPattern, FockError, OccupationConfig, PhotonicState, Polarization, Qubit, SpatialMode,
    DEFAULT_PHOTON_CAP,
};

pub const INPUT_MODE: SpatialMode = SpatialMode::from_static("0");
pub const ANCILLA_MODE: SpatialMode = SpatialMode::from_static("a");
pub const OUTPUT_MODE: SpatialMode = SpatialMode::from_static("1");
pub const HERALD_MODE: SpatialMode = SpatialMode::from_static("2");
pub const ENCODER_MODE: SpatialMode = SpatialMode::from_static("b");

/// Tolerance for deciding that a corrected branch reproduces its input.
const FIDELITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QndError {
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("no sign correction restores the input for outcome {0}")]
    NoCorrection(String),
}

pub type Result<T> = std::result::Result<T, QndError>;

/// Output port of a detector package.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Channel {
    F,
    S,
}

impl Channel {
    /// Polarization slot holding this channel after the diagonal rotation.
    pub fn slot(self) -> Polarization {
        match self {
            Channel::F => Polarization::H,
            Channel::S => Polarization::V,
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Channel::F => f.write_str("F"),
            Channel::S => f.write_str("S"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Package {
    /// Package on the encoder output `b`.
    Db,
    /// Herald package added to turn the encoder into a QND device.
    D2,
}

/// What one detector package registered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PackageOutcome {
    pub package: Package,
    /// The channel that fired when exactly one photon arrived.
    pub channel: Option<Channel>,
    pub multiplicity: u32,
}

impl PackageOutcome {
    pub fn read(package: Package, spatial: &SpatialMode, pattern: &DetectionPattern) -> Self {
        let f = u32::from(pattern.count(&BasisMode::new(spatial.clone(), Channel::F.slot())));
        let s = u32::from(pattern.count(&BasisMode::new(spatial.clone(), Channel::S.slot())));
        let channel = match (f, s) {
            (1, 0) => Some(Channel::F),
            (0, 1) => Some(Channel::S),
            _ => None,
        };
        PackageOutcome {
            package,
            channel,
            multiplicity: f + s,
        }
    }

    /// One-and-only-one photon across the package's two detectors.
    pub fn accepted(&self) -> bool {
        self.multiplicity == 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SignAction {
    Keep,
    Flip,
}

impl fmt::Display for SignAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignAction::Keep => f.write_str("keep"),
            SignAction::Flip => f.write_str("flip"),
        }
    }
}

/// Sign correction per joint outcome `(D2 channel, Db channel)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeedForwardTable {
    rules: BTreeMap<(Channel, Channel), SignAction>,
}

impl FeedForwardTable {
    /// Builds the table by running the circuit on a probe qubit whose relative
    /// sign is observable and picking, per outcome, the action that returns
    /// the probe.
    pub fn derive() -> Result<Self> {
        let probe = Qubit::new(Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8))?;
        let mut rules = BTreeMap::new();
        for branch in heralded_branches(&probe)? {
            let raw = branch.state.as_qubit(&OUTPUT_MODE)?;
            let flipped = feed_forward_sign(&branch.state, &OUTPUT_MODE)?.as_qubit(&OUTPUT_MODE)?;
            let action = if (probe.fidelity(&raw) - 1.0).abs() <= FIDELITY_TOLERANCE {
                SignAction::Keep
            } else if (probe.fidelity(&flipped) - 1.0).abs() <= FIDELITY_TOLERANCE {
                SignAction::Flip
            } else {
                return Err(QndError::NoCorrection(format!("{}{}", branch.herald, branch.encoder)));
            };
            rules.insert((branch.herald, branch.encoder), action);
        }
        if rules.len() != 4 {
            return Err(QndError::Config(format!(
                "expected four heralded outcomes, found {}",
                rules.len()
            )));
        }
        Ok(FeedForwardTable { rules })
    }

    /// The table derived once per process.
    pub fn shared() -> Result<&'static FeedForwardTable> {
        static TABLE: OnceLock<std::result::Result<FeedForwardTable, QndError>> = OnceLock::new();
        TABLE
            .get_or_init(FeedForwardTable::derive)
            .as_ref()
            .map_err(Clone::clone)
    }

    pub fn action(&self, herald: Channel, encoder: Channel) -> Option<SignAction> {
        self.rules.get(&(herald, encoder)).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((Channel, Channel), SignAction)> + '_ {
        self.rules.iter().map(|(k, v)| (*k, *v))
    }
}

/// Where the second detector package is placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DetectorPlacement {
    /// On the beam splitter output `2`; the working QND device.
    #[default]
    Mode2,
    /// On the ancilla partner `1`. Kept only as a diagnostic: both ancilla
    /// photons can then fire both packages with no input present.
    Mode1,
}

impl DetectorPlacement {
    fn herald_mode(self) -> SpatialMode {
        match self {
            DetectorPlacement::Mode2 => HERALD_MODE,
            DetectorPlacement::Mode1 => OUTPUT_MODE,
        }
    }
}

fn circuit_modes() -> Vec<BasisMode> {
    [INPUT_MODE, ANCILLA_MODE, OUTPUT_MODE, HERALD_MODE, ENCODER_MODE]
        .iter()
        .flat_map(|s| s.pair())
        .collect()
}

/// Runs an arbitrary state of mode `0` through the beam splitter together
/// with the `φ+` ancilla; the result lives on modes `1`, `2`, `b`.
pub fn encode_input(input: &PhotonicState) -> Result<PhotonicState> {
    let ancilla = make_bell_phi_plus(&ANCILLA_MODE, &OUTPUT_MODE)?;
    let joint = input.tensor(&ancilla)?.declare_modes(circuit_modes());
    let mixed = apply_transform(
        &joint,
        &pbs_hv((&INPUT_MODE, &ANCILLA_MODE), (&HERALD_MODE, &ENCODER_MODE))?,
    )?;
    let discarded: Vec<BasisMode> = INPUT_MODE.pair().into_iter().chain(ANCILLA_MODE.pair()).collect();
    Ok(mixed.discard_modes(&discarded)?)
}

/// Three-photon state after the encoder's beam splitter, over modes `1`, `2`, `b`.
pub fn build_encoder_state(alpha: Complex64, beta: Complex64) -> Result<PhotonicState> {
    encode_input(&make_qubit(alpha, beta, &INPUT_MODE)?)
}

#[derive(Debug, Clone)]
pub struct EncoderBranch {
    pub channel: Channel,
    pub probability: f64,
    /// Two-photon state of modes `1` and `2`.
    pub state: PhotonicState,
}

/// Rotates `b` into the diagonal basis and keeps the outcomes with exactly
/// one photon there.
pub fn encoder_postselect(state: &PhotonicState) -> Result<Vec<EncoderBranch>> {
    let rotated = apply_transform(state, &basis_rotate_fs(&ENCODER_MODE))?;
    let mut branches = Vec::new();
    for outcome in enumerate_outcomes(&rotated, &ENCODER_MODE.pair())? {
        let package = PackageOutcome::read(Package::Db, &ENCODER_MODE, &outcome.pattern);
        if let (true, Some(channel)) = (package.accepted(), package.channel) {
            branches.push(EncoderBranch {
                channel,
                probability: outcome.probability,
                state: outcome.state,
            });
        }
    }
    Ok(branches)
}

/// Negates the amplitude of every term with a V photon in `qubit_mode`.
/// Its own inverse.
pub fn feed_forward_sign(state: &PhotonicState, qubit_mode: &SpatialMode) -> Result<PhotonicState> {
    Ok(apply_transform(state, &phase_flip_v(qubit_mode))?)
}

struct HeraldedBranch {
    herald: Channel,
    encoder: Channel,
    probability: f64,
    state: PhotonicState,
}

fn heralded_branches(input: &Qubit) -> Result<Vec<HeraldedBranch>> {
    let encoded = encode_input(&input.to_state(&INPUT_MODE))?;
    let rotated = apply_transform(
        &encoded,
        &basis_rotate_fs(&HERALD_MODE).then(&basis_rotate_fs(&ENCODER_MODE)),
    )?;
    let measured: Vec<BasisMode> = HERALD_MODE.pair().into_iter().chain(ENCODER_MODE.pair()).collect();
    let mut branches = Vec::new();
    for outcome in enumerate_outcomes(&rotated, &measured)? {
        let herald = PackageOutcome::read(Package::D2, &HERALD_MODE, &outcome.pattern);
        let encoder = PackageOutcome::read(Package::Db, &ENCODER_MODE, &outcome.pattern);
        if let (Some(h), Some(e)) = (herald.channel, encoder.channel) {
            branches.push(HeraldedBranch {
                herald: h,
                encoder: e,
                probability: outcome.probability,
                state: outcome.state,
            });
        }
    }
    Ok(branches)
}

#[derive(Debug, Clone)]
pub struct JointOutcome {
    pub herald: Channel,
    pub encoder: Channel,
    pub probability: f64,
    pub action: SignAction,
    /// Polarization qubit left in mode `1` after the correction.
    pub output: Qubit,
    pub fidelity: f64,
}

#[derive(Debug, Clone)]
pub struct QndReport {
    pub input: Qubit,
    pub outcomes: Vec<JointOutcome>,
    pub success_probability: f64,
}

impl QndReport {
    pub fn min_fidelity(&self) -> f64 {
        self.outcomes.iter().map(|o| o.fidelity).fold(f64::INFINITY, f64::min)
    }
}

/// Full QND measurement of `alpha|H> + beta|V>`: heralded outcomes,
/// corrections and output fidelities.
pub fn qnd_measure(alpha: Complex64, beta: Complex64) -> Result<QndReport> {
    let input = Qubit::new(alpha, beta)?;
    let table = FeedForwardTable::shared()?;
    let mut outcomes = Vec::new();
    for branch in heralded_branches(&input)? {
        let action = table
            .action(branch.herald, branch.encoder)
            .ok_or_else(|| QndError::NoCorrection(format!("{}{}", branch.herald, branch.encoder)))?;
        let corrected = match action {
            SignAction::Keep => branch.state,
            SignAction::Flip => feed_forward_sign(&branch.state, &OUTPUT_MODE)?,
        };
        let output = corrected.as_qubit(&OUTPUT_MODE)?;
        outcomes.push(JointOutcome {
            herald: branch.herald,
            encoder: branch.encoder,
            probability: branch.probability,
            action,
            fidelity: input.fidelity(&output),
            output,
        });
    }
    let success_probability = outcomes.iter().map(|o| o.probability).sum();
    Ok(QndReport {
        input,
        outcomes,
        success_probability,
    })
}

/// Probability that both packages record exactly one photon for the given
/// state of mode `0`.
pub fn gate_probability(input: &PhotonicState, placement: DetectorPlacement) -> Result<f64> {
    let herald = placement.herald_mode();
    let encoded = encode_input(input)?;
    let rotated = apply_transform(
        &encoded,
        &basis_rotate_fs(&herald).then(&basis_rotate_fs(&ENCODER_MODE)),
    )?;
    let measured: Vec<BasisMode> = herald.pair().into_iter().chain(ENCODER_MODE.pair()).collect();
    Ok(enumerate_outcomes(&rotated, &measured)?
        .iter()
        .filter(|o| o.pattern.total_on(&herald) == 1 && o.pattern.total_on(&ENCODER_MODE) == 1)
        .fold(0.0, |acc, o| acc + o.probability))
}

/// Gate probability with no photon at the input.
pub fn qnd_vacuum_gate_probability(placement: DetectorPlacement) -> Result<f64> {
    gate_probability(&PhotonicState::vacuum(INPUT_MODE.pair()), placement)
}

/// `n` photons of mode `0`, all in the polarization `polarization`.
pub fn fock_input(n: u8, polarization: Polarization, photon_cap: u32) -> Result<PhotonicState> {
    let mode = BasisMode::new(INPUT_MODE, polarization);
    PhotonicState::from_terms_with_cap(
        INPUT_MODE.pair(),
        [(OccupationConfig::from_counts([(mode, n)]), Complex64::new(1.0, 0.0))],
        photon_cap,
    )
    .map_err(|e| match e {
        FockError::PhotonCapExceeded { total, cap } => {
            QndError::Config(format!("{total} input photons exceed the photon cap {cap}"))
        }
        other => other.into(),
    })
}

/// Two photons of mode `0` in the polarization state
/// `c_hh|2H> + c_hv|1H 1V> + c_vv|2V>` (normalized here).
pub fn two_photon_input(c_hh: Complex64, c_hv: Complex64, c_vv: Complex64) -> Result<PhotonicState> {
    let (h, v) = (INPUT_MODE.h(), INPUT_MODE.v());
    let state = PhotonicState::from_terms(
        INPUT_MODE.pair(),
        [
            (OccupationConfig::from_counts([(h.clone(), 2)]), c_hh),
            (OccupationConfig::from_counts([(h, 1), (v.clone(), 1)]), c_hv),
            (OccupationConfig::from_counts([(v, 2)]), c_vv),
        ],
    )?;
    Ok(state.normalized()?)
}

/// Gate probability for `n_input` identically polarized photons. The two
/// ancilla photons count against `photon_cap` as well.
pub fn qnd_multiphoton_gate_probability_with_cap(
    n_input: u8,
    polarization: Polarization,
    photon_cap: u32,
) -> Result<f64> {
    if n_input < 2 {
        return Err(QndError::Config(format!(
            "multi-photon check needs at least two input photons, got {n_input}"
        )));
    }
    if u32::from(n_input) + 2 > photon_cap {
        return Err(QndError::Config(format!(
            "{n_input} input photons plus the ancilla pair exceed the photon cap {photon_cap}"
        )));
    }
    let input = fock_input(n_input, polarization, photon_cap)?;
    gate_probability(&input, DetectorPlacement::Mode2)
}

pub fn qnd_multiphoton_gate_probability(n_input: u8, polarization: Polarization) -> Result<f64> {
    qnd_multiphoton_gate_probability_with_cap(n_input, polarization, DEFAULT_PHOTON_CAP)
}

/// Per-relay parameters of the classical channel model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QndChannelParams {
    /// Heralding efficiency of one relay; 1/2 for ideal hardware.
    pub eta: f64,
    /// Dark-count probability of one detector per qubit slot.
    pub p_dark: f64,
}

impl QndChannelParams {
    pub fn new(eta: f64, p_dark: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(QndError::Parameter(format!("eta must be in [0, 1], got {eta}")));
        }
        if !(0.0..1.0).contains(&p_dark) {
            return Err(QndError::Parameter(format!("p_dark must be in [0, 1), got {p_dark}")));
        }
        if p_dark > 1e-2 {
            log::warn!("p_dark = {p_dark} is large; the relay model assumes at most one dark count per slot");
        }
        Ok(QndChannelParams { eta, p_dark })
    }

    pub fn ideal() -> Self {
        QndChannelParams { eta: 0.5, p_dark: 0.0 }
    }

    /// Takes eta from the simulated circuit's success probability.
    pub fn from_circuit(p_dark: f64) -> Result<Self> {
        let report = qnd_measure(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))?;
        QndChannelParams::new(report.success_probability, p_dark)
    }

    /// Probability that a relay emits a randomly polarized photon with a gate
    /// signal because of a dark count: one of two effective detectors.
    pub fn false_gate_probability(&self) -> f64 {
        2.0 * self.p_dark
    }
}

/// How relay dark counts combine with a photon that was actually present.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DarkCountGating {
    /// False gates occur with probability `2 p_dark` in every slot, whatever
    /// the input. Column-stochastic as long as `eta + 2 p_dark <= 1`.
    #[default]
    Unconditional,
    /// False gates occur only when the legitimate herald did not, with
    /// probability `(1 - eta) 2 p_dark` for a photon-bearing slot.
    OnFailure,
}

/// Single-photon polarization density matrix, row-major `[[hh, hv], [vh, vv]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationDensity {
    pub elements: [[Complex64; 2]; 2],
}

impl PolarizationDensity {
    pub fn new(elements: [[Complex64; 2]; 2]) -> Result<Self> {
        let tol = 1e-9;
        let [[hh, hv], [vh, vv]] = elements;
        if (hv - vh.conj()).norm() > tol || hh.im.abs() > tol || vv.im.abs() > tol {
            return Err(QndError::Parameter("density matrix is not Hermitian".into()));
        }
        if (hh.re + vv.re - 1.0).abs() > tol {
            return Err(QndError::Parameter(format!(
                "density matrix trace is {}, expected 1",
                hh.re + vv.re
            )));
        }
        let det = hh.re * vv.re - hv.norm_sqr();
        if hh.re < -tol || vv.re < -tol || det < -tol {
            return Err(QndError::Parameter(
                "density matrix is not positive semidefinite".into(),
            ));
        }
        Ok(PolarizationDensity { elements })
    }

    pub fn pure(qubit: &Qubit) -> Self {
        let (a, b) = (qubit.alpha, qubit.beta);
        PolarizationDensity {
            elements: [[a * a.conj(), a * b.conj()], [b * a.conj(), b * b.conj()]],
        }
    }

    pub fn maximally_mixed() -> Self {
        let half = Complex64::new(0.5, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        PolarizationDensity {
            elements: [[half, zero], [zero, half]],
        }
    }

    pub fn trace(&self) -> f64 {
        self.elements[0][0].re + self.elements[1][1].re
    }
}

/// Output of one relay acting on `p1 |θ><θ| + (1 - p1) |0><0|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayOutput {
    pub events: ChannelEventState,
    pub theta: PolarizationDensity,
}

impl RelayOutput {
    /// Unnormalized polarization state forwarded with a gate signal:
    /// `p_sig |θ><θ| + p_rnd I/2`.
    pub fn gated_density(&self) -> [[Complex64; 2]; 2] {
        let mixed = PolarizationDensity::maximally_mixed();
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, z) in row.iter_mut().enumerate() {
                *z = self.theta.elements[i][j] * self.events.p_sig + mixed.elements[i][j] * self.events.p_rnd;
            }
        }
        out
    }

    pub fn gate_probability(&self) -> f64 {
        self.events.p_sig + self.events.p_rnd
    }

    pub fn total(&self) -> f64 {
        self.events.total()
    }
}

fn check_p1(p1: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p1) {
        return Err(QndError::Parameter(format!("p1 must be in [0, 1], got {p1}")));
    }
    Ok(())
}

/// Ideal relay: the photon is passed with a gate signal half of the time,
/// otherwise the slot is vetoed.
pub fn ideal_relay_map(p1: f64, theta: PolarizationDensity) -> Result<RelayOutput> {
    noisy_relay_map(p1, theta, QndChannelParams::ideal())
}

/// Relay with efficiency `eta` and detector dark counts.
pub fn noisy_relay_map(p1: f64, theta: PolarizationDensity, params: QndChannelParams) -> Result<RelayOutput> {
    noisy_relay_map_with(p1, theta, params, DarkCountGating::default())
}

pub fn noisy_relay_map_with(
    p1: f64,
    theta: PolarizationDensity,
    params: QndChannelParams,
    gating: DarkCountGating,
) -> Result<RelayOutput> {
    check_p1(p1)?;
    let input = ChannelEventState::new(p1, 0.0, 1.0 - p1, 0.0).map_err(|e| QndError::Parameter(e.to_string()))?;
    let events = apply_relay_with(&input, &params, gating).map_err(|e| QndError::Parameter(e.to_string()))?;
    Ok(RelayOutput { events, theta })
}
