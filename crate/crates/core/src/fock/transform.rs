use std::collections::{BTreeMap, HashMap};
use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{
    BasisMode, FockError, OccupationConfig, PhotonicState, Result, SpatialMode, PRUNE_THRESHOLD, UNITARY_TOLERANCE,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Linear map on creation operators: `a†_in -> sum_out m[(out, in)] a†_out`.
///
/// Modes not listed are left untouched when the transform is applied.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModeTransform {
    modes: Vec<BasisMode>,
    matrix: DMatrix<Complex64>,
}

impl LinearModeTransform {
    /// Wraps a square matrix over `modes`. Unitarity is not required here; it
    /// is checked when the transform is applied.
    pub fn new(modes: Vec<BasisMode>, matrix: DMatrix<Complex64>) -> Result<Self> {
        let n = modes.len();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(FockError::InvalidInput(format!(
                "matrix is {}x{} but {} modes were given",
                matrix.nrows(),
                matrix.ncols(),
                n
            )));
        }
        for (i, m) in modes.iter().enumerate() {
            if modes[..i].contains(m) {
                return Err(FockError::InvalidInput(format!("mode {m} listed twice")));
            }
        }
        Ok(LinearModeTransform { modes, matrix })
    }

    pub fn identity(modes: Vec<BasisMode>) -> Self {
        let n = modes.len();
        LinearModeTransform {
            modes,
            matrix: DMatrix::identity(n, n),
        }
    }

    /// Permutation sending each `from` mode to its `to` mode.
    fn permutation(pairs: &[(BasisMode, BasisMode)]) -> Self {
        let modes: Vec<BasisMode> = pairs.iter().map(|(from, _)| from.clone()).collect();
        let n = modes.len();
        let mut matrix = DMatrix::from_element(n, n, ZERO);
        for (from, to) in pairs {
            let i = modes.iter().position(|m| m == from).unwrap();
            let o = modes.iter().position(|m| m == to).unwrap();
            matrix[(o, i)] = ONE;
        }
        LinearModeTransform { modes, matrix }
    }

    pub fn modes(&self) -> &[BasisMode] {
        &self.modes
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Coefficient of `a†_output` in the image of `a†_input`.
    pub fn coefficient(&self, input: &BasisMode, output: &BasisMode) -> Complex64 {
        let i = self.modes.iter().position(|m| m == input);
        let o = self.modes.iter().position(|m| m == output);
        match (i, o) {
            (Some(i), Some(o)) => self.matrix[(o, i)],
            (None, None) if input == output => ONE,
            _ => ZERO,
        }
    }

    /// Largest entry of `U U† - I`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.modes.len();
        let product = &self.matrix * self.matrix.adjoint();
        let id = DMatrix::<Complex64>::identity(n, n);
        (product - id).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_defect() <= UNITARY_TOLERANCE
    }

    /// Inverse of a unitary transform.
    pub fn adjoint(&self) -> Self {
        LinearModeTransform {
            modes: self.modes.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    fn embedded(&self, modes: &[BasisMode]) -> DMatrix<Complex64> {
        let n = modes.len();
        DMatrix::from_fn(n, n, |o, i| self.coefficient(&modes[i], &modes[o]))
    }

    /// `next ∘ self`: apply `self` first, then `next`.
    pub fn then(&self, next: &LinearModeTransform) -> Self {
        let mut modes = self.modes.clone();
        for m in &next.modes {
            if !modes.contains(m) {
                modes.push(m.clone());
            }
        }
        let matrix = next.embedded(&modes) * self.embedded(&modes);
        LinearModeTransform { modes, matrix }
    }
}

/// Polarizing beam splitter: H transmits (`in.0 -> out.0`, `in.1 -> out.1`),
/// V reflects (`in.0 -> out.1`, `in.1 -> out.0`), no reflection phase.
///
/// The output modes are mapped back onto the input modes so the matrix is a
/// permutation over all eight basis modes.
pub fn pbs_hv(
    in_pair: (&SpatialMode, &SpatialMode),
    out_pair: (&SpatialMode, &SpatialMode),
) -> Result<LinearModeTransform> {
    let labels = [in_pair.0, in_pair.1, out_pair.0, out_pair.1];
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(FockError::InvalidInput(format!("beam splitter port {l} used twice")));
        }
    }
    let (i0, i1) = in_pair;
    let (o0, o1) = out_pair;
    Ok(LinearModeTransform::permutation(&[
        (i0.h(), o0.h()),
        (i1.h(), o1.h()),
        (i0.v(), o1.v()),
        (i1.v(), o0.v()),
        (o0.h(), i0.h()),
        (o1.h(), i1.h()),
        (o1.v(), i0.v()),
        (o0.v(), i1.v()),
    ]))
}

/// Rotation of a detector package into the diagonal basis: `H -> (F + S)/√2`,
/// `V -> (F - S)/√2`, with F stored in the H slot and S in the V slot.
/// The rotation is its own inverse.
pub fn basis_rotate_fs(spatial: &SpatialMode) -> LinearModeTransform {
    let r = Complex64::new(FRAC_1_SQRT_2, 0.0);
    LinearModeTransform {
        modes: spatial.pair().to_vec(),
        matrix: DMatrix::from_row_slice(2, 2, &[r, r, r, -r]),
    }
}

/// `V -> -V` on one spatial mode: the classically controlled sign correction.
pub fn phase_flip_v(spatial: &SpatialMode) -> LinearModeTransform {
    LinearModeTransform {
        modes: spatial.pair().to_vec(),
        matrix: DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    }
}

/// Applies `t` to every creation operator in `state`.
pub fn apply_transform(state: &PhotonicState, t: &LinearModeTransform) -> Result<PhotonicState> {
    let defect = t.unitarity_defect();
    if defect > UNITARY_TOLERANCE {
        return Err(FockError::ContractViolation(format!(
            "transform is not unitary (|UU† - I| = {defect:.3e})"
        )));
    }

    let index: HashMap<&BasisMode, usize> = t.modes.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let images: Vec<Vec<(BasisMode, Complex64)>> = (0..t.modes.len())
        .map(|i| {
            t.modes
                .iter()
                .enumerate()
                .filter_map(|(o, m)| {
                    let z = t.matrix[(o, i)];
                    (z.norm() > 0.0).then(|| (m.clone(), z))
                })
                .collect()
        })
        .collect();

    let mut out: BTreeMap<OccupationConfig, Complex64> = BTreeMap::new();
    for (config, amp) in state.terms() {
        // Normalized ket -> monomial in creation operators.
        let mut poly: BTreeMap<OccupationConfig, Complex64> = BTreeMap::new();
        poly.insert(OccupationConfig::vacuum(), amp / config.factorial_product().sqrt());
        for (mode, n) in config.iter() {
            let identity_image;
            let image = match index.get(mode) {
                Some(&i) => &images[i],
                None => {
                    identity_image = vec![(mode.clone(), ONE)];
                    &identity_image
                }
            };
            for _ in 0..n {
                poly = multiply_linear(&poly, image);
            }
        }
        // Monomial -> normalized ket.
        for (mono, coef) in poly {
            let scale = mono.factorial_product().sqrt();
            *out.entry(mono).or_insert(ZERO) += coef * scale;
        }
    }

    let modes = state.modes().iter().chain(t.modes.iter()).cloned().collect();
    Ok(PhotonicState::assemble(modes, out, state.photon_cap()))
}

fn multiply_linear(
    poly: &BTreeMap<OccupationConfig, Complex64>,
    image: &[(BasisMode, Complex64)],
) -> BTreeMap<OccupationConfig, Complex64> {
    let mut next = BTreeMap::new();
    for (mono, coef) in poly {
        for (mode, z) in image {
            let term = coef * z;
            if term.norm() <= PRUNE_THRESHOLD * 1e-6 {
                continue;
            }
            let mut m = mono.clone();
            m.add_photon(mode);
            *next.entry(m).or_insert(ZERO) += term;
        }
    }
    next
}
