//! C ABI over the `qrelay` relay-chain model.
//!
//! Every fallible call returns a [`QrStatus`] and writes its result through an
//! out-pointer. On failure the message is available from
//! [`qr_last_error_message`] on the same thread until the next failing call.
//! Chains are opaque [`QrChain`] handles created by [`qr_chain_new`] and
//! released with [`qr_chain_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use qrelay::analytics::{self, ChainConfig};
use qrelay::chain::{self, ReceiverReport};
use qrelay::qnd::{self, QndError};
use qrelay::sample;
use qrelay::throughput::{self, EcPaParams};
use qrelay::ModelError;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotConverged = 3,
    BufferTooSmall = 4,
    Internal = 5,
}

/// Opaque relay-chain handle.
pub struct QrChain {
    config: ChainConfig,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QrReceiverReport {
    pub p_s: f64,
    pub p_n: f64,
    /// Infinite when `p_n` is zero.
    pub s: f64,
    pub q_b: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QrSampleReport {
    pub trials: u64,
    pub seed: u64,
    /// Receiver-input categories: signal, random photon, empty gated, vetoed.
    pub categories: [u64; 4],
    pub p_s: f64,
    pub p_n: f64,
    pub sigma_p_s: f64,
    pub sigma_p_n: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QrQndReport {
    pub success_probability: f64,
    pub min_fidelity: f64,
    pub outcome_count: usize,
}

struct Failure(QrStatus, String);

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        let status = match e {
            ModelError::NotConverged { .. } => QrStatus::NotConverged,
            ModelError::Domain(_) => QrStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<QndError> for Failure {
    fn from(e: QndError) -> Self {
        Failure(QrStatus::InvalidArgument, e.to_string())
    }
}

impl From<ReceiverReport> for QrReceiverReport {
    fn from(r: ReceiverReport) -> Self {
        QrReceiverReport {
            p_s: r.p_s,
            p_n: r.p_n,
            s: r.s,
            q_b: r.q_b,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn null(what: &str) -> Failure {
    Failure(QrStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> QrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QrStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(&format!("internal error: {msg}"));
            QrStatus::Internal
        }
    }
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

unsafe fn chain_ref<'a>(chain: *const QrChain) -> Result<&'a QrChain, Failure> {
    chain.as_ref().ok_or_else(|| null("chain"))
}

unsafe fn chain_mut<'a>(chain: *mut QrChain) -> Result<&'a mut QrChain, Failure> {
    chain.as_mut().ok_or_else(|| null("chain"))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failing call on this thread, or an empty string.
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn qr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn qr_status_name(status: QrStatus) -> *const c_char {
    let s: &CStr = match status {
        QrStatus::Ok => c"ok",
        QrStatus::NullPointer => c"null pointer",
        QrStatus::InvalidArgument => c"invalid argument",
        QrStatus::NotConverged => c"not converged",
        QrStatus::BufferTooSmall => c"buffer too small",
        QrStatus::Internal => c"internal error",
    };
    s.as_ptr()
}

/// Creates a chain of `n_relays` relays over `distance_km` of fiber with
/// intensity attenuation `atten_per_km` per km.
///
/// # Safety
/// `out` must be null or valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn qr_chain_new(
    distance_km: f64,
    atten_per_km: f64,
    n_relays: usize,
    eta: f64,
    p_dark: f64,
    out: *mut *mut QrChain,
) -> QrStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let config = ChainConfig::new(distance_km, n_relays)
            .with_atten_per_km(atten_per_km)
            .with_eta(eta)
            .with_p_dark(p_dark);
        config.validate()?;
        out.write(Box::into_raw(Box::new(QrChain { config })));
        Ok(())
    })
}

/// Releases a chain. Null is ignored.
///
/// # Safety
/// `chain` must be null or a handle from [`qr_chain_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qr_chain_free(chain: *mut QrChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}

/// Fixes relay positions (km from the transmitter). `len` must equal the
/// relay count.
///
/// # Safety
/// `chain` must be a live handle and `positions_km` valid for `len` reads.
#[no_mangle]
pub unsafe extern "C" fn qr_chain_set_positions(chain: *mut QrChain, positions_km: *const f64, len: usize) -> QrStatus {
    guard(|| {
        let chain = chain_mut(chain)?;
        let positions = if len == 0 {
            Vec::new()
        } else if positions_km.is_null() {
            return Err(null("positions"));
        } else {
            std::slice::from_raw_parts(positions_km, len).to_vec()
        };
        let mut config = chain.config.clone();
        config.positions_km = Some(positions);
        config.validate()?;
        chain.config = config;
        Ok(())
    })
}

/// Forgets fixed positions so that runs use the optimal placement.
///
/// # Safety
/// `chain` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qr_chain_clear_positions(chain: *mut QrChain) -> QrStatus {
    guard(|| {
        chain_mut(chain)?.config.positions_km = None;
        Ok(())
    })
}

/// Replaces the positions with the numerically optimal placement.
///
/// # Safety
/// `chain` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qr_chain_optimize(chain: *mut QrChain) -> QrStatus {
    guard(|| {
        let chain = chain_mut(chain)?;
        let positions = analytics::optimal_positions(&chain.config)?;
        chain.config.positions_km = Some(positions);
        Ok(())
    })
}

/// Copies the positions in effect into `out` (capacity `cap`) and stores the
/// relay count in `len`. Returns `BufferTooSmall` with `len` set when `cap`
/// is short.
///
/// # Safety
/// `chain` must be a live handle, `out` valid for `cap` writes and `len`
/// valid for one write.
#[no_mangle]
pub unsafe extern "C" fn qr_chain_positions(
    chain: *const QrChain,
    out: *mut f64,
    cap: usize,
    len: *mut usize,
) -> QrStatus {
    guard(|| {
        let positions = chain::resolve_positions(&chain_ref(chain)?.config)?;
        write(len, positions.len())?;
        if cap < positions.len() {
            return Err(Failure(
                QrStatus::BufferTooSmall,
                format!("need room for {} positions, got {cap}", positions.len()),
            ));
        }
        if !positions.is_empty() {
            if out.is_null() {
                return Err(null("output buffer"));
            }
            ptr::copy_nonoverlapping(positions.as_ptr(), out, positions.len());
        }
        Ok(())
    })
}

/// Exact receiver statistics.
///
/// # Safety
/// `chain` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn qr_chain_run(chain: *const QrChain, out: *mut QrReceiverReport) -> QrStatus {
    guard(|| {
        let report = chain::run_chain(&chain_ref(chain)?.config)?;
        write(out, report.into())
    })
}

/// Monte-Carlo receiver statistics; deterministic for a given seed.
///
/// # Safety
/// `chain` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn qr_chain_sample(
    chain: *const QrChain,
    trials: u64,
    seed: u64,
    out: *mut QrSampleReport,
) -> QrStatus {
    guard(|| {
        let r = sample::sample_chain(&chain_ref(chain)?.config, trials, seed)?;
        write(
            out,
            QrSampleReport {
                trials: r.trials,
                seed: r.seed,
                categories: r.categories,
                p_s: r.p_s,
                p_n: r.p_n,
                sigma_p_s: r.sigma_p_s,
                sigma_p_n: r.sigma_p_n,
            },
        )
    })
}

/// Closed-form SNR with `n` optimally placed relays.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn qr_snr_n_relays(alpha_x: f64, n: usize, eta: f64, p_dark: f64, out: *mut f64) -> QrStatus {
    guard(|| write(out, analytics::snr_n_relays(alpha_x, n, eta, p_dark)?))
}

/// Loss `alpha_x` at which the closed-form SNR falls to `s_target`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn qr_alpha_x_at_snr(n: usize, eta: f64, p_dark: f64, s_target: f64, out: *mut f64) -> QrStatus {
    guard(|| write(out, analytics::alpha_x_at_snr(n, eta, p_dark, s_target)?))
}

/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn qr_qber_from_snr(s: f64, out: *mut f64) -> QrStatus {
    guard(|| write(out, analytics::qber_from_snr(s)?))
}

/// Secret-key bits per sifted bit at SNR `s` with reconciliation
/// inefficiency `f_ec`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn qr_normalized_throughput(s: f64, f_ec: f64, out: *mut f64) -> QrStatus {
    guard(|| {
        let params = EcPaParams::new(f_ec)?;
        write(out, throughput::normalized_throughput(s, &params)?)
    })
}

/// QND measurement of `alpha|H> + beta|V>` with complex amplitudes given as
/// real and imaginary parts.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn qr_qnd_measure(
    alpha_re: f64,
    alpha_im: f64,
    beta_re: f64,
    beta_im: f64,
    out: *mut QrQndReport,
) -> QrStatus {
    guard(|| {
        let r = qnd::qnd_measure(Complex64::new(alpha_re, alpha_im), Complex64::new(beta_re, beta_im))?;
        write(
            out,
            QrQndReport {
                success_probability: r.success_probability,
                min_fidelity: r.min_fidelity(),
                outcome_count: r.outcomes.len(),
            },
        )
    })
}
