use std::ffi::CStr;
use std::ptr;

use qrelay::analytics::{ChainConfig, DEFAULT_ATTEN_PER_KM};
use qrelay::chain;
use qrelay_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(qr_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

fn new_chain(distance_km: f64, n: usize) -> *mut QrChain {
    let mut chain = ptr::null_mut();
    let status = unsafe { qr_chain_new(distance_km, DEFAULT_ATTEN_PER_KM, n, 0.5, 1e-5, &mut chain) };
    assert_eq!(status, QrStatus::Ok);
    assert!(!chain.is_null());
    chain
}

#[test]
fn run_matches_library() {
    let chain = new_chain(150.0, 2);
    let mut out = QrReceiverReport::default();
    assert_eq!(unsafe { qr_chain_run(chain, &mut out) }, QrStatus::Ok);
    let expected = chain::run_chain(&ChainConfig::new(150.0, 2)).unwrap();
    assert_eq!(out, expected.into());
    unsafe { qr_chain_free(chain) };
}

#[test]
fn positions_round_trip_and_buffer_sizing() {
    let chain = new_chain(100.0, 1);
    let mut len = 0usize;
    assert_eq!(
        unsafe { qr_chain_positions(chain, ptr::null_mut(), 0, &mut len) },
        QrStatus::BufferTooSmall
    );
    assert_eq!(len, 1);
    assert_eq!(unsafe { qr_chain_optimize(chain) }, QrStatus::Ok);
    let mut buf = [0.0f64; 1];
    assert_eq!(
        unsafe { qr_chain_positions(chain, buf.as_mut_ptr(), 1, &mut len) },
        QrStatus::Ok
    );
    assert!((buf[0] - 43.07).abs() < 0.01, "{buf:?}");

    let fixed = [60.0];
    assert_eq!(
        unsafe { qr_chain_set_positions(chain, fixed.as_ptr(), 1) },
        QrStatus::Ok
    );
    assert_eq!(
        unsafe { qr_chain_positions(chain, buf.as_mut_ptr(), 1, &mut len) },
        QrStatus::Ok
    );
    assert_eq!(buf[0], 60.0);
    assert_eq!(unsafe { qr_chain_clear_positions(chain) }, QrStatus::Ok);

    let wrong = [10.0, 20.0];
    assert_eq!(
        unsafe { qr_chain_set_positions(chain, wrong.as_ptr(), 2) },
        QrStatus::InvalidArgument
    );
    assert!(!last_error().is_empty());
    unsafe { qr_chain_free(chain) };
}

#[test]
fn sampling_is_deterministic() {
    let chain = new_chain(20.0, 1);
    let (mut a, mut b) = (QrSampleReport::default(), QrSampleReport::default());
    assert_eq!(unsafe { qr_chain_sample(chain, 100_000, 3, &mut a) }, QrStatus::Ok);
    assert_eq!(unsafe { qr_chain_sample(chain, 100_000, 3, &mut b) }, QrStatus::Ok);
    assert_eq!(a, b);
    assert_eq!(a.categories.iter().sum::<u64>(), 100_000);
    unsafe { qr_chain_free(chain) };
}

#[test]
fn invalid_arguments_and_null_pointers() {
    let mut chain = ptr::null_mut();
    assert_eq!(
        unsafe { qr_chain_new(-1.0, 0.1, 1, 0.5, 1e-5, &mut chain) },
        QrStatus::InvalidArgument
    );
    assert!(chain.is_null());
    assert!(!last_error().is_empty());
    assert_eq!(
        unsafe { qr_chain_new(10.0, 0.1, 1, 1.0, 1e-5, &mut chain) },
        QrStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { qr_chain_new(10.0, 0.1, 1, 0.5, 1e-5, ptr::null_mut()) },
        QrStatus::NullPointer
    );
    let mut report = QrReceiverReport::default();
    assert_eq!(unsafe { qr_chain_run(ptr::null(), &mut report) }, QrStatus::NullPointer);
    assert_eq!(unsafe { qr_qber_from_snr(1.0, ptr::null_mut()) }, QrStatus::NullPointer);
    assert_eq!(
        unsafe { qr_normalized_throughput(10.0, 0.5, &mut 0.0) },
        QrStatus::InvalidArgument
    );
    unsafe { qr_chain_free(ptr::null_mut()) };
}

#[test]
fn scalar_functions() {
    let mut x = 0.0;
    assert_eq!(unsafe { qr_alpha_x_at_snr(0, 0.5, 1e-5, 1.0, &mut x) }, QrStatus::Ok);
    assert!((x - 10.82).abs() < 5e-3);
    let mut s = 0.0;
    assert_eq!(unsafe { qr_snr_n_relays(x, 0, 0.5, 1e-5, &mut s) }, QrStatus::Ok);
    assert!((s - 1.0).abs() < 1e-9);
    let mut q = 0.0;
    assert_eq!(unsafe { qr_qber_from_snr(1.0, &mut q) }, QrStatus::Ok);
    assert_eq!(q, 0.25);
    let mut t = 1.0;
    assert_eq!(unsafe { qr_normalized_throughput(1.0, 1.16, &mut t) }, QrStatus::Ok);
    assert_eq!(t, 0.0);
}

#[test]
fn qnd_measure_reports_contract() {
    let mut r = QrQndReport::default();
    assert_eq!(unsafe { qr_qnd_measure(0.6, 0.0, 0.0, 0.8, &mut r) }, QrStatus::Ok);
    assert!((r.success_probability - 0.5).abs() < 1e-12);
    assert!((r.min_fidelity - 1.0).abs() < 1e-12);
    assert_eq!(r.outcome_count, 4);
    assert_eq!(
        unsafe { qr_qnd_measure(0.0, 0.0, 0.0, 0.0, &mut r) },
        QrStatus::InvalidArgument
    );
}

#[test]
fn version_and_status_names() {
    let v = unsafe { CStr::from_ptr(qr_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
    let name = unsafe { CStr::from_ptr(qr_status_name(QrStatus::BufferTooSmall)) };
    assert_eq!(name.to_str().unwrap(), "buffer too small");
}
