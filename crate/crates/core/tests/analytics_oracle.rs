//! Closed-form model checked against independent numeric evaluation.

use proptest::prelude::*;
use qrelay::analytics::*;
use qrelay::chain;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PD: f64 = 1e-5;
const ETA: f64 = 0.5;

/// Bisection for a decreasing function crossing `target`.
fn solve_decreasing(f: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section search on a unimodal function.
fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    while b - a > 1e-12 * (1.0 + b.abs()) {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

#[test]
fn range_doubling_from_bisection() {
    let s0 = |ax: f64| (-ax).exp() / (2.0 * PD);
    let s1 = |ax: f64| s0(ax) * ETA.sqrt() * (ax / 2.0).exp() / 2.0;
    let x0 = solve_decreasing(s0, 1.0, 0.0, 100.0);
    let x1 = solve_decreasing(s1, 1.0, 0.0, 100.0);
    assert!((x0 - 10.82).abs() < 5e-3, "{x0}");
    assert!((x1 - 19.56).abs() < 5e-3, "{x1}");
    assert!((alpha_x_at_snr(0, ETA, PD, 1.0).unwrap() - x0).abs() < 1e-9);
    assert!((alpha_x_at_snr(1, ETA, PD, 1.0).unwrap() - x1).abs() < 1e-9);
    let ratio = x1 / x0;
    assert!((1.7..=2.0).contains(&ratio));
}

#[test]
fn general_n_inversion_matches_bisection() {
    for n in [1usize, 2, 4, 8, 16] {
        for s in [0.1, 1.0, 100.0] {
            let x = solve_decreasing(|ax| snr_n_relays(ax, n, ETA, PD).unwrap(), s, 0.0, 500.0);
            let y = alpha_x_at_snr(n, ETA, PD, s).unwrap();
            assert!((x - y).abs() < 1e-8 * y, "N={n} S={s}: {x} vs {y}");
        }
    }
}

#[test]
fn range_enhancement_reference_value() {
    let n1: f64 = 2.0;
    let direct = n1 * (n1 * ETA.powf(-0.5) * PD).ln() / PD.ln();
    let r = range_enhancement(1, ETA, PD, 1.0).unwrap();
    assert!((r.approx - direct).abs() < 1e-12);
    assert!((r.approx - 1.82).abs() < 5e-3);
}

#[test]
fn range_enhancement_approximation_error() {
    for n in 0..=8 {
        for exp in [-4.0, -5.0, -6.0, -8.0, -10.0] {
            for pd in [1e-5, 1e-6, 1e-7] {
                let s = 10f64.powf(exp) / pd;
                let r = range_enhancement(n, ETA, pd, s).unwrap();
                assert!((r.approx - r.exact).abs() / r.exact < 0.05, "N={n} pdS=1e{exp}: {r:?}");
            }
        }
    }
}

#[test]
fn single_relay_position_matches_golden_section() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..20 {
        let x = rng.gen_range(10.0..800.0);
        let eta = rng.gen_range(0.05..1.0);
        let cfg = ChainConfig::new(x, 1).with_eta(eta);
        let noise = |x1: f64| 2.0 * PD * (eta * (-0.05 * x1).exp() + (-0.05 * (x - x1)).exp());
        let oracle = golden_min(noise, 0.0, x);
        let closed = optimal_position_single(&cfg);
        assert!(
            (oracle - closed).abs() <= 1e-6 * x,
            "x={x} eta={eta}: {oracle} vs {closed}"
        );
    }
}

#[test]
fn closed_form_identities() {
    for ax in [0.0, 1.0, 7.5, 20.0, 40.0] {
        let s0 = snr_no_relay(PD, ax).unwrap();
        assert!((snr_n_relays(ax, 0, ETA, PD).unwrap() - s0).abs() <= 1e-15 * s0);
        let s1 = snr_single_relay(ax, ETA, PD).unwrap();
        assert!((snr_n_relays(ax, 1, ETA, PD).unwrap() - s1).abs() <= 1e-14 * s1);
    }
}

#[test]
fn placement_formula_is_the_exact_optimum() {
    for (ax, n) in [(15.0, 1), (25.0, 2), (30.0, 3), (35.0, 4), (40.0, 8), (40.0, 16)] {
        let cfg = ChainConfig::from_alpha_x(ax, n);
        let guess = analytic_positions(&cfg);
        let x = cfg.distance_km;
        let uniform: Vec<f64> = (1..=n).map(|k| x * k as f64 / (n as f64 + 1.0)).collect();
        let numeric = optimize_positions_from(&cfg, |p| chain::exact_noise(&cfg, p), &uniform).unwrap();
        let f_guess = chain::exact_noise(&cfg, &guess);
        assert!((f_guess - numeric.objective).abs() <= 1e-9 * numeric.objective);
        let last = x - numeric.positions[n - 1];
        assert!((last - analytic_last_segment(&cfg)).abs() < 1e-6 * x, "N={n}: {last}");
        for w in numeric.positions.windows(2) {
            assert!((w[1] - w[0] - numeric.positions[0]).abs() < 1e-6 * x);
        }
    }
}

#[test]
fn first_order_noise_tracks_exact_chain() {
    for (ax, n) in [(10.0, 1), (20.0, 2), (30.0, 4)] {
        let cfg = ChainConfig::from_alpha_x(ax, n);
        let p = analytic_positions(&cfg);
        let exact = chain::exact_noise(&cfg, &p);
        let approx = first_order_noise(&cfg, &p);
        // Leading neglected terms: receiver dark counts behind each relay's
        // false gate, at most 2 p_d * 2 p_d per relay.
        assert!((exact - approx).abs() <= 4.0 * PD * PD * n as f64 * 1.01, "{ax} {n}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn relays_suppress_noise_beyond_crossover(n in 1usize..=8, extra in 0.5..20.0f64) {
        let ax = crossover_alpha_x(n, ETA) + extra;
        let with = chain::run_chain(&ChainConfig::from_alpha_x(ax, n)).unwrap();
        let without = chain::run_chain(&ChainConfig::from_alpha_x(ax, 0)).unwrap();
        prop_assert!(with.p_n < without.p_n);
    }

    #[test]
    fn snr_decreases_with_range(n in 0usize..=16, a in 0.0..40.0f64, d in 0.01..5.0f64) {
        prop_assert!(snr_n_relays(a + d, n, ETA, PD).unwrap() < snr_n_relays(a, n, ETA, PD).unwrap());
    }

    #[test]
    fn qber_bounded(s in 0.0..1e9f64) {
        let q = qber_from_snr(s).unwrap();
        prop_assert!(q > 0.0 && q <= 0.5);
    }
}
