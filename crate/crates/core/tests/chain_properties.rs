use proptest::prelude::*;
use qrelay::analytics::{analytic_positions, ChainConfig};
use qrelay::chain::*;
use qrelay::qnd::{DarkCountGating, QndChannelParams};
use qrelay::sample::{sample_chain, sample_chain_at};

fn event_state() -> impl Strategy<Value = ChannelEventState> {
    prop::array::uniform4(0.0..1.0f64)
        .prop_filter("nonzero", |w| w.iter().sum::<f64>() > 1e-3)
        .prop_map(|w| {
            let t: f64 = w.iter().sum();
            ChannelEventState {
                p_sig: w[0] / t,
                p_rnd: w[1] / t,
                p_empty: w[2] / t,
                p_nogate: w[3] / t,
            }
        })
}

fn sorted_positions(n: usize, x: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..=1.0f64, n).prop_map(move |mut v| {
        v.sort_by(f64::total_cmp);
        v.into_iter().map(|u| u * x).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn maps_are_stochastic(
        s in event_state(),
        ax in 0.0..30.0f64,
        eta in 0.01..0.99f64,
        pd in 0.0..5e-3f64,
        on_failure in any::<bool>(),
    ) {
        let gating = if on_failure { DarkCountGating::OnFailure } else { DarkCountGating::Unconditional };
        let params = QndChannelParams::new(eta, pd).unwrap();
        let seg = propagate_segment(&s, ax).unwrap();
        prop_assert!((seg.total() - 1.0).abs() < 1e-12);
        prop_assert!(seg.validate().is_ok());
        let relay = apply_relay_with(&s, &params, gating).unwrap();
        prop_assert!((relay.total() - 1.0).abs() < 1e-12);
        prop_assert!(relay.validate().is_ok());
        prop_assert!(relay.p_nogate >= s.p_nogate);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn vetoes_accumulate_along_the_chain(n in 0usize..6, ax in 0.0..40.0f64, seed in 0.0..1.0f64) {
        let cfg = ChainConfig::from_alpha_x(ax, n);
        let x = cfg.distance_km;
        let positions: Vec<f64> = (1..=n).map(|k| x * (k as f64 - 1.0 + seed) / n as f64).collect();
        let trace = chain_states(&cfg, &positions).unwrap();
        for w in trace.windows(2) {
            prop_assert!(w[1].p_nogate >= w[0].p_nogate);
        }
    }

    #[test]
    fn any_placement_is_valid(positions in sorted_positions(3, 500.0)) {
        let cfg = ChainConfig::new(500.0, 3);
        let r = run_chain_at(&cfg, &positions).unwrap();
        prop_assert!(r.p_s >= 0.0 && r.p_n > 0.0);
        prop_assert!(r.q_b > 0.0 && r.q_b <= 0.5);
        prop_assert!(exact_noise(&cfg, &analytic_positions(&cfg)) <= r.p_n * (1.0 + 1e-9));
    }

    #[test]
    fn segments_compose(a in 0.0..20.0f64, b in 0.0..20.0f64, s in event_state()) {
        let two = propagate_segment(&propagate_segment(&s, a).unwrap(), b).unwrap();
        let one = propagate_segment(&s, a + b).unwrap();
        for (x, y) in two.as_array().iter().zip(one.as_array()) {
            prop_assert!((x - y).abs() < 1e-14);
        }
    }
}

/// Pearson statistic of sampled receiver categories against the exact
/// distribution.
fn chi_squared(observed: [u64; 4], expected: [f64; 4], n: u64) -> (f64, usize) {
    let mut chi2 = 0.0;
    let mut cells = 0;
    for (o, p) in observed.iter().zip(expected) {
        if p > 0.0 {
            let e = p * n as f64;
            chi2 += (*o as f64 - e).powi(2) / e;
            cells += 1;
        } else {
            assert_eq!(*o, 0, "sampled an impossible category");
        }
    }
    (chi2, cells - 1)
}

#[test]
fn sampled_categories_follow_exact_distribution() {
    // Chi-squared critical values at p = 0.001 for 1..3 degrees of freedom.
    let critical = [10.83, 13.82, 16.27];
    for (ax, n, seed) in [(1.0, 0, 1u64), (2.0, 1, 2), (3.0, 2, 3), (1.5, 3, 4)] {
        let cfg = ChainConfig::from_alpha_x(ax, n).with_p_dark(1e-2);
        let positions = analytic_positions(&cfg);
        let trials = 2_000_000;
        let sampled = sample_chain_at(&cfg, &positions, trials, seed).unwrap();
        let exact = chain_states(&cfg, &positions).unwrap();
        let (chi2, dof) = chi_squared(sampled.categories, exact.last().unwrap().as_array(), trials);
        assert!(chi2 < critical[dof - 1], "alpha_x={ax} N={n}: chi2={chi2} dof={dof}");
        let report = run_chain_at(&cfg, &positions).unwrap();
        assert!(sampled.agrees_with(&report, 4.0), "{sampled:?} vs {report:?}");
    }
}

#[test]
fn sampling_does_not_depend_on_thread_count() {
    let cfg = ChainConfig::from_alpha_x(2.0, 2).with_p_dark(1e-3);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sample_chain(&cfg, 500_000, 99).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(8));
}
