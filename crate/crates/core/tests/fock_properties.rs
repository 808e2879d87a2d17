mod support;

use proptest::prelude::*;
use qrelay::fock::{apply_transform, enumerate_outcomes, BasisMode, LinearModeTransform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::*;

fn modes() -> Vec<BasisMode> {
    ["0", "a", "1"].into_iter().flat_map(|l| spatial(l).pair()).collect()
}

fn random_transform(rng: &mut ChaCha8Rng) -> LinearModeTransform {
    let modes = modes();
    LinearModeTransform::new(modes.clone(), random_unitary(modes.len(), rng)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn transforms_preserve_norm(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_transform(&mut rng);
        let s = random_state(&modes(), 3, &mut rng);
        let out = apply_transform(&s, &t).unwrap();
        prop_assert!((out.norm() - s.norm()).abs() < 1e-12);
    }

    #[test]
    fn transforms_conserve_photon_number(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_transform(&mut rng);
        let s = random_state(&modes(), 3, &mut rng);
        let before = s.photon_number_distribution();
        let after = apply_transform(&s, &t).unwrap().photon_number_distribution();
        for (n, p) in &before {
            prop_assert!((after.get(n).copied().unwrap_or(0.0) - p).abs() < 1e-12);
        }
    }

    #[test]
    fn composition_matches_sequential_application(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t1 = random_transform(&mut rng);
        let t2 = random_transform(&mut rng);
        let s = random_state(&modes(), 3, &mut rng);
        let sequential = apply_transform(&apply_transform(&s, &t1).unwrap(), &t2).unwrap();
        let composed = apply_transform(&s, &t1.then(&t2)).unwrap();
        prop_assert!(sequential.max_abs_diff(&composed) < 1e-12);
    }

    #[test]
    fn outcomes_are_complete(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_state(&modes(), 3, &mut rng);
        let measured = spatial("a").pair();
        let outcomes = enumerate_outcomes(&s, &measured).unwrap();
        let total: f64 = outcomes.iter().map(|o| o.probability).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        for o in &outcomes {
            prop_assert!(o.state.is_normalized());
        }
    }
}
