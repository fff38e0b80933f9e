use heatlab_core::{hill_estimate, sample_traps, volume, Window};
use proptest::prelude::*;

#[test]
fn tail_fraction_matches_pareto_law() {
    let env = sample_traps(2.0, Window::symmetric(100_000), 17).unwrap();
    let n = env.taus().len() as f64;
    let frac = env.taus().iter().filter(|&&t| t > 2.0).count() as f64 / n;
    let se = (0.25 * 0.75 / n).sqrt();
    assert!((frac - 0.25).abs() < 3.0 * se, "{frac}");
}

#[test]
fn volume_obeys_law_of_large_numbers() {
    let env = sample_traps(2.0, Window::symmetric(100_000), 23).unwrap();
    let n = 100_000u64;
    let sites = (2 * n + 1) as f64;
    let mean = volume(&env, 0, n).unwrap() / sites;
    let var = env.taus().iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (sites - 1.0);
    let se = (var / sites).sqrt();
    assert!((mean - 2.0).abs() < 3.0 * se, "mean {mean} se {se}");
}

#[test]
fn hill_recovers_injected_index() {
    for (alpha, lo, hi) in [(1.0, 0.9, 1.1), (3.0, 2.7, 3.3)] {
        let env = sample_traps(alpha, Window::symmetric(100_000), 5).unwrap();
        let est = hill_estimate(&env, 2000).unwrap();
        assert!(est >= lo && est <= hi, "alpha {alpha}: {est}");
    }
}

proptest! {
    #[test]
    fn depths_are_prefix_stable(alpha in 0.1f64..5.0, seed in any::<u64>(), k in 1usize..40, extra in 1usize..40) {
        let small = sample_traps(alpha, Window::symmetric(k), seed).unwrap();
        let large = sample_traps(alpha, Window::symmetric(k + extra), seed).unwrap();
        for x in -(k as i64)..=k as i64 {
            prop_assert_eq!(small.tau(x).unwrap().to_bits(), large.tau(x).unwrap().to_bits());
        }
        prop_assert!(large.taus().iter().all(|&t| t >= 1.0 && t.is_finite()));
    }

    #[test]
    fn volume_is_additive(alpha in 0.2f64..3.0, seed in any::<u64>(), x in -20i64..20, n in 0u64..20) {
        let env = sample_traps(alpha, Window::symmetric(50), seed).unwrap();
        let inner = volume(&env, x, n).unwrap();
        let outer = volume(&env, x, n + 1).unwrap();
        let added = env.tau(x - n as i64 - 1).unwrap() + env.tau(x + n as i64 + 1).unwrap();
        prop_assert!((outer - inner - added).abs() <= 1e-9 * outer);
    }
}
