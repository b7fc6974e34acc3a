use proptest::prelude::*;
use stein_ising::exact::{glauber_kernel, stein_report, ExactDistribution, EXACT_SLACK};
use stein_ising::graphs::{interaction_from_graph, random_regular, spectral_deviation, spectral_report, Scale};
use stein_ising::{rng, BirthDeathChain, InteractionMatrix, KernelFlavor};

fn matrix(n: usize, scale: f64, seed: u64) -> InteractionMatrix {
    InteractionMatrix::random_symmetric(n, scale, &mut rng::stream(seed, "prop_matrix", n as u64))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn comparison_inequality_holds(n in 3usize..7, s1 in 0.0f64..0.8, s2 in 0.0f64..0.8, seed in any::<u64>()) {
        let l = matrix(n, s1, seed);
        let m = matrix(n, s2, seed ^ 1);
        let f: Vec<f64> = (0..1usize << n).map(|s| ((s as f64) * 0.37 + seed as f64).sin()).collect();
        let r = stein_report(&l, &m, &f, KernelFlavor::Plain).unwrap();
        prop_assert!(r.lhs <= r.rhs_main + EXACT_SLACK);
    }

    #[test]
    fn restricted_kernel_preserves_total_mass(n in 2usize..8, scale in 0.0f64..1.0, seed in any::<u64>()) {
        let j = matrix(n, scale, seed);
        let k = glauber_kernel(&j, KernelFlavor::Restricted).unwrap();
        prop_assert!(k.max_row_sum_error() < 1e-13);
        let st = k.stationary().unwrap();
        let total: f64 = st.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let mu = ExactDistribution::new(&j).unwrap();
        let moved = k.apply_left(&mu.on_kernel(&k));
        let drift: f64 = moved.iter().sum::<f64>() - 1.0;
        prop_assert!(drift.abs() < 1e-12);
    }

    #[test]
    fn hitting_probability_is_monotone(r in 3usize..30, alpha in 0.05f64..0.95) {
        let chain = BirthDeathChain::new(r, alpha).unwrap();
        let p: Vec<f64> = (0..r).map(|m| chain.hitting_probability(m).unwrap()).collect();
        prop_assert!(p[0].abs() < 1e-15 && (p[r - 1] - 1.0).abs() < 1e-12);
        prop_assert!(p.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn deviation_within_expansion_bound(half in 8usize..40, d in 3usize..7, beta in 0.1f64..2.0, seed in any::<u64>()) {
        let n = 2 * half;
        let g = random_regular(n, d, seed).unwrap();
        let eps = spectral_report(&g).unwrap().epsilon;
        let dev = spectral_deviation(&InteractionMatrix::curie_weiss(n, beta), &interaction_from_graph(&g, beta, Scale::PerD).unwrap()).unwrap();
        prop_assert!(dev <= beta * (eps + 1.0 / n as f64) + 1e-9);
    }
}
