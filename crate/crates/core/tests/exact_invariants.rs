use stein_ising::exact::{
    glauber_kernel, magnetization_function, naive_spread, self_check, solve_poisson, state_function, symmetric_solution_gap, ExactDistribution,
};
use stein_ising::{InteractionMatrix, KernelFlavor};

#[test]
fn plain_kernel_is_reversible_and_stochastic() {
    for beta in [0.3, 1.0, 1.8] {
        let j = InteractionMatrix::curie_weiss(6, beta);
        let mu = ExactDistribution::new(&j).unwrap();
        let kernel = glauber_kernel(&j, KernelFlavor::Plain).unwrap();
        assert!(kernel.max_row_sum_error() < 1e-14);
        assert!(kernel.detailed_balance_error(mu.probs()) < 1e-15);
        let moved = kernel.apply_left(mu.probs());
        let gap = moved.iter().zip(mu.probs()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(gap < 1e-15);
    }
}

#[test]
fn magnetization_has_zero_mean_and_centred_solution() {
    let j = InteractionMatrix::curie_weiss(7, 0.8);
    let mu = ExactDistribution::new(&j).unwrap();
    let f = magnetization_function(7);
    assert!(mu.expect(&f).abs() < 1e-14);
    let kernel = glauber_kernel(&j, KernelFlavor::Plain).unwrap();
    let sol = solve_poisson(&kernel, mu.probs(), &f).unwrap();
    assert!(sol.residual_norm < 1e-10);
    assert!(mu.expect(&sol.h).abs() < 1e-12);
}

#[test]
fn self_check_passes_across_temperatures() {
    for beta in [0.4, 1.2] {
        for v in self_check(6, beta, 10, 7).unwrap() {
            assert!(v.pass, "{}: {} vs {}", v.check_name, v.lhs, v.rhs);
        }
    }
}

#[test]
fn symmetric_solutions_agree_at_low_temperature() {
    let n = 8;
    let j = InteractionMatrix::curie_weiss(n, 1.5);
    let f = state_function(n, |x| x.magnetization().powi(2));
    assert!(symmetric_solution_gap(&j, &f).unwrap() < 1e-9);
}

#[test]
fn restricted_spread_grows_like_n_log_n() {
    // One constant fitted on the sweep must cover every size.
    let sizes = [6usize, 8, 10, 12];
    let spreads: Vec<f64> = sizes
        .iter()
        .map(|&n| {
            let j = InteractionMatrix::curie_weiss(n, 1.2);
            naive_spread(&j, &state_function(n, |x| x.magnetization().powi(2))).unwrap()
        })
        .collect();
    let scale: Vec<f64> = sizes.iter().map(|&n| n as f64 * (n as f64).ln()).collect();
    let c = spreads.iter().zip(&scale).map(|(s, w)| s * w).sum::<f64>() / scale.iter().map(|w| w * w).sum::<f64>();
    for (s, w) in spreads.iter().zip(&scale) {
        assert!(*s <= 1.5 * c * w, "spread {s} vs fitted {}", c * w);
    }
}
