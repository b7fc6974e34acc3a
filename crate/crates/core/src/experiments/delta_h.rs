use super::{ExperimentConfig, ExperimentReport, Table};
use crate::error::Result;
use crate::exact::{glauber_kernel, solve_poisson, state_function, ExactDistribution, KernelFlavor};
use crate::ising::{lattice_index, lattice_point, InteractionMatrix, MomentFunction};
use crate::mcmc::{birth_death_hitting, contraction_profile, escape_probability, MagnetizationChain};
use crate::report::Verdict;
use crate::rng;

/// Largest `|Delta_i h|` inside and outside the high-magnetization region
/// `|m(x)| >= <s2> + 2/n`; the lifted solution is flip-symmetric, so
/// `Delta_i h(-x) = -Delta_i h(x)` and both signs of `m` are included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaHProfile {
    /// Smallest positive magnetization of the region.
    pub region_start: f64,
    pub max_in_region: f64,
    pub max_outside: f64,
    pub residual_norm: f64,
}

/// Exact `Delta_i(h_hat)` for the restricted Curie-Weiss chain, lifted to
/// all of `Omega` by `h(x) = h_hat(-x)`.
pub fn delta_h_profile(n: usize, beta: f64, f: &[f64]) -> Result<DeltaHProfile> {
    let profile = contraction_profile(beta)?;
    let j = InteractionMatrix::curie_weiss(n, beta);
    let kernel = glauber_kernel(&j, KernelFlavor::Restricted)?;
    let pi = ExactDistribution::new(&j)?.on_kernel(&kernel);
    let local: Vec<f64> = kernel.states().iter().map(|&s| f[s]).collect();
    let sol = solve_poisson(&kernel, &pi, &local)?;
    let h = sol.lift(&kernel);
    let min_plus = lattice_index(profile.s2, n) + 1;
    let (mut inside, mut outside) = (0.0f64, 0.0f64);
    for s in 0..(1usize << n) {
        let plus = s.count_ones() as usize;
        for i in 0..n {
            let d = (h[s | 1 << i] - h[s & !(1 << i)]).abs();
            if plus >= min_plus || plus <= n - min_plus {
                inside = inside.max(d);
            } else {
                outside = outside.max(d);
            }
        }
    }
    Ok(DeltaHProfile {
        region_start: lattice_point(min_plus, n),
        max_in_region: inside,
        max_outside: outside,
        residual_norm: sol.residual_norm,
    })
}

/// Exact discrete derivatives at small `n`, the escape probability of the
/// restricted chain and the dominating walk's tail at larger `n`.
pub fn delta_h_study(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let profile = contraction_profile(cfg.beta)?;
    let (n, beta) = (cfg.n, cfg.beta);
    let fc = MomentFunction::with_policy(n, cfg.k, u64::MAX, cfg.subsets, &mut rng::stream(cfg.seed, "subsets", 0))?;
    let f = state_function(n, |x| fc.eval_spins(x.spins()));
    let dh = delta_h_profile(n, beta, &f)?;
    let bound = profile.delta_h_bound();
    let envelope = n as f64 * (n as f64).ln();

    let mut table = Table::new(&["quantity", "n", "value", "se", "reference"]);
    table.push(vec!["max_delta_h_region".into(), n.into(), dh.max_in_region.into(), 0.0.into(), bound.into()]);
    table.push(vec!["max_delta_h_outside".into(), n.into(), dh.max_outside.into(), 0.0.into(), envelope.into()]);
    let mut verdicts = vec![Verdict::upper("delta_h_region_bound", n, beta, dh.max_in_region, bound * (1.0 + cfg.slack), 0.0)];
    let mut notes = vec![
        ("region_start".to_string(), dh.region_start),
        ("delta_h_bound".to_string(), bound),
        ("outside_over_n_log_n".to_string(), dh.max_outside / envelope),
        ("poisson_residual".to_string(), dh.residual_norm),
    ];

    for &big in &cfg.n_list {
        let k = (big * big) as u64;
        let p = escape_probability(big, &profile, k, cfg.trials, rng::child_seed(cfg.seed, "escape", big as u64))?;
        table.push(vec!["escape_probability_n2".into(), big.into(), p.mean.into(), p.se.into(), cfg.threshold.into()]);
        verdicts.push(Verdict::upper(format!("escape_probability_n{big}"), big, beta, p.mean, cfg.threshold, 0.0).with_se(p.se));

        // The dominating walk needs odds ratio alpha < 1, which holds only
        // once the window drift beats the 1/n corrections.
        let chain = MagnetizationChain { n: big, beta };
        let alpha = chain.alpha(&profile);
        notes.push((format!("walk_alpha_n{big}"), alpha));
        if alpha >= 1.0 {
            continue;
        }
        let walk = chain.birth_death(&profile)?;
        notes.push((format!("walk_r_n{big}"), walk.r as f64));
        let ks = [big as u64, 4 * big as u64, k];
        let start = walk.r.saturating_sub(2).max(1);
        let hit = birth_death_hitting(&walk, start, cfg.trials, &ks, rng::child_seed(cfg.seed, "walk", big as u64))?;
        for row in &hit.tail {
            table.push(vec![
                format!("walk_tail_k{}", row.k).into(),
                big.into(),
                row.probability.mean.into(),
                row.probability.se.into(),
                row.envelope.into(),
            ]);
            verdicts.push(
                Verdict::upper(format!("walk_tail_n{big}_k{}", row.k), big, beta, row.probability.mean, row.envelope, cfg.sigma * row.probability.se)
                    .with_se(row.probability.se),
            );
        }
    }
    let mut report = ExperimentReport::new(cfg, table);
    report.verdicts = verdicts;
    report.notes = notes;
    Ok(report)
}
