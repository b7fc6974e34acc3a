use serde::Serialize;

use super::{default_burn_in, run, ChainState, Dynamics, Sampler};
use crate::error::Result;
use crate::ising::{MomentFunction, SpinConfiguration};
use crate::rng::StreamRng;
use crate::stats::{BatchAccumulator, Estimate};

pub const DEFAULT_BATCHES: usize = 30;

/// Burn-in, sample count and spacing (all in single-site updates) for an
/// estimator run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Budget {
    pub burn_in: u64,
    pub samples: usize,
    pub thin: u64,
    pub batches: usize,
}

impl Budget {
    /// Default burn-in, one sample per sweep, 30 batches.
    pub fn new(n: usize, samples: usize) -> Self {
        Budget {
            burn_in: default_burn_in(n),
            samples,
            thin: n as u64,
            batches: DEFAULT_BATCHES,
        }
    }

    pub fn with_thin(mut self, thin: u64) -> Self {
        self.thin = thin.max(1);
        self
    }

    pub fn with_burn_in(mut self, burn_in: u64) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn with_batches(mut self, batches: usize) -> Self {
        self.batches = batches.max(2);
        self
    }
}

fn sample_path(
    dynamics: &Dynamics,
    sampler: Sampler,
    budget: &Budget,
    start: SpinConfiguration,
    rng: StreamRng,
    mut observe: impl FnMut(&ChainState),
) -> Result<()> {
    let mut state = ChainState::new(dynamics, start, rng)?;
    run(dynamics, &mut state, budget.burn_in, sampler)?;
    for _ in 0..budget.samples {
        run(dynamics, &mut state, budget.thin, sampler)?;
        observe(&state);
    }
    Ok(())
}

/// Batch-mean estimates of `rho_R = E prod_{i in R} x^i` for every subset of
/// a moment function.
#[derive(Debug, Clone, Serialize)]
pub struct MomentEstimate {
    /// `batch_means[b][r]`: mean of the product over subset `r` in batch `b`.
    pub batch_means: Vec<Vec<f64>>,
    pub per_subset: Vec<Estimate>,
    /// Estimate of `E f`.
    pub function_value: Estimate,
}

/// Estimate every `k`-point moment of `f`'s subsets. For `k` even the
/// restricted sampler targets the same moments as the plain chain.
pub fn estimate_moments(
    dynamics: &Dynamics,
    f: &MomentFunction,
    sampler: Sampler,
    budget: &Budget,
    start: SpinConfiguration,
    rng: StreamRng,
) -> Result<MomentEstimate> {
    let subsets = f.subsets();
    let m = subsets.len();
    let batches = budget.batches.clamp(1, budget.samples.max(1));
    let per_batch = (budget.samples / batches).max(1);
    let mut sums = vec![vec![0i64; m]; batches];
    let mut counts = vec![0usize; batches];
    let mut fvals = BatchAccumulator::new(budget.samples, batches);
    let norm = f.normalization();
    let signs = f.signs();
    let mut seen = 0usize;
    sample_path(dynamics, sampler, budget, start, rng, |st| {
        let b = (seen / per_batch).min(batches - 1);
        let x = st.spins();
        let row = &mut sums[b];
        let mut fx = 0i64;
        for (r, subset) in subsets.iter().enumerate() {
            let p = subset.iter().fold(1i64, |acc, &i| acc * x[i] as i64);
            row[r] += p;
            fx += signs[r] as i64 * p;
        }
        counts[b] += 1;
        fvals.push(fx as f64 * norm);
        seen += 1;
    })?;
    let batch_means: Vec<Vec<f64>> = sums
        .iter()
        .zip(&counts)
        .filter(|(_, &c)| c > 0)
        .map(|(row, &c)| row.iter().map(|&s| s as f64 / c as f64).collect())
        .collect();
    let per_subset = (0..m)
        .map(|r| {
            let col: Vec<f64> = batch_means.iter().map(|b| b[r]).collect();
            crate::stats::batch_estimate(&col)
        })
        .collect();
    Ok(MomentEstimate {
        batch_means,
        per_subset,
        function_value: fvals.estimate(),
    })
}

/// `D_SKL(pi_L; pi_M) = (E_L - E_M)[H_L - H_M]`, estimated from one chain
/// under each model. Both Hamiltonians are flip-symmetric, so the
/// restricted sampler may be used at low temperature.
pub fn estimate_skl(
    l: &Dynamics,
    m: &Dynamics,
    sampler: Sampler,
    budget: &Budget,
    start: SpinConfiguration,
    rng_l: StreamRng,
    rng_m: StreamRng,
) -> Result<Estimate> {
    let under = |own: &Dynamics, rng: StreamRng| -> Result<Estimate> {
        let mut acc = BatchAccumulator::new(budget.samples, budget.batches);
        sample_path(own, sampler, budget, start.clone(), rng, |st| {
            acc.push(l.energy_of(st.spins()) - m.energy_of(st.spins()));
        })?;
        Ok(acc.estimate())
    };
    let a = under(l, rng_l)?;
    let b = under(m, rng_m)?;
    Ok(Estimate::new(a.mean - b.mean, (a.se * a.se + b.se * b.se).sqrt()))
}

/// Empirical law of `m(x)` on the lattice `S_n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MagnetizationHistogram {
    pub n: usize,
    /// `counts[j]` is the number of samples with `m = -1 + 2j/n`.
    pub counts: Vec<u64>,
}

impl MagnetizationHistogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn value(&self, j: usize) -> f64 {
        crate::ising::lattice_point(j, self.n)
    }

    pub fn fraction_where(&self, pred: impl Fn(f64) -> bool) -> f64 {
        let hit: u64 = self
            .counts
            .iter()
            .enumerate()
            .filter(|(j, _)| pred(self.value(*j)))
            .map(|(_, &c)| c)
            .sum();
        hit as f64 / self.total().max(1) as f64
    }

    pub fn mean(&self) -> f64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(j, &c)| c as f64 * self.value(j))
            .sum::<f64>()
            / self.total().max(1) as f64
    }
}

pub fn magnetization_samples(
    dynamics: &Dynamics,
    sampler: Sampler,
    budget: &Budget,
    start: SpinConfiguration,
    rng: StreamRng,
) -> Result<MagnetizationHistogram> {
    let n = dynamics.n();
    let mut counts = vec![0u64; n + 1];
    sample_path(dynamics, sampler, budget, start, rng, |st| {
        counts[((st.sum() + n as i64) / 2) as usize] += 1;
    })?;
    Ok(MagnetizationHistogram { n, counts })
}

/// Visit frequencies of every state of `{-1, +1}^n`, indexed as in the exact
/// engine.
pub fn empirical_state_law(
    dynamics: &Dynamics,
    sampler: Sampler,
    budget: &Budget,
    start: SpinConfiguration,
    rng: StreamRng,
) -> Result<Vec<f64>> {
    let n = dynamics.n();
    let mut counts = vec![0u64; 1usize << n];
    sample_path(dynamics, sampler, budget, start, rng, |st| {
        let bits = st
            .spins()
            .iter()
            .enumerate()
            .fold(0usize, |b, (i, &s)| if s == 1 { b | 1 << i } else { b });
        counts[bits] += 1;
    })?;
    let total = budget.samples.max(1) as f64;
    Ok(counts.into_iter().map(|c| c as f64 / total).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::InteractionMatrix;
    use crate::rng;

    #[test]
    fn independent_spins_have_zero_moments() {
        let n = 12;
        let dynamics = Dynamics::new(&InteractionMatrix::zeros(n));
        let f = MomentFunction::all_plus(n, 2, &mut rng::stream(0, "f", 0)).unwrap();
        let est = estimate_moments(
            &dynamics,
            &f,
            Sampler::Plain,
            &Budget::new(n, 20_000),
            SpinConfiguration::all_plus(n),
            rng::stream(0, "chain", 0),
        )
        .unwrap();
        for e in &est.per_subset {
            assert!(e.within(0.0, 4.0), "{e:?}");
        }
    }

    #[test]
    fn binomial_histogram_at_zero_coupling() {
        let n = 10;
        let dynamics = Dynamics::new(&InteractionMatrix::zeros(n));
        let samples = 50_000;
        let h = magnetization_samples(
            &dynamics,
            Sampler::Plain,
            &Budget::new(n, samples).with_thin(3 * n as u64),
            SpinConfiguration::all_plus(n),
            rng::stream(1, "hist", 0),
        )
        .unwrap();
        let mut chi2 = 0.0;
        for j in 0..=n {
            let p = crate::ising::binomial(n as u64, j as u64) / 1024.0;
            let e = p * samples as f64;
            chi2 += (h.counts[j] as f64 - e).powi(2) / e;
        }
        // 10 degrees of freedom; the 0.999 quantile is 29.6.
        assert!(chi2 < 29.6, "chi2 = {chi2}");
    }

    #[test]
    fn skl_vanishes_for_identical_models() {
        let j = InteractionMatrix::curie_weiss(16, 0.5);
        let d = Dynamics::new(&j);
        let e = estimate_skl(
            &d,
            &d,
            Sampler::Plain,
            &Budget::new(16, 2000),
            SpinConfiguration::all_plus(16),
            rng::stream(2, "l", 0),
            rng::stream(2, "m", 0),
        )
        .unwrap();
        assert_eq!(e.mean, 0.0);
    }
}
