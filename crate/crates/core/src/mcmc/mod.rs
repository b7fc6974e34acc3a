//! Samplers and couplings for sizes beyond exact enumeration.

mod birth_death;
mod contraction;
mod coupling;
mod estimators;

pub use birth_death::{birth_death_hitting, BirthDeathChain, HittingReport, MagnetizationChain, TailRow};
pub use contraction::{contraction_check, contraction_profile, escape_probability, ContractionProfile, ContractionRow};
pub use coupling::{coalescence_time, coupled_run, CoupledPair, CouplingMode};
pub use estimators::{
    empirical_state_law, estimate_moments, estimate_skl, magnetization_samples, Budget, MagnetizationHistogram,
    MomentEstimate,
};

use rand::Rng;

use crate::error::{Error, Result};
use crate::ising::{InteractionMatrix, SpinConfiguration};
use crate::rng::StreamRng;

/// Local fields are recomputed from scratch after this many sweeps' worth
/// of incremental updates.
const REFRESH_SWEEPS: u64 = 1000;

#[derive(Debug, Clone)]
enum Kind {
    /// All off-diagonal couplings equal: fields follow from the spin sum.
    MeanField(f64),
    Sparse {
        offsets: Vec<usize>,
        cols: Vec<u32>,
        weights: Vec<f64>,
    },
}

/// Precomputed coupling structure of an Ising model for fast single-site
/// updates.
#[derive(Debug, Clone)]
pub struct Dynamics {
    n: usize,
    kind: Kind,
    ferromagnetic: bool,
}

impl Dynamics {
    pub fn new(j: &InteractionMatrix) -> Self {
        let n = j.n();
        let kind = match j.uniform_weight() {
            Some(w) => Kind::MeanField(w),
            None => {
                let mut offsets = vec![0];
                let mut cols = Vec::new();
                let mut weights = Vec::new();
                for i in 0..n {
                    for (c, w) in j.row_nonzeros(i) {
                        cols.push(c as u32);
                        weights.push(w);
                    }
                    offsets.push(cols.len());
                }
                Kind::Sparse { offsets, cols, weights }
            }
        };
        Dynamics {
            n,
            kind,
            ferromagnetic: j.is_ferromagnetic(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_ferromagnetic(&self) -> bool {
        self.ferromagnetic
    }

    pub fn is_mean_field(&self) -> bool {
        matches!(self.kind, Kind::MeanField(_))
    }

    fn exact_fields(&self, spins: &[i8]) -> Vec<f64> {
        match &self.kind {
            Kind::MeanField(_) => Vec::new(),
            Kind::Sparse { offsets, cols, weights } => (0..self.n)
                .map(|i| {
                    (offsets[i]..offsets[i + 1])
                        .map(|k| weights[k] * spins[cols[k] as usize] as f64)
                        .sum()
                })
                .collect(),
        }
    }

    /// `H(x) = x^T J x / 2` for an arbitrary configuration, from scratch.
    pub fn energy_of(&self, spins: &[i8]) -> f64 {
        match &self.kind {
            Kind::MeanField(w) => {
                let s: i64 = spins.iter().map(|&v| v as i64).sum();
                0.5 * w * ((s * s) as f64 - self.n as f64)
            }
            Kind::Sparse { .. } => {
                let h = self.exact_fields(spins);
                0.5 * spins.iter().zip(&h).map(|(&s, f)| s as f64 * f).sum::<f64>()
            }
        }
    }

    /// `H(x) = x^T J x / 2` for the chain's current state.
    pub fn energy(&self, state: &ChainState) -> f64 {
        match &self.kind {
            Kind::MeanField(w) => 0.5 * w * ((state.sum * state.sum) as f64 - self.n as f64),
            Kind::Sparse { .. } => {
                0.5 * state
                    .spins
                    .iter()
                    .zip(&state.fields)
                    .map(|(&s, h)| s as f64 * h)
                    .sum::<f64>()
            }
        }
    }
}

/// A single Glauber chain and its random stream.
#[derive(Debug, Clone)]
pub struct ChainState {
    spins: Vec<i8>,
    sum: i64,
    fields: Vec<f64>,
    step: u64,
    since_refresh: u64,
    rng: StreamRng,
}

impl ChainState {
    pub fn new(dynamics: &Dynamics, config: SpinConfiguration, rng: StreamRng) -> Result<Self> {
        if config.n() != dynamics.n {
            return Err(Error::DimensionMismatch {
                expected: dynamics.n,
                got: config.n(),
            });
        }
        let sum = config.sum();
        let spins = config.into_spins();
        Ok(ChainState {
            fields: dynamics.exact_fields(&spins),
            spins,
            sum,
            step: 0,
            since_refresh: 0,
            rng,
        })
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn config(&self) -> SpinConfiguration {
        SpinConfiguration::new(self.spins.clone()).expect("chain spins are +-1")
    }

    pub fn sum(&self) -> i64 {
        self.sum
    }

    pub fn magnetization(&self) -> f64 {
        self.sum as f64 / self.spins.len() as f64
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn rng_mut(&mut self) -> &mut StreamRng {
        &mut self.rng
    }

    #[inline]
    pub(crate) fn field(&self, dynamics: &Dynamics, i: usize) -> f64 {
        match &dynamics.kind {
            Kind::MeanField(w) => w * (self.sum - self.spins[i] as i64) as f64,
            Kind::Sparse { .. } => self.fields[i],
        }
    }

    #[inline]
    pub(crate) fn set_spin(&mut self, dynamics: &Dynamics, i: usize, s: i8) {
        if self.spins[i] == s {
            return;
        }
        self.spins[i] = s;
        self.sum += 2 * s as i64;
        if let Kind::Sparse { offsets, cols, weights } = &dynamics.kind {
            let delta = 2.0 * s as f64;
            for k in offsets[i]..offsets[i + 1] {
                self.fields[cols[k] as usize] += delta * weights[k];
            }
        }
    }

    pub(crate) fn global_flip(&mut self) {
        self.spins.iter_mut().for_each(|s| *s = -*s);
        self.sum = -self.sum;
        self.fields.iter_mut().for_each(|h| *h = -*h);
    }

    /// Heat-bath update of site `i` driven by the uniform `u`:
    /// the spin becomes `+1` iff `u < (1 + tanh(J_i^T x)) / 2`. Returns
    /// whether a restricted chain had to flip globally.
    #[inline]
    pub(crate) fn heat_bath(&mut self, dynamics: &Dynamics, i: usize, u: f64, restricted: bool) -> bool {
        let p = 0.5 * (1.0 + self.field(dynamics, i).tanh());
        self.set_spin(dynamics, i, if u < p { 1 } else { -1 });
        let flip = restricted && self.sum < 0;
        if flip {
            self.global_flip();
        }
        self.step += 1;
        self.since_refresh += 1;
        if !self.fields.is_empty() && self.since_refresh >= REFRESH_SWEEPS * dynamics.n as u64 {
            self.fields = dynamics.exact_fields(&self.spins);
            self.since_refresh = 0;
        }
        flip
    }

    fn advance(&mut self, dynamics: &Dynamics, steps: u64, restricted: bool) {
        let n = dynamics.n;
        for _ in 0..steps {
            let i = self.rng.random_range(0..n);
            let u: f64 = self.rng.random();
            self.heat_bath(dynamics, i, u, restricted);
        }
    }
}

/// Which chain a sampler runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampler {
    Plain,
    /// Confined to `sum x >= 0` by global flips; its law is the positive
    /// phase `mu+`, which agrees with `mu` on flip-symmetric functions.
    Restricted,
}

/// Advance a plain Glauber chain by `steps` single-site updates.
pub fn glauber_run(dynamics: &Dynamics, state: &mut ChainState, steps: u64) {
    state.advance(dynamics, steps, false);
}

/// Advance the restricted chain; the state must start in `sum x >= 0`.
pub fn restricted_run(dynamics: &Dynamics, state: &mut ChainState, steps: u64) -> Result<()> {
    if state.sum < 0 {
        return Err(Error::OutsidePositivePhase(state.sum));
    }
    state.advance(dynamics, steps, true);
    Ok(())
}

pub fn run(dynamics: &Dynamics, state: &mut ChainState, steps: u64, sampler: Sampler) -> Result<()> {
    match sampler {
        Sampler::Plain => {
            glauber_run(dynamics, state, steps);
            Ok(())
        }
        Sampler::Restricted => restricted_run(dynamics, state, steps),
    }
}

/// `20 n ceil(ln n)` single-site updates.
pub fn default_burn_in(n: usize) -> u64 {
    20 * n as u64 * (n.max(2) as f64).ln().ceil() as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn zero_coupling_site_means_vanish() {
        let j = InteractionMatrix::zeros(10);
        let dynamics = Dynamics::new(&j);
        let mut st = ChainState::new(&dynamics, SpinConfiguration::all_plus(10), rng::stream(1, "t", 0)).unwrap();
        glauber_run(&dynamics, &mut st, 1000);
        let mut sum = 0.0;
        let steps = 100_000;
        for _ in 0..steps {
            glauber_run(&dynamics, &mut st, 1);
            sum += st.spins()[3] as f64;
        }
        // Successive values of one site are correlated over ~n steps.
        let se = (10.0 / steps as f64).sqrt() * 1.5;
        assert!((sum / steps as f64).abs() < 3.0 * se);
    }

    #[test]
    fn same_seed_same_trajectory() {
        let j = InteractionMatrix::from_entries(6, [(0, 1, 0.5), (2, 3, -0.2), (1, 5, 0.9)]).unwrap();
        let dynamics = Dynamics::new(&j);
        let make = || ChainState::new(&dynamics, SpinConfiguration::all_plus(6), rng::stream(9, "t", 2)).unwrap();
        let (mut a, mut b) = (make(), make());
        glauber_run(&dynamics, &mut a, 5000);
        glauber_run(&dynamics, &mut b, 5000);
        assert_eq!(a.spins(), b.spins());
        assert_eq!(a.step(), 5000);
    }

    #[test]
    fn restricted_never_negative() {
        let j = InteractionMatrix::curie_weiss(9, 0.3);
        let dynamics = Dynamics::new(&j);
        let mut st = ChainState::new(&dynamics, SpinConfiguration::all_plus(9), rng::stream(3, "t", 0)).unwrap();
        for _ in 0..10_000 {
            restricted_run(&dynamics, &mut st, 1).unwrap();
            assert!(st.sum() >= 0);
        }
        let neg = SpinConfiguration::new(vec![-1; 9]).unwrap();
        let mut bad = ChainState::new(&dynamics, neg, rng::stream(3, "t", 1)).unwrap();
        assert!(restricted_run(&dynamics, &mut bad, 1).is_err());
    }

    #[test]
    fn incremental_fields_match_exact() {
        let j = InteractionMatrix::from_entries(8, (0..7).map(|i| (i, i + 1, 0.3 + 0.1 * i as f64))).unwrap();
        let dynamics = Dynamics::new(&j);
        let mut st = ChainState::new(&dynamics, SpinConfiguration::all_plus(8), rng::stream(4, "t", 0)).unwrap();
        glauber_run(&dynamics, &mut st, 777);
        let exact = dynamics.exact_fields(st.spins());
        for i in 0..8 {
            assert!((st.field(&dynamics, i) - exact[i]).abs() < 1e-12);
            assert!((st.field(&dynamics, i) - j.local_field(i, st.spins())).abs() < 1e-12);
        }
        let h = crate::ising::hamiltonian(&j, &st.config()).unwrap();
        assert!((dynamics.energy(&st) - h).abs() < 1e-12);
    }
}
