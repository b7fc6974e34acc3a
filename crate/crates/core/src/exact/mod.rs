//! Exact enumeration of `{-1, +1}^n` for small `n`.
//!
//! States are indexed by bit pattern: bit `i` set means spin `i` is `+1`,
//! coordinate 0 is the least significant bit. State functions are plain
//! `Vec<f64>` indexed either over all of `Omega` or over a kernel's own state
//! space (see [`GlauberKernel::states`]).

mod checks;
mod kernel;
mod poisson;

pub use checks::{
    check_lipschitz, contractive_bound_check, naive_spread, self_check, skl_exact, spectral_lemma_check, stein_report, symmetric_solution_gap,
    wasserstein_pushforward, SklReport, SteinReport, EXACT_SLACK,
};
pub use kernel::{glauber_kernel, GlauberKernel, KernelFlavor};
pub use poisson::{discrete_derivative_field, solve_poisson, truncated_series, PoissonSolution, DENSE_SOLVE_MAX};

use crate::error::{Error, Result};
use crate::ising::{hamiltonian_spins, InteractionMatrix, SpinConfiguration};

pub const DEFAULT_EXACT_CAP: usize = 14;

pub(crate) fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap || n >= usize::BITS as usize - 1 {
        Err(Error::ExactCapExceeded { n, cap })
    } else {
        Ok(())
    }
}

pub(crate) fn spins_of(n: usize, s: usize) -> Vec<i8> {
    (0..n).map(|i| if s >> i & 1 == 1 { 1 } else { -1 }).collect()
}

pub(crate) fn spin_sum(n: usize, s: usize) -> i64 {
    2 * s.count_ones() as i64 - n as i64
}

pub(crate) fn complement(n: usize, s: usize) -> usize {
    !s & ((1usize << n) - 1)
}

/// Local fields `J_i^T x` for every state, flattened as `s * n + i`.
pub(crate) fn local_fields(j: &InteractionMatrix) -> Vec<f64> {
    let n = j.n();
    let mut out = Vec::with_capacity(n << n);
    for s in 0..(1usize << n) {
        let x = spins_of(n, s);
        for i in 0..n {
            out.push(j.local_field(i, &x));
        }
    }
    out
}

/// Evaluate `f` on every state of `Omega`.
pub fn state_function(n: usize, f: impl Fn(&SpinConfiguration) -> f64) -> Vec<f64> {
    (0..(1usize << n))
        .map(|s| f(&SpinConfiguration::from_bits(n, s)))
        .collect()
}

pub fn magnetization_function(n: usize) -> Vec<f64> {
    (0..(1usize << n)).map(|s| spin_sum(n, s) as f64 / n as f64).collect()
}

/// Enumerated Ising law `pi(x) ~ exp(H_J(x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactDistribution {
    n: usize,
    probs: Vec<f64>,
}

impl ExactDistribution {
    pub fn new(j: &InteractionMatrix) -> Result<Self> {
        Self::with_cap(j, DEFAULT_EXACT_CAP)
    }

    pub fn with_cap(j: &InteractionMatrix, cap: usize) -> Result<Self> {
        let n = j.n();
        check_cap(n, cap)?;
        let h: Vec<f64> = (0..(1usize << n))
            .map(|s| hamiltonian_spins(j, &spins_of(n, s)))
            .collect();
        let hmax = h.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = h.iter().map(|v| (v - hmax).exp()).collect();
        let z: f64 = w.iter().sum();
        Ok(ExactDistribution {
            n,
            probs: w.into_iter().map(|v| v / z).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn expect(&self, f: &[f64]) -> f64 {
        self.probs.iter().zip(f).map(|(p, v)| p * v).sum()
    }

    /// Probabilities on a kernel's state space: `pi` itself for the plain
    /// flavor, the positive-phase law `mu+` for the restricted one.
    pub fn on_kernel(&self, kernel: &GlauberKernel) -> Vec<f64> {
        kernel
            .states()
            .iter()
            .map(|&s| {
                let p = self.probs[s];
                match kernel.flavor() {
                    KernelFlavor::Plain => p,
                    KernelFlavor::Restricted => {
                        if spin_sum(self.n, s) > 0 {
                            2.0 * p
                        } else {
                            p
                        }
                    }
                }
            })
            .collect()
    }
}

/// Law of the magnetization under Curie-Weiss at any `n`, by lumping:
/// `P(m = -1 + 2k/n) ∝ C(n, k) exp(beta (S^2 - n) / (2n))` with `S = 2k - n`.
pub fn curie_weiss_magnetization_law(n: usize, beta: f64) -> Vec<f64> {
    let mut log_binom = vec![0.0; n + 1];
    for k in 1..=n {
        log_binom[k] = log_binom[k - 1] + ((n - k + 1) as f64).ln() - (k as f64).ln();
    }
    let logw: Vec<f64> = (0..=n)
        .map(|k| {
            let s = 2.0 * k as f64 - n as f64;
            log_binom[k] + beta * (s * s - n as f64) / (2.0 * n as f64)
        })
        .collect();
    let top = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logw.iter().map(|l| (l - top).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|v| v / z).collect()
}

pub fn exact_distribution(j: &InteractionMatrix) -> Result<ExactDistribution> {
    ExactDistribution::new(j)
}
