use rayon::prelude::*;
use serde::Serialize;

use super::{coupled_run, ChainState, CoupledPair, CouplingMode, Dynamics, Sampler};
use crate::error::{Error, Result};
use crate::ising::{lattice_index, InteractionMatrix, SpinConfiguration};
use crate::rng;
use crate::stats::{iid_estimate, Estimate};

/// Constants of the low-temperature Curie-Weiss drift `g(s) = tanh(beta s) - s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractionProfile {
    pub beta: f64,
    /// Positive root of `tanh(beta s) = s`.
    pub m_star: f64,
    /// `-g'(m*) = 1 - beta (1 - m*^2)`.
    pub gamma_star: f64,
    /// `g'(s1) = -0.6 gamma*`.
    pub s1: f64,
    /// `g'(s2) = -0.8 gamma*`.
    pub s2: f64,
}

impl ContractionProfile {
    /// `g'(s) = beta sech^2(beta s) - 1`.
    pub fn g_prime(&self, s: f64) -> f64 {
        let c = (self.beta * s).cosh();
        self.beta / (c * c) - 1.0
    }

    /// `1 - gamma* (n - 1) / (2 n^2)`.
    pub fn rho(&self, n: usize) -> f64 {
        let n = n as f64;
        1.0 - self.gamma_star * (n - 1.0) / (2.0 * n * n)
    }

    /// `4 / gamma*`, the high-magnetization bound on `|Delta_i h|`.
    pub fn delta_h_bound(&self) -> f64 {
        4.0 / self.gamma_star
    }
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn contraction_profile(beta: f64) -> Result<ContractionProfile> {
    if !(beta > 1.0) || !beta.is_finite() {
        return Err(Error::NoPositiveRoot(beta));
    }
    let m_star = bisect(1e-6, 1.0, |s| (beta * s).tanh() - s);
    let gamma_star = 1.0 - beta * (1.0 - m_star * m_star);
    let partial = ContractionProfile {
        beta,
        m_star,
        gamma_star,
        s1: 0.0,
        s2: 0.0,
    };
    // g' decreases on (0, m*) from beta - 1 to -gamma*.
    let s1 = bisect(0.0, m_star, |s| partial.g_prime(s) + 0.6 * gamma_star);
    let s2 = bisect(0.0, m_star, |s| partial.g_prime(s) + 0.8 * gamma_star);
    Ok(ContractionProfile { s1, s2, ..partial })
}

#[derive(Debug, Clone, Serialize)]
pub struct ContractionRow {
    pub t: u64,
    /// `E[(m(X_t) - m(Y_t)) 1{t <= tau1}]`.
    pub mean_diff: Estimate,
    /// `(2/n) rho^t`.
    pub bound: f64,
    pub pass: bool,
}

/// Monotone pairs of restricted Curie-Weiss chains started at adjacent
/// states with `m(x0) = <s2> + 2/n`; checks the stopped magnetization gap
/// against `(2/n) rho^t` at each checkpoint, with a 3 SE allowance.
pub fn contraction_check(
    n: usize,
    profile: &ContractionProfile,
    checkpoints: &[u64],
    trials: usize,
    seed: u64,
) -> Result<Vec<ContractionRow>> {
    let dynamics = Dynamics::new(&InteractionMatrix::curie_weiss(n, profile.beta));
    let j = lattice_index(profile.s2, n) + 1;
    let plus = j.min(n);
    let mut sorted = checkpoints.to_vec();
    sorted.sort_unstable();
    let per_trial: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<Vec<f64>> {
            let mut start_rng = rng::stream(seed, "contraction_start", trial as u64);
            let x0 = SpinConfiguration::random_with_plus_count(n, plus, &mut start_rng);
            let site = x0.spins().iter().position(|&s| s == 1).expect("x0 has a plus spin");
            let y0 = x0.with_spin(site, -1);
            let mut pair = CoupledPair::new(
                &dynamics,
                x0,
                y0,
                CouplingMode::Composite,
                Sampler::Restricted,
                Some(profile),
                rng::stream(seed, "contraction_pair", trial as u64),
            )?;
            let mut out = Vec::with_capacity(sorted.len());
            for &t in &sorted {
                let remaining = t - pair.step();
                coupled_run(&dynamics, &mut pair, remaining)?;
                let stopped = pair.tau1().is_some_and(|tau| tau < t);
                let diff = if stopped {
                    0.0
                } else {
                    pair.x.magnetization() - pair.y.magnetization()
                };
                out.push(diff);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let rho = profile.rho(n);
    Ok(sorted
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let col: Vec<f64> = per_trial.iter().map(|r| r[k]).collect();
            let est = iid_estimate(&col);
            let bound = 2.0 / n as f64 * rho.powf(t as f64);
            ContractionRow {
                t,
                pass: est.mean <= bound + 3.0 * est.se + 1e-15,
                mean_diff: est,
                bound,
            }
        })
        .collect())
}

/// Monte Carlo estimate of `P(tau1 < K)` for the restricted Curie-Weiss
/// chain started from magnetization `<s2>`.
pub fn escape_probability(n: usize, profile: &ContractionProfile, k: u64, trials: usize, seed: u64) -> Result<Estimate> {
    let dynamics = Dynamics::new(&InteractionMatrix::curie_weiss(n, profile.beta));
    let start_plus = lattice_index(profile.s2, n);
    let target = 2 * lattice_index(profile.s1, n) as i64 - n as i64;
    let hits: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<f64> {
            let mut r = rng::stream(seed, "escape_start", trial as u64);
            let y0 = SpinConfiguration::random_with_plus_count(n, start_plus, &mut r);
            let mut st = ChainState::new(&dynamics, y0, rng::stream(seed, "escape", trial as u64))?;
            for _ in 0..k {
                if st.sum() == target {
                    return Ok(1.0);
                }
                super::restricted_run(&dynamics, &mut st, 1)?;
            }
            Ok(0.0)
        })
        .collect::<Result<_>>()?;
    Ok(iid_estimate(&hits))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_at_1_2() {
        let p = contraction_profile(1.2).unwrap();
        assert!(((1.2 * p.m_star).tanh() - p.m_star).abs() <= 1e-12);
        assert!((p.m_star - 0.658569660405754).abs() < 1e-10);
        assert!((p.gamma_star - 0.3204567971283402).abs() < 1e-10);
        assert!((p.gamma_star - (1.0 - 1.2 * (1.0 - p.m_star * p.m_star))).abs() < 1e-15);
    }

    #[test]
    fn ordering_across_beta() {
        for beta in [1.05, 1.2, 1.5, 2.0, 3.0] {
            let p = contraction_profile(beta).unwrap();
            assert!(p.gamma_star > 0.0);
            assert!(p.g_prime(p.s2) < p.g_prime(p.s1));
            assert!(p.g_prime(p.s1) < -p.gamma_star / 2.0);
            assert!(0.0 < p.s1 && p.s1 < p.s2 && p.s2 < p.m_star, "beta={beta} {p:?}");
            for n in [2, 10, 1000] {
                let r = p.rho(n);
                assert!(r > 0.0 && r < 1.0);
            }
        }
    }

    #[test]
    fn near_critical_limit() {
        let p = contraction_profile(1.0001).unwrap();
        assert!(p.m_star < 0.03);
        assert!(p.gamma_star < 1e-3);
        assert!(matches!(contraction_profile(1.0), Err(Error::NoPositiveRoot(_))));
        assert!(contraction_profile(0.5).is_err());
    }
}
