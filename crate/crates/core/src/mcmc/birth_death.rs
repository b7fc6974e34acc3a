use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::ContractionProfile;
use crate::error::{Error, Result};
use crate::ising::{lattice_index, lattice_point};
use crate::rng;
use crate::stats::{iid_estimate, Estimate};

/// Biased walk on `0..r` moving up with probability `p = 1/(1 + alpha)`.
/// At `0` it moves up with `p` and holds otherwise; at `r - 1` it moves
/// down with `1 - p` and holds otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BirthDeathChain {
    pub r: usize,
    pub alpha: f64,
}

impl BirthDeathChain {
    pub fn new(r: usize, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidAlpha(alpha));
        }
        if r < 2 {
            return Err(Error::InvalidStart { m: 0, r });
        }
        Ok(BirthDeathChain { r, alpha })
    }

    pub fn p(&self) -> f64 {
        1.0 / (1.0 + self.alpha)
    }

    /// `(state, probability)` transitions out of `m`.
    pub fn transitions(&self, m: usize) -> Vec<(usize, f64)> {
        let (up, down) = (self.p(), 1.0 - self.p());
        if m == 0 {
            vec![(1, up), (0, down)]
        } else if m == self.r - 1 {
            vec![(m - 1, down), (m, up)]
        } else {
            vec![(m + 1, up), (m - 1, down)]
        }
    }

    pub fn step<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> usize {
        let up = rng.random::<f64>() < self.p();
        match (m, up) {
            (0, false) => 0,
            (m, true) if m == self.r - 1 => m,
            (m, true) => m + 1,
            (m, false) => m - 1,
        }
    }

    /// `P_m = (alpha^m - 1) / (alpha^(r-1) - 1)`: probability of reaching
    /// `r - 1` before `0` from `m`.
    pub fn hitting_probability(&self, m: usize) -> Result<f64> {
        if m >= self.r {
            return Err(Error::InvalidStart { m, r: self.r });
        }
        Ok((self.alpha.powi(m as i32) - 1.0) / (self.alpha.powi(self.r as i32 - 1) - 1.0))
    }

    /// Whether the walk from `m` reaches `r - 1` before `0`.
    pub fn simulate_hit<R: Rng + ?Sized>(&self, mut m: usize, rng: &mut R) -> bool {
        loop {
            if m == 0 {
                return false;
            }
            if m == self.r - 1 {
                return true;
            }
            m = self.step(m, rng);
        }
    }

    /// First step at which the walk from `r - 2` visits `0`, if within `max`.
    pub fn escape_time<R: Rng + ?Sized>(&self, max: u64, rng: &mut R) -> Option<u64> {
        let mut m = self.r.saturating_sub(2);
        for t in 0..=max {
            if m == 0 {
                return Some(t);
            }
            m = self.step(m, rng);
        }
        None
    }

    /// `K^2 alpha^(r-2)`.
    pub fn tail_envelope(&self, k: u64) -> f64 {
        (k as f64).powi(2) * self.alpha.powi(self.r as i32 - 2)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TailRow {
    pub k: u64,
    pub probability: Estimate,
    pub envelope: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct HittingReport {
    pub m: usize,
    pub exact: f64,
    pub simulated: Estimate,
    pub tail: Vec<TailRow>,
}

impl HittingReport {
    pub fn agrees(&self, k: f64) -> bool {
        self.simulated.within(self.exact, k)
    }
}

/// Closed-form and simulated hitting probabilities from `m`, plus the tail
/// table `P(tau <= K)` against `K^2 alpha^(r-2)` for the walk from `r - 2`.
pub fn birth_death_hitting(chain: &BirthDeathChain, m: usize, runs: usize, ks: &[u64], seed: u64) -> Result<HittingReport> {
    let exact = chain.hitting_probability(m)?;
    let hits: Vec<f64> = (0..runs)
        .into_par_iter()
        .map(|k| {
            let mut r = rng::stream(seed, "birth_death_hit", k as u64);
            if chain.simulate_hit(m, &mut r) {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let max_k = ks.iter().copied().max().unwrap_or(0);
    let times: Vec<Option<u64>> = (0..runs)
        .into_par_iter()
        .map(|k| chain.escape_time(max_k, &mut rng::stream(seed, "birth_death_tail", k as u64)))
        .collect();
    let tail = ks
        .iter()
        .map(|&k| {
            let ind: Vec<f64> = times.iter().map(|t| if t.is_some_and(|t| t <= k) { 1.0 } else { 0.0 }).collect();
            let probability = iid_estimate(&ind);
            let envelope = chain.tail_envelope(k);
            TailRow {
                k,
                pass: probability.mean <= envelope + 3.0 * probability.se,
                probability,
                envelope,
            }
        })
        .collect();
    Ok(HittingReport {
        m,
        exact,
        simulated: iid_estimate(&hits),
        tail,
    })
}

/// Magnetization chain induced by Curie-Weiss Glauber dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MagnetizationChain {
    pub n: usize,
    pub beta: f64,
}

impl MagnetizationChain {
    /// Probability of `m -> m - 2/n`: a `+1` site is chosen and resampled to
    /// `-1`; its local field is `beta m - beta/n`.
    pub fn p_minus(&self, m: f64) -> f64 {
        let b = self.beta;
        0.5 * (1.0 + m) * 0.5 * (1.0 - (b * m - b / self.n as f64).tanh())
    }

    /// Probability of `m -> m + 2/n`; a `-1` site sees field `beta m + beta/n`.
    pub fn p_plus(&self, m: f64) -> f64 {
        let b = self.beta;
        0.5 * (1.0 - m) * 0.5 * (1.0 + (b * m + b / self.n as f64).tanh())
    }

    /// Lattice window `<s1>, <s1> + 2/n, ..., <s2> + 2/n`.
    pub fn window(&self, profile: &ContractionProfile) -> Vec<f64> {
        let lo = lattice_index(profile.s1, self.n);
        let hi = (lattice_index(profile.s2, self.n) + 1).min(self.n);
        (lo..=hi).map(|j| lattice_point(j, self.n)).collect()
    }

    /// `max p_-/p_+` over the window: the odds ratio of the dominating walk.
    pub fn alpha(&self, profile: &ContractionProfile) -> f64 {
        self.window(profile)
            .iter()
            .map(|&m| self.p_minus(m) / self.p_plus(m))
            .fold(0.0, f64::max)
    }

    /// Dominating birth-death walk on the window.
    pub fn birth_death(&self, profile: &ContractionProfile) -> Result<BirthDeathChain> {
        BirthDeathChain::new(self.window(profile).len(), self.alpha(profile))
    }

    /// Probability that the dominating walk steps down when the
    /// magnetization chain steps up, chosen so the walk's overall down
    /// probability per move is `alpha / (1 + alpha)`:
    /// `gamma(m) = (p_+ + p_-)/p_+ * (alpha/(1+alpha) - p_-/(p_+ + p_-))`.
    pub fn gamma(&self, m: f64, alpha: f64) -> f64 {
        let (pp, pm) = (self.p_plus(m), self.p_minus(m));
        (pp + pm) / pp * (alpha / (1.0 + alpha) - pm / (pp + pm))
    }
}
