use rand::Rng;

use super::{ChainState, ContractionProfile, Dynamics, Sampler};
use crate::error::{Error, Result};
use crate::ising::{lattice_index, SpinConfiguration};
use crate::rng::StreamRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingMode {
    /// Common site `I` and uniform `u` for both chains at every step.
    Monotone,
    /// Monotone until `tau1`, the first time `m(y)` reaches `<s1>`; after that
    /// the chains keep sharing randomness until they collide and then move
    /// together. `tau1` is recorded and order is asserted up to it.
    Composite,
}

/// Two chains driven by one update stream.
#[derive(Debug, Clone)]
pub struct CoupledPair {
    pub x: ChainState,
    pub y: ChainState,
    rng: StreamRng,
    mode: CouplingMode,
    sampler: Sampler,
    /// Spin sum corresponding to `<s1>` (composite mode).
    s1_sum: Option<i64>,
    tau1: Option<u64>,
    coalesced_at: Option<u64>,
    step: u64,
    disagreements: usize,
    /// Whether `x >= y` must hold and is still being asserted.
    track_order: bool,
}

impl CoupledPair {
    pub fn new(
        dynamics: &Dynamics,
        x0: SpinConfiguration,
        y0: SpinConfiguration,
        mode: CouplingMode,
        sampler: Sampler,
        profile: Option<&ContractionProfile>,
        mut rng: StreamRng,
    ) -> Result<Self> {
        if sampler == Sampler::Restricted {
            for c in [&x0, &y0] {
                if c.sum() < 0 {
                    return Err(Error::OutsidePositivePhase(c.sum()));
                }
            }
        }
        let s1_sum = match mode {
            CouplingMode::Monotone => None,
            CouplingMode::Composite => {
                if !dynamics.is_ferromagnetic() {
                    return Err(Error::NotFerromagnetic);
                }
                let p = profile.ok_or_else(|| {
                    Error::CouplingUnavailable("composite mode needs a contraction profile (beta > 1)".into())
                })?;
                let n = dynamics.n();
                Some(2 * lattice_index(p.s1, n) as i64 - n as i64)
            }
        };
        let track_order = dynamics.is_ferromagnetic() && x0.dominates(&y0);
        let disagreements = x0.hamming(&y0);
        // Chains inside the pair never draw from their own streams.
        let x = ChainState::new(dynamics, x0, crate::rng::stream(rng.random(), "unused", 0))?;
        let y = ChainState::new(dynamics, y0, crate::rng::stream(rng.random(), "unused", 1))?;
        let mut pair = CoupledPair {
            x,
            y,
            rng,
            mode,
            sampler,
            s1_sum,
            tau1: None,
            coalesced_at: None,
            step: 0,
            disagreements,
            track_order,
        };
        pair.observe();
        Ok(pair)
    }

    pub fn mode(&self) -> CouplingMode {
        self.mode
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn tau1(&self) -> Option<u64> {
        self.tau1
    }

    pub fn coalesced(&self) -> bool {
        self.coalesced_at.is_some()
    }

    pub fn coalesced_at(&self) -> Option<u64> {
        self.coalesced_at
    }

    pub fn disagreements(&self) -> usize {
        self.disagreements
    }

    fn observe(&mut self) {
        if self.tau1.is_none() && self.s1_sum == Some(self.y.sum()) {
            self.tau1 = Some(self.step);
        }
        if self.coalesced_at.is_none() && self.disagreements == 0 {
            self.coalesced_at = Some(self.step);
        }
    }

    fn one_step(&mut self, dynamics: &Dynamics) -> Result<()> {
        let n = dynamics.n();
        let i = self.rng.random_range(0..n);
        let u: f64 = self.rng.random();
        let restricted = self.sampler == Sampler::Restricted;
        let before = self.x.spins()[i] != self.y.spins()[i];
        let fx = self.x.heat_bath(dynamics, i, u, restricted);
        let fy = self.y.heat_bath(dynamics, i, u, restricted);
        self.step += 1;
        if fx || fy {
            self.disagreements = self.x.spins().iter().zip(self.y.spins()).filter(|(a, b)| a != b).count();
            self.track_order = false;
        } else {
            let after = self.x.spins()[i] != self.y.spins()[i];
            match (before, after) {
                (true, false) => self.disagreements -= 1,
                (false, true) => self.disagreements += 1,
                _ => {}
            }
            if self.track_order && self.x.spins()[i] < self.y.spins()[i] {
                return Err(Error::MonotonicityViolated { step: self.step, site: i });
            }
        }
        if self.mode == CouplingMode::Composite && self.tau1.is_some() {
            self.track_order = false;
        }
        self.observe();
        Ok(())
    }
}

/// Advance both chains `steps` updates under shared randomness.
pub fn coupled_run(dynamics: &Dynamics, pair: &mut CoupledPair, steps: u64) -> Result<()> {
    for _ in 0..steps {
        pair.one_step(dynamics)?;
    }
    Ok(())
}

/// Run until the chains collide, up to `max_steps`; returns the collision
/// step.
pub fn coalescence_time(dynamics: &Dynamics, pair: &mut CoupledPair, max_steps: u64) -> Result<Option<u64>> {
    while !pair.coalesced() && pair.step < max_steps {
        pair.one_step(dynamics)?;
    }
    Ok(pair.coalesced_at)
}
