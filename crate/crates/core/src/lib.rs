//! Stein-method comparison of stationary distributions of Glauber dynamics.
//!
//! The crate is organised bottom-up:
//!
//! * [`ising`] holds the model types: interaction matrices, spin
//!   configurations, moment functions and the pointwise quantities
//!   (Hamiltonian, single-site conditionals) every engine needs.
//! * [`graphs`] builds complete, random regular and disjoint-clique graphs,
//!   certifies expansion spectrally and turns graphs into interaction
//!   matrices.
//! * [`exact`] enumerates `{-1,+1}^n` for small `n`: stationary laws,
//!   Glauber kernels (plain and restricted to the positive phase), Poisson
//!   solutions and exact checks of every comparison inequality.
//! * [`mcmc`] runs samplers and couplings at sizes where enumeration is out
//!   of reach, together with the birth-death comparison chain.
//! * [`experiments`] scripts the scaling studies and emits verdict rows.
//!
//! Randomness always flows through [`rng::stream`], so every result is a
//! pure function of its master seed.

pub mod error;
pub mod exact;
pub mod experiments;
pub mod graphs;
pub mod ising;
pub mod linalg;
pub mod mcmc;
pub mod report;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use exact::{
    ExactDistribution, GlauberKernel, KernelFlavor, PoissonSolution, DEFAULT_EXACT_CAP,
};
pub use graphs::{SimpleGraph, SpectralReport};
pub use ising::{InteractionMatrix, MomentFunction, SpinConfiguration};
pub use mcmc::{BirthDeathChain, ChainState, ContractionProfile, CoupledPair, CouplingMode};
pub use report::Verdict;
