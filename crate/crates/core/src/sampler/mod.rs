//! Markov chains targeting `P_N ∝ exp(-beta_N H_N)`.

mod chain;
mod init;
mod moves;

pub use chain::{run_chain, run_chain_from, ChainOutput, Observer, TraceRow};
pub use init::{init_configuration, InitStrategy};
pub use moves::{
    euler_maruyama_step, mala_log_ratio, mala_step, metropolis_accept, metropolis_sweep, metropolis_sweep_with,
    GaussianProposal, Proposal,
};

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{usage, Result};
use crate::kernel::{energy_and_gradient, Configuration, GasModel};
use crate::scalar::Scalar;

/// Inverse temperature as a function of the number of particles.
#[derive(Clone)]
pub enum AnnealSchedule<T> {
    /// `beta_N = N^2`
    NSquared,
    Custom(Arc<dyn Fn(usize) -> T + Send + Sync>),
    Fixed(T),
}

impl<T: Scalar> AnnealSchedule<T> {
    pub fn beta(&self, n: usize) -> Result<T> {
        let b = match self {
            AnnealSchedule::NSquared => T::of_usize(n) * T::of_usize(n),
            AnnealSchedule::Custom(f) => f(n),
            AnnealSchedule::Fixed(b) => *b,
        };
        if !(b > T::zero()) || !b.is_finite() {
            return Err(usage!("schedule gives beta_N = {b} for N = {n}"));
        }
        Ok(b)
    }
}

impl<T: Scalar> fmt::Debug for AnnealSchedule<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnnealSchedule::NSquared => f.write_str("NSquared"),
            AnnealSchedule::Custom(_) => f.write_str("Custom"),
            AnnealSchedule::Fixed(b) => write!(f, "Fixed({b})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MoveKind {
    /// `N` sequential single-particle Gaussian random-walk moves per sweep.
    Metropolis,
    /// One joint Langevin proposal for all particles per sweep.
    Mala,
}

impl MoveKind {
    /// Optimal-scaling acceptance rate used by the step-size adaptation.
    pub fn default_target(self) -> f64 {
        match self {
            MoveKind::Metropolis => 0.234,
            MoveKind::Mala => 0.574,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SamplerParams<T: Scalar> {
    pub kind: MoveKind,
    /// Proposal standard deviation per coordinate; MALA uses `tau = sigma^2 / 2`.
    pub step_size: T,
    /// Robbins-Monro tuning of the step size during burn-in.
    pub adapt: bool,
    pub target_acceptance: T,
    /// Total number of sweeps, burn-in included.
    pub sweeps: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    /// RNG stream, so chains sharing a seed stay independent.
    pub stream: u64,
    pub init: InitStrategy<T>,
}

impl<T: Scalar> SamplerParams<T> {
    pub fn new(kind: MoveKind, step_size: T, sweeps: usize, burn_in: usize, seed: u64) -> Self {
        SamplerParams {
            kind,
            step_size,
            adapt: true,
            target_acceptance: T::lit(kind.default_target()),
            sweeps,
            burn_in,
            thin: 1,
            seed,
            stream: 0,
            init: InitStrategy::UniformBall { radius: T::one() },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > T::zero()) || !self.step_size.is_finite() {
            return Err(usage!("step size must be positive, got {}", self.step_size));
        }
        if !(self.target_acceptance > T::zero() && self.target_acceptance < T::one()) {
            return Err(usage!("target acceptance must lie in (0, 1)"));
        }
        if self.burn_in > self.sweeps {
            return Err(usage!("burn-in ({}) exceeds the total sweeps ({})", self.burn_in, self.sweeps));
        }
        if self.thin == 0 {
            return Err(usage!("thinning stride must be at least 1"));
        }
        Ok(())
    }
}

/// Acceptance bookkeeping per move type.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    pub rw_proposed: u64,
    pub rw_accepted: u64,
    pub mala_proposed: u64,
    pub mala_accepted: u64,
    /// MALA steps that fell back to a random-walk proposal near a collision.
    pub fallback_proposed: u64,
    pub fallback_accepted: u64,
}

/// Current configuration with its cached energy and random stream.
#[derive(Clone, Debug)]
pub struct ChainState<T: Scalar> {
    config: Configuration<T>,
    energy: T,
    beta_n: T,
    step_size: T,
    rng: ChaCha8Rng,
    pub counters: Counters,
    /// `grad H_N` at `config`, if known.
    grad: Option<Vec<T>>,
}

impl<T: Scalar> ChainState<T> {
    pub fn new(
        config: Configuration<T>,
        model: &GasModel<T>,
        beta_n: T,
        step_size: T,
        seed: u64,
        stream: u64,
    ) -> Result<Self> {
        if !(beta_n > T::zero()) || !(step_size > T::zero()) {
            return Err(usage!("chain needs beta_N > 0 and step size > 0"));
        }
        let energy = crate::kernel::total_energy(&config, model, crate::kernel::Summation::Deterministic)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Ok(ChainState { config, energy, beta_n, step_size, rng, counters: Counters::default(), grad: None })
    }

    pub fn config(&self) -> &Configuration<T> {
        &self.config
    }

    pub fn into_config(self) -> Configuration<T> {
        self.config
    }

    /// Cached `H_N`.
    pub fn energy(&self) -> T {
        self.energy
    }

    pub fn beta_n(&self) -> T {
        self.beta_n
    }

    pub fn step_size(&self) -> T {
        self.step_size
    }

    pub fn set_step_size(&mut self, sigma: T) {
        self.step_size = sigma;
    }

    /// Recomputes the cached energy (and gradient) from scratch.
    pub fn resync(&mut self, model: &GasModel<T>) -> Result<()> {
        match energy_and_gradient(&self.config, model) {
            Ok((e, g)) => {
                self.energy = e;
                self.grad = Some(g);
            }
            Err(crate::error::Error::Singularity(_)) => {
                self.energy = T::infinity();
                self.grad = None;
            }
            Err(e) => return Err(e),
        }
        Ok(())
    }
}
