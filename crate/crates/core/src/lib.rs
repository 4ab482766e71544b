//! Simulation and verification toolkit for confined gases of particles with
//! Riesz or Coulomb pair repulsion.
//!
//! - [`kernel`]: interaction kernels, external fields, the energy `H_N`.
//! - [`sampler`]: Metropolis, MALA and Euler-Maruyama chains for `exp(-beta_N H_N)`.
//! - [`equilibrium`]: closed-form equilibrium measures of radial Coulomb gases,
//!   potentials, and fields with a prescribed equilibrium.
//! - [`measures`]: empirical measures, the Fortet-Mourier distance, radial KS.
//!
//! Everything is generic over [`Scalar`]; the aliases at the crate root fix `f64`.

pub mod equilibrium;
pub mod error;
pub mod io;
pub mod kernel;
pub mod measures;
pub mod quadrature;
pub mod sampler;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Configuration = kernel::Configuration<f64>;
pub type GasModel = kernel::GasModel<f64>;
pub type KernelSpec = kernel::KernelSpec<f64>;
pub type ExternalField = kernel::ExternalField<f64>;
pub type RadialProfile = kernel::RadialProfile<f64>;
pub type RadialDensity = equilibrium::RadialDensity<f64>;
pub type EquilibriumResult = equilibrium::EquilibriumResult<f64>;
pub type DiscreteMeasure = measures::DiscreteMeasure<f64>;
pub type RadialCdf = measures::RadialCdf<f64>;
pub type ChainState = sampler::ChainState<f64>;
pub type SamplerParams = sampler::SamplerParams<f64>;
pub type AnnealSchedule = sampler::AnnealSchedule<f64>;
