//! Likelihood-free Bayesian inference: rejection ABC, ABC-PMC and BOLFI,
//! with epidemic, cosmology and stochastic-volatility simulators and a
//! posterior-predictive layer.

pub mod bolfi;
pub mod distance;
pub mod error;
pub mod experiment;
pub mod gp;
pub mod model;
pub mod optim;
pub mod pmc;
pub mod predict;
pub mod prior;
pub mod rejection;
pub mod rng;
pub mod sample;
pub mod sampler;
pub mod sims;
pub mod space;
pub mod stats;

#[cfg(test)]
mod properties;

pub use error::{LfiError, Result, SimError};
pub use model::{AbcModel, Dataset, Simulator, Summary};
pub use prior::{Dist1d, Prior};
pub use rng::SeededRng;
pub use space::BoundedSpace;
