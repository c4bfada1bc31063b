//! Bundled simulators.

pub mod ebola;
pub mod supernova;
pub mod sv;
pub mod toy;
