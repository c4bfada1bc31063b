//! Conjugate Gaussian toy: `θ ~ N(0, 1)`, `y | θ ~ N(θ, 1)`, one observation.
//! The exact posterior is `N(y_obs / 2, 1/2)`, which makes it the reference
//! problem for checking every sampler.

use crate::distance::DistanceFn;
use crate::model::{AbcModel, Dataset, IdentitySummary};
use crate::prior::{Dist1d, Prior};
use crate::rng::StreamRng;
use rand::Rng;
use rand_distr::StandardNormal;
use std::sync::Arc;

pub fn prior() -> Prior {
    Prior::new(vec![Dist1d::Normal { mean: 0.0, variance: 1.0 }]).expect("valid prior")
}

pub fn simulate(theta: &[f64], rng: &mut StreamRng) -> Dataset {
    let e: f64 = rng.sample(StandardNormal);
    Dataset::vector(vec![theta[0] + e])
}

pub fn model(y_obs: f64) -> AbcModel {
    AbcModel::new(
        prior(),
        Arc::new(|theta: &[f64], rng: &mut StreamRng| Ok(simulate(theta, rng))),
        Arc::new(IdentitySummary),
        DistanceFn::Euclidean,
        &Dataset::vector(vec![y_obs]),
    )
    .expect("valid toy model")
}

/// Exact posterior mean and variance.
pub fn posterior(y_obs: f64) -> (f64, f64) {
    (0.5 * y_obs, 0.5)
}
