//! ABC population Monte Carlo: a weighted particle population pushed through
//! a decreasing sequence of tolerances by resampling, Gaussian perturbation
//! and importance re-weighting.

use crate::error::{LfiError, Result};
use crate::model::{collect_ordered, AbcModel};
use crate::prior::Prior;
use crate::rng::SeededRng;
use crate::sample::WeightedSample;
use crate::stats;
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Schedule {
    /// Pre-set tolerances, strictly decreasing.
    Explicit { epsilons: Vec<f64> },
    /// `ε_{t+1}` is the `quantile` of the distances accepted at iteration `t`.
    Adaptive { epsilon_1: f64, quantile: f64, iterations: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PmcConfig {
    pub n_particles: usize,
    pub schedule: Schedule,
    #[serde(default = "default_max_attempts")]
    pub max_attempts_per_particle: u64,
}

fn default_max_attempts() -> u64 {
    crate::rejection::DEFAULT_MAX_ATTEMPTS
}

impl PmcConfig {
    pub fn adaptive(n_particles: usize, epsilon_1: f64, quantile: f64, iterations: usize) -> Self {
        Self {
            n_particles,
            schedule: Schedule::Adaptive { epsilon_1, quantile, iterations },
            max_attempts_per_particle: default_max_attempts(),
        }
    }

    pub fn explicit(n_particles: usize, epsilons: Vec<f64>) -> Self {
        Self { n_particles, schedule: Schedule::Explicit { epsilons }, max_attempts_per_particle: default_max_attempts() }
    }

    pub fn iterations(&self) -> usize {
        match &self.schedule {
            Schedule::Explicit { epsilons } => epsilons.len(),
            Schedule::Adaptive { iterations, .. } => *iterations,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_particles < 2 {
            return Err(LfiError::InvalidConfig("ABC-PMC needs at least two particles".into()));
        }
        if self.max_attempts_per_particle == 0 {
            return Err(LfiError::InvalidConfig("max_attempts_per_particle must be positive".into()));
        }
        match &self.schedule {
            Schedule::Explicit { epsilons } => {
                if epsilons.is_empty() {
                    return Err(LfiError::InvalidConfig("explicit schedule is empty".into()));
                }
                if epsilons.iter().any(|e| e.is_nan()) || epsilons.windows(2).any(|w| w[1] >= w[0]) {
                    return Err(LfiError::InvalidConfig("explicit schedule must be strictly decreasing".into()));
                }
            }
            Schedule::Adaptive { epsilon_1, quantile, iterations } => {
                if epsilon_1.is_nan() {
                    return Err(LfiError::InvalidConfig("epsilon_1 is NaN".into()));
                }
                if !(*quantile > 0.0 && *quantile < 1.0) {
                    return Err(LfiError::InvalidConfig(format!("quantile must lie in (0, 1), got {quantile}")));
                }
                if *iterations == 0 {
                    return Err(LfiError::InvalidConfig("iterations must be at least 1".into()));
                }
            }
        }
        Ok(())
    }
}

/// Weighted particle population at one iteration.
#[derive(Debug, Clone)]
pub struct ParticlePopulation {
    pub particles: Vec<Vec<f64>>,
    /// Normalized importance weights.
    pub weights: Vec<f64>,
    pub distances: Vec<f64>,
    pub iteration: usize,
    pub epsilon: f64,
    /// Perturbation covariance derived from this population: twice its
    /// weighted covariance, floored. Used to propose the next iteration.
    pub kernel_cov: DMatrix<f64>,
}

impl ParticlePopulation {
    pub fn new(particles: Vec<Vec<f64>>, weights: Vec<f64>, prior: &Prior) -> Self {
        let n = particles.len();
        let w = normalize(&weights);
        let kernel_cov = weighted_covariance(&particles, &w, &covariance_floor(prior));
        Self { particles, weights: w, distances: vec![0.0; n], iteration: 1, epsilon: f64::INFINITY, kernel_cov }
    }

    pub fn to_sample(&self, sim_calls: u64) -> WeightedSample {
        WeightedSample {
            draws: self.particles.clone(),
            weights: self.weights.clone(),
            distances: self.distances.clone(),
            sim_calls,
        }
    }

    fn kernel_cholesky(&self) -> Cholesky<f64, Dyn> {
        Cholesky::new(self.kernel_cov.clone()).expect("floored kernel covariance is positive definite")
    }
}

#[derive(Debug, Clone)]
pub struct PmcResult {
    pub population: ParticlePopulation,
    /// Tolerance used at each completed iteration.
    pub epsilons: Vec<f64>,
    pub sim_calls_per_iteration: Vec<u64>,
    /// Set when the adaptive schedule stopped because the next quantile
    /// tolerance would not decrease.
    pub stopped_early: bool,
}

impl PmcResult {
    pub fn sim_calls(&self) -> u64 {
        self.sim_calls_per_iteration.iter().sum()
    }

    pub fn to_sample(&self) -> WeightedSample {
        self.population.to_sample(self.sim_calls())
    }
}

fn normalize(w: &[f64]) -> Vec<f64> {
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

/// Per-dimension variance floor: `1e-12 × (prior range)²`.
pub fn covariance_floor(prior: &Prior) -> Vec<f64> {
    prior.components().iter().map(|c| 1e-12 * c.range_scale().powi(2)).collect()
}

/// Twice the weighted sample covariance `Σ w_i (x_i − m)(x_i − m)ᵀ` of a
/// population with normalized weights. Diagonal entries are raised to
/// `floor` and, if the matrix is still not positive definite, the floor is
/// added to the diagonal until it is.
pub fn weighted_covariance(particles: &[Vec<f64>], weights: &[f64], floor: &[f64]) -> DMatrix<f64> {
    let p = floor.len();
    let mut m = vec![0.0; p];
    for (x, w) in particles.iter().zip(weights) {
        for j in 0..p {
            m[j] += w * x[j];
        }
    }
    let mut cov = DMatrix::<f64>::zeros(p, p);
    for (x, w) in particles.iter().zip(weights) {
        for a in 0..p {
            for b in 0..=a {
                cov[(a, b)] += w * (x[a] - m[a]) * (x[b] - m[b]);
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            cov[(b, a)] = cov[(a, b)];
        }
    }
    cov *= 2.0;
    for j in 0..p {
        if !(cov[(j, j)] >= floor[j]) {
            cov[(j, j)] = floor[j];
        }
    }
    let mut bump = 1.0;
    while Cholesky::new(cov.clone()).is_none() {
        for j in 0..p {
            cov[(j, j)] += bump * floor[j].max(f64::MIN_POSITIVE);
        }
        bump *= 10.0;
    }
    cov
}

/// Log of the unnormalized importance weight
/// `p(θ) / Σ_K W_K φ(τ^{-1/2}(θ − θ_K))`, with `φ` the standard normal
/// density of the whitened difference.
pub fn pmc_log_weight(theta: &[f64], prev: &ParticlePopulation, prior: &Prior) -> f64 {
    let lp = prior.ln_pdf_unchecked(theta);
    if lp == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let chol = prev.kernel_cholesky();
    log_weight_with(theta, lp, prev, &chol)
}

pub fn pmc_weight(theta: &[f64], prev: &ParticlePopulation, prior: &Prior) -> f64 {
    pmc_log_weight(theta, prev, prior).exp()
}

fn log_weight_with(theta: &[f64], log_prior: f64, prev: &ParticlePopulation, chol: &Cholesky<f64, Dyn>) -> f64 {
    let p = theta.len();
    let l = chol.l();
    let log_norm = -0.5 * p as f64 * (2.0 * PI).ln();
    let mut terms = Vec::with_capacity(prev.particles.len());
    for (x, w) in prev.particles.iter().zip(&prev.weights) {
        if *w <= 0.0 {
            continue;
        }
        let diff = DVector::from_iterator(p, theta.iter().zip(x).map(|(a, b)| a - b));
        let z = l.solve_lower_triangular(&diff).expect("non-singular factor");
        terms.push(w.ln() + log_norm - 0.5 * z.norm_squared());
    }
    log_prior - log_sum_exp(&terms)
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Empirical `q`-quantile of accepted distances (linear interpolation at
/// position `1 + q (n − 1)`).
pub fn adaptive_next_epsilon(accepted_distances: &[f64], q: f64) -> f64 {
    stats::quantile(accepted_distances, q)
}

/// Run ABC-PMC.
pub fn abc_pmc(model: &AbcModel, cfg: &PmcConfig, rng: SeededRng) -> Result<PmcResult> {
    cfg.validate()?;
    let n = cfg.n_particles;
    let first_eps = match &cfg.schedule {
        Schedule::Explicit { epsilons } => epsilons[0],
        Schedule::Adaptive { epsilon_1, .. } => *epsilon_1,
    };

    // Iteration 1: rejection ABC at ε_1 with uniform weights.
    let first = crate::rejection::rejection_abc(
        model,
        n,
        first_eps,
        cfg.max_attempts_per_particle,
        rng.split_named("pmc-iteration", 1),
    )?;
    let mut pop = ParticlePopulation::new(first.draws, vec![1.0; n], &model.prior);
    pop.distances = first.distances;
    pop.epsilon = first_eps;
    let mut epsilons = vec![first_eps];
    let mut calls = vec![first.sim_calls];
    let mut stopped_early = false;
    let floor = covariance_floor(&model.prior);

    for t in 2..=cfg.iterations() {
        let eps = match &cfg.schedule {
            Schedule::Explicit { epsilons } => epsilons[t - 1],
            Schedule::Adaptive { quantile, .. } => {
                let next = adaptive_next_epsilon(&pop.distances, *quantile);
                if !(next < pop.epsilon) {
                    stopped_early = true;
                    break;
                }
                next
            }
        };
        let (next, used) = pmc_step(model, &pop, eps, cfg.max_attempts_per_particle, t, rng, &floor)?;
        pop = next;
        epsilons.push(eps);
        calls.push(used);
    }
    Ok(PmcResult { population: pop, epsilons, sim_calls_per_iteration: calls, stopped_early })
}

/// One resample–perturb–accept–reweight step at tolerance `eps`.
pub fn pmc_step(
    model: &AbcModel,
    prev: &ParticlePopulation,
    eps: f64,
    max_attempts: u64,
    t: usize,
    rng: SeededRng,
    floor: &[f64],
) -> Result<(ParticlePopulation, u64)> {
    let n = prev.particles.len();
    let p = model.dims();
    let chol = prev.kernel_cholesky();
    let l = chol.l();
    let cumulative: Vec<f64> = prev
        .weights
        .iter()
        .scan(0.0, |acc, w| {
            *acc += w;
            Some(*acc)
        })
        .collect();
    let total = *cumulative.last().expect("non-empty population");
    let iter_stream = rng.split_named("pmc-iteration", t as u64);

    let results: Vec<Result<(Vec<f64>, f64, u64)>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut r = iter_stream.split(j as u64).rng();
            let mut sims = 0u64;
            for _ in 0..max_attempts {
                // The base particle is re-selected on every attempt.
                let u: f64 = r.random::<f64>() * total;
                let k = cumulative.partition_point(|c| *c <= u).min(n - 1);
                let z = DVector::from_iterator(p, (0..p).map(|_| r.sample::<f64, _>(StandardNormal)));
                let step = &l * z;
                let theta: Vec<f64> = prev.particles[k].iter().zip(step.iter()).map(|(a, b)| a + b).collect();
                if !model.prior.in_support(&theta) {
                    continue;
                }
                sims += 1;
                let d = model.discrepancy(&theta, &mut r)?;
                if d <= eps {
                    return Ok((theta, d, sims));
                }
            }
            Err(LfiError::AttemptBudgetExceeded { slot: j, budget: max_attempts, epsilon: eps })
        })
        .collect();
    let accepted = collect_ordered(results)?;
    let used: u64 = accepted.iter().map(|a| a.2).sum();

    let log_w: Vec<f64> = accepted
        .par_iter()
        .map(|(theta, _, _)| {
            let lp = model.prior.ln_pdf_unchecked(theta);
            log_weight_with(theta, lp, prev, &chol)
        })
        .collect();
    let m = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights = normalize(&log_w.iter().map(|w| (w - m).exp()).collect::<Vec<_>>());
    let (particles, distances): (Vec<_>, Vec<_>) = accepted.into_iter().map(|(t, d, _)| (t, d)).unzip();
    let kernel_cov = weighted_covariance(&particles, &weights, floor);
    Ok((ParticlePopulation { particles, weights, distances, iteration: t, epsilon: eps, kernel_cov }, used))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prior::Dist1d;
    use approx::assert_abs_diff_eq;

    fn unit_prior() -> Prior {
        Prior::new(vec![Dist1d::Uniform { low: 0.0, high: 1.0 }]).unwrap()
    }

    fn population(particles: Vec<Vec<f64>>, weights: Vec<f64>, tau: f64) -> ParticlePopulation {
        let n = particles.len();
        ParticlePopulation {
            particles,
            weights: normalize(&weights),
            distances: vec![0.0; n],
            iteration: 1,
            epsilon: 1.0,
            kernel_cov: DMatrix::from_element(1, 1, tau),
        }
    }

    #[test]
    fn covariance_of_two_points() {
        let c = weighted_covariance(&[vec![-1.0], vec![1.0]], &[0.5, 0.5], &[1e-12]);
        assert_abs_diff_eq!(c[(0, 0)], 2.0, epsilon = 1e-15);
    }

    #[test]
    fn covariance_floors_degenerate_populations() {
        let prior = Prior::new(vec![Dist1d::Uniform { low: 0.0, high: 10.0 }]).unwrap();
        let floor = covariance_floor(&prior);
        assert_abs_diff_eq!(floor[0], 1e-10, epsilon = 1e-24);
        let c = weighted_covariance(&vec![vec![3.0]; 4], &[0.25; 4], &floor);
        assert_eq!(c[(0, 0)], floor[0]);
        let c = weighted_covariance(&[vec![0.0], vec![5.0]], &[1.0, 0.0], &floor);
        assert_eq!(c[(0, 0)], floor[0]);
    }

    #[test]
    fn covariance_floor_handles_collinear_points() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]];
        let c = weighted_covariance(&pts, &[1.0 / 3.0; 3], &[1e-12, 1e-12]);
        assert!(Cholesky::new(c).is_some());
    }

    #[test]
    fn weight_single_coincident_particle() {
        let prev = population(vec![vec![0.5]], vec![1.0], 1.0);
        let w = pmc_weight(&[0.5], &prev, &unit_prior());
        assert_abs_diff_eq!(w, (2.0 * PI).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn weight_outside_support_is_zero() {
        let prev = population(vec![vec![0.5]], vec![1.0], 1.0);
        assert_eq!(pmc_weight(&[1.5], &prev, &unit_prior()), 0.0);
    }

    #[test]
    fn weight_symmetric_pair() {
        let tau: f64 = 0.04;
        let prev = population(vec![vec![0.3], vec![0.7]], vec![1.0, 1.0], tau);
        let delta = 0.2 / tau.sqrt();
        let phi = (-0.5 * delta * delta).exp() / (2.0 * PI).sqrt();
        assert_abs_diff_eq!(pmc_weight(&[0.5], &prev, &unit_prior()), 1.0 / phi, epsilon = 1e-9);
    }

    #[test]
    fn next_epsilon_quantiles() {
        let d: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_abs_diff_eq!(adaptive_next_epsilon(&d, 0.75), 7.75, epsilon = 1e-12);
        assert_eq!(adaptive_next_epsilon(&[2.5; 7], 0.3), 2.5);
        assert_eq!(adaptive_next_epsilon(&[5.0], 0.9), 5.0);
    }

    #[test]
    fn schedule_validation() {
        assert!(PmcConfig::explicit(10, vec![1.0, 1.0]).validate().is_err());
        assert!(PmcConfig::explicit(10, vec![2.0, 1.0]).validate().is_ok());
        assert!(PmcConfig::adaptive(1, 1.0, 0.5, 3).validate().is_err());
        assert!(PmcConfig::adaptive(10, 1.0, 1.0, 3).validate().is_err());
    }
}
