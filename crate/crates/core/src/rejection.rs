//! Rejection ABC with a fixed tolerance, and the nearest-neighbour variant
//! that keeps a fixed fraction of the closest simulations.

use crate::error::{LfiError, Result};
use crate::model::{collect_ordered, AbcModel};
use crate::rng::SeededRng;
use crate::sample::WeightedSample;
use crate::stats;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const DEFAULT_MAX_ATTEMPTS: u64 = 1_000_000;

/// How candidate simulations are accepted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum RejectionMode {
    /// Accept while `d ≤ epsilon`, repeating until `n_accept` draws are kept.
    Fixed { n_accept: usize, epsilon: f64 },
    /// Simulate `n_total` pairs and keep the closest `floor(n_total·fraction)`.
    NearestNeighbour(NnConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NnConfig {
    pub n_total: usize,
    pub accept_fraction: f64,
    /// Divide each summary component by its median absolute deviation over
    /// the simulated summaries before measuring distance.
    #[serde(default)]
    pub mad_scaling: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RejectionConfig {
    #[serde(flatten)]
    pub mode: RejectionMode,
    #[serde(default = "default_max_attempts")]
    pub max_attempts_per_accept: u64,
}

fn default_max_attempts() -> u64 {
    DEFAULT_MAX_ATTEMPTS
}

impl RejectionConfig {
    pub fn fixed(n_accept: usize, epsilon: f64) -> Self {
        Self { mode: RejectionMode::Fixed { n_accept, epsilon }, max_attempts_per_accept: DEFAULT_MAX_ATTEMPTS }
    }

    pub fn nearest_neighbour(n_total: usize, accept_fraction: f64) -> Self {
        Self {
            mode: RejectionMode::NearestNeighbour(NnConfig { n_total, accept_fraction, mad_scaling: false }),
            max_attempts_per_accept: DEFAULT_MAX_ATTEMPTS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_attempts_per_accept == 0 {
            return Err(LfiError::InvalidConfig("max_attempts_per_accept must be positive".into()));
        }
        match &self.mode {
            RejectionMode::Fixed { n_accept, epsilon } => {
                if *n_accept == 0 {
                    return Err(LfiError::InvalidConfig("n_accept must be positive".into()));
                }
                if epsilon.is_nan() || *epsilon < 0.0 {
                    return Err(LfiError::InvalidConfig(format!("epsilon must be non-negative, got {epsilon}")));
                }
            }
            RejectionMode::NearestNeighbour(nn) => nn.validate()?,
        }
        Ok(())
    }
}

impl NnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_total == 0 {
            return Err(LfiError::InvalidConfig("n_total must be at least 1".into()));
        }
        if !(self.accept_fraction > 0.0 && self.accept_fraction <= 1.0) {
            return Err(LfiError::InvalidConfig(format!(
                "accept_fraction must lie in (0, 1], got {}",
                self.accept_fraction
            )));
        }
        Ok(())
    }

    /// Number of simulations kept: `floor(n_total · fraction)`, at least one.
    pub fn kept(&self) -> usize {
        nn_kept(self.n_total, self.accept_fraction)
    }
}

pub fn nn_kept(n_total: usize, accept_fraction: f64) -> usize {
    // The small offset keeps products such as 100 × 0.29 from rounding down.
    (((n_total as f64) * accept_fraction + 1e-9).floor() as usize).clamp(1, n_total)
}

/// Run either rejection mode.
pub fn run_rejection(model: &AbcModel, cfg: &RejectionConfig, rng: SeededRng) -> Result<WeightedSample> {
    cfg.validate()?;
    match &cfg.mode {
        RejectionMode::Fixed { n_accept, epsilon } => {
            rejection_abc(model, *n_accept, *epsilon, cfg.max_attempts_per_accept, rng)
        }
        RejectionMode::NearestNeighbour(nn) => nn_rejection(model, nn, rng),
    }
}

/// Fixed-tolerance rejection ABC. Slot `i` draws from its own child stream,
/// so the output does not depend on the number of worker threads.
pub fn rejection_abc(
    model: &AbcModel,
    n_accept: usize,
    epsilon: f64,
    max_attempts: u64,
    rng: SeededRng,
) -> Result<WeightedSample> {
    RejectionConfig::fixed(n_accept, epsilon).validate()?;
    let results: Vec<Result<(Vec<f64>, f64, u64)>> = (0..n_accept)
        .into_par_iter()
        .map(|slot| accept_one(model, epsilon, max_attempts, slot, rng.split(slot as u64)))
        .collect();
    let accepted = collect_ordered(results)?;
    let sim_calls = accepted.iter().map(|a| a.2).sum();
    let (draws, distances): (Vec<_>, Vec<_>) = accepted.into_iter().map(|(t, d, _)| (t, d)).unzip();
    Ok(WeightedSample { weights: vec![1.0; draws.len()], draws, distances, sim_calls })
}

fn accept_one(
    model: &AbcModel,
    epsilon: f64,
    max_attempts: u64,
    slot: usize,
    stream: SeededRng,
) -> Result<(Vec<f64>, f64, u64)> {
    let mut rng = stream.rng();
    for attempt in 1..=max_attempts {
        let theta = model.prior.sample(&mut rng);
        let d = model.discrepancy(&theta, &mut rng)?;
        if d <= epsilon {
            return Ok((theta, d, attempt));
        }
    }
    Err(LfiError::AttemptBudgetExceeded { slot, budget: max_attempts, epsilon })
}

/// Nearest-neighbour rejection: simulate exactly `n_total` prior draws and
/// keep the `cfg.kept()` smallest distances, ties broken by draw order.
pub fn nn_rejection(model: &AbcModel, cfg: &NnConfig, rng: SeededRng) -> Result<WeightedSample> {
    cfg.validate()?;
    let n = cfg.n_total;
    let sims: Vec<Result<(Vec<f64>, Option<Vec<f64>>)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut r = rng.split(i as u64).rng();
            let theta = model.prior.sample(&mut r);
            let s = model.simulate_summary(&theta, &mut r)?;
            Ok((theta, s))
        })
        .collect();
    let sims = collect_ordered(sims)?;

    let scale = if cfg.mad_scaling { Some(mad_scales(&sims, model.observed.len())) } else { None };
    let obs_scaled = rescale(&model.observed, scale.as_deref());
    let mut dists = Vec::with_capacity(n);
    for (_, s) in &sims {
        let d = match s {
            Some(s) => model.distance.distance(&obs_scaled, &rescale(s, scale.as_deref()))?,
            None => f64::INFINITY,
        };
        dists.push(if d.is_nan() { f64::INFINITY } else { d });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(a.cmp(&b)));
    let keep = cfg.kept();
    let mut draws = Vec::with_capacity(keep);
    let mut distances = Vec::with_capacity(keep);
    for &i in &order[..keep] {
        draws.push(sims[i].0.clone());
        distances.push(dists[i]);
    }
    Ok(WeightedSample { weights: vec![1.0; keep], draws, distances, sim_calls: n as u64 })
}

fn mad_scales(sims: &[(Vec<f64>, Option<Vec<f64>>)], dim: usize) -> Vec<f64> {
    (0..dim)
        .map(|j| {
            let col: Vec<f64> = sims
                .iter()
                .filter_map(|(_, s)| s.as_ref().map(|s| s[j]))
                .filter(|v| v.is_finite())
                .collect();
            if col.len() < 2 {
                return 1.0;
            }
            let med = stats::median(&col);
            let dev: Vec<f64> = col.iter().map(|v| (v - med).abs()).collect();
            let mad = stats::median(&dev);
            if mad > 0.0 {
                mad
            } else {
                let sd = stats::sample_variance(&col).sqrt();
                if sd > 0.0 {
                    sd
                } else {
                    1.0
                }
            }
        })
        .collect()
}

fn rescale(s: &[f64], scale: Option<&[f64]>) -> Vec<f64> {
    match scale {
        None => s.to_vec(),
        Some(k) => s.iter().zip(k).map(|(v, k)| v / k).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sims::toy;

    #[test]
    fn kept_counts() {
        assert_eq!(nn_kept(34_992, 0.0086), 300);
        assert_eq!(nn_kept(10, 1.0), 10);
        assert_eq!(nn_kept(5, 0.01), 1);
        assert_eq!(nn_kept(100, 0.29), 29);
    }

    #[test]
    fn infinite_epsilon_returns_prior() {
        let model = toy::model(0.0);
        let s = rejection_abc(&model, 10_000, f64::INFINITY, 10, SeededRng::new(1)).unwrap();
        assert_eq!(s.sim_calls, 10_000);
        assert!(s.mean(0).abs() < 0.05);
    }

    #[test]
    fn zero_epsilon_exhausts_budget() {
        let model = toy::model(0.0);
        let err = rejection_abc(&model, 3, 0.0, 500, SeededRng::new(1)).unwrap_err();
        assert!(matches!(err, LfiError::AttemptBudgetExceeded { slot: 0, budget: 500, .. }));
    }

    #[test]
    fn accepted_distances_within_tolerance() {
        let model = toy::model(0.0);
        let s = rejection_abc(&model, 200, 0.3, 10_000, SeededRng::new(2)).unwrap();
        assert!(s.distances.iter().all(|d| *d <= 0.3));
        assert!(s.sim_calls >= 200);
    }

    #[test]
    fn nn_mode_separates_kept_and_rejected() {
        let model = toy::model(0.0);
        let cfg = NnConfig { n_total: 500, accept_fraction: 0.1, mad_scaling: false };
        let s = nn_rejection(&model, &cfg, SeededRng::new(3)).unwrap();
        assert_eq!(s.len(), 50);
        assert_eq!(s.sim_calls, 500);
        // Recompute every distance and check the kept set is the 50 smallest.
        let mut all: Vec<f64> = (0..500)
            .map(|i| {
                let mut r = SeededRng::new(3).split(i).rng();
                let th = model.prior.sample(&mut r);
                model.discrepancy(&th, &mut r).unwrap()
            })
            .collect();
        all.sort_by(f64::total_cmp);
        let max_kept = s.distances.iter().cloned().fold(f64::MIN, f64::max);
        assert_eq!(max_kept, all[49]);
        assert!(max_kept <= all[50]);
    }

    #[test]
    fn config_validation() {
        assert!(RejectionConfig::nearest_neighbour(10, 0.0).validate().is_err());
        assert!(RejectionConfig::nearest_neighbour(0, 0.5).validate().is_err());
        assert!(RejectionConfig::fixed(0, 1.0).validate().is_err());
        assert!(RejectionConfig::fixed(1, -1.0).validate().is_err());
    }
}
