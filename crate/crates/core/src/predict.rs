//! Posterior-predictive propagation and expected-utility portfolio choice.

use crate::error::{LfiError, Result};
use crate::model::collect_ordered;
use crate::optim::golden_section;
use crate::rng::{SeededRng, StreamRng};
use crate::sample::WeightedSample;
use crate::sims::sv::{pf_filter, PfResult, SvParams};
use crate::stats::quantile_sorted;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

/// Pointwise median and central 80% / 95% bands of forecast trajectories.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForecastBands {
    pub time: Vec<f64>,
    pub median: Vec<f64>,
    pub lo95: Vec<f64>,
    pub lo80: Vec<f64>,
    pub hi80: Vec<f64>,
    pub hi95: Vec<f64>,
    pub n_trajectories: usize,
}

impl ForecastBands {
    pub fn from_trajectories(time: Vec<f64>, trajectories: &[Vec<f64>]) -> Result<Self> {
        let n = trajectories.len();
        if n == 0 {
            return Err(LfiError::InvalidArgument("no trajectories".into()));
        }
        let len = time.len();
        if let Some(t) = trajectories.iter().find(|t| t.len() != len) {
            return Err(LfiError::DimensionMismatch { expected: len, got: t.len() });
        }
        let mut b = Self {
            time,
            median: Vec::with_capacity(len),
            lo95: Vec::with_capacity(len),
            lo80: Vec::with_capacity(len),
            hi80: Vec::with_capacity(len),
            hi95: Vec::with_capacity(len),
            n_trajectories: n,
        };
        let mut column = vec![0.0; n];
        for k in 0..len {
            for (c, t) in column.iter_mut().zip(trajectories) {
                *c = t[k];
            }
            column.sort_by(f64::total_cmp);
            b.median.push(quantile_sorted(&column, 0.5));
            b.lo95.push(quantile_sorted(&column, 0.025));
            b.lo80.push(quantile_sorted(&column, 0.1));
            b.hi80.push(quantile_sorted(&column, 0.9));
            b.hi95.push(quantile_sorted(&column, 0.975));
        }
        Ok(b)
    }

    /// `lo95 ≤ lo80 ≤ median ≤ hi80 ≤ hi95` at every time point.
    pub fn is_nested(&self) -> bool {
        (0..self.time.len()).all(|k| {
            self.lo95[k] <= self.lo80[k]
                && self.lo80[k] <= self.median[k]
                && self.median[k] <= self.hi80[k]
                && self.hi80[k] <= self.hi95[k]
        })
    }

    /// Width of the 95% band at each time point.
    pub fn width95(&self) -> Vec<f64> {
        self.hi95.iter().zip(&self.lo95).map(|(h, l)| h - l).collect()
    }

    /// CSV with columns `t,median,lo95,lo80,hi80,hi95`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["t", "median", "lo95", "lo80", "hi80", "hi95"])?;
        for k in 0..self.time.len() {
            w.serialize((self.time[k], self.median[k], self.lo95[k], self.lo80[k], self.hi80[k], self.hi95[k]))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Draw `n` posterior indices proportional to the weights.
fn resample_indices(posterior: &WeightedSample, n: usize, rng: &mut StreamRng) -> Vec<usize> {
    let cumulative = posterior.cumulative_weights();
    (0..n).map(|_| posterior.resample_index(&cumulative, rng)).collect()
}

/// Resample parameters from the posterior and simulate one trajectory per
/// draw; trajectory `j` uses its own child stream.
pub fn posterior_predictive<F>(
    posterior: &WeightedSample,
    simulate: F,
    time: Vec<f64>,
    n_traj: usize,
    rng: SeededRng,
) -> Result<ForecastBands>
where
    F: Fn(&[f64], &mut StreamRng) -> Result<Vec<f64>> + Sync,
{
    if posterior.is_empty() {
        return Err(LfiError::InvalidArgument("empty posterior".into()));
    }
    let idx = resample_indices(posterior, n_traj, &mut rng.split_named("predictive-theta", 0).rng());
    let results: Vec<Result<Vec<f64>>> = idx
        .par_iter()
        .enumerate()
        .map(|(j, &i)| simulate(&posterior.draws[i], &mut rng.split_named("predictive-traj", j as u64).rng()))
        .collect();
    let trajectories = collect_ordered(results)?;
    ForecastBands::from_trajectories(time, &trajectories)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PortfolioConfig {
    /// Relative risk aversion `γ > 1`.
    pub gamma: f64,
    /// Risk-free log return over the period.
    pub rf: f64,
    pub wealth: f64,
    /// Number of predictive draws.
    pub m: usize,
    pub alpha_grid: usize,
}

impl Default for PortfolioConfig {
    fn default() -> Self {
        Self { gamma: 4.0, rf: 0.002, wealth: 1.0, m: 2000, alpha_grid: 1000 }
    }
}

impl PortfolioConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 1.0 && self.gamma.is_finite()) {
            return Err(LfiError::InvalidConfig(format!("gamma must exceed 1, got {}", self.gamma)));
        }
        if !(self.wealth > 0.0) || self.m == 0 || self.alpha_grid == 0 || !self.rf.is_finite() {
            return Err(LfiError::InvalidConfig("wealth, m and alpha_grid must be positive".into()));
        }
        Ok(())
    }
}

/// `W^{1−γ}/(1−γ)`.
pub fn power_utility(w: f64, gamma: f64) -> Result<f64> {
    if !(w > 0.0) {
        return Err(LfiError::InvalidArgument(format!("wealth must be positive, got {w}")));
    }
    Ok(w.powf(1.0 - gamma) / (1.0 - gamma))
}

/// Average utility of unit starting wealth; `-inf` if some wealth is not
/// positive. Power utility is homogeneous, so the utility at wealth `W_n`
/// is this value times `W_n^{1−γ}` and the maximizing `α` does not depend
/// on `W_n`.
fn unit_expected_utility(risky_gross: &[f64], rf_gross: f64, alpha: f64, gamma: f64) -> f64 {
    let mut total = 0.0;
    for r in risky_gross {
        match power_utility(1.0 + alpha * r + (1.0 - alpha) * rf_gross, gamma) {
            Ok(u) => total += u,
            Err(_) => return f64::NEG_INFINITY,
        }
    }
    total / risky_gross.len() as f64
}

/// Average utility of `W_n[1 + α R + (1−α) R_f]` over the risky gross-return
/// draws; `-inf` if some wealth is not positive.
pub fn expected_utility(risky_gross: &[f64], rf_gross: f64, alpha: f64, cfg: &PortfolioConfig) -> f64 {
    cfg.wealth.powf(1.0 - cfg.gamma) * unit_expected_utility(risky_gross, rf_gross, alpha, cfg.gamma)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PortfolioChoice {
    pub alpha: f64,
    pub expected_utility: f64,
}

/// Maximize expected utility over `α ∈ [0, 1]`: grid search over
/// `{0, 1/G, …, 1}` followed by golden-section refinement on the bracket
/// around the best grid point. Ties go to the smaller `α`.
pub fn optimal_alpha(risky_gross: &[f64], rf_gross: f64, cfg: &PortfolioConfig) -> Result<PortfolioChoice> {
    cfg.validate()?;
    if risky_gross.is_empty() {
        return Err(LfiError::InvalidArgument("no predictive draws".into()));
    }
    let g = cfg.alpha_grid;
    let eu = |a: f64| unit_expected_utility(risky_gross, rf_gross, a, cfg.gamma);
    let scale = cfg.wealth.powf(1.0 - cfg.gamma);
    let mut best = (0usize, eu(0.0));
    for k in 1..=g {
        let v = eu(k as f64 / g as f64);
        if v > best.1 {
            best = (k, v);
        }
    }
    if best.1 == f64::NEG_INFINITY {
        return Err(LfiError::InvalidArgument("no allocation keeps wealth positive".into()));
    }
    let lo = best.0.saturating_sub(1) as f64 / g as f64;
    let hi = (best.0 + 1).min(g) as f64 / g as f64;
    let (a, _) = golden_section(|a| -eu(a), lo, hi, 1e-10);
    let refined = eu(a);
    let grid_alpha = best.0 as f64 / g as f64;
    if refined > best.1 {
        Ok(PortfolioChoice { alpha: a, expected_utility: scale * refined })
    } else {
        Ok(PortfolioChoice { alpha: grid_alpha, expected_utility: scale * best.1 })
    }
}

/// One-step-ahead predictive gross returns `exp(y_{n+1})`. Each draw picks
/// a parameter from the posterior, takes `ln V_n` from a particle-filter
/// cloud for that parameter, advances the volatility one step and draws a
/// return. The filter is run once per distinct posterior draw and its
/// cloud reused.
pub fn sv_predictive_draws(
    posterior: &WeightedSample,
    y_obs: &[f64],
    m: usize,
    n_pf_particles: usize,
    rng: SeededRng,
) -> Result<Vec<f64>> {
    if posterior.is_empty() {
        return Err(LfiError::InvalidArgument("empty posterior".into()));
    }
    let idx = resample_indices(posterior, m, &mut rng.split_named("sv-theta", 0).rng());
    let unique: Vec<usize> = idx.iter().copied().collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    let clouds: Vec<Result<PfResult>> = unique
        .par_iter()
        .map(|&i| {
            let p = SvParams::from_theta(&posterior.draws[i]);
            pf_filter(y_obs, &p, n_pf_particles, &mut rng.split_named("sv-pf", i as u64).rng())
        })
        .collect();
    let clouds: BTreeMap<usize, PfResult> = unique.into_iter().zip(collect_ordered(clouds)?).collect();
    Ok(idx
        .iter()
        .enumerate()
        .map(|(j, &i)| {
            let p = SvParams::from_theta(&posterior.draws[i]);
            let mut r = rng.split_named("sv-draw", j as u64).rng();
            let lv_n = clouds[&i].sample_log_v(&mut r);
            let v: f64 = r.sample(StandardNormal);
            let e: f64 = r.sample(StandardNormal);
            let lv = p.omega + p.rho * lv_n + p.sigma * v;
            (p.mu + (0.5 * lv).exp() * e).exp()
        })
        .collect())
}
