//! Stochastic-volatility returns
//! `y_t = μ + √V_t ε_t`, `ln V_t = ω + ρ ln V_{t−1} + σ v_t`,
//! with GARCH(1,1) quasi-likelihood summaries and a bootstrap particle
//! filter for the latent volatility.

use crate::distance::DistanceFn;
use crate::error::{LfiError, Result, SimError};
use crate::model::{AbcModel, Dataset};
use crate::optim::NelderMead;
use crate::prior::{Dist1d, Prior};
use crate::rng::StreamRng;
use crate::stats;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

/// `θ = [ρ, σ, ω, μ]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvParams {
    pub rho: f64,
    pub sigma: f64,
    pub omega: f64,
    pub mu: f64,
}

impl SvParams {
    pub fn new(rho: f64, sigma: f64, omega: f64, mu: f64) -> Self {
        Self { rho, sigma, omega, mu }
    }

    pub fn from_theta(theta: &[f64]) -> Self {
        Self::new(theta[0], theta[1], theta[2], theta[3])
    }

    pub fn to_theta(&self) -> Vec<f64> {
        vec![self.rho, self.sigma, self.omega, self.mu]
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho.abs() < 1.0) || !(self.sigma >= 0.0) || !self.omega.is_finite() || !self.mu.is_finite() {
            return Err(LfiError::InvalidArgument(format!("invalid volatility parameters {self:?}")));
        }
        Ok(())
    }

    /// Stationary mean and standard deviation of `ln V`.
    pub fn stationary(&self) -> (f64, f64) {
        (self.omega / (1.0 - self.rho), self.sigma / (1.0 - self.rho * self.rho).sqrt())
    }

    fn step_log_v<R: Rng + ?Sized>(&self, log_v: f64, rng: &mut R) -> f64 {
        let v: f64 = rng.sample(StandardNormal);
        self.omega + self.rho * log_v + self.sigma * v
    }

    fn initial_log_v<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let (m, s) = self.stationary();
        let z: f64 = rng.sample(StandardNormal);
        m + s * z
    }
}

/// Returns and the latent `ln V_1..ln V_n`.
pub fn sv_simulate_with_volatility(p: &SvParams, n: usize, rng: &mut StreamRng) -> (Vec<f64>, Vec<f64>) {
    let mut log_v = p.initial_log_v(rng);
    let mut ys = Vec::with_capacity(n);
    let mut lvs = Vec::with_capacity(n);
    for _ in 0..n {
        log_v = p.step_log_v(log_v, rng);
        let e: f64 = rng.sample(StandardNormal);
        ys.push(p.mu + (0.5 * log_v).exp() * e);
        lvs.push(log_v);
    }
    (ys, lvs)
}

/// `n` returns with `ln V_0` drawn from the stationary distribution.
pub fn sv_simulate(p: &SvParams, n: usize, rng: &mut StreamRng) -> Vec<f64> {
    sv_simulate_with_volatility(p, n, rng).0
}

/// Quasi-likelihood GARCH(1,1) fit plus sample moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GarchSummary {
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    pub mean: f64,
    pub variance: f64,
    pub converged: bool,
}

impl GarchSummary {
    pub fn to_vec(&self) -> Vec<f64> {
        vec![self.omega, self.alpha, self.beta, self.mu, self.mean, self.variance]
    }

    /// Summary vector used for inference: the scale-type entries `ω` and the
    /// sample variance enter through their logarithms, so a distance between
    /// two vectors compares relative rather than absolute scale.
    pub fn to_inference_vec(&self) -> Vec<f64> {
        vec![self.omega.ln(), self.alpha, self.beta, self.mu, self.mean, self.variance.ln()]
    }

    /// `ω/(1 − α − β)`.
    pub fn unconditional_variance(&self) -> f64 {
        self.omega / (1.0 - self.alpha - self.beta)
    }
}

pub const GARCH_MIN_LEN: usize = 50;
const PERSISTENCE_CAP: f64 = 0.999;

/// Gaussian negative quasi-log-likelihood (up to a constant) with the
/// conditional variance started at `h0`.
fn garch_nll(y: &[f64], omega: f64, alpha: f64, beta: f64, mu: f64, h0: f64) -> f64 {
    let mut h = h0;
    let mut nll = 0.0;
    let mut prev_sq = 0.0;
    for (t, &yt) in y.iter().enumerate() {
        if t > 0 {
            h = omega + alpha * prev_sq + beta * h;
        }
        let e = yt - mu;
        nll += 0.5 * (h.ln() + e * e / h);
        prev_sq = e * e;
    }
    nll
}

/// Fit GARCH(1,1) with normal errors by bounded Nelder–Mead from a fixed
/// start. The search runs over `(ln ω, α, β, μ)` with `α + β ≤ 0.999`.
pub fn garch_summary(y: &[f64]) -> Result<GarchSummary> {
    if y.len() < GARCH_MIN_LEN {
        return Err(LfiError::InvalidArgument(format!(
            "GARCH summary needs at least {GARCH_MIN_LEN} returns, got {}",
            y.len()
        )));
    }
    let mean = stats::mean(y);
    let var = stats::sample_variance(y);
    if !(var > 0.0 && var.is_finite()) {
        return Err(LfiError::DegenerateSample("returns have no finite spread".into()));
    }
    let sd = var.sqrt();
    let lower = [(1e-6 * var).ln(), 0.0, 0.0, mean - 2.0 * sd];
    let upper = [(10.0 * var).ln(), PERSISTENCE_CAP, PERSISTENCE_CAP, mean + 2.0 * sd];
    let objective = |x: &[f64]| {
        if x[1] + x[2] > PERSISTENCE_CAP {
            return f64::INFINITY;
        }
        garch_nll(y, x[0].exp(), x[1], x[2], x[3], var)
    };
    let start = [(0.1 * var).ln(), 0.1, 0.8, mean];
    let step = [1.0, 0.05, 0.1, 0.2 * sd];
    let nm = NelderMead { max_evals: 1500, f_tol: 1e-9, x_tol: 1e-7 };
    let m = nm.minimize(objective, &start, &step, &lower, &upper);
    Ok(GarchSummary {
        omega: m.x[0].exp(),
        alpha: m.x[1],
        beta: m.x[2],
        mu: m.x[3],
        mean,
        variance: var,
        converged: m.converged,
    })
}

/// Output of [`pf_filter`].
#[derive(Debug, Clone)]
pub struct PfResult {
    pub loglik: f64,
    /// Terminal `ln V_n` particles with normalized weights.
    pub log_v: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PfResult {
    /// Draw one `ln V_n` from the weighted terminal cloud.
    pub fn sample_log_v<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (lv, w) in self.log_v.iter().zip(&self.weights) {
            acc += w;
            if u < acc {
                return *lv;
            }
        }
        *self.log_v.last().expect("non-empty cloud")
    }
}

fn log_normal_density(y: f64, mu: f64, log_v: f64) -> f64 {
    let e = y - mu;
    -0.5 * ((2.0 * PI).ln() + log_v + e * e * (-log_v).exp())
}

/// Bootstrap particle filter with multinomial resampling at every step.
/// The likelihood estimate is `Σ_t ln(mean_i w_t,i)`.
pub fn pf_filter(y: &[f64], p: &SvParams, n_particles: usize, rng: &mut StreamRng) -> Result<PfResult> {
    p.validate()?;
    if n_particles == 0 || y.is_empty() {
        return Err(LfiError::InvalidArgument("particle filter needs particles and data".into()));
    }
    let mut particles: Vec<f64> = (0..n_particles).map(|_| p.initial_log_v(rng)).collect();
    let mut logw = vec![0.0; n_particles];
    let mut weights = vec![0.0; n_particles];
    let mut cumulative = vec![0.0; n_particles];
    let mut loglik = 0.0;
    for (t, &yt) in y.iter().enumerate() {
        for (x, lw) in particles.iter_mut().zip(logw.iter_mut()) {
            *x = p.step_log_v(*x, rng);
            *lw = log_normal_density(yt, p.mu, *x);
        }
        let max = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(LfiError::WeightCollapse { step: t });
        }
        let mut total = 0.0;
        for (w, lw) in weights.iter_mut().zip(&logw) {
            *w = (lw - max).exp();
            total += *w;
        }
        loglik += max + (total / n_particles as f64).ln();
        for w in weights.iter_mut() {
            *w /= total;
        }
        if t + 1 == y.len() {
            break;
        }
        let mut acc = 0.0;
        for (c, w) in cumulative.iter_mut().zip(&weights) {
            acc += w;
            *c = acc;
        }
        let old = particles.clone();
        for x in particles.iter_mut() {
            let u: f64 = rng.random::<f64>() * acc;
            let k = cumulative.partition_point(|c| *c <= u).min(n_particles - 1);
            *x = old[k];
        }
    }
    Ok(PfResult { loglik, log_v: particles, weights })
}

/// Exact Gaussian log-likelihood when volatility is constant at `V = e^{lv}`.
pub fn constant_volatility_loglik(y: &[f64], mu: f64, log_v: f64) -> f64 {
    y.iter().map(|&v| log_normal_density(v, mu, log_v)).sum()
}

pub fn write_returns_csv(y: &[f64], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["return"])?;
    for v in y {
        w.serialize(v)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_returns_csv(path: &Path) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize::<f64>().map(|v| v.map_err(LfiError::from)).collect()
}

/// Uniform priors on `ρ ∈ (−0.99, 0.99)`, `σ ∈ (0.01, 2)`, `ω ∈ (−2, 2)`,
/// `μ ∈ (−1, 1)`.
pub fn default_prior() -> Prior {
    Prior::new(vec![
        Dist1d::Uniform { low: -0.99, high: 0.99 },
        Dist1d::Uniform { low: 0.01, high: 2.0 },
        Dist1d::Uniform { low: -2.0, high: 2.0 },
        Dist1d::Uniform { low: -1.0, high: 1.0 },
    ])
    .expect("valid prior")
}

/// Inference model with GARCH summaries and Euclidean distance. Simulated
/// series with non-finite values or no spread count as unphysical.
pub fn model(observed: &[f64], prior: Prior) -> Result<AbcModel> {
    let n = observed.len();
    garch_summary(observed)?;
    let simulator = move |theta: &[f64], rng: &mut StreamRng| -> std::result::Result<Dataset, SimError> {
        let y = sv_simulate(&SvParams::from_theta(theta), n, rng);
        if y.iter().any(|v| !v.is_finite()) {
            return Err(SimError::Unphysical("non-finite return".into()));
        }
        let var = stats::sample_variance(&y);
        if !(var > 0.0 && var.is_finite() && (var * var).is_finite()) {
            return Err(SimError::Unphysical(format!("return variance {var}")));
        }
        Ok(Dataset::vector(y))
    };
    let summary = |d: &Dataset| garch_summary(d.values()).map(|g| g.to_inference_vec()).unwrap_or_else(|_| vec![f64::NAN; 6]);
    AbcModel::new(prior, Arc::new(simulator), Arc::new(summary), DistanceFn::Euclidean, &Dataset::vector(observed.to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;
    use approx::assert_abs_diff_eq;

    #[test]
    fn constant_volatility_moments() {
        let mut rng = SeededRng::new(1).rng();
        let y = sv_simulate(&SvParams::new(0.0, 0.0, 0.0, 0.0), 100_000, &mut rng);
        assert!((stats::sample_variance(&y) - 1.0).abs() < 0.02);
        let y = sv_simulate(&SvParams::new(0.0, 0.0, 0.0, 5.0), 100_000, &mut rng);
        assert!((stats::mean(&y) - 5.0).abs() < 0.02);
    }

    #[test]
    fn log_volatility_autocorrelation() {
        let (_, lv) = sv_simulate_with_volatility(&SvParams::new(0.9, 0.3, -0.5, 0.0), 100_000, &mut SeededRng::new(2).rng());
        let m = stats::mean(&lv);
        let num: f64 = lv.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
        let den: f64 = lv.iter().map(|x| (x - m).powi(2)).sum();
        assert!((num / den - 0.9).abs() < 0.02, "{}", num / den);
    }

    #[test]
    fn same_seed_same_series() {
        let p = SvParams::new(0.8, 0.4, -0.3, 0.01);
        assert_eq!(sv_simulate(&p, 500, &mut SeededRng::new(3).rng()), sv_simulate(&p, 500, &mut SeededRng::new(3).rng()));
    }

    #[test]
    fn garch_on_white_noise() {
        let y = sv_simulate(&SvParams::new(0.0, 0.0, 0.0, 0.0), 5000, &mut SeededRng::new(4).rng());
        let g = garch_summary(&y).unwrap();
        assert!((g.unconditional_variance() - 1.0).abs() < 0.1, "{g:?}");
        assert!(g.alpha >= 0.0 && g.beta >= 0.0 && g.alpha + g.beta <= PERSISTENCE_CAP + 1e-12);
        assert!(garch_summary(&y[..10]).is_err());
    }

    #[test]
    fn garch_scale_equivariance() {
        let y = sv_simulate(&SvParams::new(0.9, 0.3, -0.2, 0.5), 2000, &mut SeededRng::new(5).rng());
        let c = 3.0;
        let yc: Vec<f64> = y.iter().map(|v| v * c).collect();
        let (a, b) = (garch_summary(&y).unwrap(), garch_summary(&yc).unwrap());
        assert!((b.mu / (c * a.mu) - 1.0).abs() < 0.05, "{} {}", a.mu, b.mu);
        let ratio = (b.unconditional_variance() / a.unconditional_variance()).sqrt() / c;
        assert!((ratio - 1.0).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn garch_summaries_concentrate_with_length() {
        let p = SvParams::new(0.9, 0.3, -0.3, 0.0);
        let spread = |n: usize| {
            let mut d: Vec<f64> = (0..20)
                .map(|i| {
                    let a = garch_summary(&sv_simulate(&p, n, &mut SeededRng::new(100 + i).rng())).unwrap().to_vec();
                    let b = garch_summary(&sv_simulate(&p, n, &mut SeededRng::new(200 + i).rng())).unwrap().to_vec();
                    crate::distance::euclidean(&a, &b)
                })
                .collect();
            d.sort_by(f64::total_cmp);
            stats::median(&d)
        };
        assert!(spread(5000) < spread(500));
    }

    #[test]
    fn filter_exact_when_volatility_constant() {
        let p = SvParams::new(0.0, 0.0, 0.0, 0.3);
        let y = sv_simulate(&p, 200, &mut SeededRng::new(6).rng());
        let r = pf_filter(&y, &p, 50, &mut SeededRng::new(7).rng()).unwrap();
        assert_abs_diff_eq!(r.loglik, constant_volatility_loglik(&y, 0.3, 0.0), epsilon = 1e-6);
        assert_abs_diff_eq!(r.weights.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn single_particle_single_observation() {
        let p = SvParams::new(0.5, 0.4, -0.2, 0.1);
        let y = [0.7];
        let r = pf_filter(&y, &p, 1, &mut SeededRng::new(8).rng()).unwrap();
        assert_abs_diff_eq!(r.loglik, log_normal_density(0.7, 0.1, r.log_v[0]), epsilon = 1e-12);
    }

    #[test]
    fn filter_variance_shrinks_with_particles() {
        let p = SvParams::new(0.9, 0.3, -0.2, 0.0);
        let y = sv_simulate(&p, 100, &mut SeededRng::new(9).rng());
        let var = |n: usize| {
            let ll: Vec<f64> = (0..50).map(|s| pf_filter(&y, &p, n, &mut SeededRng::new(1000 + s).rng()).unwrap().loglik).collect();
            stats::sample_variance(&ll)
        };
        assert!(var(1000) < var(100));
    }

    #[test]
    fn filter_average_matches_exact() {
        let p = SvParams::new(0.0, 0.0, 0.2, -0.1);
        let y = sv_simulate(&p, 60, &mut SeededRng::new(10).rng());
        let exact = constant_volatility_loglik(&y, -0.1, 0.2);
        let ll: Vec<f64> = (0..100).map(|s| pf_filter(&y, &p, 20, &mut SeededRng::new(s).rng()).unwrap().loglik).collect();
        let se = (stats::sample_variance(&ll) / 100.0).sqrt();
        assert!((stats::mean(&ll) - exact).abs() <= 3.0 * se + 1e-9);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("y.csv");
        let y = vec![0.01, -0.02, 0.5];
        write_returns_csv(&y, &path).unwrap();
        assert_eq!(read_returns_csv(&path).unwrap(), y);
    }
}
