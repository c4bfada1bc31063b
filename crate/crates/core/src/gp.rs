//! Gaussian-process regression of discrepancies on parameters: the
//! squared-exponential kernel, exact posterior mean and variance through a
//! Cholesky factor, and marginal-likelihood hyperparameter search.

use crate::error::{LfiError, Result};
use crate::optim::{halton, NelderMead};
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Ordered `(θ, discrepancy)` pairs accumulated by the surrogate loop.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvidenceSet {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

impl EvidenceSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, theta: Vec<f64>, value: f64) {
        self.points.push(theta);
        self.values.push(value);
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    /// Index of the smallest value (first one on ties).
    pub fn argmin(&self) -> Option<usize> {
        (0..self.len()).min_by(|&a, &b| self.values[a].total_cmp(&self.values[b]).then(a.cmp(&b)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpHyperparams {
    /// `σ_f²`
    pub signal_variance: f64,
    /// `λ_j`, one per input dimension.
    pub lengthscales: Vec<f64>,
    /// `σ²`
    pub noise_variance: f64,
}

impl GpHyperparams {
    pub fn new(signal_variance: f64, lengthscales: Vec<f64>, noise_variance: f64) -> Self {
        Self { signal_variance, lengthscales, noise_variance }
    }

    fn validate(&self, dims: usize) -> Result<()> {
        if self.lengthscales.len() != dims {
            return Err(LfiError::DimensionMismatch { expected: dims, got: self.lengthscales.len() });
        }
        let ok = self.signal_variance > 0.0
            && self.signal_variance.is_finite()
            && self.noise_variance >= 0.0
            && self.noise_variance.is_finite()
            && self.lengthscales.iter().all(|l| *l > 0.0 && !l.is_nan());
        if ok {
            Ok(())
        } else {
            Err(LfiError::InvalidArgument(format!("invalid GP hyperparameters {self:?}")))
        }
    }
}

/// `σ_f² exp(−Σ_j (a_j − b_j)² / λ_j²)`.
pub fn kernel_se(a: &[f64], b: &[f64], hp: &GpHyperparams) -> f64 {
    let r2: f64 = a
        .iter()
        .zip(b)
        .zip(&hp.lengthscales)
        .map(|((x, y), l)| {
            let d = (x - y) / l;
            d * d
        })
        .sum();
    hp.signal_variance * (-r2).exp()
}

/// Fitted GP over an evidence set with a constant prior mean.
#[derive(Debug, Clone)]
pub struct GpModel {
    hp: GpHyperparams,
    inputs: Vec<Vec<f64>>,
    targets: Vec<f64>,
    mean: f64,
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
    jitter: f64,
}

const JITTER_START: f64 = 1e-8;
const JITTER_MAX: f64 = 1e-2;

/// Cholesky factor of `K + σ² I`, escalating diagonal jitter from
/// `1e-8·σ_f²` (doubling) up to `1e-2·σ_f²`.
fn factorize(inputs: &[Vec<f64>], hp: &GpHyperparams) -> Result<(Cholesky<f64, Dyn>, f64)> {
    let n = inputs.len();
    let mut k = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            let v = kernel_se(&inputs[i], &inputs[j], hp);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
        k[(i, i)] = hp.signal_variance + hp.noise_variance;
    }
    if let Some(c) = Cholesky::new(k.clone()) {
        return Ok((c, 0.0));
    }
    let mut jitter = JITTER_START * hp.signal_variance;
    let cap = JITTER_MAX * hp.signal_variance;
    while jitter <= cap * (1.0 + 1e-12) {
        let mut kj = k.clone();
        for i in 0..n {
            kj[(i, i)] += jitter;
        }
        if let Some(c) = Cholesky::new(kj) {
            return Ok((c, jitter));
        }
        jitter *= 2.0;
    }
    Err(LfiError::FactorizationFailure { jitter: jitter / 2.0 })
}

impl GpModel {
    /// Zero-mean fit.
    pub fn fit(evidence: &EvidenceSet, hp: &GpHyperparams) -> Result<Self> {
        Self::fit_with_mean(evidence, hp, 0.0)
    }

    /// Fit with constant prior mean `mean`.
    pub fn fit_with_mean(evidence: &EvidenceSet, hp: &GpHyperparams, mean: f64) -> Result<Self> {
        if evidence.is_empty() {
            return Err(LfiError::InvalidArgument("GP fit needs at least one evidence point".into()));
        }
        hp.validate(evidence.dims())?;
        if let Some(bad) = evidence.values.iter().find(|v| !v.is_finite()) {
            return Err(LfiError::InvalidArgument(format!("non-finite GP target {bad}")));
        }
        let (chol, jitter) = factorize(&evidence.points, hp)?;
        let y = DVector::from_iterator(evidence.len(), evidence.values.iter().map(|v| v - mean));
        let alpha = chol.solve(&y);
        Ok(Self {
            hp: hp.clone(),
            inputs: evidence.points.clone(),
            targets: evidence.values.clone(),
            mean,
            chol,
            alpha,
            jitter,
        })
    }

    pub fn hyperparams(&self) -> &GpHyperparams {
        &self.hp
    }

    pub fn prior_mean(&self) -> f64 {
        self.mean
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    fn kvec(&self, theta: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.inputs.len(), self.inputs.iter().map(|x| kernel_se(theta, x, &self.hp)))
    }

    /// Posterior mean `μ_t(θ)`.
    pub fn predict_mean(&self, theta: &[f64]) -> f64 {
        self.mean + self.kvec(theta).dot(&self.alpha)
    }

    /// Posterior mean and latent variance `v_t(θ)`, the variance clamped to
    /// `[0, k(θ, θ)]`.
    pub fn predict(&self, theta: &[f64]) -> (f64, f64) {
        let k = self.kvec(theta);
        let mu = self.mean + k.dot(&self.alpha);
        let v = self.chol.l().solve_lower_triangular(&k).expect("non-singular factor");
        let var = (self.hp.signal_variance - v.norm_squared()).clamp(0.0, self.hp.signal_variance);
        (mu, var)
    }

    /// `ln p(y | Θ, hp)` from the stored factorization.
    pub fn log_marginal_likelihood(&self) -> f64 {
        let n = self.inputs.len() as f64;
        let y = DVector::from_iterator(self.targets.len(), self.targets.iter().map(|v| v - self.mean));
        let log_det_half: f64 = self.chol.l().diagonal().iter().map(|d| d.ln()).sum();
        -0.5 * y.dot(&self.alpha) - log_det_half - 0.5 * n * (2.0 * PI).ln()
    }
}

/// Settings for [`optimize_hyperparams_with`].
#[derive(Debug, Clone)]
pub struct HyperSearch {
    /// Number of fresh local searches besides the warm start (at least one,
    /// from the box centre).
    pub starts: usize,
    pub evals_per_start: usize,
    /// Extra starting point, typically the previous fit.
    pub warm_start: Option<GpHyperparams>,
    pub evals_warm_start: usize,
    /// Constant prior mean of the GP being fitted.
    pub mean: f64,
    /// Smallest lengthscale searched, as a fraction of the evidence range
    /// along each axis.
    pub min_lengthscale_fraction: f64,
}

impl Default for HyperSearch {
    fn default() -> Self {
        Self { starts: 5, evals_per_start: 300, warm_start: None, evals_warm_start: 300, mean: 0.0, min_lengthscale_fraction: 1e-3 }
    }
}

/// Search box in log space: `λ_j ∈ [f, 10]·range_j` for the given floor `f`,
/// `σ_f² ∈ [1e-6, 1e3]·var(d)`, `σ² ∈ [1e-6, 1]·var(d)`.
pub fn hyper_bounds(evidence: &EvidenceSet, min_lengthscale_fraction: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = evidence.len();
    let m = evidence.values.iter().sum::<f64>() / n as f64;
    let var = evidence.values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n as f64;
    if !(var > 0.0) {
        return Err(LfiError::DegenerateEvidence);
    }
    let scale = var;
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for j in 0..evidence.dims() {
        let (a, b) = evidence
            .points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p[j]), b.max(p[j])));
        let range = if b > a { b - a } else { 1.0 };
        lo.push((min_lengthscale_fraction * range).ln());
        hi.push((10.0 * range).ln());
    }
    lo.push((1e-6 * scale).ln());
    hi.push((1e3 * scale).ln());
    lo.push((1e-6 * scale).ln());
    hi.push(scale.ln());
    Ok((lo, hi))
}

fn unpack(x: &[f64], dims: usize) -> GpHyperparams {
    GpHyperparams {
        lengthscales: x[..dims].iter().map(|v| v.exp()).collect(),
        signal_variance: x[dims].exp(),
        noise_variance: x[dims + 1].exp(),
    }
}

fn pack(hp: &GpHyperparams) -> Vec<f64> {
    let mut x: Vec<f64> = hp.lengthscales.iter().map(|l| l.ln()).collect();
    x.push(hp.signal_variance.ln());
    x.push(hp.noise_variance.max(1e-300).ln());
    x
}

/// Negative log marginal likelihood, `+inf` when factorization fails.
pub fn neg_log_marginal(evidence: &EvidenceSet, hp: &GpHyperparams, mean: f64) -> f64 {
    match factorize(&evidence.points, hp) {
        Ok((chol, _)) => {
            let n = evidence.len();
            let y = DVector::from_iterator(n, evidence.values.iter().map(|v| v - mean));
            let alpha = chol.solve(&y);
            let log_det_half: f64 = chol.l().diagonal().iter().map(|d| d.ln()).sum();
            0.5 * y.dot(&alpha) + log_det_half + 0.5 * n as f64 * (2.0 * PI).ln()
        }
        Err(_) => f64::INFINITY,
    }
}

/// Maximize the log marginal likelihood of a zero-mean GP with default
/// search settings.
pub fn optimize_hyperparams(evidence: &EvidenceSet) -> Result<GpHyperparams> {
    optimize_hyperparams_with(evidence, &HyperSearch::default())
}

/// Multi-start bounded Nelder–Mead in log-hyperparameter space. Starts are
/// the box centre plus Halton points (and the warm start, if any); the best
/// local optimum wins.
pub fn optimize_hyperparams_with(evidence: &EvidenceSet, search: &HyperSearch) -> Result<GpHyperparams> {
    if evidence.len() < 3 {
        return Err(LfiError::InvalidArgument("hyperparameter search needs at least 3 evidence points".into()));
    }
    let dims = evidence.dims();
    let (lo, hi) = hyper_bounds(evidence, search.min_lengthscale_fraction)?;
    let k = lo.len();
    let step: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.15 * (b - a)).collect();
    let objective = |x: &[f64]| neg_log_marginal(evidence, &unpack(x, dims), search.mean);

    let mut starts: Vec<(Vec<f64>, usize)> = Vec::new();
    if let Some(w) = &search.warm_start {
        if w.lengthscales.len() == dims {
            let mut x = pack(w);
            for j in 0..k {
                x[j] = x[j].clamp(lo[j], hi[j]);
            }
            starts.push((x, search.evals_warm_start));
        }
    }
    // Box centre for lengthscales and signal, with the noise start near the
    // top of its range.
    let mut centre: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
    centre[dims] = hi[dims + 1];
    centre[dims + 1] = lo[dims + 1] + 0.75 * (hi[dims + 1] - lo[dims + 1]);
    starts.push((centre, search.evals_per_start));
    let mut h = 0;
    while starts.len() < search.starts.max(1) + usize::from(search.warm_start.is_some()) {
        let u = halton(h, k);
        h += 1;
        starts.push((lo.iter().zip(&hi).zip(&u).map(|((a, b), u)| a + u * (b - a)).collect(), search.evals_per_start));
    }

    let nm = NelderMead { max_evals: 0, f_tol: 1e-7, x_tol: 1e-5 };
    let mut best: Option<(Vec<f64>, f64)> = None;
    for (x0, budget) in starts {
        let m = NelderMead { max_evals: budget, ..nm }.minimize(objective, &x0, &step, &lo, &hi);
        if best.as_ref().map_or(true, |b| m.value < b.1) {
            best = Some((m.x, m.value));
        }
    }
    let (x, v) = best.expect("at least one start");
    if !v.is_finite() {
        return Err(LfiError::FactorizationFailure { jitter: JITTER_MAX });
    }
    Ok(unpack(&x, dims))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn hp1(noise: f64) -> GpHyperparams {
        GpHyperparams::new(1.0, vec![1.0], noise)
    }

    #[test]
    fn kernel_values() {
        let hp = hp1(0.0);
        assert_eq!(kernel_se(&[0.3], &[0.3], &hp), 1.0);
        assert_abs_diff_eq!(kernel_se(&[0.0], &[1.0], &hp), (-1.0f64).exp(), epsilon = 1e-15);
        let flat = GpHyperparams::new(2.0, vec![1e12], 0.0);
        assert_abs_diff_eq!(kernel_se(&[0.0], &[50.0], &flat), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn single_point_algebra() {
        let mut ev = EvidenceSet::new();
        ev.push(vec![0.0], 2.0);
        let gp = GpModel::fit(&ev, &hp1(0.0)).unwrap();
        let (m0, v0) = gp.predict(&[0.0]);
        assert_abs_diff_eq!(m0, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v0, 0.0, epsilon = 1e-12);
        let (m1, v1) = gp.predict(&[1.0]);
        assert_abs_diff_eq!(m1, 2.0 * (-1.0f64).exp(), epsilon = 1e-12);
        assert_abs_diff_eq!(v1, 1.0 - (-2.0f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn duplicated_inputs_use_jitter() {
        let mut ev = EvidenceSet::new();
        ev.push(vec![0.5], 1.0);
        ev.push(vec![0.5], 1.0);
        ev.push(vec![0.5], 1.0);
        let gp = GpModel::fit(&ev, &hp1(0.0)).unwrap();
        let (m, v) = gp.predict(&[0.5]);
        assert!((m - 1.0).abs() < 1e-4 && v >= 0.0);
    }

    #[test]
    fn reverts_to_prior_far_away() {
        let mut ev = EvidenceSet::new();
        ev.push(vec![0.0], 3.0);
        ev.push(vec![0.5], -1.0);
        let gp = GpModel::fit(&ev, &GpHyperparams::new(1.5, vec![0.3], 0.01)).unwrap();
        let (m, v) = gp.predict(&[20.0]);
        assert!(m.abs() < 1e-3 * 3.0);
        assert_abs_diff_eq!(v, 1.5, epsilon = 1e-9);
    }

    #[test]
    fn interpolates_training_inputs() {
        let mut ev = EvidenceSet::new();
        for (x, y) in [(0.0, 1.0), (0.7, -0.4), (1.9, 2.2)] {
            ev.push(vec![x], y);
        }
        let gp = GpModel::fit(&ev, &hp1(0.0)).unwrap();
        for (x, y) in ev.points.iter().zip(&ev.values) {
            let (m, v) = gp.predict(x);
            assert!((m - y).abs() < 1e-8 && v < 1e-8);
        }
    }

    #[test]
    fn symmetric_midpoint() {
        let mut ev = EvidenceSet::new();
        ev.push(vec![-1.0], 1.0);
        ev.push(vec![1.0], 3.0);
        let hp = hp1(0.0);
        let gp = GpModel::fit(&ev, &hp).unwrap();
        // k_t = (c, c), K = [[1, e^-4], [e^-4, 1]] ⇒ μ = c (d1 + d2) / (1 + e^-4).
        let c = (-1.0f64).exp();
        let expect = c * (1.0 + 3.0) / (1.0 + (-4.0f64).exp());
        assert_abs_diff_eq!(gp.predict_mean(&[0.0]), expect, epsilon = 1e-12);
    }

    #[test]
    fn constant_targets_are_degenerate() {
        let mut ev = EvidenceSet::new();
        for x in 0..5 {
            ev.push(vec![x as f64], 1.0);
        }
        assert!(matches!(optimize_hyperparams(&ev), Err(LfiError::DegenerateEvidence)));
    }
}
