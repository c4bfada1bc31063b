//! Bayesian optimization for likelihood-free inference.
//!
//! A GP is fitted to simulated discrepancies; new simulation sites are
//! chosen by a lower-confidence-bound acquisition with a truncated-normal
//! perturbation, and the final GP yields a surrogate likelihood that is
//! sampled with adaptive Metropolis–Hastings.

use crate::error::{LfiError, Result, SimError};
use crate::gp::{optimize_hyperparams_with, EvidenceSet, GpHyperparams, GpModel, HyperSearch};
use crate::model::AbcModel;
use crate::optim::NelderMead;
use crate::prior::sample_truncated_normal;
use crate::rng::SeededRng;
use crate::sampler::{mh_sample, Chain, MhOptions};
use crate::space::BoundedSpace;
use crate::stats::log_norm_cdf;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Scalar or per-dimension acquisition noise variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AcqNoise {
    Scalar(f64),
    PerDim(Vec<f64>),
}

impl AcqNoise {
    pub fn get(&self, j: usize) -> f64 {
        match self {
            AcqNoise::Scalar(v) => *v,
            AcqNoise::PerDim(v) => v[j],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BolfiConfig {
    pub n_init: usize,
    pub n_evidence: usize,
    pub update_interval: usize,
    pub acq_noise_variance: AcqNoise,
    #[serde(default = "default_epsilon_eta")]
    pub epsilon_eta: f64,
    pub space: BoundedSpace,
    /// Model `ln d` instead of `d`.
    #[serde(default)]
    pub log_discrepancy: bool,
    pub n_sample: usize,
    /// Uniform random starts for the acquisition search.
    #[serde(default = "default_acq_starts")]
    pub acq_starts: usize,
    /// Nelder–Mead evaluation budget per hyperparameter start.
    #[serde(default = "default_hyper_evals")]
    pub hyper_evals: usize,
    /// Fresh hyperparameter starts on the first fit.
    #[serde(default = "default_hyper_starts")]
    pub hyper_starts: usize,
    /// Fresh starts on later refits, which also search from the previous optimum.
    #[serde(default = "default_refit_starts")]
    pub refit_starts: usize,
    /// Lower bound of the lengthscale search as a fraction of the range
    /// covered by the evidence along each axis.
    #[serde(default = "default_min_lengthscale_fraction")]
    pub min_lengthscale_fraction: f64,
    #[serde(default = "MhOptions::surrogate")]
    pub sampler: MhOptions,
}

fn default_epsilon_eta() -> f64 {
    0.1
}

fn default_acq_starts() -> usize {
    10
}

fn default_hyper_evals() -> usize {
    200
}

fn default_hyper_starts() -> usize {
    5
}

fn default_refit_starts() -> usize {
    1
}

fn default_min_lengthscale_fraction() -> f64 {
    MIN_LENGTHSCALE_FRACTION
}

pub const MIN_LENGTHSCALE_FRACTION: f64 = 1e-3;

impl BolfiConfig {
    pub fn new(
        n_init: usize,
        n_evidence: usize,
        update_interval: usize,
        acq_noise_variance: f64,
        space: BoundedSpace,
        n_sample: usize,
    ) -> Self {
        Self {
            n_init,
            n_evidence,
            update_interval,
            acq_noise_variance: AcqNoise::Scalar(acq_noise_variance),
            epsilon_eta: default_epsilon_eta(),
            space,
            log_discrepancy: false,
            n_sample,
            acq_starts: default_acq_starts(),
            hyper_evals: default_hyper_evals(),
            hyper_starts: default_hyper_starts(),
            refit_starts: default_refit_starts(),
            min_lengthscale_fraction: default_min_lengthscale_fraction(),
            sampler: MhOptions::surrogate(),
        }
    }

    pub fn validate(&self, dims: usize) -> Result<()> {
        let bad = |m: &str| Err(LfiError::InvalidConfig(m.into()));
        if self.space.dims() != dims {
            return Err(LfiError::DimensionMismatch { expected: dims, got: self.space.dims() });
        }
        if self.n_init < 1 {
            return bad("n_init must be at least 1");
        }
        if self.n_evidence <= self.n_init {
            return bad("n_evidence must exceed n_init");
        }
        if self.update_interval < 1 {
            return bad("update_interval must be at least 1");
        }
        match &self.acq_noise_variance {
            AcqNoise::Scalar(v) if !(*v > 0.0 && v.is_finite()) => return bad("acq_noise_variance must be positive"),
            AcqNoise::PerDim(v) if v.len() != dims => {
                return Err(LfiError::DimensionMismatch { expected: dims, got: v.len() })
            }
            AcqNoise::PerDim(v) if v.iter().any(|x| !(*x > 0.0 && x.is_finite())) => {
                return bad("acq_noise_variance must be positive")
            }
            _ => {}
        }
        if !(self.epsilon_eta > 0.0 && self.epsilon_eta.is_finite()) {
            return bad("epsilon_eta must be positive");
        }
        if !(self.min_lengthscale_fraction > 0.0 && self.min_lengthscale_fraction < 10.0) {
            return bad("min_lengthscale_fraction must lie in (0, 10)");
        }
        if self.n_sample < 1 {
            return bad("n_sample must be at least 1");
        }
        if self.acq_starts < 1 || self.hyper_evals < 1 || self.hyper_starts < 1 || self.refit_starts < 1 {
            return bad("acq_starts, hyper_evals, hyper_starts and refit_starts must be positive");
        }
        Ok(())
    }
}

/// `Φ((h − μ(θ)) / √(v(θ) + σ²))` around a fitted GP.
#[derive(Debug, Clone)]
pub struct SurrogateLikelihood {
    pub gp: GpModel,
    pub threshold: f64,
}

impl SurrogateLikelihood {
    pub fn loglik(&self, theta: &[f64]) -> f64 {
        surrogate_loglik(self, theta)
    }
}

/// Exploration coefficient `η²_t`, clamped at zero.
pub fn eta_sq(t: usize, d: usize, epsilon_eta: f64) -> f64 {
    let v = 2.0 * ((d as f64 / 2.0 + 2.0) * (t as f64).ln() + (PI * PI).ln() - (3.0 * epsilon_eta).ln());
    v.max(0.0)
}

/// Lower confidence bound `μ_t(θ) − √(η²_t v_t(θ))`.
pub fn acquisition_lcbsc(gp: &GpModel, theta: &[f64], t: usize, epsilon_eta: f64) -> f64 {
    let (mu, v) = gp.predict(theta);
    lcb(mu, v, eta_sq(t, theta.len(), epsilon_eta))
}

fn lcb(mu: f64, v: f64, eta2: f64) -> f64 {
    mu - (eta2 * v).sqrt()
}

fn local_search() -> NelderMead {
    NelderMead { max_evals: 400, f_tol: 1e-12, x_tol: 1e-7 }
}

/// Minimize `f` over the box from the given starts; first best wins.
fn multi_start_min<F: Fn(&[f64]) -> f64>(f: F, starts: &[Vec<f64>], space: &BoundedSpace) -> (Vec<f64>, f64) {
    let nm = local_search();
    let step: Vec<f64> = (0..space.dims()).map(|j| 0.1 * space.range(j)).collect();
    let x_tol = (0..space.dims()).map(|j| space.range(j)).fold(0.0, f64::max) * nm.x_tol;
    let nm = NelderMead { x_tol, ..nm };
    let mut best = (starts[0].clone(), f64::INFINITY);
    for s in starts {
        let m = nm.minimize(&f, s, &step, space.lower(), space.upper());
        if m.value < best.1 {
            best = (m.x, m.value);
        }
    }
    best
}

/// Minimizer `θ̂_t` of the acquisition over the box.
pub fn acquisition_argmin(
    gp: &GpModel,
    space: &BoundedSpace,
    t: usize,
    epsilon_eta: f64,
    n_starts: usize,
    rng: SeededRng,
) -> Vec<f64> {
    let p = space.dims();
    let eta2 = eta_sq(t, p, epsilon_eta);
    let mut r = rng.rng();
    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(n_starts + 1);
    if let Some(best) = best_evidence_point(gp) {
        starts.push(best);
    }
    for _ in 0..n_starts {
        let u: Vec<f64> = (0..p).map(|_| r.random::<f64>()).collect();
        starts.push(space.from_unit(&u));
    }
    multi_start_min(
        |x| {
            let (mu, v) = gp.predict(x);
            lcb(mu, v, eta2)
        },
        &starts,
        space,
    )
    .0
}

fn best_evidence_point(gp: &GpModel) -> Option<Vec<f64>> {
    gp.targets()
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| gp.inputs()[i].clone())
}

/// Next simulation site: the acquisition minimizer perturbed by an
/// independent truncated normal in each coordinate.
pub fn propose_next(
    gp: &GpModel,
    space: &BoundedSpace,
    t: usize,
    acq_noise: &AcqNoise,
    epsilon_eta: f64,
    n_starts: usize,
    rng: SeededRng,
) -> Vec<f64> {
    let centre = acquisition_argmin(gp, space, t, epsilon_eta, n_starts, rng.split_named("argmin", 0));
    let mut r = rng.split_named("perturb", 0).rng();
    centre
        .iter()
        .enumerate()
        .map(|(j, &c)| {
            let x = sample_truncated_normal(c, acq_noise.get(j).sqrt(), space.lower()[j], space.upper()[j], &mut r);
            x.clamp(space.lower()[j], space.upper()[j])
        })
        .collect()
}

/// `ln Φ((h − μ) / √(v + σ²))`.
pub fn surrogate_loglik(sl: &SurrogateLikelihood, theta: &[f64]) -> f64 {
    let (mu, v) = sl.gp.predict(theta);
    threshold_loglik(mu, v + sl.gp.hyperparams().noise_variance, sl.threshold)
}

/// `ln Φ((h − μ) / √total)`; a zero total variance gives a step function.
pub fn threshold_loglik(mu: f64, total_variance: f64, threshold: f64) -> f64 {
    if !(total_variance > 0.0) {
        return if mu <= threshold { 0.0 } else { f64::NEG_INFINITY };
    }
    log_norm_cdf((threshold - mu) / total_variance.sqrt())
}

/// `h = min μ(θ)` over the box: a 10⁴-point grid for `p ≤ 2`, otherwise
/// multi-start local search from the evidence minimum and Halton points.
pub fn mean_minimum(gp: &GpModel, space: &BoundedSpace) -> f64 {
    let p = space.dims();
    match p {
        1 => {
            let n = 10_000;
            (0..n)
                .map(|i| gp.predict_mean(&space.from_unit(&[i as f64 / (n - 1) as f64])))
                .fold(f64::INFINITY, f64::min)
        }
        2 => {
            let n = 100;
            let mut best = f64::INFINITY;
            for i in 0..n {
                for k in 0..n {
                    let u = [i as f64 / (n - 1) as f64, k as f64 / (n - 1) as f64];
                    best = best.min(gp.predict_mean(&space.from_unit(&u)));
                }
            }
            best
        }
        _ => {
            let mut starts: Vec<Vec<f64>> = best_evidence_point(gp).into_iter().collect();
            for h in 1..=20 {
                starts.push(space.from_unit(&crate::optim::halton(h, p)));
            }
            multi_start_min(|x| gp.predict_mean(x), &starts, space).1
        }
    }
}

#[derive(Debug, Clone)]
pub struct BolfiResult {
    pub gp: GpModel,
    pub surrogate: SurrogateLikelihood,
    /// Evidence on the modelled scale (`ln d` when log_discrepancy is set).
    pub evidence: EvidenceSet,
    pub posterior: Chain,
    pub sim_calls: u64,
    pub hyperparams: GpHyperparams,
}

/// Targets for the GP: a `-inf` log-discrepancy (an exact match) is
/// replaced by one unit below the smallest finite target.
fn gp_evidence(evidence: &EvidenceSet) -> EvidenceSet {
    if evidence.values.iter().all(|v| v.is_finite()) {
        return evidence.clone();
    }
    let floor = evidence.values.iter().copied().filter(|v| v.is_finite()).fold(f64::INFINITY, f64::min);
    let floor = if floor.is_finite() { floor - 1.0 } else { 0.0 };
    EvidenceSet {
        points: evidence.points.clone(),
        values: evidence.values.iter().map(|&v| if v.is_finite() { v } else { floor }).collect(),
    }
}

fn evidence_mean(ev: &EvidenceSet) -> f64 {
    ev.values.iter().sum::<f64>() / ev.len() as f64
}

struct Fitter {
    hyper_evals: usize,
    hyper_starts: usize,
    refit_starts: usize,
    min_lengthscale_fraction: f64,
    hp: Option<GpHyperparams>,
    mean: f64,
}

impl Fitter {
    fn refit(&mut self, ev: &EvidenceSet) -> Result<GpModel> {
        let ev = gp_evidence(ev);
        self.mean = evidence_mean(&ev);
        let search = HyperSearch {
            starts: if self.hp.is_none() { self.hyper_starts } else { self.refit_starts },
            evals_per_start: self.hyper_evals,
            warm_start: self.hp.clone(),
            evals_warm_start: self.hyper_evals,
            mean: self.mean,
            min_lengthscale_fraction: self.min_lengthscale_fraction,
        };
        let hp = optimize_hyperparams_with(&ev, &search)?;
        self.hp = Some(hp.clone());
        GpModel::fit_with_mean(&ev, &hp, self.mean)
    }

    fn condition(&self, ev: &EvidenceSet) -> Result<GpModel> {
        let hp = self.hp.as_ref().expect("hyperparameters fitted before conditioning");
        GpModel::fit_with_mean(&gp_evidence(ev), hp, self.mean)
    }
}

fn evaluate(model: &AbcModel, theta: &[f64], log: bool, rng: &SeededRng) -> Result<f64> {
    let d = model.discrepancy(theta, &mut rng.rng())?;
    if d == f64::INFINITY || d.is_nan() {
        return Err(LfiError::Simulator {
            theta: theta.to_vec(),
            source: SimError::Unphysical(format!("discrepancy {d}")),
        });
    }
    Ok(if log { d.ln() } else { d })
}

fn initial_point(model: &AbcModel, space: &BoundedSpace, rng: &mut impl Rng) -> Result<Vec<f64>> {
    for _ in 0..100_000 {
        let theta = model.prior.sample(rng);
        if space.contains(&theta) {
            return Ok(theta);
        }
    }
    Err(LfiError::InvalidConfig("prior puts almost no mass inside the BOLFI bounds".into()))
}

/// Run the full pipeline: initial prior design, acquisition loop, surrogate
/// construction and posterior sampling. Exactly `n_evidence` simulator calls
/// are made.
pub fn bolfi_run(model: &AbcModel, cfg: &BolfiConfig, rng: SeededRng) -> Result<BolfiResult> {
    let p = model.dims();
    cfg.validate(p)?;
    let space = &cfg.space;

    let init: Vec<(Vec<f64>, f64)> = (0..cfg.n_init)
        .into_par_iter()
        .map(|i| {
            let stream = rng.split_named("bolfi-init", i as u64);
            let theta = initial_point(model, space, &mut stream.split_named("theta", 0).rng())?;
            let d = evaluate(model, &theta, cfg.log_discrepancy, &stream.split_named("sim", 0))?;
            Ok((theta, d))
        })
        .collect::<Vec<Result<_>>>()
        .into_iter()
        .collect::<Result<_>>()?;
    let mut evidence = EvidenceSet::new();
    for (theta, d) in init {
        evidence.push(theta, d);
    }
    let mut fitter = Fitter {
        hyper_evals: cfg.hyper_evals,
        hyper_starts: cfg.hyper_starts,
        refit_starts: cfg.refit_starts,
        min_lengthscale_fraction: cfg.min_lengthscale_fraction,
        hp: None, mean: 0.0 };
    let mut gp = fitter.refit(&evidence)?;
    let mut fresh = true;

    for t in (cfg.n_init + 1)..=cfg.n_evidence {
        let stream = rng.split_named("bolfi-acq", t as u64);
        let theta = propose_next(
            &gp,
            space,
            evidence.len(),
            &cfg.acq_noise_variance,
            cfg.epsilon_eta,
            cfg.acq_starts,
            stream,
        );
        let d = evaluate(model, &theta, cfg.log_discrepancy, &stream.split_named("sim", 0))?;
        evidence.push(theta, d);
        if (t - cfg.n_init) % cfg.update_interval == 0 {
            gp = fitter.refit(&evidence)?;
            fresh = true;
        } else {
            gp = fitter.condition(&evidence)?;
            fresh = false;
        }
    }
    if !fresh {
        gp = fitter.refit(&evidence)?;
    }

    let threshold = mean_minimum(&gp, space);
    let surrogate = SurrogateLikelihood { gp: gp.clone(), threshold };
    let start = gp
        .inputs()
        .iter()
        .map(|x| (x, gp.predict_mean(x)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(x, _)| x.clone())
        .expect("non-empty evidence");
    let prior = &model.prior;
    let posterior = mh_sample(
        |x| surrogate.loglik(x) + prior.ln_pdf_unchecked(x),
        &start,
        space,
        cfg.n_sample,
        rng.split_named("bolfi-mh", 0),
        &cfg.sampler,
    )?;
    Ok(BolfiResult {
        hyperparams: gp.hyperparams().clone(),
        gp,
        surrogate,
        evidence,
        posterior,
        sim_calls: cfg.n_evidence as u64,
    })
}
