//! Batch experiments: a strict TOML configuration pairing a study with an
//! inference method, a runner that writes posterior samples, summaries and
//! study-specific reports, and run manifests with output checksums.
//!
//! Every random stream is derived from the single `seed` in the
//! configuration: `observed` for synthetic data, `inference` for the
//! algorithm, and `forecast` or `portfolio` for predictive outputs.

use crate::bolfi::{bolfi_run, BolfiConfig};
use crate::error::{LfiError, Result};
use crate::model::AbcModel;
use crate::pmc::{abc_pmc, PmcConfig};
use crate::predict::{optimal_alpha, posterior_predictive, sv_predictive_draws, PortfolioConfig};
use crate::prior::{Dist1d, Prior};
use crate::rejection::{nn_rejection, run_rejection, NnConfig, RejectionConfig};
use crate::rng::{SeededRng, StreamRng};
use crate::sample::WeightedSample;
use crate::sims::ebola::{self, CaseSeries, EbolaConfig, EbolaStudy};
use crate::sims::supernova::{self, CosmologyParams, SupernovaDataset, SupernovaDesign};
use crate::sims::sv::{self, SvParams};
use crate::sims::toy;
use crate::stats;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Environment variable overriding the worker-thread count.
pub const WORKERS_ENV: &str = "LFI_WORKERS";

pub const SAMPLES_FILE: &str = "posterior_samples.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.json";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Relative paths are resolved against the configuration file's directory.
    pub output_dir: PathBuf,
    pub study: StudyConfig,
    pub method: MethodConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum StudyConfig {
    Toy(ToyStudy),
    Ebola(EbolaStudyConfig),
    Supernova(SupernovaStudyConfig),
    SvPortfolio(SvStudyConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToyStudy {
    pub y_obs: f64,
}

impl Default for ToyStudy {
    fn default() -> Self {
        Self { y_obs: 0.0 }
    }
}

/// Synthetic data are simulated at `r0` unless `observed_csv` is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EbolaStudyConfig {
    pub r0: f64,
    /// Synthetic windows start on the first day the cumulative count exceeds this.
    pub first_count: u64,
    pub n_days: usize,
    pub observed_csv: Option<PathBuf>,
    pub prior: Option<Vec<Dist1d>>,
    pub simulator: EbolaConfig,
    pub forecast_horizon: usize,
    pub forecast_trajectories: usize,
}

impl Default for EbolaStudyConfig {
    fn default() -> Self {
        Self {
            r0: 1.7,
            first_count: 49,
            n_days: 9,
            observed_csv: None,
            prior: None,
            simulator: EbolaConfig::default(),
            forecast_horizon: 30,
            forecast_trajectories: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SupernovaStudyConfig {
    pub omega_m: f64,
    pub w0: f64,
    pub design: SupernovaDesign,
    pub observed_csv: Option<PathBuf>,
    pub prior: Option<Vec<Dist1d>>,
}

impl Default for SupernovaStudyConfig {
    fn default() -> Self {
        let p = CosmologyParams::fiducial();
        Self { omega_m: p.omega_m, w0: p.w0, design: SupernovaDesign::default(), observed_csv: None, prior: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SvStudyConfig {
    pub rho: f64,
    pub sigma: f64,
    pub omega: f64,
    pub mu: f64,
    pub n_obs: usize,
    pub returns_csv: Option<PathBuf>,
    pub prior: Option<Vec<Dist1d>>,
    pub portfolio: PortfolioConfig,
    pub pf_particles: usize,
}

impl Default for SvStudyConfig {
    fn default() -> Self {
        Self {
            rho: 0.9,
            sigma: 0.3,
            omega: -0.64,
            mu: 0.006,
            n_obs: 324,
            returns_csv: None,
            prior: None,
            portfolio: PortfolioConfig::default(),
            pf_particles: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum MethodConfig {
    Rejection(FixedRejection),
    NnRejection(NnConfig),
    Pmc(PmcConfig),
    Bolfi(BolfiConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedRejection {
    pub n_accept: usize,
    pub epsilon: f64,
    #[serde(default = "default_max_attempts")]
    pub max_attempts_per_accept: u64,
}

fn default_max_attempts() -> u64 {
    crate::rejection::DEFAULT_MAX_ATTEMPTS
}

impl FixedRejection {
    fn to_config(&self) -> RejectionConfig {
        RejectionConfig { max_attempts_per_accept: self.max_attempts_per_accept, ..RejectionConfig::fixed(self.n_accept, self.epsilon) }
    }
}

impl StudyConfig {
    pub fn name(&self) -> &'static str {
        match self {
            StudyConfig::Toy(_) => "toy",
            StudyConfig::Ebola(_) => "ebola",
            StudyConfig::Supernova(_) => "supernova",
            StudyConfig::SvPortfolio(_) => "sv-portfolio",
        }
    }

    pub fn parameter_names(&self) -> &'static [&'static str] {
        match self {
            StudyConfig::Toy(_) => &["theta"],
            StudyConfig::Ebola(_) => &["r0"],
            StudyConfig::Supernova(_) => &["omega_m", "w0"],
            StudyConfig::SvPortfolio(_) => &["rho", "sigma", "omega", "mu"],
        }
    }

    pub fn prior(&self) -> Result<Prior> {
        let custom = match self {
            StudyConfig::Toy(_) => return Ok(toy::prior()),
            StudyConfig::Ebola(s) => &s.prior,
            StudyConfig::Supernova(s) => &s.prior,
            StudyConfig::SvPortfolio(s) => &s.prior,
        };
        match custom {
            Some(components) => Prior::new(components.clone()),
            None => Ok(match self {
                StudyConfig::Ebola(_) => ebola::default_prior(),
                StudyConfig::Supernova(_) => supernova::default_prior(),
                _ => sv::default_prior(),
            }),
        }
    }

    fn validate(&self) -> Result<()> {
        let prior = self.prior()?;
        let dims = self.parameter_names().len();
        if prior.dims() != dims {
            return Err(LfiError::InvalidConfig(format!("{} prior needs {dims} components, got {}", self.name(), prior.dims())));
        }
        match self {
            StudyConfig::Toy(s) => check(s.y_obs.is_finite(), "toy y_obs must be finite"),
            StudyConfig::Ebola(s) => {
                s.simulator.validate()?;
                check(s.r0 > 0.0 && s.r0.is_finite(), "ebola r0 must be positive")?;
                check(s.n_days >= 2, "ebola n_days must be at least 2")?;
                check(s.forecast_trajectories >= 1, "ebola forecast_trajectories must be positive")
            }
            StudyConfig::Supernova(s) => {
                check(s.omega_m.is_finite() && s.w0.is_finite(), "supernova parameters must be finite")?;
                check(s.design.n_sn >= 2 * s.design.bins && s.design.bins >= 1, "supernova design needs bins >= 1 and n_sn >= 2 bins")?;
                check(s.design.z_low > 0.0 && s.design.z_low < s.design.z_high, "supernova redshift range must satisfy 0 < z_low < z_high")
            }
            StudyConfig::SvPortfolio(s) => {
                SvParams::new(s.rho, s.sigma, s.omega, s.mu).validate()?;
                s.portfolio.validate()?;
                check(s.n_obs >= 50, "sv n_obs must be at least 50")?;
                check(s.pf_particles >= 1, "sv pf_particles must be positive")
            }
        }
    }
}

impl MethodConfig {
    pub fn name(&self) -> &'static str {
        match self {
            MethodConfig::Rejection(_) => "rejection",
            MethodConfig::NnRejection(_) => "nn-rejection",
            MethodConfig::Pmc(_) => "pmc",
            MethodConfig::Bolfi(_) => "bolfi",
        }
    }

    fn validate(&self, dims: usize) -> Result<()> {
        match self {
            MethodConfig::Rejection(r) => r.to_config().validate(),
            MethodConfig::NnRejection(n) => n.validate(),
            MethodConfig::Pmc(p) => p.validate(),
            MethodConfig::Bolfi(b) => b.validate(dims),
        }
    }
}

fn check(ok: bool, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(LfiError::InvalidConfig(msg.into()))
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| LfiError::InvalidConfig(e.to_string()))
    }

    /// Parse and validate a configuration file, resolving relative paths
    /// against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| LfiError::InvalidConfig(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.output_dir);
        match &mut self.study {
            StudyConfig::Ebola(s) => s.observed_csv.iter_mut().for_each(fix),
            StudyConfig::Supernova(s) => s.observed_csv.iter_mut().for_each(fix),
            StudyConfig::SvPortfolio(s) => s.returns_csv.iter_mut().for_each(fix),
            StudyConfig::Toy(_) => {}
        }
    }

    /// Schema-level checks that need no simulation. Every failure is an
    /// [`LfiError::InvalidConfig`].
    pub fn validate(&self) -> Result<()> {
        let as_config = |e: LfiError| match e {
            LfiError::InvalidConfig(_) => e,
            other => LfiError::InvalidConfig(other.to_string()),
        };
        self.study.validate().map_err(as_config)?;
        self.method.validate(self.study.parameter_names().len()).map_err(as_config)
    }

    /// SHA-256 of the canonical JSON form of the configuration.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("configuration serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

/// Marginal statistics for one parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSummary {
    pub name: String,
    pub mean: f64,
    pub median: f64,
    pub central90: [f64; 2],
    pub hpd90: [f64; 2],
}

/// Contents of `summary.json`. Every statistic is a function of
/// `posterior_samples.csv`; wall-clock time lives in the manifest so that
/// reruns produce identical files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub study: String,
    pub method: String,
    pub seed: u64,
    pub n_draws: usize,
    pub sim_calls: u64,
    pub parameters: Vec<ParameterSummary>,
}

pub fn summarize(sample: &WeightedSample, names: &[&str]) -> Result<Vec<ParameterSummary>> {
    names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let xs = sample.column(j);
            let ws = &sample.weights;
            let (clo, chi) = stats::central_interval(&xs, Some(ws), 0.9);
            let (hlo, hhi) = stats::hpd_interval(&xs, Some(ws), 0.9)?;
            Ok(ParameterSummary {
                name: (*name).to_string(),
                mean: stats::weighted_mean(&xs, ws),
                median: stats::weighted_quantile(&xs, ws, 0.5),
                central90: [clo, chi],
                hpd90: [hlo, hhi],
            })
        })
        .collect()
}

/// Written last, after every other output is in place.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub study: String,
    pub method: String,
    pub seed: u64,
    pub config_hash: String,
    pub wall_clock_seconds: f64,
    pub sim_calls: u64,
    pub library_version: String,
    /// File name to SHA-256 of its contents.
    pub checksums: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| LfiError::InvalidArgument(format!("{}: {e}", path.display())))
    }
}

/// Observed data for a study, either loaded or simulated at the configured truth.
enum Observed {
    Toy(f64),
    Ebola(EbolaStudy),
    Supernova(SupernovaDataset),
    Sv(Vec<f64>),
}

impl Observed {
    fn build(study: &StudyConfig, rng: &SeededRng) -> Result<Self> {
        let mut r = rng.split_named("observed", 0).rng();
        Ok(match study {
            StudyConfig::Toy(s) => Observed::Toy(s.y_obs),
            StudyConfig::Ebola(s) => match &s.observed_csv {
                Some(p) => Observed::Ebola(EbolaStudy { observed: CaseSeries::read_csv(p)?, cfg: s.simulator.clone() }),
                None => Observed::Ebola(EbolaStudy::synthetic(s.r0, s.first_count, s.n_days, s.simulator.clone(), &mut r)?),
            },
            StudyConfig::Supernova(s) => match &s.observed_csv {
                Some(p) => Observed::Supernova(SupernovaDataset::read_csv(p)?),
                None => Observed::Supernova(supernova::supernova_simulate(&CosmologyParams::new(s.omega_m, s.w0), &s.design, &mut r)?),
            },
            StudyConfig::SvPortfolio(s) => match &s.returns_csv {
                Some(p) => Observed::Sv(sv::read_returns_csv(p)?),
                None => Observed::Sv(sv::sv_simulate(&SvParams::new(s.rho, s.sigma, s.omega, s.mu), s.n_obs, &mut r)),
            },
        })
    }

    fn model(&self, study: &StudyConfig) -> Result<AbcModel> {
        let prior = study.prior()?;
        match (self, study) {
            (Observed::Toy(y), _) => Ok(toy::model(*y)),
            (Observed::Ebola(e), _) => e.model(prior),
            (Observed::Supernova(d), StudyConfig::Supernova(s)) => supernova::model(d, &s.design, prior),
            (Observed::Sv(y), _) => sv::model(y, prior),
            _ => unreachable!("observed data built from the same study"),
        }
    }

    fn write(&self, dir: &Path) -> Result<Option<&'static str>> {
        let name = "observed.csv";
        match self {
            Observed::Toy(_) => return Ok(None),
            Observed::Ebola(e) => e.observed.write_csv(&dir.join(name))?,
            Observed::Supernova(d) => d.write_csv(&dir.join(name))?,
            Observed::Sv(y) => sv::write_returns_csv(y, &dir.join(name))?,
        }
        Ok(Some(name))
    }
}

/// Posterior sample plus method-specific diagnostics.
fn infer(model: &AbcModel, method: &MethodConfig, rng: SeededRng) -> Result<(WeightedSample, serde_json::Value)> {
    Ok(match method {
        MethodConfig::Rejection(r) => {
            let s = run_rejection(model, &r.to_config(), rng)?;
            let diag = serde_json::json!({ "max_accepted_distance": s.distances.iter().copied().fold(f64::NEG_INFINITY, f64::max) });
            (s, diag)
        }
        MethodConfig::NnRejection(n) => {
            let s = nn_rejection(model, n, rng)?;
            let diag = serde_json::json!({ "max_accepted_distance": s.distances.iter().copied().fold(f64::NEG_INFINITY, f64::max) });
            (s, diag)
        }
        MethodConfig::Pmc(p) => {
            let res = abc_pmc(model, p, rng)?;
            let diag = serde_json::json!({
                "epsilons": res.epsilons,
                "sim_calls_per_iteration": res.sim_calls_per_iteration,
                "stopped_early": res.stopped_early,
            });
            (res.to_sample(), diag)
        }
        MethodConfig::Bolfi(b) => {
            let res = bolfi_run(model, b, rng)?;
            let mut s = res.posterior.to_sample();
            s.sim_calls = res.sim_calls;
            let diag = serde_json::json!({
                "threshold": res.surrogate.threshold,
                "hyperparams": res.hyperparams,
                "gp_prior_mean": res.gp.prior_mean(),
                "evidence_size": res.evidence.len(),
                "mh_acceptance_rate": res.posterior.acceptance_rate,
                "mh_burn_in": res.posterior.burn_in,
            });
            (s, diag)
        }
    })
}

fn write_samples(sample: &WeightedSample, names: &[&str], path: &Path) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
    let mut header = vec!["index".to_string()];
    header.extend(names.iter().map(|n| (*n).to_string()));
    header.push("weight".into());
    w.write_record(&header)?;
    for (i, (d, wt)) in sample.draws.iter().zip(&sample.weights).enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(d.iter().map(|x| x.to_string()));
        row.push(wt.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Read back a posterior written by a run.
pub fn read_samples(path: &Path) -> Result<WeightedSample> {
    let mut r = csv::Reader::from_path(path)?;
    let mut draws = Vec::new();
    let mut weights = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let vals: Vec<f64> = rec
            .iter()
            .skip(1)
            .map(|v| v.parse::<f64>().map_err(|e| LfiError::InvalidArgument(format!("bad number {v:?}: {e}"))))
            .collect::<Result<_>>()?;
        let (theta, w) = vals.split_at(vals.len().saturating_sub(1));
        draws.push(theta.to_vec());
        weights.push(w.first().copied().unwrap_or(f64::NAN));
    }
    Ok(WeightedSample { draws, weights, distances: Vec::new(), sim_calls: 0 })
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| LfiError::InvalidArgument(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn sha256_file(path: &Path) -> Result<String> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}

/// Study-specific predictive outputs: forecast bands for the epidemic,
/// an allocation report for the volatility study.
fn predictive_outputs(
    study: &StudyConfig,
    observed: &Observed,
    posterior: &WeightedSample,
    rng: &SeededRng,
    dir: &Path,
) -> Result<Vec<&'static str>> {
    match (study, observed) {
        (StudyConfig::Ebola(s), Observed::Ebola(e)) => {
            let total = e.observed.len() + s.forecast_horizon;
            let time: Vec<f64> = (0..total).map(|d| d as f64).collect();
            let simulate = |theta: &[f64], r: &mut StreamRng| -> Result<Vec<f64>> {
                Ok(e.forecast(theta[0], s.forecast_horizon, r)?.counts.iter().map(|&c| c as f64).collect())
            };
            let bands = posterior_predictive(posterior, simulate, time, s.forecast_trajectories, rng.split_named("forecast", 0))?;
            bands.write_csv(&dir.join("forecast_bands.csv"))?;
            Ok(vec!["forecast_bands.csv"])
        }
        (StudyConfig::SvPortfolio(s), Observed::Sv(y)) => {
            let draws = sv_predictive_draws(posterior, y, s.portfolio.m, s.pf_particles, rng.split_named("portfolio", 0))?;
            let choice = optimal_alpha(&draws, s.portfolio.rf.exp(), &s.portfolio)?;
            let report = serde_json::json!({
                "alpha": choice.alpha,
                "expected_utility": choice.expected_utility,
                "gamma": s.portfolio.gamma,
                "rf": s.portfolio.rf,
                "m": s.portfolio.m,
                "predictive_mean_gross_return": stats::mean(&draws),
            });
            write_json(&report, &dir.join("portfolio.json"))?;
            Ok(vec!["portfolio.json"])
        }
        _ => Ok(Vec::new()),
    }
}

/// Execute a validated experiment and return its manifest. All outputs,
/// the manifest last, are written into `cfg.output_dir`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunManifest> {
    cfg.validate()?;
    let start = Instant::now();
    let root = SeededRng::new(cfg.seed);
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir)?;

    let observed = Observed::build(&cfg.study, &root)?;
    let model = observed.model(&cfg.study)?;
    let (sample, diagnostics) = infer(&model, &cfg.method, root.split_named("inference", 0))?;
    let names = cfg.study.parameter_names();

    let mut files: Vec<&str> = vec![SAMPLES_FILE, SUMMARY_FILE, DIAGNOSTICS_FILE];
    write_samples(&sample, names, &dir.join(SAMPLES_FILE))?;
    let summary = RunSummary {
        study: cfg.study.name().into(),
        method: cfg.method.name().into(),
        seed: cfg.seed,
        n_draws: sample.len(),
        sim_calls: sample.sim_calls,
        parameters: summarize(&sample, names)?,
    };
    write_json(&summary, &dir.join(SUMMARY_FILE))?;
    write_json(&diagnostics, &dir.join(DIAGNOSTICS_FILE))?;
    files.extend(observed.write(dir)?);
    files.extend(predictive_outputs(&cfg.study, &observed, &sample, &root, dir)?);

    let checksums = files
        .iter()
        .map(|f| Ok(((*f).to_string(), sha256_file(&dir.join(f))?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    let manifest = RunManifest {
        study: summary.study,
        method: summary.method,
        seed: cfg.seed,
        config_hash: cfg.hash(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        sim_calls: sample.sim_calls,
        library_version: env!("CARGO_PKG_VERSION").into(),
        checksums,
    };
    let tmp = dir.join(format!("{MANIFEST_FILE}.tmp"));
    write_json(&manifest, &tmp)?;
    fs::rename(&tmp, dir.join(MANIFEST_FILE))?;
    Ok(manifest)
}

/// Worker count from an explicit value or, failing that, [`WORKERS_ENV`].
/// `None` means "use every logical core".
pub fn worker_count(explicit: Option<usize>) -> Result<Option<usize>> {
    if let Some(n) = explicit {
        return if n == 0 { Err(LfiError::InvalidConfig("worker count must be positive".into())) } else { Ok(Some(n)) };
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => parse_workers(&v).map(Some),
        Err(_) => Ok(None),
    }
}

fn parse_workers(v: &str) -> Result<usize> {
    match v.trim().parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(LfiError::InvalidConfig(format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))),
    }
}

/// Run `f` inside a thread pool of the given size.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| LfiError::InvalidArgument(e.to_string()))?;
    Ok(pool.install(f))
}

/// CSV comparing simulator calls and wall-clock time across runs. The
/// `call_ratio` column divides each run's calls by the smallest count.
pub fn compare(manifests: &[(String, RunManifest)]) -> Result<String> {
    if manifests.len() < 2 {
        return Err(LfiError::InvalidArgument("comparison needs at least two manifests".into()));
    }
    let min_calls = manifests.iter().map(|(_, m)| m.sim_calls).min().unwrap_or(0).max(1) as f64;
    let mut out = String::from("run,study,method,seed,sim_calls,wall_clock_seconds,call_ratio\n");
    for (label, m) in manifests {
        out.push_str(&format!(
            "{},{},{},{},{},{:.3},{:.3}\n",
            label,
            m.study,
            m.method,
            m.seed,
            m.sim_calls,
            m.wall_clock_seconds,
            m.sim_calls as f64 / min_calls
        ));
    }
    Ok(out)
}
