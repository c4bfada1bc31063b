//! Type Ia supernova distance-modulus simulator for a flat wCDM cosmology.
//!
//! Observed data are 400 supernovae with uniform redshifts on `[0.5, 1]`,
//! perturbed by skew-normal noise and binned into 20 equal-width redshift
//! bins. The summary is the vector of bin means; the discrepancy weights
//! each bin by its observed spread.

use crate::distance::DistanceFn;
use crate::error::{LfiError, Result, SimError};
use crate::model::{AbcModel, Dataset, IdentitySummary};
use crate::prior::{Dist1d, Prior};
use crate::rng::StreamRng;
use crate::stats;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::Arc;

/// Speed of light in km/s.
pub const C_KM_S: f64 = 299_792.458;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CosmologyParams {
    pub omega_m: f64,
    pub w0: f64,
    pub h0: f64,
}

impl CosmologyParams {
    pub fn new(omega_m: f64, w0: f64) -> Self {
        Self { omega_m, w0, h0: 0.7 }
    }

    pub fn fiducial() -> Self {
        Self::new(0.3, -1.0)
    }

    pub fn omega_lambda(&self) -> f64 {
        1.0 - self.omega_m
    }

    /// Whether `Ω_m` lies in the physically meaningful range `(0, 1)`.
    /// Other values are still evaluated.
    pub fn is_physical(&self) -> bool {
        self.omega_m > 0.0 && self.omega_m < 1.0
    }

    fn unphysical(&self, z: f64) -> LfiError {
        LfiError::Simulator {
            theta: vec![self.omega_m, self.w0],
            source: SimError::Unphysical(format!("negative E(z)^2 at z = {z}")),
        }
    }
}

/// Dimensionless expansion rate for constant dark-energy equation of state.
pub fn hubble_e(z: f64, p: &CosmologyParams) -> Result<f64> {
    let zp = 1.0 + z;
    let r = p.omega_m * zp.powi(3) + p.omega_lambda() * zp.powf(3.0 * (1.0 + p.w0));
    if r > 0.0 {
        Ok(r.sqrt())
    } else {
        Err(p.unphysical(z))
    }
}

struct Quad<'a> {
    p: &'a CosmologyParams,
    tol: f64,
}

impl Quad<'_> {
    fn f(&self, z: f64) -> Result<f64> {
        Ok(1.0 / hubble_e(z, self.p)?)
    }

    /// Adaptive Simpson on `[a, b]` with endpoint and midpoint values given.
    #[allow(clippy::too_many_arguments)]
    fn simpson(&self, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> Result<f64> {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (self.f(lm)?, self.f(rm)?);
        let h = (b - a) / 12.0;
        let left = h * (fa + 4.0 * flm + fm);
        let right = h * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        if depth == 0 {
            return Err(LfiError::Quadrature { a, b });
        }
        Ok(self.simpson(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
            + self.simpson(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
    }

    fn integrate(&self, a: f64, b: f64) -> Result<f64> {
        if b <= a {
            return Ok(0.0);
        }
        let (fa, fb) = (self.f(a)?, self.f(b)?);
        if b - a < 1e-9 {
            return Ok(0.5 * (b - a) * (fa + fb));
        }
        let fm = self.f(0.5 * (a + b))?;
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        self.simpson(a, b, fa, fm, fb, whole, (self.tol * whole.abs()).max(1e-15), 40)
    }
}

const REL_TOL: f64 = 1e-8;

/// `∫₀^z dz′/E(z′)` by adaptive Simpson quadrature.
pub fn comoving_integral(z: f64, p: &CosmologyParams) -> Result<f64> {
    Quad { p, tol: REL_TOL }.integrate(0.0, z)
}

fn modulus_from_integral(z: f64, integral: f64, p: &CosmologyParams) -> f64 {
    let hubble = 100.0 * p.h0;
    5.0 * ((C_KM_S / hubble) * (1.0 + z) * integral).log10() + 25.0
}

/// Distance modulus `5 log₁₀(d_L / Mpc) + 25` with luminosity distance
/// `d_L = (c/H₀)(1+z)∫₀^z dz′/E(z′)`.
pub fn distance_modulus(z: f64, p: &CosmologyParams) -> Result<f64> {
    if !(z > 0.0) {
        return Err(LfiError::InvalidArgument(format!("redshift must be positive, got {z}")));
    }
    Ok(modulus_from_integral(z, comoving_integral(z, p)?, p))
}

/// Distance moduli for many redshifts, integrating once along the sorted
/// redshifts and accumulating piece by piece.
pub fn distance_moduli(zs: &[f64], p: &CosmologyParams) -> Result<Vec<f64>> {
    let mut order: Vec<usize> = (0..zs.len()).collect();
    order.sort_by(|&a, &b| zs[a].total_cmp(&zs[b]));
    let q = Quad { p, tol: REL_TOL };
    let mut out = vec![0.0; zs.len()];
    let (mut prev, mut acc) = (0.0, 0.0);
    for i in order {
        let z = zs[i];
        if !(z > 0.0) {
            return Err(LfiError::InvalidArgument(format!("redshift must be positive, got {z}")));
        }
        acc += q.integrate(prev, z)?;
        prev = z;
        out[i] = modulus_from_integral(z, acc, p);
    }
    Ok(out)
}

/// Skew-normal distribution with location `ξ`, scale `ω` and shape `α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkewNormal {
    pub loc: f64,
    pub scale: f64,
    pub shape: f64,
}

impl Default for SkewNormal {
    fn default() -> Self {
        Self { loc: -0.1, scale: 0.3, shape: 5.0 }
    }
}

impl SkewNormal {
    pub fn delta(&self) -> f64 {
        self.shape / (1.0 + self.shape * self.shape).sqrt()
    }

    pub fn mean(&self) -> f64 {
        self.loc + self.scale * self.delta() * (2.0 / std::f64::consts::PI).sqrt()
    }

    pub fn variance(&self) -> f64 {
        let d = self.delta();
        self.scale * self.scale * (1.0 - 2.0 * d * d / std::f64::consts::PI)
    }

    /// `ξ + ω(δ|U₀| + √(1−δ²)U₁)` with independent standard normals.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let d = self.delta();
        let u0: f64 = rng.sample(StandardNormal);
        let u1: f64 = rng.sample(StandardNormal);
        self.loc + self.scale * (d * u0.abs() + (1.0 - d * d).sqrt() * u1)
    }
}

/// How the per-bin error `σ_i` is computed from the observations in a bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinError {
    /// `σ_i` equals the bin sample variance.
    #[default]
    SampleVariance,
    /// `σ_i` equals the bin sample standard deviation.
    StdDev,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SupernovaDesign {
    pub n_sn: usize,
    pub z_low: f64,
    pub z_high: f64,
    pub bins: usize,
    pub noise: SkewNormal,
    pub bin_error: BinError,
}

impl Default for SupernovaDesign {
    fn default() -> Self {
        Self { n_sn: 400, z_low: 0.5, z_high: 1.0, bins: 20, noise: SkewNormal::default(), bin_error: BinError::default() }
    }
}

impl SupernovaDesign {
    pub fn validate(&self) -> Result<()> {
        if !(self.z_low > 0.0 && self.z_low < self.z_high) {
            return Err(LfiError::InvalidConfig("redshift range must satisfy 0 < z_low < z_high".into()));
        }
        if self.bins == 0 || self.n_sn < 2 * self.bins {
            return Err(LfiError::InvalidConfig("need at least two supernovae per bin on average".into()));
        }
        if !(self.noise.scale > 0.0) {
            return Err(LfiError::InvalidConfig("noise scale must be positive".into()));
        }
        Ok(())
    }

    pub fn bin_centers(&self) -> Vec<f64> {
        let w = (self.z_high - self.z_low) / self.bins as f64;
        (0..self.bins).map(|i| self.z_low + (i as f64 + 0.5) * w).collect()
    }

    fn bin_of(&self, z: f64) -> usize {
        let u = (z - self.z_low) / (self.z_high - self.z_low);
        ((u * self.bins as f64) as usize).min(self.bins - 1)
    }
}

/// Binned moduli with per-bin errors.
#[derive(Debug, Clone, PartialEq)]
pub struct SupernovaDataset {
    pub z_centers: Vec<f64>,
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl SupernovaDataset {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["z_center", "mu", "sigma"])?;
        for i in 0..self.mu.len() {
            w.serialize((self.z_centers[i], self.mu[i], self.sigma[i]))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let mut d = Self { z_centers: vec![], mu: vec![], sigma: vec![] };
        for rec in r.deserialize::<(f64, f64, f64)>() {
            let (z, m, s) = rec?;
            if !(s > 0.0) {
                return Err(LfiError::InvalidArgument(format!("bin error must be positive, got {s}")));
            }
            d.z_centers.push(z);
            d.mu.push(m);
            d.sigma.push(s);
        }
        Ok(d)
    }
}

fn simulate_once(p: &CosmologyParams, design: &SupernovaDesign, rng: &mut StreamRng) -> Result<Option<SupernovaDataset>> {
    let zs: Vec<f64> = (0..design.n_sn).map(|_| rng.random_range(design.z_low..design.z_high)).collect();
    let clean = distance_moduli(&zs, p)?;
    let mut bins: Vec<Vec<f64>> = vec![Vec::new(); design.bins];
    for (z, m) in zs.iter().zip(&clean) {
        bins[design.bin_of(*z)].push(m + design.noise.sample(rng));
    }
    if bins.iter().any(|b| b.len() < 2) {
        return Ok(None);
    }
    let mu = bins.iter().map(|b| stats::mean(b)).collect();
    let sigma = bins
        .iter()
        .map(|b| {
            let v = stats::sample_variance(b);
            match design.bin_error {
                BinError::SampleVariance => v,
                BinError::StdDev => v.sqrt(),
            }
        })
        .collect();
    Ok(Some(SupernovaDataset { z_centers: design.bin_centers(), mu, sigma }))
}

/// Simulate one binned dataset. A bin with fewer than two supernovae leaves
/// its error undefined; the draw is repeated once before failing.
pub fn supernova_simulate(p: &CosmologyParams, design: &SupernovaDesign, rng: &mut StreamRng) -> Result<SupernovaDataset> {
    for _ in 0..2 {
        if let Some(d) = simulate_once(p, design, rng)? {
            return Ok(d);
        }
    }
    Err(LfiError::DegenerateSample("a redshift bin held fewer than two supernovae".into()))
}

/// `Σ_i (μ_i − μ_sim,i)² / (2σ_i²)` with the observed errors.
pub fn supernova_distance(obs: &SupernovaDataset, sim_mu: &[f64]) -> Result<f64> {
    DistanceFn::WeightedSquared { sigma: obs.sigma.clone() }.distance(&obs.mu, sim_mu)
}

/// Normal priors with mean 0.3 and −1 and variance 0.5 each.
pub fn default_prior() -> Prior {
    Prior::new(vec![
        Dist1d::Normal { mean: 0.3, variance: 0.5 },
        Dist1d::Normal { mean: -1.0, variance: 0.5 },
    ])
    .expect("valid prior")
}

/// Inference model over `θ = (Ω_m, ω_0)` against an observed dataset.
pub fn model(observed: &SupernovaDataset, design: &SupernovaDesign, prior: Prior) -> Result<AbcModel> {
    design.validate()?;
    if observed.mu.len() != design.bins {
        return Err(LfiError::DimensionMismatch { expected: design.bins, got: observed.mu.len() });
    }
    let design = design.clone();
    let simulator = move |theta: &[f64], rng: &mut StreamRng| -> std::result::Result<Dataset, SimError> {
        let p = CosmologyParams::new(theta[0], theta[1]);
        match supernova_simulate(&p, &design, rng) {
            Ok(d) => Ok(Dataset::vector(d.mu)),
            Err(LfiError::Simulator { source, .. }) => Err(source),
            // The integrand blows up where E(z) nearly vanishes inside the
            // redshift range, which only happens for unphysical parameters.
            Err(e @ LfiError::Quadrature { .. }) => Err(SimError::Unphysical(e.to_string())),
            Err(e) => Err(SimError::Failed(e.to_string())),
        }
    };
    AbcModel::new(
        prior,
        Arc::new(simulator),
        Arc::new(IdentitySummary),
        DistanceFn::WeightedSquared { sigma: observed.sigma.clone() },
        &Dataset::vector(observed.mu.clone()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;
    use approx::assert_abs_diff_eq;

    #[test]
    fn expansion_rate_examples() {
        let f = CosmologyParams::fiducial();
        assert_eq!(hubble_e(0.0, &f).unwrap(), 1.0);
        assert_abs_diff_eq!(hubble_e(0.5, &f).unwrap(), (0.3f64 * 3.375 + 0.7).sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(hubble_e(0.5, &f).unwrap(), 1.3086, epsilon = 1e-4);
        for w in [-2.0, -1.0, 0.3] {
            let p = CosmologyParams::new(1.0, w);
            assert_abs_diff_eq!(hubble_e(0.7, &p).unwrap(), 1.7f64.powf(1.5), epsilon = 1e-13);
        }
        // Negative dark-energy density with a stiff equation of state.
        let bad = CosmologyParams::new(2.0, 1.0);
        assert!(matches!(hubble_e(1.0, &bad), Err(LfiError::Simulator { source: SimError::Unphysical(_), .. })));
    }

    #[test]
    fn expansion_rate_continuity() {
        let f = CosmologyParams::fiducial();
        for i in 0..=1000 {
            let z = i as f64 / 1000.0;
            assert!((hubble_e(z + 1e-6, &f).unwrap() - hubble_e(z, &f).unwrap()).abs() < 1e-4);
        }
    }

    #[test]
    fn modulus_matches_trapezoid() {
        let f = CosmologyParams::fiducial();
        for z in [0.5, 0.75, 1.0] {
            let n = 1_000_000;
            let h = z / n as f64;
            let mut s = 0.5 * (1.0 + 1.0 / hubble_e(z, &f).unwrap());
            for i in 1..n {
                s += 1.0 / hubble_e(i as f64 * h, &f).unwrap();
            }
            let reference = modulus_from_integral(z, s * h, &f);
            assert!((distance_modulus(z, &f).unwrap() - reference).abs() < 1e-6);
        }
    }

    #[test]
    fn modulus_identities() {
        let f = CosmologyParams::fiducial();
        assert!(distance_modulus(1.0, &f).unwrap() > distance_modulus(0.5, &f).unwrap());
        let g = CosmologyParams { h0: 1.4, ..f };
        assert_abs_diff_eq!(
            distance_modulus(0.8, &f).unwrap() - distance_modulus(0.8, &g).unwrap(),
            5.0 * 2f64.log10(),
            epsilon = 1e-12
        );
        for om in [0.05, 0.3, 0.6, 0.95] {
            let p = CosmologyParams::new(om, -1.2);
            let zs: Vec<f64> = (1..=100).map(|i| i as f64 / 100.0).collect();
            let mus = distance_moduli(&zs, &p).unwrap();
            assert!(mus.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn batched_matches_single() {
        let p = CosmologyParams::new(0.4, -0.8);
        let zs = [0.9, 0.51, 0.73, 0.51, 0.99];
        let batch = distance_moduli(&zs, &p).unwrap();
        for (z, m) in zs.iter().zip(&batch) {
            assert_abs_diff_eq!(distance_modulus(*z, &p).unwrap(), *m, epsilon = 1e-7);
        }
    }

    #[test]
    fn skew_normal_moments() {
        let mut rng = SeededRng::new(21).rng();
        let n = 100_000;
        let sn = SkewNormal::default();
        let xs: Vec<f64> = (0..n).map(|_| sn.sample(&mut rng)).collect();
        let m = stats::mean(&xs);
        let v = stats::sample_variance(&xs);
        assert_abs_diff_eq!(sn.delta(), 0.9806, epsilon = 1e-4);
        assert_abs_diff_eq!(sn.mean(), 0.1347, epsilon = 1e-4);
        assert!((m - sn.mean()).abs() < 3.0 * (sn.variance() / n as f64).sqrt());
        // Standard error of the sample variance from the fourth central moment.
        let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n as f64;
        assert!((v - sn.variance()).abs() < 3.0 * ((m4 - v * v) / n as f64).sqrt());

        let sym = SkewNormal { shape: 0.0, ..sn };
        let ys: Vec<f64> = (0..n).map(|_| sym.sample(&mut rng)).collect();
        let my = stats::mean(&ys);
        let sd = stats::sample_variance(&ys).sqrt();
        let skew = ys.iter().map(|y| ((y - my) / sd).powi(3)).sum::<f64>() / n as f64;
        assert!(skew.abs() < 0.03, "{skew}");
        assert!((my + 0.1).abs() < 0.01 && (sd - 0.3).abs() < 0.01);
    }

    #[test]
    fn dataset_contract() {
        let d = supernova_simulate(&CosmologyParams::fiducial(), &SupernovaDesign::default(), &mut SeededRng::new(2).rng())
            .unwrap();
        assert_eq!(d.mu.len(), 20);
        assert!(d.sigma.iter().all(|s| *s > 0.0));
        assert_abs_diff_eq!(d.z_centers[0], 0.5125, epsilon = 1e-12);
    }

    #[test]
    fn distance_examples() {
        let obs = SupernovaDataset { z_centers: vec![0.0; 3], mu: vec![1.0, 2.0, 3.0], sigma: vec![1.0; 3] };
        assert_eq!(supernova_distance(&obs, &obs.mu).unwrap(), 0.0);
        assert_eq!(supernova_distance(&obs, &[1.0, 4.0, 3.0]).unwrap(), 2.0);
        let wide = SupernovaDataset { sigma: vec![2.0; 3], ..obs.clone() };
        assert_abs_diff_eq!(
            supernova_distance(&wide, &[0.3, 2.5, 3.1]).unwrap(),
            supernova_distance(&obs, &[0.3, 2.5, 3.1]).unwrap() / 4.0,
            epsilon = 1e-15
        );
        assert!(supernova_distance(&obs, &[1.0]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sn.csv");
        let d = supernova_simulate(&CosmologyParams::fiducial(), &SupernovaDesign::default(), &mut SeededRng::new(4).rng())
            .unwrap();
        d.write_csv(&p).unwrap();
        let back = SupernovaDataset::read_csv(&p).unwrap();
        assert_eq!(back.mu.len(), 20);
        for i in 0..20 {
            assert_abs_diff_eq!(back.mu[i], d.mu[i], epsilon = 1e-12);
        }
    }
}
