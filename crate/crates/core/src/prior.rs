//! Product priors over independent one-dimensional components.

use crate::error::{LfiError, Result};
use crate::stats::{norm_cdf, norm_inv_cdf, norm_sf};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

/// One-dimensional prior component. Normal-family components are
/// parameterized by their variance, not their standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Dist1d {
    Uniform { low: f64, high: f64 },
    Normal { mean: f64, variance: f64 },
    TruncatedNormal { mean: f64, variance: f64, low: f64, high: f64 },
    Gamma { shape: f64, scale: f64 },
}

impl Dist1d {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Dist1d::Uniform { low, high } => low.is_finite() && high.is_finite() && low < high,
            Dist1d::Normal { mean, variance } => mean.is_finite() && variance.is_finite() && variance > 0.0,
            Dist1d::TruncatedNormal { mean, variance, low, high } => {
                mean.is_finite() && variance.is_finite() && variance > 0.0 && low < high && !low.is_nan() && !high.is_nan()
            }
            Dist1d::Gamma { shape, scale } => shape.is_finite() && scale.is_finite() && shape > 0.0 && scale > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(LfiError::InvalidArgument(format!("ill-formed prior component {self:?}")))
        }
    }

    /// Closed support `(lo, hi)`; may be infinite.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Dist1d::Uniform { low, high } | Dist1d::TruncatedNormal { low, high, .. } => (low, high),
            Dist1d::Normal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Dist1d::Gamma { .. } => (0.0, f64::INFINITY),
        }
    }

    /// Width of the support, or six standard deviations when unbounded.
    pub fn range_scale(&self) -> f64 {
        let (lo, hi) = self.support();
        if lo.is_finite() && hi.is_finite() {
            hi - lo
        } else {
            6.0 * self.variance().sqrt()
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Dist1d::Uniform { low, high } => 0.5 * (low + high),
            Dist1d::Normal { mean, .. } => mean,
            Dist1d::TruncatedNormal { mean, variance, low, high } => {
                let s = variance.sqrt();
                let (a, b) = ((low - mean) / s, (high - mean) / s);
                let z = tn_mass(a, b);
                mean + s * (std_pdf(a) - std_pdf(b)) / z
            }
            Dist1d::Gamma { shape, scale } => shape * scale,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Dist1d::Uniform { low, high } => (high - low).powi(2) / 12.0,
            Dist1d::Normal { variance, .. } => variance,
            Dist1d::TruncatedNormal { mean, variance, low, high } => {
                let s = variance.sqrt();
                let (a, b) = ((low - mean) / s, (high - mean) / s);
                let z = tn_mass(a, b);
                let (pa, pb) = (std_pdf(a), std_pdf(b));
                let ta = if a.is_finite() { a * pa } else { 0.0 };
                let tb = if b.is_finite() { b * pb } else { 0.0 };
                variance * (1.0 + (ta - tb) / z - ((pa - pb) / z).powi(2))
            }
            Dist1d::Gamma { shape, scale } => shape * scale * scale,
        }
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x.is_nan() || x < lo || x > hi {
            return f64::NEG_INFINITY;
        }
        match *self {
            Dist1d::Uniform { low, high } => -(high - low).ln(),
            Dist1d::Normal { mean, variance } => normal_ln_pdf(x, mean, variance),
            Dist1d::TruncatedNormal { mean, variance, low, high } => {
                let s = variance.sqrt();
                normal_ln_pdf(x, mean, variance) - tn_mass((low - mean) / s, (high - mean) / s).ln()
            }
            Dist1d::Gamma { shape, scale } => {
                if x == 0.0 {
                    return if shape < 1.0 {
                        f64::INFINITY
                    } else if shape == 1.0 {
                        -scale.ln()
                    } else {
                        f64::NEG_INFINITY
                    };
                }
                (shape - 1.0) * x.ln() - x / scale - ln_gamma(shape) - shape * scale.ln()
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Dist1d::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
            Dist1d::Normal { mean, variance } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + variance.sqrt() * z
            }
            Dist1d::TruncatedNormal { mean, variance, low, high } => {
                sample_truncated_normal(mean, variance.sqrt(), low, high, rng)
            }
            Dist1d::Gamma { shape, scale } => loop {
                let x = Gamma::new(shape, scale).expect("validated gamma").sample(rng);
                // Tiny shapes can underflow to exactly zero.
                if x > 0.0 {
                    break x;
                }
            },
        }
    }
}

fn std_pdf(z: f64) -> f64 {
    if z.is_infinite() {
        0.0
    } else {
        (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
    }
}

fn normal_ln_pdf(x: f64, mean: f64, variance: f64) -> f64 {
    -0.5 * (2.0 * PI * variance).ln() - (x - mean).powi(2) / (2.0 * variance)
}

/// Standard normal mass in `[a, b]`, computed on the tail that keeps precision.
fn tn_mass(a: f64, b: f64) -> f64 {
    if a > 0.0 {
        norm_sf(a) - norm_sf(b)
    } else {
        norm_cdf(b) - norm_cdf(a)
    }
}

/// Inverse-CDF draw from `N(mean, sd²)` truncated to `[low, high]`. One
/// uniform is consumed per call. A zero `sd` returns the clamped mean.
pub fn sample_truncated_normal<R: Rng + ?Sized>(mean: f64, sd: f64, low: f64, high: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    if sd <= 0.0 || !sd.is_finite() {
        return mean.clamp(low, high);
    }
    let a = (low - mean) / sd;
    let b = (high - mean) / sd;
    // Work in the lower tail where the CDF has full relative precision.
    let (z, flipped) = if a > 0.0 { (truncated_std_lower(-b, -a, u), true) } else { (truncated_std_lower(a, b, u), false) };
    let z = if flipped { -z } else { z };
    (mean + sd * z).clamp(low, high)
}

fn truncated_std_lower(a: f64, b: f64, u: f64) -> f64 {
    let pa = norm_cdf(a);
    let pb = norm_cdf(b);
    if pb <= pa {
        // Interval too far in the tail to resolve; fall back to its nearest end.
        return if b.abs() < a.abs() { b } else { a };
    }
    norm_inv_cdf(pa + u * (pb - pa)).clamp(a, b)
}

/// Independent product prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Prior {
    components: Vec<Dist1d>,
}

impl Prior {
    pub fn new(components: Vec<Dist1d>) -> Result<Self> {
        if components.is_empty() {
            return Err(LfiError::InvalidArgument("prior needs at least one component".into()));
        }
        for c in &components {
            c.validate()?;
        }
        Ok(Self { components })
    }

    pub fn dims(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Dist1d] {
        &self.components
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.components.iter().map(|c| c.sample(rng)).collect()
    }

    pub fn ln_pdf(&self, theta: &[f64]) -> Result<f64> {
        if theta.len() != self.dims() {
            return Err(LfiError::DimensionMismatch { expected: self.dims(), got: theta.len() });
        }
        Ok(self.ln_pdf_unchecked(theta))
    }

    pub(crate) fn ln_pdf_unchecked(&self, theta: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (c, x) in self.components.iter().zip(theta) {
            acc += c.ln_pdf(*x);
            if acc == f64::NEG_INFINITY {
                break;
            }
        }
        acc
    }

    pub fn in_support(&self, theta: &[f64]) -> bool {
        self.ln_pdf_unchecked(theta) > f64::NEG_INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;
    use approx::assert_abs_diff_eq;

    #[test]
    fn uniform_log_density() {
        let d = Dist1d::Uniform { low: 0.0, high: 2.0 };
        assert_abs_diff_eq!(d.ln_pdf(1.0), 0.5f64.ln(), epsilon = 1e-15);
        assert_eq!(d.ln_pdf(2.5), f64::NEG_INFINITY);
    }

    #[test]
    fn standard_normal_mode() {
        let d = Dist1d::Normal { mean: 0.0, variance: 1.0 };
        assert_abs_diff_eq!(d.ln_pdf(0.0), -0.918_938_533_204_672_7, epsilon = 1e-12);
    }

    #[test]
    fn truncated_outside_is_neg_inf() {
        let d = Dist1d::TruncatedNormal { mean: 0.0, variance: 1.0, low: -1.0, high: 1.0 };
        assert_eq!(d.ln_pdf(2.0), f64::NEG_INFINITY);
        // Renormalized by the inside mass 0.682689...
        let expect = -0.918_938_533_204_672_7 - 0.682_689_492_137_085_9f64.ln();
        assert_abs_diff_eq!(d.ln_pdf(0.0), expect, epsilon = 1e-9);
    }

    #[test]
    fn samples_stay_in_support() {
        let mut rng = SeededRng::new(1).rng();
        let u = Dist1d::Uniform { low: 0.0, high: 1.0 };
        let tn = Dist1d::TruncatedNormal { mean: 1.7, variance: 0.5, low: 1.05, high: 4.0 };
        for _ in 0..20_000 {
            let x = u.sample(&mut rng);
            assert!((0.0..=1.0).contains(&x));
            let y = tn.sample(&mut rng);
            assert!((1.05..=4.0).contains(&y));
        }
    }

    #[test]
    fn gamma_sample_mean() {
        let mut rng = SeededRng::new(2).rng();
        let g = Dist1d::Gamma { shape: 2.0, scale: 5.0 };
        let n = 100_000;
        let m = (0..n).map(|_| g.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((m - 10.0).abs() < 0.2, "{m}");
        assert_abs_diff_eq!(g.mean(), 10.0);
    }

    #[test]
    fn truncated_sampler_far_tail() {
        let mut rng = SeededRng::new(3).rng();
        for _ in 0..1000 {
            let x = sample_truncated_normal(0.0, 1.0, 9.0, 10.0, &mut rng);
            assert!((9.0..=10.0).contains(&x));
        }
        assert_eq!(sample_truncated_normal(0.3, 0.0, 0.0, 1.0, &mut rng), 0.3);
        assert_eq!(sample_truncated_normal(1.3, 0.0, 0.0, 1.0, &mut rng), 1.0);
    }

    #[test]
    fn truncated_moments_match_sampling() {
        let d = Dist1d::TruncatedNormal { mean: 1.7, variance: 0.5, low: 1.05, high: 4.0 };
        let mut rng = SeededRng::new(4).rng();
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| d.sample(&mut rng)).collect();
        let m = xs.iter().sum::<f64>() / n as f64;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n as f64;
        assert!((m - d.mean()).abs() < 0.01);
        assert!((v - d.variance()).abs() < 0.01);
    }

    /// Histogram density of 10^5 draws against exp(ln_pdf), sup-norm over bins.
    #[test]
    fn sampling_agrees_with_density() {
        let comps = [
            Dist1d::Uniform { low: 0.0, high: 1.0 },
            Dist1d::Normal { mean: 0.0, variance: 1.0 },
            Dist1d::TruncatedNormal { mean: 1.7, variance: 0.5, low: 1.05, high: 4.0 },
            Dist1d::Gamma { shape: 2.0, scale: 5.0 },
        ];
        for (k, d) in comps.iter().enumerate() {
            let mut rng = SeededRng::new(100 + k as u64).rng();
            let n = 100_000;
            let xs: Vec<f64> = (0..n).map(|_| d.sample(&mut rng)).collect();
            let m = d.mean();
            let s = d.variance().sqrt();
            let (lo, hi) = d.support();
            let a = (m - 3.0 * s).max(lo);
            let b = (m + 3.0 * s).min(hi);
            let bins = 30;
            let w = (b - a) / bins as f64;
            let mut counts = vec![0usize; bins];
            for x in &xs {
                if *x >= a && *x < b {
                    counts[((x - a) / w) as usize] += 1;
                }
            }
            let peak = (0..bins).map(|i| d.ln_pdf(a + (i as f64 + 0.5) * w).exp()).fold(0.0, f64::max);
            for (i, c) in counts.iter().enumerate() {
                let lo_i = a + i as f64 * w;
                // Bin-averaged density by Simpson's rule.
                let f = |x: f64| d.ln_pdf(x).exp();
                let avg = (f(lo_i + 1e-12) + 4.0 * f(lo_i + 0.5 * w) + f(lo_i + w - 1e-12)) / 6.0;
                let est = *c as f64 / (n as f64 * w);
                assert!((est - avg).abs() < 0.05 * peak.max(1.0), "component {k} bin {i}: {est} vs {avg}");
            }
        }
    }

    #[test]
    fn dimension_mismatch() {
        let p = Prior::new(vec![Dist1d::Uniform { low: 0.0, high: 1.0 }]).unwrap();
        assert!(matches!(p.ln_pdf(&[0.1, 0.2]), Err(LfiError::DimensionMismatch { .. })));
    }
}
