//! Scalar statistics shared across the crate: normal CDF helpers, quantiles,
//! weighted moments, credible intervals and two-sample KS distance.

use crate::error::{LfiError, Result};
use libm::erfc;
use statrs::function::erf::erfc_inv;
use std::f64::consts::{PI, SQRT_2};

pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

pub fn norm_sf(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

pub fn norm_inv_cdf(p: f64) -> f64 {
    if p <= 0.0 {
        f64::NEG_INFINITY
    } else if p >= 1.0 {
        f64::INFINITY
    } else {
        let mut x = -SQRT_2 * erfc_inv(2.0 * p);
        // Two Newton polishing steps against the forward CDF.
        for _ in 0..2 {
            let err = if x < 0.0 { norm_cdf(x) - p } else { (1.0 - p) - norm_sf(x) };
            let dens = (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
            if dens > 0.0 {
                x -= if x < 0.0 { err / dens } else { -err / dens };
            }
        }
        x
    }
}

/// `ln Φ(x)`, finite for every finite `x`.
pub fn log_norm_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x > 0.0 {
        return (-norm_sf(x)).ln_1p();
    }
    if x > -20.0 {
        // erfc keeps full relative precision in the lower tail down to here.
        return norm_cdf(x).ln();
    }
    if x == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    // Asymptotic series of the Mills ratio.
    let x2 = x * x;
    let mut term = 1.0;
    let mut series = 1.0;
    for k in 1..8 {
        term *= -((2 * k - 1) as f64) / x2;
        series += term;
    }
    -0.5 * x2 - (-x).ln() - 0.5 * (2.0 * PI).ln() + series.ln()
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance (n − 1 denominator).
pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

pub fn median(xs: &[f64]) -> f64 {
    quantile(xs, 0.5)
}

/// Empirical quantile with linear interpolation between order statistics at
/// (1-based) position `1 + q (n − 1)`.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, q)
}

pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty slice");
    let n = sorted.len();
    let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi || frac == 0.0 {
        sorted[lo]
    } else if sorted[lo] == sorted[hi] {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

/// Weighted quantile: smallest value whose cumulative normalized weight
/// reaches `q`.
pub fn weighted_quantile(xs: &[f64], ws: &[f64], q: f64) -> f64 {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]).then(a.cmp(&b)));
    let total: f64 = ws.iter().sum();
    let mut acc = 0.0;
    for &i in &idx {
        acc += ws[i] / total;
        if acc >= q - 1e-12 {
            return xs[i];
        }
    }
    xs[*idx.last().expect("non-empty")]
}

pub fn weighted_mean(xs: &[f64], ws: &[f64]) -> f64 {
    let total: f64 = ws.iter().sum();
    xs.iter().zip(ws).map(|(x, w)| x * w).sum::<f64>() / total
}

/// Shortest interval holding at least `mass` of the (optionally weighted)
/// sample. Unweighted samples use a sliding window of `ceil(mass·n)` sorted
/// draws; ties in width resolve to the leftmost window.
pub fn hpd_interval(xs: &[f64], weights: Option<&[f64]>, mass: f64) -> Result<(f64, f64)> {
    if !(mass > 0.0 && mass <= 1.0) {
        return Err(LfiError::InvalidArgument(format!("HPD mass {mass} outside (0, 1]")));
    }
    if xs.len() < 2 {
        return Err(LfiError::DegenerateSample("HPD interval needs at least two draws".into()));
    }
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]).then(a.cmp(&b)));
    let sorted: Vec<f64> = idx.iter().map(|&i| xs[i]).collect();
    if sorted[0] == sorted[sorted.len() - 1] {
        return Err(LfiError::DegenerateSample("all draws identical".into()));
    }
    let n = sorted.len();
    match weights {
        None => {
            let k = ((mass * n as f64) - 1e-9).ceil().max(1.0) as usize;
            let k = k.min(n);
            let mut best = (f64::INFINITY, 0usize);
            for start in 0..=(n - k) {
                let width = sorted[start + k - 1] - sorted[start];
                if width < best.0 {
                    best = (width, start);
                }
            }
            Ok((sorted[best.1], sorted[best.1 + k - 1]))
        }
        Some(ws) => {
            if ws.len() != n {
                return Err(LfiError::DimensionMismatch { expected: n, got: ws.len() });
            }
            let total: f64 = ws.iter().sum();
            let sw: Vec<f64> = idx.iter().map(|&i| ws[i] / total).collect();
            let mut cum = vec![0.0; n + 1];
            for i in 0..n {
                cum[i + 1] = cum[i] + sw[i];
            }
            let target = mass - 1e-12;
            let mut best = (f64::INFINITY, 0usize, n - 1);
            let mut end = 0usize;
            for start in 0..n {
                if end < start {
                    end = start;
                }
                while end < n && cum[end + 1] - cum[start] < target {
                    end += 1;
                }
                if end >= n {
                    break;
                }
                let width = sorted[end] - sorted[start];
                if width < best.0 {
                    best = (width, start, end);
                }
            }
            Ok((sorted[best.1], sorted[best.2]))
        }
    }
}

/// Central interval with `mass` probability: quantiles `(1 ∓ mass)/2`.
pub fn central_interval(xs: &[f64], weights: Option<&[f64]>, mass: f64) -> (f64, f64) {
    let lo = 0.5 * (1.0 - mass);
    let hi = 1.0 - lo;
    match weights {
        None => (quantile(xs, lo), quantile(xs, hi)),
        Some(ws) => (weighted_quantile(xs, ws, lo), weighted_quantile(xs, ws, hi)),
    }
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a − F_b|`.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// KS distance between a sample and a continuous CDF.
pub fn ks_against_cdf(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, x)| {
            let f = cdf(*x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn quantile_interpolates() {
        let xs: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_abs_diff_eq!(quantile(&xs, 0.75), 7.75, epsilon = 1e-12);
        assert_eq!(quantile(&[3.0; 6], 0.3), 3.0);
        assert_eq!(quantile(&[5.0], 0.9), 5.0);
    }

    #[test]
    fn log_cdf_matches_and_stays_finite() {
        assert_abs_diff_eq!(log_norm_cdf(0.0), 0.5f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(log_norm_cdf(1.644_853_626_951_472_2), 0.95f64.ln(), epsilon = 1e-12);
        // Continuity across the switch to the asymptotic branch.
        let below = log_norm_cdf(-20.000_001);
        let above = log_norm_cdf(-19.999_999);
        assert!((below - above).abs() < 1e-4, "{below} {above}");
        for x in [-38.0, -100.0, -1e4] {
            assert!(log_norm_cdf(x).is_finite());
        }
        assert!(log_norm_cdf(-38.0) < log_norm_cdf(-37.0));
    }

    #[test]
    fn inverse_cdf_round_trip() {
        for p in [1e-10, 0.01, 0.3, 0.5, 0.9, 0.999_999] {
            assert_abs_diff_eq!(norm_cdf(norm_inv_cdf(p)), p, epsilon = 1e-12 * p.max(1e-3) + 1e-15);
        }
    }

    #[test]
    fn hpd_uniform_grid_takes_leftmost() {
        let xs: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(hpd_interval(&xs, None, 0.9).unwrap(), (1.0, 90.0));
        assert_eq!(hpd_interval(&xs, None, 1.0).unwrap(), (1.0, 100.0));
        let ws = vec![1.0; 100];
        assert_eq!(hpd_interval(&xs, Some(&ws), 0.9).unwrap(), (1.0, 90.0));
    }

    #[test]
    fn hpd_degenerate() {
        assert!(hpd_interval(&[1.0], None, 0.9).is_err());
        assert!(hpd_interval(&[2.0, 2.0, 2.0], None, 0.9).is_err());
    }

    #[test]
    fn hpd_of_normal_is_central() {
        use rand::Rng;
        use rand_distr::StandardNormal;
        let mut rng = crate::rng::SeededRng::new(5).rng();
        let xs: Vec<f64> = (0..10_000).map(|_| rng.sample(StandardNormal)).collect();
        let (hl, hh) = hpd_interval(&xs, None, 0.9).unwrap();
        let mut s = xs.clone();
        s.sort_by(f64::total_cmp);
        let (cl, ch) = central_interval(&xs, None, 0.9);
        // Within two grid points (order statistics) of the central interval.
        let pos = |v: f64| s.iter().position(|x| *x == v).unwrap() as i64;
        let pc = |v: f64| s.partition_point(|x| *x < v) as i64;
        // The HPD window holds the same number of draws but is never wider.
        assert!(hh - hl <= ch - cl + 1e-12);
        assert!(pos(hh) - pos(hl) + 1 >= 9000);
        let _ = pc;
        assert!((hl - cl).abs() < 0.2 && (hh - ch).abs() < 0.2, "{hl} {hh} vs {cl} {ch}");
    }

    #[test]
    fn ks_identical_and_disjoint() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(ks_distance(&a, &a), 0.0);
        assert_eq!(ks_distance(&a, &[10.0, 11.0]), 1.0);
    }
}
