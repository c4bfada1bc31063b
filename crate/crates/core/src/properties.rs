//! Randomized invariants that cut across modules.

use crate::bolfi::{eta_sq, threshold_loglik};
use crate::gp::{EvidenceSet, GpHyperparams, GpModel};
use crate::predict::{optimal_alpha, ForecastBands, PortfolioConfig};
use crate::stats::{central_interval, hpd_interval, ks_distance, log_norm_cdf, norm_cdf, norm_inv_cdf, quantile};
use crate::BoundedSpace;
use proptest::prelude::*;

fn finite_vec(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-50.0f64..50.0, len)
}

proptest! {
    #[test]
    fn gp_variance_within_signal_variance(
        xs in prop::collection::vec(-5.0f64..5.0, 1..12),
        sf2 in 0.1f64..5.0,
        ell in 0.1f64..3.0,
        noise in 0.0f64..0.5,
        query in -10.0f64..10.0,
    ) {
        let mut ev = EvidenceSet::new();
        for x in &xs {
            ev.push(vec![*x], x.cos());
        }
        let gp = GpModel::fit(&ev, &GpHyperparams::new(sf2, vec![ell], noise)).unwrap();
        let (mu, var) = gp.predict(&[query]);
        prop_assert!(mu.is_finite());
        prop_assert!((0.0..=sf2).contains(&var));
    }

    #[test]
    fn eta_nonnegative_and_monotone(t in 1usize..10_000, d in 1usize..6, eps in 0.01f64..1.0) {
        let a = eta_sq(t, d, eps);
        prop_assert!(a >= 0.0);
        prop_assert!(eta_sq(t + 1, d, eps) >= a);
    }

    #[test]
    fn threshold_loglik_is_log_probability(mu in -30.0f64..30.0, var in 1e-6f64..10.0, h in -30.0f64..30.0) {
        let l = threshold_loglik(mu, var, h);
        prop_assert!(l <= 0.0);
        prop_assert!(threshold_loglik(mu - 1.0, var, h) >= l);
    }

    #[test]
    fn normal_quantile_round_trip(p in 1e-12f64..(1.0 - 1e-12)) {
        let x = norm_inv_cdf(p);
        prop_assert!((norm_cdf(x) - p).abs() <= 1e-12 * p.max(1e-3) + 1e-15);
        if p > 1e-300 {
            prop_assert!((log_norm_cdf(x) - p.ln()).abs() < 1e-8);
        }
    }

    #[test]
    fn ks_is_symmetric_and_bounded(a in finite_vec(1..40), b in finite_vec(1..40)) {
        let d = ks_distance(&a, &b);
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert_eq!(d, ks_distance(&b, &a));
        prop_assert_eq!(ks_distance(&a, &a), 0.0);
    }

    #[test]
    fn intervals_lie_inside_the_data(xs in finite_vec(5..80), mass in 0.5f64..0.99) {
        let lo_data = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi_data = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = central_interval(&xs, None, mass);
        prop_assert!(lo_data <= lo && lo <= hi && hi <= hi_data);
        prop_assert!(quantile(&xs, 0.5) >= lo_data);
    }

    #[test]
    fn hpd_is_shortest_covering_window(xs in finite_vec(5..80), mass in 0.5f64..0.99) {
        prop_assume!(xs.iter().any(|x| *x != xs[0]));
        let (hlo, hhi) = hpd_interval(&xs, None, mass).unwrap();
        let k = (mass * xs.len() as f64).ceil() as usize;
        let inside = xs.iter().filter(|x| (hlo..=hhi).contains(*x)).count();
        prop_assert!(inside >= k);
        let mut sorted = xs.clone();
        sorted.sort_by(f64::total_cmp);
        let shortest = sorted.windows(k).map(|w| w[k - 1] - w[0]).fold(f64::INFINITY, f64::min);
        prop_assert!(hhi - hlo <= shortest + 1e-12);
    }

    #[test]
    fn clamp_lands_in_box(theta in finite_vec(3..4)) {
        let space = BoundedSpace::new(vec![-1.0, 0.0, 2.0], vec![1.0, 5.0, 3.0]).unwrap();
        let mut t = theta.clone();
        space.clamp(&mut t);
        prop_assert!(space.contains(&t));
        if space.contains(&theta) {
            prop_assert_eq!(t, theta);
        }
    }

    #[test]
    fn forecast_bands_nested(trajs in prop::collection::vec(finite_vec(6..7), 1..60)) {
        let time: Vec<f64> = (0..6).map(f64::from).collect();
        let b = ForecastBands::from_trajectories(time, &trajs).unwrap();
        prop_assert!(b.is_nested());
    }

    #[test]
    fn optimal_alpha_invariant_to_wealth(
        draws in prop::collection::vec(0.8f64..1.25, 5..60),
        wealth in 0.01f64..100.0,
    ) {
        let base = PortfolioConfig { alpha_grid: 100, ..PortfolioConfig::default() };
        let scaled = PortfolioConfig { wealth, ..base.clone() };
        let rf = base.rf.exp();
        let a = optimal_alpha(&draws, rf, &base).unwrap();
        let b = optimal_alpha(&draws, rf, &scaled).unwrap();
        prop_assert_eq!(a.alpha, b.alpha);
        prop_assert!((0.0..=1.0).contains(&a.alpha));
    }
}
