//! Stochastic-volatility forecasting and portfolio choice.
//!
//! Simulates 324 monthly returns at known parameters, runs nearest-neighbour
//! rejection ABC with GARCH(1,1) summaries, and compares the ABC one-step
//! predictive and its optimal allocation with those at the true parameters.
//!
//! The default prior is the wide uniform box; passing `tight` as the second
//! argument uses a prior scaled to monthly equity returns instead.
//!
//! Usage: `cargo run --release --example sv_portfolio -- [seed] [tight]`

use lfi::predict::{expected_utility, optimal_alpha, sv_predictive_draws, PortfolioConfig};
use lfi::rejection::{nn_rejection, NnConfig};
use lfi::sample::WeightedSample;
use lfi::sims::sv::{self, SvParams};
use lfi::stats::ks_distance;
use lfi::{Dist1d, Prior, SeededRng};
use std::time::Instant;

fn main() -> lfi::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let tight = std::env::args().nth(2).as_deref() == Some("tight");
    let rng = SeededRng::new(seed);
    let truth = SvParams::new(0.9, 0.3, -0.64, 0.006);
    let y = sv::sv_simulate(&truth, 324, &mut rng.split_named("observed", 0).rng());

    let start = Instant::now();
    let prior = if tight {
        Prior::new(vec![
            Dist1d::Uniform { low: 0.0, high: 0.99 },
            Dist1d::Uniform { low: 0.01, high: 1.0 },
            Dist1d::Uniform { low: -2.0, high: 0.0 },
            Dist1d::Uniform { low: -0.05, high: 0.05 },
        ])?
    } else {
        sv::default_prior()
    };
    let model = sv::model(&y, prior)?;
    let cfg = NnConfig { n_total: 34_992, accept_fraction: 0.0086, mad_scaling: true };
    let post = nn_rejection(&model, &cfg, rng.split_named("abc", 0))?;
    println!("kept {} of {} draws in {:.1?}", post.len(), post.sim_calls, start.elapsed());
    for (j, name) in ["rho", "sigma", "omega", "mu"].iter().enumerate() {
        println!("  {name}: posterior mean {:.4}, sd {:.4}", post.mean(j), post.variance(j).sqrt());
    }

    let start = Instant::now();
    let exact = WeightedSample::unweighted(vec![truth.to_theta()]);
    let abc_big = sv_predictive_draws(&post, &y, 10_000, 500, rng.split_named("abc-pred", 0))?;
    let true_big = sv_predictive_draws(&exact, &y, 10_000, 500, rng.split_named("true-pred", 0))?;
    for (label, d) in [("ABC", &abc_big), ("true", &true_big)] {
        let q: Vec<String> = [0.025, 0.25, 0.5, 0.75, 0.975].iter().map(|&p| format!("{:.4}", lfi::stats::quantile(d, p))).collect();
        println!("  {label} predictive quantiles: {}", q.join(" "));
    }
    println!("KS distance between predictives: {:.4} ({:.1?})", ks_distance(&abc_big, &true_big), start.elapsed());

    let pc = PortfolioConfig::default();
    let rf_gross = pc.rf.exp();
    let abc_m = sv_predictive_draws(&post, &y, pc.m, 500, rng.split_named("abc-m", 0))?;
    let true_m = sv_predictive_draws(&exact, &y, pc.m, 500, rng.split_named("true-m", 0))?;
    let a = optimal_alpha(&abc_m, rf_gross, &pc)?;
    let t = optimal_alpha(&true_m, rf_gross, &pc)?;
    println!("ABC:  alpha {:.4}, expected utility {:.5}", a.alpha, a.expected_utility);
    println!("true: alpha {:.4}, expected utility {:.5}", t.alpha, t.expected_utility);
    println!(
        "under the true predictive: ABC alpha {:.5}, true alpha {:.5}",
        expected_utility(&true_big, rf_gross, a.alpha, &pc),
        expected_utility(&true_big, rf_gross, t.alpha, &pc)
    );
    Ok(())
}
