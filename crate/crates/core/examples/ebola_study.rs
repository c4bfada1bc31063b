//! Ebola reproduction-number inference on a synthetic outbreak.
//!
//! A series is simulated at R0 = 1.7, aligned the way an observed series of
//! unknown onset would be, and R0 is recovered with BOLFI. The posterior is
//! then propagated forward to produce forecast bands.
//!
//! Usage: `cargo run --release --example ebola_study -- [seed] [threshold] [days]`

use lfi::bolfi::{bolfi_run, BolfiConfig};
use lfi::predict::posterior_predictive;
use lfi::sims::ebola::{self, EbolaConfig, EbolaStudy};
use lfi::stats::central_interval;
use lfi::{BoundedSpace, SeededRng};
use std::time::Instant;

fn main() -> lfi::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let seed: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let threshold: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(49);
    let days: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(9);

    let rng = SeededRng::new(seed);
    let study = EbolaStudy::synthetic(1.7, threshold, days, EbolaConfig::default(), &mut rng.split_named("observed", 0).rng())?;
    println!("observed cumulative counts: {:?}", study.observed.counts);

    let start = Instant::now();
    let model = study.model(ebola::default_prior())?;
    let space = BoundedSpace::new(vec![1.05], vec![4.0])?;
    let cfg = BolfiConfig::new(5, 100, 5, 0.1, space, 2000);
    let fit = bolfi_run(&model, &cfg, rng.split_named("bolfi", 0))?;
    let r0 = fit.posterior.column(0);
    let (lo, hi) = central_interval(&r0, None, 0.95);
    println!(
        "R0 posterior mean {:.3}, 95% interval [{:.3}, {:.3}] (width {:.3}), {} simulations, {:.1?}",
        lfi::stats::mean(&r0),
        lo,
        hi,
        hi - lo,
        fit.sim_calls,
        start.elapsed()
    );

    let horizon = 30;
    let time: Vec<f64> = (0..days + horizon).map(|d| d as f64).collect();
    let simulate = |theta: &[f64], r: &mut lfi::rng::StreamRng| -> lfi::Result<Vec<f64>> {
        Ok(study.forecast(theta[0], horizon, r)?.counts.iter().map(|&c| c as f64).collect())
    };
    let bands = posterior_predictive(&fit.posterior.to_sample(), simulate, time, 500, rng.split_named("forecast", 0))?;
    println!("forecast bands nested: {}", bands.is_nested());
    for d in (0..days + horizon).step_by(5) {
        println!(
            "  day {:>2}: median {:>8.0}  95% [{:>8.0}, {:>8.0}]",
            d, bands.median[d], bands.lo95[d], bands.hi95[d]
        );
    }
    Ok(())
}
