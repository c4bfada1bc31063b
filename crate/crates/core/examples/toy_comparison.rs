//! Rejection ABC, ABC-PMC and BOLFI side by side on the conjugate toy model
//! `x ~ N(θ, 1)`, `θ ~ N(0, 1)`, observed `x = 0`, whose exact posterior is
//! `N(0, 1/2)`.
//!
//! Usage: `cargo run --release --example toy_comparison -- [seed]`

use lfi::bolfi::{bolfi_run, BolfiConfig};
use lfi::pmc::{abc_pmc, PmcConfig};
use lfi::rejection::{run_rejection, RejectionConfig};
use lfi::sample::WeightedSample;
use lfi::sims::toy;
use lfi::{BoundedSpace, SeededRng};
use std::time::Instant;

fn report(name: &str, s: &WeightedSample, started: Instant) {
    let ess = 1.0 / s.normalized_weights().iter().map(|w| w * w).sum::<f64>();
    println!(
        "{name:<10} mean {:+.3}  sd {:.3}  ess {ess:>7.1}  calls {:>7}  {:.2?}",
        s.mean(0),
        s.variance(0).sqrt(),
        s.sim_calls,
        started.elapsed()
    );
}

fn main() -> lfi::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let rng = SeededRng::new(seed);
    let model = toy::model(0.0);
    let (m, v) = toy::posterior(0.0);
    println!("exact      mean {m:+.3}  sd {:.3}", v.sqrt());

    let t = Instant::now();
    let rej = run_rejection(&model, &RejectionConfig::fixed(2000, 0.05), rng.split_named("rejection", 0))?;
    report("rejection", &rej, t);

    let t = Instant::now();
    let pmc = abc_pmc(&model, &PmcConfig::adaptive(500, 10.0, 0.5, 6), rng.split_named("pmc", 0))?;
    println!("           epsilons {:?}", pmc.epsilons.iter().map(|e| (e * 1e4).round() / 1e4).collect::<Vec<_>>());
    report("abc-pmc", &pmc.to_sample(), t);

    let t = Instant::now();
    let cfg = BolfiConfig::new(10, 60, 5, 1.0, BoundedSpace::new(vec![-4.0], vec![4.0])?, 2000);
    let fit = bolfi_run(&model, &cfg, rng.split_named("bolfi", 0))?;
    let mut post = fit.posterior.to_sample();
    post.sim_calls = fit.sim_calls;
    report("bolfi", &post, t);
    Ok(())
}
