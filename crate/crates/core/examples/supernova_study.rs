//! Supernova cosmology: ABC-PMC and BOLFI on synthetic binned moduli.
//!
//! Usage: `cargo run --release --example supernova_study -- [seed] [pmc|bolfi|both]`

use lfi::bolfi::{bolfi_run, BolfiConfig};
use lfi::pmc::{abc_pmc, PmcConfig};
use lfi::sims::supernova::{self, CosmologyParams, SupernovaDesign};
use lfi::{BoundedSpace, SeededRng};
use std::time::Instant;

fn main() -> lfi::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let seed: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let which = args.get(2).map(String::as_str).unwrap_or("both");
    let rng = SeededRng::new(seed);
    let design = SupernovaDesign::default();
    let observed = supernova::supernova_simulate(&CosmologyParams::fiducial(), &design, &mut rng.split_named("observed", 0).rng())?;
    let model = supernova::model(&observed, &design, supernova::default_prior())?;

    if which != "bolfi" {
        let start = Instant::now();
        let res = abc_pmc(&model, &PmcConfig::adaptive(1000, 500.0, 0.75, 20), rng.split_named("pmc", 0))?;
        let s = res.to_sample();
        println!(
            "ABC-PMC: Omega_m {:.3}, w0 {:.3}, final epsilon {:.2}, {} simulator calls, {:.1?}",
            s.mean(0),
            s.mean(1),
            res.epsilons.last().copied().unwrap_or(f64::NAN),
            res.sim_calls(),
            start.elapsed()
        );
        let trace: Vec<String> = res.epsilons.iter().map(|e| format!("{e:.1}")).collect();
        println!("  epsilon schedule: {}", trace.join(" "));
    }
    if which != "pmc" {
        let start = Instant::now();
        let space = BoundedSpace::new(vec![0.0, -2.5], vec![1.0, 0.0])?;
        let mut cfg = BolfiConfig::new(50, 300, 1, 1.0, space, 1000);
        cfg.log_discrepancy = true;
        let res = bolfi_run(&model, &cfg, rng.split_named("bolfi", 0))?;
        let c = &res.posterior;
        println!(
            "BOLFI: Omega_m {:.3}, w0 {:.3}, {} simulator calls, {:.1?}",
            lfi::stats::mean(&c.column(0)),
            lfi::stats::mean(&c.column(1)),
            res.sim_calls,
            start.elapsed()
        );
    }
    Ok(())
}
