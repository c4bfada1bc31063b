//! The renewal-equation Poisson baseline for R0 next to its likelihood
//! profile, on a synthetic outbreak from the individual-based simulator.
//!
//! Usage: `cargo run --release --example team_wer_baseline -- [seed] [days]`

use lfi::sims::ebola::{team_wer_loglik, team_wer_mle, EbolaConfig, EbolaStudy};
use lfi::SeededRng;

fn main() -> lfi::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let seed: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let days: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(30);

    let mut rng = SeededRng::new(seed).split_named("observed", 0).rng();
    let study = EbolaStudy::synthetic(1.7, 49, days, EbolaConfig::default(), &mut rng)?;
    let incidence = study.observed.incidence();
    println!("daily incidence: {incidence:?}");

    let t_exp = incidence.len() - 1;
    let (r0, se) = team_wer_mle(&incidence, t_exp)?;
    println!("MLE R0 = {r0:.3} (se {se:.3}), 95% interval [{:.3}, {:.3}]", r0 - 1.96 * se, r0 + 1.96 * se);

    let peak = team_wer_loglik(&incidence, r0, t_exp);
    println!("\n    R0   loglik − max");
    for k in 0..=12 {
        let r = 1.0 + 0.25 * k as f64;
        println!("{r:>6.2}  {:>12.3}", team_wer_loglik(&incidence, r, t_exp) - peak);
    }
    Ok(())
}
