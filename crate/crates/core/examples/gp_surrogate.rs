//! A Gaussian-process surrogate fitted to noisy evaluations of a 1-d
//! function, with hyperparameters chosen by marginal likelihood. Prints the
//! predictive mean and a two-sigma band on a grid.
//!
//! Usage: `cargo run --release --example gp_surrogate -- [n_points] [noise_sd]`

use lfi::gp::{optimize_hyperparams, EvidenceSet, GpModel};
use lfi::SeededRng;
use rand_distr::{Distribution, Normal, Uniform};

fn target(x: f64) -> f64 {
    (x - 0.5).powi(2) + 0.3 * (3.0 * x).sin()
}

fn main() -> lfi::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(15);
    let noise: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0.1);

    let mut rng = SeededRng::new(7).rng();
    let xs = Uniform::new(-2.0, 3.0).expect("valid range");
    let eps = Normal::new(0.0, noise).expect("valid noise");
    let mut ev = EvidenceSet::new();
    for _ in 0..n {
        let x = xs.sample(&mut rng);
        ev.push(vec![x], target(x) + eps.sample(&mut rng));
    }

    let hp = optimize_hyperparams(&ev)?;
    let gp = GpModel::fit(&ev, &hp)?;
    println!(
        "signal variance {:.3}, lengthscale {:.3}, noise variance {:.4} (true {:.4}), log marginal {:.2}",
        hp.signal_variance,
        hp.lengthscales[0],
        hp.noise_variance,
        noise * noise,
        gp.log_marginal_likelihood()
    );
    println!("\n     x    truth     mean   ±2sd");
    for k in 0..=20 {
        let x = -2.0 + 0.25 * k as f64;
        let (mu, var) = gp.predict(&[x]);
        println!("{x:>6.2} {:>8.3} {mu:>8.3} {:>6.3}", target(x), 2.0 * var.sqrt());
    }
    Ok(())
}
