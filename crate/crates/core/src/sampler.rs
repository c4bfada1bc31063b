//! Adaptive random-walk Metropolis–Hastings over a box-bounded log target.
//!
//! The proposal scale is tuned by Robbins–Monro updates during burn-in only;
//! after burn-in the kernel is frozen, so the retained draws come from a
//! fixed-kernel Metropolis–Hastings chain. Optionally, a share of the moves
//! are independence proposals drawn uniformly over the box. Both kernels
//! leave the target invariant, and the uniform moves let the chain cross
//! between separated modes that a local walk would not reach.

use crate::error::{LfiError, Result};
use crate::rng::SeededRng;
use crate::sample::WeightedSample;
use crate::space::BoundedSpace;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MhOptions {
    /// Share of all iterations spent in burn-in (and discarded).
    pub burn_in_fraction: f64,
    pub thinning: usize,
    /// Initial proposal standard deviation as a fraction of each box side.
    pub initial_scale: f64,
    /// Probability that a move is a uniform draw over the box instead of a
    /// random-walk step.
    pub independence_prob: f64,
}

impl Default for MhOptions {
    fn default() -> Self {
        Self { burn_in_fraction: 0.25, thinning: 1, initial_scale: 0.1, independence_prob: 0.0 }
    }
}

impl MhOptions {
    /// Settings for cheap surrogate targets, which are often banana-shaped or
    /// multimodal: 10% uniform moves and thinning by 10.
    pub fn surrogate() -> Self {
        Self { thinning: 10, independence_prob: 0.1, ..Self::default() }
    }
}

#[derive(Debug, Clone)]
pub struct Chain {
    pub draws: Vec<Vec<f64>>,
    pub log_target: Vec<f64>,
    /// Acceptance rate over the retained (post-burn-in) iterations.
    pub acceptance_rate: f64,
    pub burn_in: usize,
    pub thinning: usize,
    /// Per-dimension proposal standard deviations after adaptation.
    pub proposal_sd: Vec<f64>,
    /// Whether the scale was still being adapted when the last draw was made.
    pub adapting_at_end: bool,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.draws.iter().map(|d| d[j]).collect()
    }

    /// Retained draws as an equally weighted sample.
    pub fn to_sample(&self) -> WeightedSample {
        WeightedSample::unweighted(self.draws.clone())
    }
}

/// Target acceptance rate for the Robbins–Monro adaptation.
pub fn target_acceptance(dims: usize) -> f64 {
    if dims == 1 {
        0.44
    } else {
        0.30
    }
}

/// Acceptance probability of a symmetric proposal.
pub fn acceptance_probability(log_current: f64, log_proposed: f64) -> f64 {
    if log_proposed == f64::NEG_INFINITY {
        return 0.0;
    }
    (log_proposed - log_current).exp().min(1.0)
}

/// Draw `n` retained states. Burn-in length is chosen so that it makes up
/// `burn_in_fraction` of all iterations.
pub fn mh_sample<F>(
    log_target: F,
    init: &[f64],
    space: &BoundedSpace,
    n: usize,
    rng: SeededRng,
    opts: &MhOptions,
) -> Result<Chain>
where
    F: Fn(&[f64]) -> f64,
{
    if n == 0 {
        return Err(LfiError::InvalidArgument("chain length must be positive".into()));
    }
    if !(0.0..1.0).contains(&opts.burn_in_fraction)
        || opts.thinning == 0
        || !(opts.initial_scale > 0.0)
        || !(0.0..1.0).contains(&opts.independence_prob)
    {
        return Err(LfiError::InvalidArgument(format!("invalid sampler options {opts:?}")));
    }
    if init.len() != space.dims() {
        return Err(LfiError::DimensionMismatch { expected: space.dims(), got: init.len() });
    }
    let target = |x: &[f64]| if space.contains(x) { log_target(x) } else { f64::NEG_INFINITY };
    let mut current = init.to_vec();
    let mut lp = target(&current);
    if lp == f64::NEG_INFINITY || lp.is_nan() {
        return Err(LfiError::InitInvalid);
    }
    let p = space.dims();
    let kept_iters = n * opts.thinning;
    let burn_in = ((kept_iters as f64) * opts.burn_in_fraction / (1.0 - opts.burn_in_fraction)).ceil() as usize;
    let base: Vec<f64> = (0..p).map(|j| opts.initial_scale * space.range(j)).collect();
    let goal = target_acceptance(p);
    let mut log_scale = 0.0f64;
    let mut r = rng.rng();

    let mut draws = Vec::with_capacity(n);
    let mut lps = Vec::with_capacity(n);
    let mut accepted_after = 0usize;
    let mut proposal = vec![0.0; p];
    for it in 0..(burn_in + kept_iters) {
        let adapting = it < burn_in;
        let uniform_move = opts.independence_prob > 0.0 && r.random::<f64>() < opts.independence_prob;
        if uniform_move {
            let u: Vec<f64> = (0..p).map(|_| r.random()).collect();
            proposal = space.from_unit(&u);
        } else {
            let s = log_scale.exp();
            for j in 0..p {
                let z: f64 = r.sample(StandardNormal);
                proposal[j] = current[j] + s * base[j] * z;
            }
        }
        let lq = target(&proposal);
        let a = acceptance_probability(lp, lq);
        let u: f64 = r.random();
        let accept = u < a;
        if accept {
            current.copy_from_slice(&proposal);
            lp = lq;
        }
        if adapting {
            if !uniform_move {
                let gain = 1.0 / ((it + 1) as f64).powf(0.6);
                log_scale = (log_scale + gain * (a - goal)).clamp(-20.0, 5.0);
            }
        } else {
            if accept {
                accepted_after += 1;
            }
            if (it - burn_in + 1) % opts.thinning == 0 {
                draws.push(current.clone());
                lps.push(lp);
            }
        }
    }
    let s = log_scale.exp();
    Ok(Chain {
        draws,
        log_target: lps,
        acceptance_rate: accepted_after as f64 / kept_iters as f64,
        burn_in,
        thinning: opts.thinning,
        proposal_sd: base.iter().map(|b| b * s).collect(),
        adapting_at_end: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats;

    #[test]
    fn standard_normal_moments() {
        let space = BoundedSpace::new(vec![-10.0], vec![10.0]).unwrap();
        let c = mh_sample(|x| -0.5 * x[0] * x[0], &[0.5], &space, 20_000, SeededRng::new(9), &MhOptions::default())
            .unwrap();
        let xs = c.column(0);
        assert_eq!(xs.len(), 20_000);
        assert!(stats::mean(&xs).abs() < 0.05);
        assert!((stats::sample_variance(&xs) - 1.0).abs() < 0.1);
        assert!(!c.adapting_at_end);
        assert!(c.acceptance_rate > 0.2 && c.acceptance_rate < 0.7);
    }

    #[test]
    fn equal_density_always_accepted() {
        assert_eq!(acceptance_probability(-1.3, -1.3), 1.0);
        assert_eq!(acceptance_probability(-1.0, f64::NEG_INFINITY), 0.0);
    }

    #[test]
    fn init_outside_support() {
        let space = BoundedSpace::new(vec![0.0], vec![1.0]).unwrap();
        let e = mh_sample(|_| 0.0, &[2.0], &space, 10, SeededRng::new(1), &MhOptions::default());
        assert!(matches!(e, Err(LfiError::InitInvalid)));
        let e = mh_sample(|_| f64::NEG_INFINITY, &[0.5], &space, 10, SeededRng::new(1), &MhOptions::default());
        assert!(matches!(e, Err(LfiError::InitInvalid)));
    }

    #[test]
    fn two_state_stationary_frequencies() {
        // Piecewise-constant target on [0, 2): mass 0.25 on [0, 1), 0.75 on [1, 2).
        let space = BoundedSpace::new(vec![0.0], vec![2.0]).unwrap();
        let lt = |x: &[f64]| if x[0] < 1.0 { 0.25f64.ln() } else { 0.75f64.ln() };
        let c = mh_sample(lt, &[0.5], &space, 100_000, SeededRng::new(4), &MhOptions::default()).unwrap();
        let low = c.draws.iter().filter(|d| d[0] < 1.0).count() as f64 / c.len() as f64;
        assert!((low - 0.25).abs() < 0.02, "{low}");
    }

    #[test]
    fn uniform_moves_balance_separated_modes() {
        // Two equal bumps far apart relative to the walk's scale; the local
        // walk alone stays where it starts.
        let space = BoundedSpace::new(vec![0.0], vec![10.0]).unwrap();
        let lt = |x: &[f64]| {
            let a = -0.5 * ((x[0] - 2.0) / 0.1f64).powi(2);
            let b = -0.5 * ((x[0] - 8.0) / 0.1f64).powi(2);
            a.max(b) + (1.0 + (-(a - b).abs()).exp()).ln()
        };
        let opts = MhOptions { independence_prob: 0.2, ..MhOptions::default() };
        let c = mh_sample(lt, &[2.0], &space, 50_000, SeededRng::new(8), &opts).unwrap();
        assert_eq!(c.len(), 50_000);
        let right = c.draws.iter().filter(|d| d[0] > 5.0).count() as f64 / c.len() as f64;
        assert!((right - 0.5).abs() < 0.1, "{right}");
        let local = mh_sample(lt, &[2.0], &space, 5_000, SeededRng::new(8), &MhOptions::default()).unwrap();
        assert!(local.draws.iter().all(|d| d[0] < 5.0));
    }

    #[test]
    fn deterministic_given_seed() {
        let space = BoundedSpace::new(vec![-5.0, -5.0], vec![5.0, 5.0]).unwrap();
        let lt = |x: &[f64]| -0.5 * (x[0] * x[0] + 4.0 * x[1] * x[1]);
        let a = mh_sample(lt, &[0.0, 0.0], &space, 500, SeededRng::new(2), &MhOptions::default()).unwrap();
        let b = mh_sample(lt, &[0.0, 0.0], &space, 500, SeededRng::new(2), &MhOptions::default()).unwrap();
        assert_eq!(a.draws, b.draws);
    }
}
