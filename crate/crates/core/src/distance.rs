use crate::error::{LfiError, Result};
use serde::{Deserialize, Serialize};

/// Discrepancy between observed and simulated summary vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistanceFn {
    Euclidean,
    /// Natural log of the Euclidean distance; identical vectors give `-inf`,
    /// which every algorithm treats as a perfect match.
    LogEuclidean,
    /// `Σ (s_obs,i − s_sim,i)² / (2 σ_i²)`.
    WeightedSquared { sigma: Vec<f64> },
}

impl DistanceFn {
    pub fn weighted_squared(sigma: Vec<f64>) -> Result<Self> {
        if let Some(bad) = sigma.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(LfiError::InvalidArgument(format!("per-bin error must be positive, got {bad}")));
        }
        Ok(DistanceFn::WeightedSquared { sigma })
    }

    pub fn validate(&self) -> Result<()> {
        if let DistanceFn::WeightedSquared { sigma } = self {
            Self::weighted_squared(sigma.clone())?;
        }
        Ok(())
    }

    pub fn distance(&self, s_obs: &[f64], s_sim: &[f64]) -> Result<f64> {
        if s_obs.len() != s_sim.len() {
            return Err(LfiError::DimensionMismatch { expected: s_obs.len(), got: s_sim.len() });
        }
        Ok(match self {
            DistanceFn::Euclidean => euclidean(s_obs, s_sim),
            DistanceFn::LogEuclidean => euclidean(s_obs, s_sim).ln(),
            DistanceFn::WeightedSquared { sigma } => {
                if sigma.len() != s_obs.len() {
                    return Err(LfiError::DimensionMismatch { expected: s_obs.len(), got: sigma.len() });
                }
                if let Some(bad) = sigma.iter().find(|s| !(**s > 0.0)) {
                    return Err(LfiError::InvalidArgument(format!("per-bin error must be positive, got {bad}")));
                }
                s_obs
                    .iter()
                    .zip(s_sim)
                    .zip(sigma)
                    .map(|((o, s), e)| (o - s).powi(2) / (2.0 * e * e))
                    .sum()
            }
        })
    }
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fixed_values() {
        let w = DistanceFn::weighted_squared(vec![1.0]).unwrap();
        assert_eq!(w.distance(&[2.0], &[0.0]).unwrap(), 2.0);
        assert_eq!(w.distance(&[2.0], &[2.0]).unwrap(), 0.0);
        assert_eq!(DistanceFn::Euclidean.distance(&[3.0, 4.0], &[0.0, 0.0]).unwrap(), 5.0);
        assert_eq!(DistanceFn::LogEuclidean.distance(&[1.0], &[1.0]).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn errors() {
        assert!(DistanceFn::weighted_squared(vec![0.0]).is_err());
        assert!(DistanceFn::Euclidean.distance(&[1.0], &[1.0, 2.0]).is_err());
        let w = DistanceFn::WeightedSquared { sigma: vec![-1.0] };
        assert!(w.distance(&[1.0], &[0.0]).is_err());
    }

    proptest! {
        #[test]
        fn symmetric_and_nonnegative(
            pairs in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3, 0.01f64..10.0), 1..12)
        ) {
            let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let b: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let s: Vec<f64> = pairs.iter().map(|p| p.2).collect();
            let w = DistanceFn::weighted_squared(s).unwrap();
            for f in [DistanceFn::Euclidean, w] {
                let ab = f.distance(&a, &b).unwrap();
                prop_assert!(ab >= 0.0);
                prop_assert_eq!(ab, f.distance(&b, &a).unwrap());
                prop_assert_eq!(f.distance(&a, &a).unwrap(), 0.0);
            }
        }
    }
}
