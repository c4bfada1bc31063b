use crate::error::{LfiError, Result};
use serde::{Deserialize, Serialize};

/// Axis-aligned box `[lower, upper]` used as the search region for the
/// acquisition optimizer and as the support of the posterior sampler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Bounds")]
pub struct BoundedSpace {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

/// Unchecked wire form; deserialization goes through [`BoundedSpace::new`].
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl TryFrom<Bounds> for BoundedSpace {
    type Error = LfiError;

    fn try_from(b: Bounds) -> Result<Self> {
        Self::new(b.lower, b.upper)
    }
}

impl BoundedSpace {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(LfiError::InvalidArgument("bounded space needs at least one dimension".into()));
        }
        if lower.len() != upper.len() {
            return Err(LfiError::DimensionMismatch { expected: lower.len(), got: upper.len() });
        }
        for (j, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(LfiError::InvalidArgument(format!(
                    "dimension {j}: bounds [{lo}, {hi}] must be finite with lower < upper"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn dims(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn range(&self, j: usize) -> f64 {
        self.upper[j] - self.lower[j]
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.dims()
            && theta
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (lo, hi))| *x >= *lo && *x <= *hi)
    }

    pub fn clamp(&self, theta: &mut [f64]) {
        for (x, (lo, hi)) in theta.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *x = x.clamp(*lo, *hi);
        }
    }

    /// Map a point of the unit cube into the box.
    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .enumerate()
            .map(|(j, ui)| self.lower[j] + ui * self.range(j))
            .collect()
    }
}
