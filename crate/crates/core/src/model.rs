//! Simulator-based model description shared by all samplers.

use crate::distance::DistanceFn;
use crate::error::{LfiError, Result, SimError};
use crate::prior::Prior;
use crate::rng::StreamRng;
use std::sync::Arc;

/// Observed or simulated data: a row-major `rows × cols` matrix (a vector is
/// a single column) with optional channel labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Vec<f64>,
    rows: usize,
    cols: usize,
    labels: Vec<String>,
}

impl Dataset {
    pub fn vector(values: Vec<f64>) -> Self {
        let rows = values.len();
        Self { values, rows, cols: 1, labels: Vec::new() }
    }

    pub fn matrix(values: Vec<f64>, rows: usize, cols: usize, labels: Vec<String>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(LfiError::DimensionMismatch { expected: rows * cols, got: values.len() });
        }
        if !labels.is_empty() && labels.len() != cols {
            return Err(LfiError::DimensionMismatch { expected: cols, got: labels.len() });
        }
        Ok(Self { values, rows, cols, labels })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.values[r * self.cols + c]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Forward model `y ~ p(y | θ)`.
pub trait Simulator: Send + Sync {
    fn simulate(&self, theta: &[f64], rng: &mut StreamRng) -> Result<Dataset, SimError>;
}

impl<F> Simulator for F
where
    F: Fn(&[f64], &mut StreamRng) -> Result<Dataset, SimError> + Send + Sync,
{
    fn simulate(&self, theta: &[f64], rng: &mut StreamRng) -> Result<Dataset, SimError> {
        self(theta, rng)
    }
}

/// Summary statistic `s(y)`; must be deterministic with fixed output length.
pub trait Summary: Send + Sync {
    fn summarize(&self, data: &Dataset) -> Vec<f64>;
}

impl<F> Summary for F
where
    F: Fn(&Dataset) -> Vec<f64> + Send + Sync,
{
    fn summarize(&self, data: &Dataset) -> Vec<f64> {
        self(data)
    }
}

/// Uses the raw data values as the summary vector.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentitySummary;

impl Summary for IdentitySummary {
    fn summarize(&self, data: &Dataset) -> Vec<f64> {
        data.values().to_vec()
    }
}

/// Prior, simulator, summary and distance bundled with the observed summary.
#[derive(Clone)]
pub struct AbcModel {
    pub prior: Prior,
    pub simulator: Arc<dyn Simulator>,
    pub summary: Arc<dyn Summary>,
    pub distance: DistanceFn,
    pub observed: Vec<f64>,
}

impl std::fmt::Debug for AbcModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AbcModel")
            .field("prior", &self.prior)
            .field("distance", &self.distance)
            .field("observed", &self.observed)
            .finish_non_exhaustive()
    }
}

impl AbcModel {
    pub fn new(
        prior: Prior,
        simulator: Arc<dyn Simulator>,
        summary: Arc<dyn Summary>,
        distance: DistanceFn,
        observed_data: &Dataset,
    ) -> Result<Self> {
        distance.validate()?;
        let observed = summary.summarize(observed_data);
        Ok(Self { prior, simulator, summary, distance, observed })
    }

    pub fn dims(&self) -> usize {
        self.prior.dims()
    }

    /// Simulate at `theta`, summarize and measure the distance to the
    /// observed summary. Unphysical parameter points give `+inf`.
    pub fn discrepancy(&self, theta: &[f64], rng: &mut StreamRng) -> Result<f64> {
        match self.simulator.simulate(theta, rng) {
            Ok(data) => {
                let s = self.summary.summarize(&data);
                self.distance.distance(&self.observed, &s)
            }
            Err(SimError::Unphysical(_)) => Ok(f64::INFINITY),
            Err(source) => Err(LfiError::Simulator { theta: theta.to_vec(), source }),
        }
    }

    /// Like [`AbcModel::discrepancy`] but also returns the simulated summary.
    pub fn simulate_summary(&self, theta: &[f64], rng: &mut StreamRng) -> Result<Option<Vec<f64>>> {
        match self.simulator.simulate(theta, rng) {
            Ok(data) => Ok(Some(self.summary.summarize(&data))),
            Err(SimError::Unphysical(_)) => Ok(None),
            Err(source) => Err(LfiError::Simulator { theta: theta.to_vec(), source }),
        }
    }
}

/// Collect per-task results in index order, reporting the lowest-index error
/// so that failures do not depend on worker scheduling.
pub(crate) fn collect_ordered<T>(results: Vec<Result<T>>) -> Result<Vec<T>> {
    let mut out = Vec::with_capacity(results.len());
    for r in results {
        out.push(r?);
    }
    Ok(out)
}
