use crate::stats;
use rand::Rng;

/// Posterior draws with importance weights (unit weights for plain samples).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSample {
    pub draws: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// Accepted discrepancies, when the producing algorithm has them.
    pub distances: Vec<f64>,
    /// Total number of simulator invocations spent producing the sample.
    pub sim_calls: u64,
}

impl WeightedSample {
    pub fn unweighted(draws: Vec<Vec<f64>>) -> Self {
        let n = draws.len();
        Self { draws, weights: vec![1.0; n], distances: Vec::new(), sim_calls: 0 }
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.draws.first().map_or(0, Vec::len)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.draws.iter().map(|d| d[j]).collect()
    }

    pub fn is_uniformly_weighted(&self) -> bool {
        self.weights.windows(2).all(|w| w[0] == w[1])
    }

    pub fn normalized_weights(&self) -> Vec<f64> {
        let total: f64 = self.weights.iter().sum();
        self.weights.iter().map(|w| w / total).collect()
    }

    pub fn mean(&self, j: usize) -> f64 {
        stats::weighted_mean(&self.column(j), &self.weights)
    }

    pub fn variance(&self, j: usize) -> f64 {
        let m = self.mean(j);
        let total: f64 = self.weights.iter().sum();
        self.draws
            .iter()
            .zip(&self.weights)
            .map(|(d, w)| w * (d[j] - m).powi(2))
            .sum::<f64>()
            / total
    }

    /// Draw an index with probability proportional to its weight.
    pub fn resample_index<R: Rng + ?Sized>(&self, cumulative: &[f64], rng: &mut R) -> usize {
        let u: f64 = rng.random::<f64>() * cumulative.last().copied().unwrap_or(0.0);
        cumulative.partition_point(|c| *c <= u).min(self.len() - 1)
    }

    pub fn cumulative_weights(&self) -> Vec<f64> {
        self.weights
            .iter()
            .scan(0.0, |acc, w| {
                *acc += w;
                Some(*acc)
            })
            .collect()
    }
}
