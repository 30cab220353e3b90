//! Synthetic learning task: logistic regression on two Gaussian blobs.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Labelled 2-D points.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub x: Vec<[f64; 2]>,
    pub y: Vec<u8>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Consecutive slices with the given sizes.
    pub fn split(&self, sizes: &[usize]) -> Vec<Dataset> {
        let mut out = Vec::with_capacity(sizes.len());
        let mut at = 0;
        for &n in sizes {
            let end = (at + n).min(self.len());
            out.push(Dataset { x: self.x[at..end].to_vec(), y: self.y[at..end].to_vec() });
            at = end;
        }
        out
    }

    pub fn extend(&mut self, other: &Dataset) {
        self.x.extend_from_slice(&other.x);
        self.y.extend_from_slice(&other.y);
    }
}

/// Blob geometry and optimizer settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskConfig {
    pub train_per_cluster: usize,
    pub test_per_cluster: usize,
    /// Class means sit at `center ± separation · (1, 0.5)`; unit-variance
    /// noise.
    pub separation: f64,
    pub center: [f64; 2],
    pub learning_rate: f64,
}

impl Default for TaskConfig {
    fn default() -> Self {
        TaskConfig {
            train_per_cluster: 2000,
            test_per_cluster: 500,
            separation: 1.0,
            center: [2.0, 2.0],
            learning_rate: 0.2,
        }
    }
}

impl TaskConfig {
    pub fn validate(&self) -> Result<()> {
        if self.train_per_cluster == 0 || self.test_per_cluster == 0 {
            return Err(Error::Validation("train and test sets must be nonempty".into()));
        }
        if !(self.separation.is_finite() && self.separation > 0.0) {
            return Err(Error::Validation("blob separation must be positive".into()));
        }
        if !self.center.iter().all(|c| c.is_finite()) {
            return Err(Error::Validation("blob center must be finite".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Validation("learning rate must be positive".into()));
        }
        Ok(())
    }
}

/// Draws `n` points, each class with probability one half.
pub fn sample_blobs<R: Rng>(rng: &mut R, n: usize, task: &TaskConfig) -> Dataset {
    let (separation, [cx, cy]) = (task.separation, task.center);
    let mut data = Dataset { x: Vec::with_capacity(n), y: Vec::with_capacity(n) };
    for _ in 0..n {
        let label: u8 = rng.random_range(0..2);
        let sign = if label == 1 { 1.0 } else { -1.0 };
        let nx: f64 = rng.sample(StandardNormal);
        let ny: f64 = rng.sample(StandardNormal);
        data.x.push([cx + sign * separation + nx, cy + sign * 0.5 * separation + ny]);
        data.y.push(label);
    }
    data
}

/// Number of model parameters: two weights and a bias.
pub const PARAMS: usize = 3;

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-z))
}

fn logit(w: &[f64], x: &[f64; 2]) -> f64 {
    w[0] * x[0] + w[1] * x[1] + w[2]
}

/// Full-batch gradient descent on the logistic loss.
pub fn train(start: &[f64], data: &Dataset, epochs: u32, learning_rate: f64) -> Vec<f64> {
    let mut w = start.to_vec();
    if data.is_empty() {
        return w;
    }
    let n = data.len() as f64;
    for _ in 0..epochs {
        let mut grad = [0.0; PARAMS];
        for (x, &y) in data.x.iter().zip(&data.y) {
            let r = sigmoid(logit(&w, x)) - f64::from(y);
            grad[0] += r * x[0];
            grad[1] += r * x[1];
            grad[2] += r;
        }
        for (wi, g) in w.iter_mut().zip(grad) {
            *wi -= learning_rate * g / n;
        }
    }
    w
}

/// Fraction of points on the correct side of the decision boundary.
pub fn accuracy(w: &[f64], data: &Dataset) -> f64 {
    if data.is_empty() {
        return 0.0;
    }
    let hits = data.x.iter().zip(&data.y).filter(|(x, &y)| (logit(w, x) > 0.0) == (y == 1)).count();
    hits as f64 / data.len() as f64
}
