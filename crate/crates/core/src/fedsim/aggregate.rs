use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Model parameters plus the bookkeeping FedAVG needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub weights: Vec<f64>,
    pub sample_count: u64,
    pub cluster_id: u32,
    pub round: u32,
}

impl ClusterModel {
    pub fn validate(&self) -> Result<()> {
        if self.sample_count == 0 {
            return Err(Error::Validation(format!("model from cluster {} has no samples", self.cluster_id)));
        }
        if self.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Validation(format!("model from cluster {} has non-finite weights", self.cluster_id)));
        }
        Ok(())
    }

    /// Little-endian wire form: round, cluster, sample count, then weights.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + 8 * self.weights.len());
        out.extend_from_slice(&self.round.to_le_bytes());
        out.extend_from_slice(&self.cluster_id.to_le_bytes());
        out.extend_from_slice(&self.sample_count.to_le_bytes());
        for w in &self.weights {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 16 || !(bytes.len() - 16).is_multiple_of(8) {
            return Err(Error::Validation(format!("payload of {} bytes is not a model", bytes.len())));
        }
        let word = |at: usize, n: usize| &bytes[at..at + n];
        let round = u32::from_le_bytes(word(0, 4).try_into().expect("4 bytes"));
        let cluster_id = u32::from_le_bytes(word(4, 4).try_into().expect("4 bytes"));
        let sample_count = u64::from_le_bytes(word(8, 8).try_into().expect("8 bytes"));
        let weights = bytes[16..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
        Ok(ClusterModel { weights, sample_count, cluster_id, round })
    }

    /// Encoded size for a model with `params` weights.
    pub fn encoded_len(params: usize) -> usize {
        16 + 8 * params
    }
}

/// Sample-count-weighted average. Cluster id and round come from the first
/// model.
pub fn fedavg(models: &[ClusterModel]) -> Result<ClusterModel> {
    let first = models.first().ok_or_else(|| Error::Validation("FedAVG needs at least one model".into()))?;
    let dim = first.weights.len();
    let mut sum = alloc::vec![0.0; dim];
    let mut total: u64 = 0;
    for m in models {
        m.validate()?;
        if m.weights.len() != dim {
            return Err(Error::Validation(format!(
                "model from cluster {} has {} weights, expected {dim}",
                m.cluster_id,
                m.weights.len()
            )));
        }
        let share = m.sample_count as f64;
        for (s, w) in sum.iter_mut().zip(&m.weights) {
            *s += share * w;
        }
        total += m.sample_count;
    }
    let weights = sum.into_iter().map(|s| s / total as f64).collect();
    Ok(ClusterModel { weights, sample_count: total, cluster_id: first.cluster_id, round: first.round })
}
