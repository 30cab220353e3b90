use alloc::format;
use alloc::vec::Vec;
use core::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::aggregate::ClusterModel;
use super::sim::Cluster;
use crate::error::{Error, Result};

/// Factor applied to a `model_scale` cluster's weights before signing.
pub const MODEL_SCALE: f64 = -3.0;

/// Factor applied to a tampered payload's weights after signing.
pub const TAMPER_SCALE: f64 = -4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaliciousMode {
    /// Every training label in the cluster is inverted.
    LabelFlip,
    /// The cluster signs and submits scaled weights.
    ModelScale,
    /// The payload is altered in transit after it was signed.
    TamperPayload,
}

impl FromStr for MaliciousMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "label_flip" => Ok(MaliciousMode::LabelFlip),
            "model_scale" => Ok(MaliciousMode::ModelScale),
            "tamper_payload" => Ok(MaliciousMode::TamperPayload),
            other => Err(Error::Validation(format!("unknown malicious mode {other:?}"))),
        }
    }
}

/// An attack attached to a cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct Attack {
    pub mode: MaliciousMode,
    pub(crate) rng: ChaCha8Rng,
}

/// Turns `cluster` malicious. Label flips are applied to the data right
/// away; the other modes act on each round's submission.
pub fn inject_malicious(mut cluster: Cluster, mode: MaliciousMode, seed: u64) -> Cluster {
    if mode == MaliciousMode::LabelFlip {
        for data in cluster.gld_data.iter_mut().chain(cluster.bld_data.iter_mut()) {
            for y in &mut data.y {
                *y = 1 - *y;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::from(cluster.id));
    cluster.attack = Some(Attack { mode, rng });
    cluster
}

/// Weights actually signed by the cluster.
pub(crate) fn signed_model(model: &ClusterModel, attack: Option<&Attack>) -> ClusterModel {
    match attack {
        Some(a) if a.mode == MaliciousMode::ModelScale => {
            ClusterModel { weights: model.weights.iter().map(|w| w * MODEL_SCALE).collect(), ..model.clone() }
        }
        _ => model.clone(),
    }
}

/// Bytes that arrive at the validator.
pub(crate) fn transmitted(payload: &[u8], attack: Option<&mut Attack>) -> Vec<u8> {
    match attack {
        Some(a) if a.mode == MaliciousMode::TamperPayload => {
            let mut model = ClusterModel::decode(payload).expect("payload was encoded by the simulator");
            for w in &mut model.weights {
                *w = *w * TAMPER_SCALE + a.rng.random_range(-0.1..0.1);
            }
            model.encode()
        }
        _ => payload.to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_parse() {
        assert_eq!("label_flip".parse::<MaliciousMode>().unwrap(), MaliciousMode::LabelFlip);
        assert_eq!("tamper_payload".parse::<MaliciousMode>().unwrap(), MaliciousMode::TamperPayload);
        assert!(matches!("flip".parse::<MaliciousMode>(), Err(Error::Validation(_))));
    }
}
