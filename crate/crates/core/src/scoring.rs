//! Coordinator reputation, validator election and device classification.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Four-term weighted score over `[0, 1]` components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights(pub [f64; 4]);

impl Default for Weights {
    fn default() -> Self {
        Weights([0.25; 4])
    }
}

impl Weights {
    pub fn validate(&self) -> Result<()> {
        if self.0.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Validation(format!("weights must be finite and nonnegative, got {:?}", self.0)));
        }
        if !(self.0.iter().sum::<f64>() > 0.0) {
            return Err(Error::Validation("weights must not all be zero".into()));
        }
        Ok(())
    }

    fn dot(&self, components: [f64; 4]) -> f64 {
        self.0.iter().zip(components).map(|(w, c)| w * c).sum()
    }
}

/// Inputs to a group coordinator's reputation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReputationInputs {
    /// Encryption capability.
    pub cap_enc: f64,
    /// Routing capability.
    pub cap_rou: f64,
    /// Fraction of the cluster served by digital twins. Lower is better.
    pub prop: f64,
    /// Track record.
    pub hist: f64,
    pub weights: Weights,
}

/// Inputs to a local device's resource score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceScoreInputs {
    pub cap_proc: f64,
    pub cap_store: f64,
    pub cap_com: f64,
    pub energy: f64,
    pub weights: Weights,
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::Validation(format!("score component {name} must lie in [0, 1], got {v}")))
    }
}

/// Weighted reputation; the twin proportion enters as `1 - prop`.
pub fn reputation_score(inputs: &ReputationInputs) -> Result<f64> {
    inputs.weights.validate()?;
    let parts =
        [("cap_enc", inputs.cap_enc), ("cap_rou", inputs.cap_rou), ("prop", inputs.prop), ("hist", inputs.hist)];
    for (name, v) in parts {
        check_unit(name, v)?;
    }
    Ok(inputs.weights.dot([inputs.cap_enc, inputs.cap_rou, 1.0 - inputs.prop, inputs.hist]))
}

/// Weighted resource score of a device.
pub fn device_score(inputs: &DeviceScoreInputs) -> Result<f64> {
    inputs.weights.validate()?;
    let parts = [
        ("cap_proc", inputs.cap_proc),
        ("cap_store", inputs.cap_store),
        ("cap_com", inputs.cap_com),
        ("energy", inputs.energy),
    ];
    for (name, v) in parts {
        check_unit(name, v)?;
    }
    Ok(inputs.weights.dot([inputs.cap_proc, inputs.cap_store, inputs.cap_com, inputs.energy]))
}

/// Highest score wins; ties go to the lowest id.
pub fn select_validator(scores: &[(u32, f64)]) -> Result<u32> {
    if let Some(&(id, s)) = scores.iter().find(|(_, s)| s.is_nan()) {
        return Err(Error::Validation(format!("coordinator {id} has score {s}")));
    }
    scores
        .iter()
        .copied()
        .reduce(|best, c| if c.1 > best.1 || (c.1 == best.1 && c.0 < best.0) { c } else { best })
        .map(|(id, _)| id)
        .ok_or_else(|| Error::Validation("no validator candidates".into()))
}

/// Splits devices into `(GLD ids, BLD ids)`. A score at or below the
/// threshold gets a digital twin.
pub fn classify_devices(devices: &[(u32, f64)], threshold: f64) -> (Vec<u32>, Vec<u32>) {
    let mut glds = Vec::new();
    let mut blds = Vec::new();
    for &(id, score) in devices {
        if score <= threshold {
            blds.push(id);
        } else {
            glds.push(id);
        }
    }
    (glds, blds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn rep(c: [f64; 4], w: [f64; 4]) -> ReputationInputs {
        ReputationInputs { cap_enc: c[0], cap_rou: c[1], prop: c[2], hist: c[3], weights: Weights(w) }
    }

    #[test]
    fn reputation_examples() {
        let r = reputation_score(&rep([0.8, 0.8, 0.2, 0.8], [0.25; 4])).unwrap();
        assert!(libm::fabs(r - 0.8) < 1e-15);
        let r = reputation_score(&rep([1.0, 0.0, 0.0, 0.0], [0.4, 0.3, 0.2, 0.1])).unwrap();
        assert!(libm::fabs(r - 0.6) < 1e-15);
        assert_eq!(reputation_score(&rep([0.0, 0.0, 1.0, 0.0], [0.25; 4])).unwrap(), 0.0);
        assert!(reputation_score(&rep([1.2, 0.0, 0.0, 0.0], [0.25; 4])).is_err());
        assert!(reputation_score(&rep([0.5; 4], [0.0; 4])).is_err());
        assert!(reputation_score(&rep([0.5; 4], [-0.1, 0.5, 0.5, 0.5])).is_err());
    }

    #[test]
    fn validator_examples() {
        assert_eq!(select_validator(&[(1, 0.5), (2, 0.9), (3, 0.7)]).unwrap(), 2);
        assert_eq!(select_validator(&[(1, 0.9), (2, 0.9)]).unwrap(), 1);
        assert_eq!(select_validator(&[(5, 0.9), (2, 0.9)]).unwrap(), 2);
        assert!(select_validator(&[]).is_err());
        assert!(select_validator(&[(1, f64::NAN)]).is_err());
    }

    #[test]
    fn validator_stable_under_weight_scaling() {
        let cands = [[0.9, 0.2, 0.4, 0.7], [0.3, 0.8, 0.1, 0.9], [0.5, 0.5, 0.5, 0.5]];
        let w = [0.4, 0.1, 0.3, 0.2];
        let pick = |scale: f64| {
            let ws = w.map(|x| x * scale);
            let scores: Vec<(u32, f64)> =
                cands.iter().enumerate().map(|(k, c)| (k as u32, reputation_score(&rep(*c, ws)).unwrap())).collect();
            select_validator(&scores).unwrap()
        };
        assert_eq!(pick(1.0), pick(3.5));
    }

    #[test]
    fn device_score_examples() {
        let d = |c: [f64; 4], w: [f64; 4]| DeviceScoreInputs {
            cap_proc: c[0],
            cap_store: c[1],
            cap_com: c[2],
            energy: c[3],
            weights: Weights(w),
        };
        assert_eq!(device_score(&d([0.5; 4], [0.25; 4])).unwrap(), 0.5);
        assert!(libm::fabs(device_score(&d([0.2, 0.4, 0.6, 0.8], [0.25; 4])).unwrap() - 0.5) < 1e-15);
        assert_eq!(device_score(&d([0.2, 0.4, 0.6, 0.8], [0.0, 0.0, 0.0, 1.0])).unwrap(), 0.8);
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify_devices(&[(1, 0.3)], 0.5), (vec![], vec![1]));
        assert_eq!(classify_devices(&[(1, 0.5)], 0.5), (vec![], vec![1]));
        assert_eq!(classify_devices(&[(1, 0.6), (2, 0.9)], 0.1), (vec![1, 2], vec![]));
    }
}
