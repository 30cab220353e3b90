use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::model::BldProfile;

/// How strongly an unsynced twin's earlier staleness carries over.
pub const STALENESS_DECAY: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwinState {
    /// Mirrors the device as of the latest upload window.
    Synced,
    /// The last upload did not finish; the device sits out the round.
    Stale,
}

/// Coordinator-side replica of a BLD.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DtRecord {
    pub state: TwinState,
    /// Static description of the device, opaque to the simulator.
    pub static_data: Vec<u8>,
    /// Resource snapshot taken at the last successful sync.
    pub resource: BldProfile,
    /// Decayed count of consecutive missed syncs; zero right after a sync.
    pub deviation: f64,
}

/// Attempts a sync: the device's data must fit through its secrecy rate
/// within the upload window.
pub fn dt_sync(bld: &BldProfile, secrecy_rate: f64, t_up_b: f64, prior: Option<&DtRecord>) -> DtRecord {
    let fits = bld.data_bits == 0.0 || (secrecy_rate > 0.0 && bld.data_bits / secrecy_rate <= t_up_b);
    let static_data = prior.map_or_else(|| bld.index.to_le_bytes().to_vec(), |p| p.static_data.clone());
    if fits {
        DtRecord { state: TwinState::Synced, static_data, resource: bld.clone(), deviation: 0.0 }
    } else {
        DtRecord {
            state: TwinState::Stale,
            static_data,
            resource: prior.map_or_else(|| bld.clone(), |p| p.resource.clone()),
            deviation: prior.map_or(0.0, |p| p.deviation) * STALENESS_DECAY + 1.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bld(bits: f64) -> BldProfile {
        BldProfile { index: 2, data_bits: bits, gain_coord: 1e-8, gain_eaves: 1e-9, tx_power: 1.5, noise: 1e-10 }
    }

    #[test]
    fn sync_examples() {
        assert_eq!(dt_sync(&bld(2e6), 1e6, 3.0, None).state, TwinState::Synced);
        assert_eq!(dt_sync(&bld(2e6), 0.0, 3.0, None).state, TwinState::Stale);
        assert_eq!(dt_sync(&bld(0.0), 0.0, 0.0, None).state, TwinState::Synced);
    }

    #[test]
    fn deviation_decays_and_resets() {
        let a = dt_sync(&bld(2e6), 0.0, 1.0, None);
        let b = dt_sync(&bld(2e6), 0.0, 1.0, Some(&a));
        assert_eq!((a.deviation, b.deviation), (1.0, 1.5));
        let c = dt_sync(&bld(3e6), 1e7, 1.0, Some(&b));
        assert_eq!(c.deviation, 0.0);
        assert_eq!(c.resource.data_bits, 3e6);
        assert_eq!(c.static_data, a.static_data);
    }

    #[test]
    fn binding_device_syncs_exactly_at_its_bound() {
        let b = bld(2.5e6);
        let r = 1.234567e6;
        assert_eq!(dt_sync(&b, r, b.data_bits / r, None).state, TwinState::Synced);
    }
}
