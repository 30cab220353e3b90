//! Reference instances: the six-GLD/four-BLD cluster used throughout the
//! tests and shipped configs, and a two-GLD/one-BLD toy.

use alloc::vec::Vec;

use rand::Rng;

use crate::model::{BldProfile, GldProfile, SystemParams};

/// One cluster's worth of inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub sys: SystemParams,
    pub glds: Vec<GldProfile>,
    pub blds: Vec<BldProfile>,
}

const MBIT: f64 = 1e6;

/// Shared constants of the reference cluster.
///
/// The link budget (200 kHz, 0.4 Mbit model) and the quiet eavesdropper
/// receiver (`n_E = 1e-12` W) put the cluster in the regime where jamming
/// is necessary for every BLD and the delay-versus-jamming curve has an
/// interior minimum.
pub fn reference_system() -> SystemParams {
    SystemParams {
        bandwidth: 2e5,
        noise_coord: 1e-10,
        noise_eaves: 1e-12,
        local_iters: 2,
        cycles_per_bit: 100.0,
        switch_cap: 1e-28,
        model_bits: 0.4 * MBIT,
        coord_cpu: 3.5e8,
        t_agg: 1.0,
        t_up: 1.0,
        t_main: 0.01,
    }
}

/// The six reference GLDs, indexed 1..=6 in decoding order.
pub fn reference_glds() -> Vec<GldProfile> {
    const DATA: [f64; 6] = [30.0, 45.0, 40.0, 50.0, 55.0, 35.0];
    const G_C: [f64; 6] = [2.3, 2.5, 2.4, 2.2, 2.7, 2.6];
    const G_E: [f64; 6] = [1.6, 1.3, 1.7, 1.4, 1.2, 1.5];
    const P_MAX: [f64; 6] = [1.9, 2.1, 1.8, 2.0, 2.2, 1.7];
    const Q_MAX: [f64; 6] = [1.1, 0.8, 0.9, 1.2, 0.7, 1.0];
    const V_MAX: [f64; 6] = [1.0, 1.2, 1.4, 1.6, 1.8, 2.0];
    const E_MAX: [f64; 6] = [3.8, 4.0, 3.4, 3.6, 3.8, 3.2];
    (0..6)
        .map(|k| GldProfile {
            index: k as u32 + 1,
            data_bits: DATA[k] * MBIT,
            gain_coord: G_C[k] * 1e-8,
            gain_eaves: G_E[k] * 1e-8,
            cpu_max: V_MAX[k] * 1e9,
            tx_power_max: P_MAX[k],
            jam_power_max: Q_MAX[k],
            energy_max: E_MAX[k],
        })
        .collect()
}

/// The four reference BLDs. Their receiver noise equals `n_C`.
pub fn reference_blds() -> Vec<BldProfile> {
    const DATA: [f64; 4] = [2.0, 3.5, 3.0, 2.5];
    const H_C: [f64; 4] = [1.0, 0.8, 1.1, 0.9];
    const H_E: [f64; 4] = [0.95, 0.85, 1.15, 1.05];
    const P: [f64; 4] = [1.6, 1.4, 1.3, 1.5];
    (0..4)
        .map(|k| BldProfile {
            index: k as u32 + 1,
            data_bits: DATA[k] * MBIT,
            gain_coord: H_C[k] * 1e-8,
            gain_eaves: H_E[k] * 1e-9,
            tx_power: P[k],
            noise: 1e-10,
        })
        .collect()
}

pub fn reference() -> Instance {
    Instance { sys: reference_system(), glds: reference_glds(), blds: reference_blds() }
}

/// Two GLDs and one BLD, small enough to reason about by hand.
pub fn toy() -> Instance {
    let mut glds = reference_glds();
    glds.truncate(2);
    let mut blds = reference_blds();
    blds.truncate(1);
    Instance { sys: reference_system(), glds, blds }
}

/// The reference cluster with every device parameter scaled by an
/// independent factor drawn from `[1/spread, spread]`.
pub fn randomized<R: Rng>(rng: &mut R, spread: f64) -> Instance {
    let spread = spread.max(1.0);
    let mut f = || if spread > 1.0 { rng.random_range(1.0 / spread..spread) } else { 1.0 };
    let mut inst = reference();
    for g in &mut inst.glds {
        g.data_bits *= f();
        g.gain_coord *= f();
        g.gain_eaves *= f();
        g.cpu_max *= f();
        g.tx_power_max *= f();
        g.jam_power_max *= f();
        g.energy_max *= f();
    }
    for b in &mut inst.blds {
        b.data_bits *= f();
        b.gain_coord *= f();
        b.gain_eaves *= f();
        b.tx_power *= f();
    }
    inst
}
