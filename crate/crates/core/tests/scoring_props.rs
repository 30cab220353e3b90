use dtfl_core::scoring::{
    classify_devices, device_score, reputation_score, select_validator, DeviceScoreInputs, ReputationInputs, Weights,
};
use proptest::prelude::*;

fn weights() -> impl Strategy<Value = Weights> {
    prop::array::uniform4(0.01..1.0f64).prop_map(Weights)
}

proptest! {
    #[test]
    fn classification_partitions_the_devices(scores in prop::collection::vec(0.0..1.0f64, 0..60), threshold in 0.0..1.0f64) {
        let devices: Vec<(u32, f64)> = scores.iter().enumerate().map(|(k, &s)| (k as u32, s)).collect();
        let (glds, blds) = classify_devices(&devices, threshold);
        prop_assert_eq!(glds.len() + blds.len(), devices.len());
        prop_assert!(glds.iter().all(|g| !blds.contains(g)));
    }

    #[test]
    fn validator_survives_positive_affine_maps(
        ticks in prop::collection::vec(0u32..100, 1..20),
        a in 0.1..10.0f64,
        b in -5.0..5.0f64,
    ) {
        let scores: Vec<(u32, f64)> = ticks.iter().enumerate().map(|(k, &t)| (k as u32 + 1, f64::from(t) / 100.0)).collect();
        let mapped: Vec<(u32, f64)> = scores.iter().map(|&(id, s)| (id, a * s + b)).collect();
        prop_assert_eq!(select_validator(&scores).unwrap(), select_validator(&mapped).unwrap());
    }

    #[test]
    fn reputation_is_monotone_in_each_component(
        w in weights(),
        base in prop::array::uniform4(0.0..0.9f64),
        bump in 0.01..0.1f64,
        which in 0usize..4,
    ) {
        let make = |c: [f64; 4]| ReputationInputs { cap_enc: c[0], cap_rou: c[1], prop: c[2], hist: c[3], weights: w };
        let mut up = base;
        up[which] += bump;
        let before = reputation_score(&make(base)).unwrap();
        let after = reputation_score(&make(up)).unwrap();
        // More twins means a lower reputation; every other component helps.
        if which == 2 {
            prop_assert!(after < before);
        } else {
            prop_assert!(after > before);
        }
    }

    #[test]
    fn device_score_is_monotone_in_each_component(
        w in weights(),
        base in prop::array::uniform4(0.0..0.9f64),
        bump in 0.01..0.1f64,
        which in 0usize..4,
    ) {
        let make = |c: [f64; 4]| DeviceScoreInputs { cap_proc: c[0], cap_store: c[1], cap_com: c[2], energy: c[3], weights: w };
        let mut up = base;
        up[which] += bump;
        prop_assert!(device_score(&make(up)).unwrap() > device_score(&make(base)).unwrap());
    }
}
