use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::aggregate::{fedavg, ClusterModel};
use super::attack::{inject_malicious, signed_model, transmitted, Attack, MaliciousMode};
use super::ledger::{
    block_accounting, digest, verify_block, Baseline, BlockDraft, ComparisonReport, Ledger, Subject, MAIN_COORDINATOR,
};
use super::task::{accuracy, sample_blobs, train, Dataset, TaskConfig, PARAMS};
use super::twin::{dt_sync, DtRecord, TwinState};
use crate::error::{Error, Result};
use crate::instances::Instance;
use crate::model::{secrecy_rate, validate_cluster, BldProfile, GldProfile, SystemParams};
use crate::optimizer::{solve_p, SolverConfig};
use crate::scoring::{
    classify_devices, device_score, reputation_score, select_validator, DeviceScoreInputs, ReputationInputs, Weights,
};

/// Capabilities of one group coordinator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoordinatorSpec {
    pub cap_enc: f64,
    pub cap_rou: f64,
    pub hist: f64,
}

/// Weights, thresholds and score tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoringConfig {
    pub device_weights: Weights,
    pub reputation_weights: Weights,
    pub threshold: f64,
    /// Processing, storage, communication and energy scores of every GLD.
    pub gld_components: [f64; 4],
    /// Same for every BLD.
    pub bld_components: [f64; 4],
    /// One entry per cluster. Empty draws capabilities from the seed.
    pub coordinators: Vec<CoordinatorSpec>,
    /// Multiplier applied to a coordinator's history after a failed
    /// verification.
    pub hist_penalty: f64,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        ScoringConfig {
            device_weights: Weights::default(),
            reputation_weights: Weights::default(),
            threshold: 0.5,
            gld_components: [0.75; 4],
            bld_components: [0.25; 4],
            coordinators: Vec::new(),
            hist_penalty: 0.5,
        }
    }
}

/// Which clusters misbehave, and how.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaliciousSpec {
    /// 1-based cluster ids.
    pub clusters: Vec<u32>,
    pub mode: MaliciousMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub clusters: usize,
    pub seed: u64,
    /// Check digests and identities before aggregation.
    pub verify: bool,
    /// Run the delay optimizer to set the jamming level and upload windows.
    pub schedule: bool,
    /// BLD upload window when no schedule is computed, seconds.
    pub unscheduled_window: f64,
    pub task: TaskConfig,
    pub scoring: ScoringConfig,
    pub malicious: Option<MaliciousSpec>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            clusters: 10,
            seed: 42,
            verify: true,
            schedule: true,
            unscheduled_window: 1.0,
            task: TaskConfig::default(),
            scoring: ScoringConfig::default(),
            malicious: None,
        }
    }
}

/// One group coordinator with its devices, their data and its twins.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub id: u32,
    pub glds: Vec<GldProfile>,
    pub blds: Vec<BldProfile>,
    pub gld_data: Vec<Dataset>,
    pub bld_data: Vec<Dataset>,
    pub test: Dataset,
    pub twins: Vec<Option<DtRecord>>,
    pub coordinator: CoordinatorSpec,
    pub attack: Option<Attack>,
}

/// Per-round timing and jamming plan shared by every cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub q_agg: f64,
    pub t_up_b: f64,
    pub t_total: f64,
}

/// What happened to one cluster in one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRecord {
    pub cluster_id: u32,
    pub reputation: f64,
    /// Devices whose updates entered the cluster model.
    pub participants: usize,
    pub synced_blds: usize,
    pub stale_blds: usize,
    /// Accuracy of the cluster's own model on its held-out data.
    pub accuracy: f64,
    /// Validator verdict; false whenever verification is off.
    pub verified: bool,
    /// Whether the model entered the final aggregation.
    pub accepted: bool,
    /// The model as received by the validator.
    pub received: ClusterModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundReport {
    pub round: u32,
    pub validator_id: u32,
    pub t_total: Option<f64>,
    pub q_agg: Option<f64>,
    /// Final-model accuracy on the pooled held-out data.
    pub accuracy: f64,
    pub clusters: Vec<ClusterRecord>,
    /// Verdict on the previous round's final model, when there is one.
    pub prior_final_verified: Option<bool>,
    pub blocks_appended: usize,
    pub bytes_appended: u64,
    pub verified_count: usize,
    pub final_model: ClusterModel,
}

/// A seeded multi-cluster run of the protocol.
#[derive(Debug, Clone)]
pub struct Simulation {
    cfg: SimConfig,
    sys: SystemParams,
    clusters: Vec<Cluster>,
    ledger: Ledger,
    global: ClusterModel,
    final_payload: Option<Vec<u8>>,
    schedule: Option<Schedule>,
    rates: Vec<f64>,
    window: f64,
    pooled_test: Dataset,
    round: u32,
}

const DATA_STREAM: u64 = 1 << 32;
const COORD_STREAM: u64 = 2 << 32;
const ATTACK_SEED_MIX: u64 = 0x9e37_79b9_7f4a_7c15;

/// Splits `total` samples in proportion to `bits`, largest remainder first.
pub fn proportional_counts(total: usize, bits: &[f64]) -> Vec<usize> {
    let sum: f64 = bits.iter().sum();
    if bits.is_empty() || !(sum > 0.0) {
        return vec![0; bits.len()];
    }
    let exact: Vec<f64> = bits.iter().map(|b| total as f64 * b / sum).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| *e as usize).collect();
    let mut left = total - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..bits.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - counts[b] as f64).total_cmp(&(exact[a] - counts[a] as f64)).then(a.cmp(&b)));
    for &k in order.iter().cycle() {
        if left == 0 {
            break;
        }
        counts[k] += 1;
        left -= 1;
    }
    counts
}

impl Simulation {
    /// Builds every cluster from the same device profiles, draws data and
    /// coordinator capabilities from the seed, and solves the schedule once.
    pub fn new(inst: &Instance, cfg: SimConfig, solver: &SolverConfig) -> Result<Self> {
        validate_cluster(&inst.sys, &inst.glds, &inst.blds)?;
        cfg.task.validate()?;
        if cfg.clusters == 0 {
            return Err(Error::Validation("at least one cluster is required".into()));
        }
        if inst.glds.is_empty() && inst.blds.is_empty() {
            return Err(Error::Validation("a cluster needs at least one device".into()));
        }
        check_classification(inst, &cfg.scoring)?;
        if !cfg.scoring.coordinators.is_empty() && cfg.scoring.coordinators.len() != cfg.clusters {
            return Err(Error::Validation(format!(
                "{} coordinator entries for {} clusters",
                cfg.scoring.coordinators.len(),
                cfg.clusters
            )));
        }
        if !(cfg.unscheduled_window.is_finite() && cfg.unscheduled_window >= 0.0) {
            return Err(Error::Validation("unscheduled window must be nonnegative".into()));
        }
        if !(0.0..=1.0).contains(&cfg.scoring.hist_penalty) {
            return Err(Error::Validation("history penalty must lie in [0, 1]".into()));
        }
        if let Some(m) = &cfg.malicious {
            if let Some(bad) = m.clusters.iter().find(|&&c| c == 0 || c as usize > cfg.clusters) {
                return Err(Error::Validation(format!("malicious cluster {bad} does not exist")));
            }
        }

        let (schedule, rates, window) = if cfg.schedule && !inst.glds.is_empty() && !inst.blds.is_empty() {
            let out = solve_p(&inst.glds, &inst.blds, &inst.sys, solver)?;
            let s = out.solution;
            let rates = inst.blds.iter().map(|b| secrecy_rate(b, s.q_agg, &inst.sys)).collect();
            (Some(Schedule { q_agg: s.q_agg, t_up_b: s.t_up_b, t_total: s.t_total }), rates, s.t_up_b)
        } else {
            let rates = inst.blds.iter().map(|b| secrecy_rate(b, 0.0, &inst.sys)).collect();
            (None, rates, cfg.unscheduled_window)
        };

        let mut coord_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        coord_rng.set_stream(COORD_STREAM);
        let bits: Vec<f64> =
            inst.glds.iter().map(|g| g.data_bits).chain(inst.blds.iter().map(|b| b.data_bits)).collect();
        let counts = proportional_counts(cfg.task.train_per_cluster, &bits);
        let mut clusters = Vec::with_capacity(cfg.clusters);
        let mut pooled_test = Dataset::default();
        for s in 0..cfg.clusters {
            let id = s as u32 + 1;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(DATA_STREAM + u64::from(id));
            let train_set = sample_blobs(&mut rng, cfg.task.train_per_cluster, &cfg.task);
            let test = sample_blobs(&mut rng, cfg.task.test_per_cluster, &cfg.task);
            pooled_test.extend(&test);
            let mut parts = train_set.split(&counts);
            let bld_data = parts.split_off(inst.glds.len());
            let coordinator = match cfg.scoring.coordinators.get(s) {
                Some(c) => c.clone(),
                None => CoordinatorSpec {
                    cap_enc: coord_rng.random_range(0.5..1.0),
                    cap_rou: coord_rng.random_range(0.5..1.0),
                    hist: 1.0,
                },
            };
            for v in [coordinator.cap_enc, coordinator.cap_rou, coordinator.hist] {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::Validation(format!("coordinator {id} capability {v} outside [0, 1]")));
                }
            }
            let mut cluster = Cluster {
                id,
                glds: inst.glds.clone(),
                blds: inst.blds.clone(),
                gld_data: parts,
                bld_data,
                test,
                twins: vec![None; inst.blds.len()],
                coordinator,
                attack: None,
            };
            if let Some(m) = cfg.malicious.as_ref().filter(|m| m.clusters.contains(&id)) {
                cluster = inject_malicious(cluster, m.mode, cfg.seed ^ ATTACK_SEED_MIX);
            }
            clusters.push(cluster);
        }
        let global =
            ClusterModel { weights: vec![0.0; PARAMS], sample_count: 1, cluster_id: MAIN_COORDINATOR, round: 0 };
        Ok(Simulation {
            sys: inst.sys.clone(),
            cfg,
            clusters,
            ledger: Ledger::new(),
            global,
            final_payload: None,
            schedule,
            rates,
            window,
            pooled_test,
            round: 0,
        })
    }

    pub fn ledger(&self) -> &Ledger {
        &self.ledger
    }

    pub fn schedule(&self) -> Option<&Schedule> {
        self.schedule.as_ref()
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn global_model(&self) -> &ClusterModel {
        &self.global
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    /// Local models per round in the one-block-per-participant baseline.
    pub fn baseline(&self) -> Baseline {
        let per_cluster = self.clusters.first().map_or(0, |c| c.glds.len() + c.blds.len());
        Baseline {
            participants_per_round: per_cluster * self.clusters.len(),
            payload_bytes: ClusterModel::encoded_len(PARAMS),
        }
    }

    pub fn block_report(&self) -> ComparisonReport {
        block_accounting(&self.ledger, &self.baseline())
    }

    /// One FL iteration across all clusters.
    pub fn run_round(&mut self) -> Result<RoundReport> {
        let round = self.round;
        let registered: Vec<u32> =
            core::iter::once(MAIN_COORDINATOR).chain(self.clusters.iter().map(|c| c.id)).collect();

        let weights = self.cfg.scoring.reputation_weights;
        let mut scores = Vec::with_capacity(self.clusters.len());
        for c in &self.clusters {
            let devices = c.glds.len() + c.blds.len();
            let inputs = ReputationInputs {
                cap_enc: c.coordinator.cap_enc,
                cap_rou: c.coordinator.cap_rou,
                prop: c.blds.len() as f64 / devices as f64,
                hist: c.coordinator.hist,
                weights,
            };
            scores.push((c.id, reputation_score(&inputs)?));
        }
        let validator_id = select_validator(&scores)?;

        let prior_final_verified =
            match (self.ledger.blocks().iter().rev().find(|b| b.subject == Subject::Final), &self.final_payload) {
                (Some(block), Some(payload)) if self.cfg.verify => Some(verify_block(block, payload, &registered)),
                _ => None,
            };

        let epochs = self.sys.local_iters;
        let lr = self.cfg.task.learning_rate;
        let start = self.global.weights.clone();
        let mut records = Vec::with_capacity(self.clusters.len());
        let mut accepted = Vec::new();
        let mut bytes_appended = 0;
        for (s, cluster) in self.clusters.iter_mut().enumerate() {
            let mut locals = Vec::new();
            for data in &cluster.gld_data {
                if !data.is_empty() {
                    locals.push(local_model(&start, data, epochs, lr, cluster.id, round));
                }
            }
            let (mut synced, mut stale) = (0, 0);
            for (j, bld) in cluster.blds.iter().enumerate() {
                let twin = dt_sync(bld, self.rates[j], self.window, cluster.twins[j].as_ref());
                if twin.state == TwinState::Synced {
                    synced += 1;
                    if !cluster.bld_data[j].is_empty() {
                        locals.push(local_model(&start, &cluster.bld_data[j], epochs, lr, cluster.id, round));
                    }
                } else {
                    stale += 1;
                }
                cluster.twins[j] = Some(twin);
            }
            let participants = locals.len();
            let model = if locals.is_empty() {
                ClusterModel { weights: start.clone(), sample_count: 1, cluster_id: cluster.id, round }
            } else {
                ClusterModel { cluster_id: cluster.id, round, ..fedavg(&locals)? }
            };
            let own_accuracy = accuracy(&model.weights, &cluster.test);

            let payload = signed_model(&model, cluster.attack.as_ref()).encode();
            let signed_digest = digest(&payload);
            let wire = transmitted(&payload, cluster.attack.as_mut());
            let verified = self.cfg.verify && verify_submission(&signed_digest, cluster.id, &wire, &registered);
            let received = ClusterModel::decode(&wire)?;
            let accept = verified || !self.cfg.verify;
            if self.cfg.verify && !verified {
                cluster.coordinator.hist *= self.cfg.scoring.hist_penalty;
            }
            let block = self.ledger.append(BlockDraft {
                round,
                subject: Subject::Cluster(cluster.id),
                payload_digest: signed_digest,
                submitter_id: cluster.id,
                validator_id,
                verified,
                payload_len: wire.len(),
            })?;
            bytes_appended += block.size_bytes;
            if accept && received.validate().is_ok() {
                accepted.push(received.clone());
            }
            records.push(ClusterRecord {
                cluster_id: cluster.id,
                reputation: scores[s].1,
                participants,
                synced_blds: synced,
                stale_blds: stale,
                accuracy: own_accuracy,
                verified,
                accepted: accept,
                received,
            });
        }

        if !accepted.is_empty() {
            let avg = fedavg(&accepted)?;
            self.global = ClusterModel { cluster_id: MAIN_COORDINATOR, round, ..avg };
        } else {
            self.global.round = round;
        }
        let payload = self.global.encode();
        let block = self.ledger.append(BlockDraft {
            round,
            subject: Subject::Final,
            payload_digest: digest(&payload),
            submitter_id: MAIN_COORDINATOR,
            validator_id,
            verified: self.cfg.verify,
            payload_len: payload.len(),
        })?;
        bytes_appended += block.size_bytes;
        self.final_payload = Some(payload);
        self.round += 1;

        let verified_count = records.iter().filter(|r| r.verified).count() + usize::from(self.cfg.verify);
        Ok(RoundReport {
            round,
            validator_id,
            t_total: self.schedule.as_ref().map(|s| s.t_total),
            q_agg: self.schedule.as_ref().map(|s| s.q_agg),
            accuracy: accuracy(&self.global.weights, &self.pooled_test),
            clusters: records,
            prior_final_verified,
            blocks_appended: self.clusters.len() + 1,
            bytes_appended,
            verified_count,
            final_model: self.global.clone(),
        })
    }
}

fn local_model(start: &[f64], data: &Dataset, epochs: u32, lr: f64, cluster_id: u32, round: u32) -> ClusterModel {
    ClusterModel { weights: train(start, data, epochs, lr), sample_count: data.len() as u64, cluster_id, round }
}

fn verify_submission(signed_digest: &str, submitter: u32, payload: &[u8], registered: &[u32]) -> bool {
    registered.contains(&submitter) && digest(payload) == signed_digest
}

/// Device scores must put every GLD profile above the threshold and every
/// BLD profile at or below it.
fn check_classification(inst: &Instance, scoring: &ScoringConfig) -> Result<()> {
    let score = |c: [f64; 4]| {
        device_score(&DeviceScoreInputs {
            cap_proc: c[0],
            cap_store: c[1],
            cap_com: c[2],
            energy: c[3],
            weights: scoring.device_weights,
        })
    };
    let g = score(scoring.gld_components)?;
    let b = score(scoring.bld_components)?;
    let n_g = inst.glds.len() as u32;
    let devices: Vec<(u32, f64)> =
        (0..n_g).map(|k| (k + 1, g)).chain((0..inst.blds.len() as u32).map(|k| (n_g + k + 1, b))).collect();
    let (glds, blds) = classify_devices(&devices, scoring.threshold);
    if glds.len() != inst.glds.len() || blds.len() != inst.blds.len() {
        return Err(Error::Validation(format!(
            "device scores (GLD {g}, BLD {b}) and threshold {} classify {} GLDs and {} BLDs, profiles list {} and {}",
            scoring.threshold,
            glds.len(),
            blds.len(),
            inst.glds.len(),
            inst.blds.len()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;

    #[test]
    fn proportional_split() {
        assert_eq!(proportional_counts(10, &[1.0, 1.0]), vec![5, 5]);
        assert_eq!(proportional_counts(10, &[1.0, 2.0]), vec![3, 7]);
        let c = proportional_counts(2000, &[30.0, 45.0, 40.0, 50.0, 55.0, 35.0, 2.0, 3.5, 3.0, 2.5]);
        assert_eq!(c.iter().sum::<usize>(), 2000);
        assert!(proportional_counts(3, &[]).is_empty());
    }

    #[test]
    fn misclassified_profiles_are_rejected() {
        let inst = instances::toy();
        let mut cfg = SimConfig { clusters: 1, schedule: false, ..SimConfig::default() };
        cfg.scoring.bld_components = [0.9; 4];
        assert!(Simulation::new(&inst, cfg, &SolverConfig::default()).is_err());
    }

    #[test]
    fn bad_malicious_cluster_is_rejected() {
        let inst = instances::toy();
        let cfg = SimConfig {
            clusters: 2,
            schedule: false,
            malicious: Some(MaliciousSpec { clusters: vec![3], mode: MaliciousMode::TamperPayload }),
            ..SimConfig::default()
        };
        assert!(Simulation::new(&inst, cfg, &SolverConfig::default()).is_err());
    }
}
