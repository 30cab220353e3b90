//! Multi-cluster federated learning on a shared ledger, with digital twins
//! standing in for bandwidth-limited devices.

pub mod aggregate;
pub mod attack;
pub mod ledger;
pub mod sim;
pub mod task;
pub mod twin;

pub use aggregate::{fedavg, ClusterModel};
pub use attack::{inject_malicious, Attack, MaliciousMode};
pub use ledger::{
    block_accounting, digest, verify_block, Baseline, BlockRow, ComparisonReport, Ledger, LedgerBlock, Subject,
};
pub use sim::{
    Cluster, ClusterRecord, CoordinatorSpec, MaliciousSpec, RoundReport, Schedule, ScoringConfig, SimConfig, Simulation,
};
pub use task::{Dataset, TaskConfig};
pub use twin::{dt_sync, DtRecord, TwinState};
