use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Fixed per-block overhead in bytes: index, round, subject, submitter,
/// validator, flags, size, the payload digest and the two chain hashes.
pub const HEADER_BYTES: usize = 8 + 4 + 5 + 4 + 4 + 1 + 8 + 3 * 32;

/// Id of the main coordinator, which signs the final global model.
pub const MAIN_COORDINATOR: u32 = 0;

/// What a block commits to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "cluster_id")]
pub enum Subject {
    Cluster(u32),
    Final,
}

impl Subject {
    pub fn cluster_id(&self) -> Option<u32> {
        match *self {
            Subject::Cluster(id) => Some(id),
            Subject::Final => None,
        }
    }

    fn tag(&self) -> [u8; 5] {
        let mut out = [0u8; 5];
        match *self {
            Subject::Cluster(id) => {
                out[0] = 1;
                out[1..].copy_from_slice(&id.to_le_bytes());
            }
            Subject::Final => out[0] = 2,
        }
        out
    }
}

/// One record of the in-process ledger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerBlock {
    pub index: u64,
    pub round: u32,
    pub subject: Subject,
    /// SHA-256 of the payload as signed by the submitter, hex.
    pub payload_digest: String,
    pub submitter_id: u32,
    pub validator_id: u32,
    pub verified: bool,
    pub size_bytes: u64,
    /// Hash of the previous block, hex; all zeros for the first.
    pub prev_hash: String,
    /// Hash over every other field, hex.
    pub hash: String,
}

/// SHA-256 of `payload`, hex encoded.
pub fn digest(payload: &[u8]) -> String {
    hex::encode(Sha256::digest(payload))
}

/// True iff `payload` hashes to the block's digest and the submitter is
/// registered.
pub fn verify_block(block: &LedgerBlock, payload: &[u8], registered: &[u32]) -> bool {
    registered.contains(&block.submitter_id) && digest(payload) == block.payload_digest
}

fn block_hash(b: &LedgerBlock) -> String {
    let mut h = Sha256::new();
    h.update(b.index.to_le_bytes());
    h.update(b.round.to_le_bytes());
    h.update(b.subject.tag());
    h.update(b.payload_digest.as_bytes());
    h.update(b.submitter_id.to_le_bytes());
    h.update(b.validator_id.to_le_bytes());
    h.update([u8::from(b.verified)]);
    h.update(b.size_bytes.to_le_bytes());
    h.update(b.prev_hash.as_bytes());
    hex::encode(h.finalize())
}

/// Append-only, hash-chained block log.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Ledger {
    blocks: Vec<LedgerBlock>,
}

/// Fields supplied by the caller when appending.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDraft {
    pub round: u32,
    pub subject: Subject,
    pub payload_digest: String,
    pub submitter_id: u32,
    pub validator_id: u32,
    pub verified: bool,
    pub payload_len: usize,
}

impl Ledger {
    pub fn new() -> Self {
        Ledger::default()
    }

    pub fn blocks(&self) -> &[LedgerBlock] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Seals and appends a block. Rounds may not go backwards.
    pub fn append(&mut self, draft: BlockDraft) -> Result<&LedgerBlock> {
        let prev_hash = match self.blocks.last() {
            Some(last) if last.round > draft.round => {
                return Err(Error::Validation(format!("block for round {} after round {}", draft.round, last.round)))
            }
            Some(last) => last.hash.clone(),
            None => hex::encode([0u8; 32]),
        };
        let mut block = LedgerBlock {
            index: self.blocks.len() as u64,
            round: draft.round,
            subject: draft.subject,
            payload_digest: draft.payload_digest,
            submitter_id: draft.submitter_id,
            validator_id: draft.validator_id,
            verified: draft.verified,
            size_bytes: (HEADER_BYTES + draft.payload_len) as u64,
            prev_hash,
            hash: String::new(),
        };
        block.hash = block_hash(&block);
        self.blocks.push(block);
        Ok(self.blocks.last().expect("just pushed"))
    }

    /// Checks indices, round order and every hash link.
    pub fn verify_chain(&self) -> bool {
        let mut prev = hex::encode([0u8; 32]);
        let mut round = 0;
        for (k, b) in self.blocks.iter().enumerate() {
            if b.index != k as u64 || b.prev_hash != prev || b.round < round || block_hash(b) != b.hash {
                return false;
            }
            prev = b.hash.clone();
            round = b.round;
        }
        true
    }
}

/// The comparison scheme: every participant's local model is its own block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub participants_per_round: usize,
    pub payload_bytes: usize,
}

/// Blocks and bytes per round, proposed scheme against the baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockRow {
    pub round: u32,
    pub proposed_blocks: u64,
    pub baseline_blocks: u64,
    pub proposed_bytes: u64,
    pub baseline_bytes: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub rows: Vec<BlockRow>,
    pub cumulative_proposed_bytes: u64,
    pub cumulative_baseline_bytes: u64,
}

/// Tallies the ledger per round next to what the baseline would have
/// written for the same rounds.
pub fn block_accounting(ledger: &Ledger, baseline: &Baseline) -> ComparisonReport {
    let mut report = ComparisonReport::default();
    let per_block = (HEADER_BYTES + baseline.payload_bytes) as u64;
    for b in ledger.blocks() {
        if report.rows.last().is_none_or(|r| r.round != b.round) {
            report.rows.push(BlockRow {
                round: b.round,
                proposed_blocks: 0,
                baseline_blocks: baseline.participants_per_round as u64,
                proposed_bytes: 0,
                baseline_bytes: baseline.participants_per_round as u64 * per_block,
            });
        }
        let row = report.rows.last_mut().expect("row exists");
        row.proposed_blocks += 1;
        row.proposed_bytes += b.size_bytes;
    }
    report.cumulative_proposed_bytes = report.rows.iter().map(|r| r.proposed_bytes).sum();
    report.cumulative_baseline_bytes = report.rows.iter().map(|r| r.baseline_bytes).sum();
    report
}
