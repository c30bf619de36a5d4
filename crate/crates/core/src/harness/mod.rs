//! Automated evaluation of candidate games: technical validity, specification
//! compliance, winnability, and physical-reality alignment.

pub mod alignment;
pub mod compliance;
pub mod report;
pub mod validity;
pub mod winnability;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::engine::{canonical_serialize, GameState, SerializeMode};

pub use alignment::{sample_alignment, AlignmentOptions, AlignmentReport, Judge, JudgeError, Judgement, MockJudge, Transition};
pub use compliance::{check_compliance, remove_named, ComplianceReport, EntryVerdict, Tally};
pub use report::{evaluate_corpus, evaluate_game, histogram_csv, CorpusEvaluation, CorpusSummary, EvalOptions, EvalReport};
pub use validity::{check_validity, FaultPhase, FaultRecord, ValidityOptions, ValidityReport};
pub use winnability::{search_winnable, SearchOptions, Verdict, WinnabilityResult};

/// Version string stamped into every report.
pub const HARNESS_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Transposition-table key: SHA-256 of the search-mode serialization.
pub fn state_key(state: &GameState) -> [u8; 32] {
    Sha256::digest(canonical_serialize(state, SerializeMode::Search)).into()
}

/// RNG for decisions made at one state, independent of traversal order.
pub(crate) fn state_rng(seed: u64, key: &[u8; 32]) -> ChaCha8Rng {
    let mut salt = [0u8; 8];
    salt.copy_from_slice(&key[..8]);
    ChaCha8Rng::seed_from_u64(seed ^ u64::from_le_bytes(salt))
}

/// `passed` out of `total`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fraction {
    pub passed: usize,
    pub total: usize,
}

impl Fraction {
    pub fn ratio(self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.passed as f64 / self.total as f64
        }
    }
}
