//! Plaintext record-linkage mathematics: text normalization, bigram maps,
//! Dice fractions, weighted record scores and the argmax/threshold decision.
//!
//! This crate serves two roles. Data owners use it to encode records before
//! secret-sharing them, and the secure pipeline is tested against it as an
//! exact reference: every score is carried as an integer fraction, so the
//! secure and plaintext paths agree bit for bit.

mod alphabet;
mod config;
mod encode;
mod normalize;
mod score;

pub use alphabet::{bigram_index, symbol_ord, Alphabet, ALPHABET_SIZE, BIGRAM_SPACE, STAR};
pub use config::{
    compute_field_weight, validate_config, BoundCertificate, Disclosure, FieldWeights,
    LinkageConfig, DELTA_MAX, TAU_SCALE, WEIGHT_BUDGET, WEIGHT_SCALE,
};
pub use encode::{encode_record, BigramMap, EncodedRecord, RawRecord, EXACT_FIELDS, MAX_BIGRAMS};
pub use normalize::normalize_text;
pub use score::{
    best_match_plain, compare_fractions, dice_fraction, exact_similarity, exceeds_threshold,
    record_score_fraction, ScoreFraction,
};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinkageError {
    #[error("field '{field}' has {count} distinct bigrams, above the cap of {max}")]
    BigramCapExceeded {
        field: &'static str,
        count: usize,
        max: usize,
    },
    #[error("exact field '{field}' value {value} does not fit in 32 bits")]
    ExactFieldTooLarge { field: &'static str, value: u64 },
    #[error("config: {0}")]
    InvalidConfig(String),
    #[error("database is empty")]
    EmptyDatabase,
}
