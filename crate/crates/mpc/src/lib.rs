//! Helper-assisted secure primitives over additive shares: batched
//! multiplication, comparison, equality and multiplexing between the two
//! proxies, with the helper acting as a dealer of correlated randomness.
//!
//! The helper derives each proxy's randomness from a stream it shares with
//! that proxy, so it ships zero bytes to P0 and only correction words to P1.
//! All proxy-to-proxy interaction happens in batched OPEN rounds; within a
//! round, requests must be issued grouped by kind in the canonical order
//! pair, cube, bool, a2b so that both proxies and the helper walk their
//! randomness streams identically.

mod primitives;
mod rounds;
mod triples;

pub use primitives::{
    bit_to_arithmetic, bit_to_arithmetic_batch, secure_and_bits, secure_compare_geq_batch,
    secure_compare_geq_bool_batch, secure_equals_batch, secure_equals_bool_batch,
    secure_msb_batch, secure_msb_bool_batch, secure_multiplex, secure_multiply_batch,
    xor_bit_products, BitProducts, ComparisonBound, SecureBit, XorBit, COMPARISON_BOUND,
};
pub use rounds::{A2bTok, BoolTok, CubeTok, MpcContext, PairTok, RoundBatch, RoundResult};
pub use triples::{
    decode_bool_block, decode_triple_block, encode_bool_block, encode_triple_block, A2bMask,
    BoolTripleWord, CorrQueues, CubeTriple, HelperTripleGen, PairTriple, TripleSource,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MpcError {
    #[error("net: {0}")]
    Net(#[from] pprl_net::NetError),
    #[error("ring: {0}")]
    Ring(#[from] pprl_ring::RingError),
    #[error("correlated randomness exhausted: {0}")]
    TriplesExhausted(&'static str),
    #[error("malformed triple block: {0}")]
    MalformedTripleBlock(String),
    #[error("protocol violation: {0}")]
    Violation(String),
    #[error("peer aborted: {0}")]
    PeerAbort(String),
}
