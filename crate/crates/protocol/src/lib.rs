//! The three-party record-linkage protocol: data-owner outsourcing, the two
//! proxy state machines and the helper, composed into sessions that compute
//! a query's best database match under a threshold without any party seeing
//! plaintext identities.
//!
//! A session runs in three phases over secret shares: batched field
//! similarities for the whole database, a binary max tournament over score
//! fractions via cross-multiplied comparisons, and the strict threshold
//! decision, after which result shares go only to the query client.

mod client;
mod helper;
mod meter;
mod outsource;
mod payload;
mod proxy;
mod runtime;
mod schedule;

pub use client::{query_session, upload_db, ClientSession, MatchOutcome};
pub use helper::run_helper_session;
pub use meter::SessionMeter;
pub use outsource::{
    flatten_record, outsource_record, reconstruct_record_words, SharedRecord, RECORD_WORDS,
};
pub use payload::{
    config_digest, decode_config, decode_db_shares, decode_hello_helper, decode_hello_proxy,
    decode_query, decode_result, encode_config, encode_db_shares, encode_hello_helper,
    encode_hello_proxy, encode_query, encode_result, result_tag, ResultShares, SessionHello,
    SENTINEL,
};
pub use proxy::{
    derive_helper_masters, derive_masters, run_proxy_session, MasterSecrets, ProxySessionDeps,
};
pub use runtime::{
    connect_local_client, spawn_local_mesh, spawn_party, DbStore, PartyHandle, PartySpec,
    SessionReport,
};
pub use schedule::{expected_session_rounds, round_demands, tournament_levels, RoundDemand};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("net: {0}")]
    Net(#[from] pprl_net::NetError),
    #[error("mpc: {0}")]
    Mpc(#[from] pprl_mpc::MpcError),
    #[error("ring: {0}")]
    Ring(#[from] pprl_ring::RingError),
    #[error("linkage: {0}")]
    Linkage(#[from] pprl_linkage::LinkageError),
    #[error("malformed payload: {0}")]
    BadPayload(String),
    #[error("handshake mismatch: {0}")]
    HandshakeMismatch(String),
    #[error("session aborted by {party}: {reason}")]
    Aborted { party: String, reason: String },
    #[error("database is empty")]
    EmptyDatabase,
    #[error("result shares inconsistent: {0}")]
    ResultMismatch(String),
}
