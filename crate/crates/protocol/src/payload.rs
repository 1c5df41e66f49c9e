use crate::outsource::{SharedRecord, RECORD_WORDS};
use crate::ProtocolError;
use pprl_linkage::{Disclosure, FieldWeights, LinkageConfig};
use pprl_net::SessionId;
use pprl_ring::RingElement;
use sha2::{Digest, Sha256};

/// Index value standing for "no match".
pub const SENTINEL: u64 = u64::MAX;

/// Session HELLO between the proxies: a fresh 32-byte nonce, the config
/// digest and the local database size, byte layout `nonce || digest || m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionHello {
    pub nonce: [u8; 32],
    pub digest: [u8; 32],
    pub m: u64,
}

pub fn encode_hello_proxy(h: &SessionHello) -> Vec<u8> {
    let mut out = Vec::with_capacity(72);
    out.extend_from_slice(&h.nonce);
    out.extend_from_slice(&h.digest);
    out.extend_from_slice(&h.m.to_le_bytes());
    out
}

pub fn decode_hello_proxy(payload: &[u8]) -> Result<SessionHello, ProtocolError> {
    if payload.len() != 72 {
        return Err(ProtocolError::BadPayload(format!(
            "proxy HELLO must be 72 bytes, got {}",
            payload.len()
        )));
    }
    Ok(SessionHello {
        nonce: payload[0..32].try_into().unwrap(),
        digest: payload[32..64].try_into().unwrap(),
        m: u64::from_le_bytes(payload[64..72].try_into().unwrap()),
    })
}

/// Session HELLO to the helper carries only the two proxies' nonces, in
/// party order; everything else the helper needs is public configuration.
pub fn encode_hello_helper(nonce0: &[u8; 32], nonce1: &[u8; 32]) -> Vec<u8> {
    let mut out = Vec::with_capacity(64);
    out.extend_from_slice(nonce0);
    out.extend_from_slice(nonce1);
    out
}

pub fn decode_hello_helper(payload: &[u8]) -> Result<([u8; 32], [u8; 32]), ProtocolError> {
    if payload.len() != 64 {
        return Err(ProtocolError::BadPayload(format!(
            "helper HELLO must be 64 bytes, got {}",
            payload.len()
        )));
    }
    Ok((
        payload[0..32].try_into().unwrap(),
        payload[32..64].try_into().unwrap(),
    ))
}

/// Digest binding the linkage parameters all parties must agree on.
pub fn config_digest(config: &LinkageConfig) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"pprl-config-v1");
    h.update(config.tau_fixed.to_le_bytes());
    h.update([config.disclosure.code()]);
    for w in config.weights.all() {
        h.update(w.to_le_bytes());
    }
    h.finalize().into()
}

/// CONFIG layout: `digest(32) || tau_fixed(8) || disclosure(1) ||
/// weights(6*8) || m(8)`. Clients send `m = 0`; P0 fills the database size
/// when forwarding to the helper.
pub fn encode_config(config: &LinkageConfig, m: u64) -> Vec<u8> {
    let mut out = Vec::with_capacity(97);
    out.extend_from_slice(&config_digest(config));
    out.extend_from_slice(&config.tau_fixed.to_le_bytes());
    out.push(config.disclosure.code());
    for w in config.weights.all() {
        out.extend_from_slice(&w.to_le_bytes());
    }
    out.extend_from_slice(&m.to_le_bytes());
    out
}

pub fn decode_config(payload: &[u8]) -> Result<(LinkageConfig, u64), ProtocolError> {
    if payload.len() != 97 {
        return Err(ProtocolError::BadPayload(format!(
            "CONFIG must be 97 bytes, got {}",
            payload.len()
        )));
    }
    let digest: [u8; 32] = payload[0..32].try_into().unwrap();
    let tau_fixed = u64::from_le_bytes(payload[32..40].try_into().unwrap());
    let disclosure = Disclosure::from_code(payload[40])
        .ok_or_else(|| ProtocolError::BadPayload("unknown disclosure mode".into()))?;
    let mut w = [0u64; 6];
    for (i, slot) in w.iter_mut().enumerate() {
        let at = 41 + 8 * i;
        *slot = u64::from_le_bytes(payload[at..at + 8].try_into().unwrap());
    }
    let m = u64::from_le_bytes(payload[89..97].try_into().unwrap());
    let config = LinkageConfig {
        weights: FieldWeights {
            combined_name: w[0],
            city: w[1],
            exact: [w[2], w[3], w[4], w[5]],
        },
        tau_fixed,
        disclosure,
    };
    if config_digest(&config) != digest {
        return Err(ProtocolError::BadPayload(
            "config digest does not match fields".into(),
        ));
    }
    Ok((config, m))
}

/// DB_SHARES layout: `reset(1) || owner_tag(8) || count(8)` then `count`
/// records of `RECORD_WORDS` packed words.
pub fn encode_db_shares(reset: bool, owner_tag: u64, records: &[SharedRecord]) -> Vec<u8> {
    let mut out = Vec::with_capacity(17 + records.len() * RECORD_WORDS * 8);
    out.push(u8::from(reset));
    out.extend_from_slice(&owner_tag.to_le_bytes());
    out.extend_from_slice(&(records.len() as u64).to_le_bytes());
    for r in records {
        out.extend_from_slice(&pprl_net::pack_words(&r.0));
    }
    out
}

pub fn decode_db_shares(payload: &[u8]) -> Result<(bool, u64, Vec<SharedRecord>), ProtocolError> {
    if payload.len() < 17 {
        return Err(ProtocolError::BadPayload("DB_SHARES too short".into()));
    }
    let reset = payload[0] != 0;
    let owner_tag = u64::from_le_bytes(payload[1..9].try_into().unwrap());
    let count = u64::from_le_bytes(payload[9..17].try_into().unwrap()) as usize;
    let words = pprl_net::unpack_words(&payload[17..])
        .map_err(|e| ProtocolError::BadPayload(e.to_string()))?;
    if words.len() != count * RECORD_WORDS {
        return Err(ProtocolError::BadPayload(format!(
            "DB_SHARES claims {count} records but carries {} words",
            words.len()
        )));
    }
    let mut records = Vec::with_capacity(count);
    for chunk in words.chunks_exact(RECORD_WORDS) {
        records.push(SharedRecord(chunk.to_vec()));
    }
    Ok((reset, owner_tag, records))
}

/// QUERY_SHARES: one record's share, packed words.
pub fn encode_query(record: &SharedRecord) -> Vec<u8> {
    pprl_net::pack_words(&record.0)
}

pub fn decode_query(payload: &[u8]) -> Result<SharedRecord, ProtocolError> {
    let words =
        pprl_net::unpack_words(payload).map_err(|e| ProtocolError::BadPayload(e.to_string()))?;
    SharedRecord::from_words(words)
}

/// One proxy's share of the session result: matched bit, index (sentinel
/// when unmatched), score fraction per disclosure mode and the redundancy
/// tag binding the shares to the session.
#[derive(Debug, Clone, Copy)]
pub struct ResultShares {
    pub matched: RingElement,
    pub index: RingElement,
    pub numerator: RingElement,
    pub denominator: RingElement,
    pub tag: RingElement,
}

pub fn encode_result(r: &ResultShares) -> Vec<u8> {
    pprl_net::pack_words(&[r.matched, r.index, r.numerator, r.denominator, r.tag])
}

pub fn decode_result(payload: &[u8]) -> Result<ResultShares, ProtocolError> {
    let words =
        pprl_net::unpack_words(payload).map_err(|e| ProtocolError::BadPayload(e.to_string()))?;
    if words.len() != 5 {
        return Err(ProtocolError::BadPayload(format!(
            "RESULT must be 5 words, got {}",
            words.len()
        )));
    }
    Ok(ResultShares {
        matched: words[0],
        index: words[1],
        numerator: words[2],
        denominator: words[3],
        tag: words[4],
    })
}

/// Public per-session value the result tag reconstructs to; the client
/// recomputes it to detect mixed-up or stale shares.
pub fn result_tag(sid: &SessionId) -> RingElement {
    let mut h = Sha256::new();
    h.update(b"pprl-result-tag-v1");
    h.update(sid);
    let digest = h.finalize();
    RingElement(u64::from_le_bytes(digest[..8].try_into().unwrap()))
}
