use crate::ProtocolError;
use pprl_linkage::{EncodedRecord, BIGRAM_SPACE};
use pprl_ring::{share_vector, ProxyId, RandomStream, RingElement, ShareVector};

/// Words per shared record on the wire: two 900-flag bigram maps, two
/// cardinalities, six completeness indicators, four exact values.
pub const RECORD_WORDS: usize = 2 * BIGRAM_SPACE + 2 + 6 + 4;

const CARD_AT: usize = 2 * BIGRAM_SPACE;
const DELTA_AT: usize = CARD_AT + 2;
const EXACT_AT: usize = DELTA_AT + 6;

/// One proxy's share of an outsourced record, kept in wire layout.
#[derive(Debug, Clone)]
pub struct SharedRecord(pub Vec<RingElement>);

impl SharedRecord {
    pub fn from_words(words: Vec<RingElement>) -> Result<Self, ProtocolError> {
        if words.len() != RECORD_WORDS {
            return Err(ProtocolError::BadPayload(format!(
                "record share has {} words, expected {RECORD_WORDS}",
                words.len()
            )));
        }
        Ok(SharedRecord(words))
    }

    pub fn name_map(&self) -> &[RingElement] {
        &self.0[..BIGRAM_SPACE]
    }

    pub fn city_map(&self) -> &[RingElement] {
        &self.0[BIGRAM_SPACE..2 * BIGRAM_SPACE]
    }

    pub fn name_card(&self) -> RingElement {
        self.0[CARD_AT]
    }

    pub fn city_card(&self) -> RingElement {
        self.0[CARD_AT + 1]
    }

    /// Completeness indicator share; field order: combined name, city, then
    /// the four exact fields.
    pub fn delta(&self, field: usize) -> RingElement {
        self.0[DELTA_AT + field]
    }

    pub fn exact(&self, field: usize) -> RingElement {
        self.0[EXACT_AT + field]
    }
}

/// Plaintext wire layout of an encoded record, ready for sharing.
pub fn flatten_record(record: &EncodedRecord) -> Vec<RingElement> {
    let mut words = Vec::with_capacity(RECORD_WORDS);
    words.extend(record.name_map.flags().map(RingElement));
    words.extend(record.city_map.flags().map(RingElement));
    words.push(RingElement(record.name_map.cardinality()));
    words.push(RingElement(record.city_map.cardinality()));
    words.push(RingElement(record.name_delta));
    words.push(RingElement(record.city_delta));
    for e in 0..4 {
        words.push(RingElement(record.exact_deltas[e]));
    }
    for e in 0..4 {
        words.push(RingElement(record.exact_values[e]));
    }
    debug_assert_eq!(words.len(), RECORD_WORDS);
    words
}

/// Splits a record into the two proxies' shares with fresh masking
/// randomness per word.
pub fn outsource_record(
    record: &EncodedRecord,
    stream: &mut RandomStream,
) -> (SharedRecord, SharedRecord) {
    let words = flatten_record(record);
    let (s0, s1) = share_vector(&words, stream);
    (SharedRecord(s0.values), SharedRecord(s1.values))
}

/// Recombines two record shares; test and debug harness use.
pub fn reconstruct_record_words(
    s0: &SharedRecord,
    s1: &SharedRecord,
) -> Result<Vec<RingElement>, ProtocolError> {
    let a = ShareVector::new(ProxyId::P0, s0.0.clone());
    let b = ShareVector::new(ProxyId::P1, s1.0.clone());
    Ok(pprl_ring::reconstruct_vector(&a, &b)?)
}
