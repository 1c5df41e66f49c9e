use crate::alphabet::{bigram_index, BIGRAM_SPACE, STAR};
use crate::normalize::normalize_text;
use crate::LinkageError;
use serde::{Deserialize, Serialize};

/// Distinct-bigram cap per fuzzy field; records above it are rejected at
/// ingestion so every later denominator and product stays inside the
/// certified overflow budget.
pub const MAX_BIGRAMS: usize = 63;

/// The exact-match fields, in wire order.
pub const EXACT_FIELDS: [&str; 4] = ["postcode", "birth_year", "birth_month", "birth_day"];

const BIGRAM_WORDS: usize = BIGRAM_SPACE.div_ceil(64);

/// Presence map over the 900 possible bigrams plus its cardinality.
///
/// The map is binary: repeated bigrams collapse, so the cardinality counts
/// distinct bigrams. Empty or single-character text maps to the reserved
/// `(*,*)` flag with cardinality 1 so denominators never vanish.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BigramMap {
    bits: [u64; BIGRAM_WORDS],
    cardinality: u32,
}

impl BigramMap {
    /// Builds the map from already-normalized text.
    pub fn build(text: &str, field: &'static str) -> Result<Self, LinkageError> {
        let chars: Vec<char> = text.chars().collect();
        let mut bits = [0u64; BIGRAM_WORDS];
        if chars.len() < 2 {
            let idx = bigram_index(STAR, STAR);
            bits[idx / 64] |= 1 << (idx % 64);
            return Ok(BigramMap {
                bits,
                cardinality: 1,
            });
        }
        for pair in chars.windows(2) {
            let idx = bigram_index(pair[0], pair[1]);
            bits[idx / 64] |= 1 << (idx % 64);
        }
        let cardinality: u32 = bits.iter().map(|w| w.count_ones()).sum();
        if cardinality as usize > MAX_BIGRAMS {
            return Err(LinkageError::BigramCapExceeded {
                field,
                count: cardinality as usize,
                max: MAX_BIGRAMS,
            });
        }
        Ok(BigramMap { bits, cardinality })
    }

    pub fn cardinality(&self) -> u64 {
        self.cardinality as u64
    }

    pub fn contains(&self, index: usize) -> bool {
        self.bits[index / 64] & (1 << (index % 64)) != 0
    }

    /// Number of bigrams present in both maps.
    pub fn intersection_size(&self, other: &BigramMap) -> u64 {
        self.bits
            .iter()
            .zip(&other.bits)
            .map(|(a, b)| (a & b).count_ones() as u64)
            .sum()
    }

    /// The 900 flags as 0/1 values, in index order.
    pub fn flags(&self) -> impl Iterator<Item = u64> + '_ {
        (0..BIGRAM_SPACE).map(move |i| u64::from(self.contains(i)))
    }
}

/// A record as read from a data owner's file; empty strings mean missing.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawRecord {
    pub first_name: String,
    pub last_name: String,
    pub birth_name: String,
    pub city: String,
    pub postcode: String,
    pub birth_year: String,
    pub birth_month: String,
    pub birth_day: String,
}

impl RawRecord {
    fn exact_raw(&self, i: usize) -> &str {
        match i {
            0 => &self.postcode,
            1 => &self.birth_year,
            2 => &self.birth_month,
            _ => &self.birth_day,
        }
    }
}

/// Encoded form of a record: bigram maps and cardinalities for the fuzzy
/// fields, completeness indicators on the thirds scale, and integer values
/// for the exact fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedRecord {
    pub name_map: BigramMap,
    pub city_map: BigramMap,
    /// Number of present name parts (first, last, birth), in [0, 3].
    pub name_delta: u64,
    /// 3 when the city is present, 0 otherwise.
    pub city_delta: u64,
    /// Exact field values in `EXACT_FIELDS` order; 0 when missing.
    pub exact_values: [u64; 4],
    /// 3 when the exact field is present, 0 otherwise.
    pub exact_deltas: [u64; 4],
}

impl EncodedRecord {
    pub fn delta(&self, field_index: usize) -> u64 {
        match field_index {
            0 => self.name_delta,
            1 => self.city_delta,
            i => self.exact_deltas[i - 2],
        }
    }
}

/// Encodes one raw record: the three name parts are normalized, joined with
/// single spaces (first, last, birth) and mapped together so swapped
/// first/last names still share bigrams; the city gets its own map; exact
/// fields are parsed to integers.
pub fn encode_record(raw: &RawRecord) -> Result<EncodedRecord, LinkageError> {
    let parts = [
        normalize_text(&raw.first_name),
        normalize_text(&raw.last_name),
        normalize_text(&raw.birth_name),
    ];
    let present: Vec<&str> = parts
        .iter()
        .filter(|p| !p.is_empty())
        .map(|p| p.as_str())
        .collect();
    let name_delta = present.len() as u64;
    let combined = present.join(" ");
    let name_map = BigramMap::build(&combined, "combined_name")?;

    let city = normalize_text(&raw.city);
    let city_delta = if city.is_empty() { 0 } else { 3 };
    let city_map = BigramMap::build(&city, "city")?;

    let mut exact_values = [0u64; 4];
    let mut exact_deltas = [0u64; 4];
    for (i, field) in EXACT_FIELDS.iter().enumerate() {
        let text = raw.exact_raw(i).trim();
        // Unparseable entries (data-entry garbage, shuffled-in text) carry
        // no comparable value and degrade to missing.
        let Ok(value) = text.parse::<u64>() else {
            continue;
        };
        if value >= 1 << 32 {
            return Err(LinkageError::ExactFieldTooLarge { field, value });
        }
        exact_values[i] = value;
        exact_deltas[i] = 3;
    }

    Ok(EncodedRecord {
        name_map,
        city_map,
        name_delta,
        city_delta,
        exact_values,
        exact_deltas,
    })
}
