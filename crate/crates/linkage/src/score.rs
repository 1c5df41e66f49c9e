use crate::config::{LinkageConfig, TAU_SCALE};
use crate::encode::{BigramMap, EncodedRecord};
use crate::LinkageError;
use std::cmp::Ordering;

/// A similarity score carried as an integer fraction so no division (and no
/// rounding) ever happens. Ordering is exact via cross-multiplication.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScoreFraction {
    pub numerator: u64,
    pub denominator: u64,
}

impl ScoreFraction {
    pub fn new(numerator: u64, denominator: u64) -> Self {
        debug_assert!(denominator >= 1);
        ScoreFraction {
            numerator,
            denominator,
        }
    }

    pub fn value(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

/// Exact rational ordering of two score fractions. The cross products stay
/// below 2^61 under the configured budget, so u128 here is belt and braces.
pub fn compare_fractions(a: &ScoreFraction, b: &ScoreFraction) -> Ordering {
    let lhs = a.numerator as u128 * b.denominator as u128;
    let rhs = b.numerator as u128 * a.denominator as u128;
    lhs.cmp(&rhs)
}

/// Dice coefficient of two bigram maps as a fraction: numerator twice the
/// intersection size, denominator the cardinality sum.
pub fn dice_fraction(mx: &BigramMap, my: &BigramMap) -> ScoreFraction {
    ScoreFraction::new(
        2 * mx.intersection_size(my),
        mx.cardinality() + my.cardinality(),
    )
}

/// Exact-field similarity: 1 iff equal.
pub fn exact_similarity(x: u64, y: u64) -> u64 {
    u64::from(x == y)
}

/// Weighted record score as a single fraction.
///
/// With `dd_f = delta_f(x) * delta_f(y)` (thirds scale squared, in [0, 9])
/// and `u_f = dd_f * w_f`, the fraction is
///
/// ```text
/// N = u_name*n_N*d_C + u_city*n_C*d_N + (sum_e u_e*s_e)*d_N*d_C
/// D = (u_name + u_city + sum_e u_e) * d_N * d_C
/// ```
///
/// which equals the normalised weighted field-similarity average exactly:
/// both sides were multiplied by `d_N*d_C` and the thirds scale cancels.
/// Under the validated weight budget all intermediates stay below 2^30.
pub fn record_score_fraction(
    ex: &EncodedRecord,
    ey: &EncodedRecord,
    config: &LinkageConfig,
) -> ScoreFraction {
    let name = dice_fraction(&ex.name_map, &ey.name_map);
    let city = dice_fraction(&ex.city_map, &ey.city_map);

    let u_name = ex.name_delta * ey.name_delta * config.weights.combined_name;
    let u_city = ex.city_delta * ey.city_delta * config.weights.city;

    let mut numerator = u_name * name.numerator * city.denominator
        + u_city * city.numerator * name.denominator;
    let mut weight_sum = u_name + u_city;
    for i in 0..4 {
        let u_e = ex.exact_deltas[i] * ey.exact_deltas[i] * config.weights.exact[i];
        weight_sum += u_e;
        let s_e = exact_similarity(ex.exact_values[i], ey.exact_values[i]);
        numerator += u_e * s_e * name.denominator * city.denominator;
    }
    let denominator = weight_sum * name.denominator * city.denominator;

    debug_assert!(numerator < 1 << 30, "score numerator exceeds budget");
    debug_assert!(denominator < 1 << 30, "score denominator exceeds budget");

    if denominator == 0 {
        // All deltas zero on at least one side: both records carry no
        // comparable information. Defined as score 0.
        return ScoreFraction::new(0, 1);
    }
    ScoreFraction::new(numerator, denominator)
}

/// Strict threshold decision: `n/d > tau` evaluated as
/// `n * 2^16 >= tau_fixed * d + 1` in integers.
pub fn exceeds_threshold(score: &ScoreFraction, tau_fixed: u64) -> bool {
    score.numerator * TAU_SCALE > tau_fixed * score.denominator
}

/// Plaintext reference for the whole linkage decision: the argmax over the
/// database (ties to the lowest index) plus the strict threshold test.
pub fn best_match_plain(
    query: &EncodedRecord,
    db: &[EncodedRecord],
    config: &LinkageConfig,
) -> Result<(usize, ScoreFraction, bool), LinkageError> {
    if db.is_empty() {
        return Err(LinkageError::EmptyDatabase);
    }
    let mut best_index = 0usize;
    let mut best = record_score_fraction(query, &db[0], config);
    for (j, candidate) in db.iter().enumerate().skip(1) {
        let score = record_score_fraction(query, candidate, config);
        if compare_fractions(&score, &best) == Ordering::Greater {
            best = score;
            best_index = j;
        }
    }
    Ok((best_index, best, exceeds_threshold(&best, config.tau_fixed)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::FieldWeights;
    use crate::encode::{encode_record, RawRecord};

    fn config() -> LinkageConfig {
        LinkageConfig::new(
            FieldWeights {
                combined_name: 573,
                city: 360,
                exact: [425, 378, 229, 314],
            },
            0.75,
            crate::Disclosure::Full,
        )
    }

    fn record(first: &str, last: &str, city: &str, postcode: &str) -> EncodedRecord {
        encode_record(&RawRecord {
            first_name: first.into(),
            last_name: last.into(),
            birth_name: String::new(),
            city: city.into(),
            postcode: postcode.into(),
            birth_year: "1970".into(),
            birth_month: "5".into(),
            birth_day: "12".into(),
        })
        .unwrap()
    }

    #[test]
    fn dice_identity_is_one() {
        let m = BigramMap::build("smith", "t").unwrap();
        let f = dice_fraction(&m, &m);
        assert_eq!((f.numerator, f.denominator), (8, 8));
    }

    #[test]
    fn dice_smith_smyth_is_half() {
        let mx = BigramMap::build("smith", "t").unwrap();
        let my = BigramMap::build("smyth", "t").unwrap();
        let f = dice_fraction(&mx, &my);
        assert_eq!((f.numerator, f.denominator), (4, 8));
    }

    #[test]
    fn dice_disjoint_is_zero() {
        let mx = BigramMap::build("abab", "t").unwrap();
        let my = BigramMap::build("xyxy", "t").unwrap();
        assert_eq!(dice_fraction(&mx, &my).numerator, 0);
    }

    #[test]
    fn dice_is_symmetric() {
        let mx = BigramMap::build("meier", "t").unwrap();
        let my = BigramMap::build("meyer", "t").unwrap();
        assert_eq!(dice_fraction(&mx, &my), dice_fraction(&my, &mx));
    }

    #[test]
    fn exact_similarity_bits() {
        assert_eq!(exact_similarity(72070, 72070), 1);
        assert_eq!(exact_similarity(72070, 72072), 0);
        assert_eq!(exact_similarity(0, 0), 1);
    }

    #[test]
    fn identical_records_score_one() {
        let cfg = config();
        let r = record("anna", "meier", "tuebingen", "72070");
        let s = record_score_fraction(&r, &r, &cfg);
        assert_eq!(s.numerator, s.denominator);
        assert!(s.denominator >= 1);
    }

    #[test]
    fn single_matching_exact_field_reduces_to_one() {
        // Only the postcode carries information on both sides.
        let cfg = config();
        let raw = RawRecord {
            postcode: "72070".into(),
            ..Default::default()
        };
        let e = encode_record(&raw).unwrap();
        let s = record_score_fraction(&e, &e, &cfg);
        assert_eq!(s.numerator, s.denominator);
    }

    #[test]
    fn no_information_at_all_scores_zero() {
        let cfg = config();
        let e = encode_record(&RawRecord::default()).unwrap();
        let s = record_score_fraction(&e, &e, &cfg);
        assert_eq!((s.numerator, s.denominator), (0, 1));
    }

    #[test]
    fn argmax_picks_largest_fraction() {
        let a = ScoreFraction::new(1, 2);
        let b = ScoreFraction::new(2, 3);
        let c = ScoreFraction::new(1, 3);
        assert_eq!(compare_fractions(&b, &a), Ordering::Greater);
        assert_eq!(compare_fractions(&c, &a), Ordering::Less);
        assert_eq!(
            compare_fractions(&ScoreFraction::new(2, 4), &a),
            Ordering::Equal
        );
    }

    #[test]
    fn best_match_finds_planted_copy() {
        let cfg = config();
        let q = record("anna", "meier", "tuebingen", "72070");
        let db = vec![
            record("josef", "huber", "muenchen", "80331"),
            record("anna", "meier", "tuebingen", "72070"),
            record("maria", "schmid", "stuttgart", "70173"),
        ];
        let (idx, score, matched) = best_match_plain(&q, &db, &cfg).unwrap();
        assert_eq!(idx, 1);
        assert_eq!(score.numerator, score.denominator);
        assert!(matched);
    }

    #[test]
    fn disjoint_database_does_not_match() {
        let cfg = config();
        let q = record("anna", "meier", "tuebingen", "72070");
        let db = vec![record("xyx", "qqq", "zzz", "11111")];
        let (_, _, matched) = best_match_plain(&q, &db, &cfg).unwrap();
        assert!(!matched);
    }

    #[test]
    fn threshold_is_strict() {
        // Score exactly tau must not match.
        let tau_fixed = (0.75 * TAU_SCALE as f64).round() as u64;
        let score = ScoreFraction::new(3 * TAU_SCALE / 4, TAU_SCALE);
        assert_eq!(score.numerator * TAU_SCALE, tau_fixed * score.denominator);
        assert!(!exceeds_threshold(&score, tau_fixed));
        let above = ScoreFraction::new(3 * TAU_SCALE / 4 + 1, TAU_SCALE);
        assert!(exceeds_threshold(&above, tau_fixed));
    }

    #[test]
    fn empty_db_is_an_error() {
        let cfg = config();
        let q = record("a", "b", "c", "1");
        assert_eq!(
            best_match_plain(&q, &[], &cfg).unwrap_err(),
            LinkageError::EmptyDatabase
        );
    }

    #[test]
    fn tie_breaks_to_lowest_index() {
        let cfg = config();
        let q = record("anna", "meier", "tuebingen", "72070");
        let dup = record("anna", "meier", "tuebingen", "72070");
        let db = vec![
            record("x", "y", "z", "9"),
            dup.clone(),
            dup,
        ];
        let (idx, _, _) = best_match_plain(&q, &db, &cfg).unwrap();
        assert_eq!(idx, 1);
    }
}
