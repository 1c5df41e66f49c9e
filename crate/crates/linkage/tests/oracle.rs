//! Independent reference for the record score: the normalised weighted
//! average is evaluated directly with arbitrary-precision rationals,
//! field by field, and must agree exactly with the integer-fraction path.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use pprl_linkage::{
    best_match_plain, compare_fractions, encode_record, record_score_fraction, Disclosure,
    EncodedRecord, FieldWeights, LinkageConfig, RawRecord, ScoreFraction,
};
use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn big(v: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Direct rational evaluation:
/// `S = sum_f(delta_f w_f sim_f) / sum_f(delta_f w_f)` with
/// `delta_f = delta_f(x)/3 * delta_f(y)/3` and Dice similarities as true
/// rationals.
fn rational_score(ex: &EncodedRecord, ey: &EncodedRecord, weights: &FieldWeights) -> BigRational {
    let three = big(3);
    let mut num = BigRational::zero();
    let mut den = BigRational::zero();

    // Combined name.
    let delta = (big(ex.name_delta) / &three) * (big(ey.name_delta) / &three);
    let sim = big(2 * ex.name_map.intersection_size(&ey.name_map))
        / big(ex.name_map.cardinality() + ey.name_map.cardinality());
    num += &delta * big(weights.combined_name) * &sim;
    den += &delta * big(weights.combined_name);

    // City.
    let delta = (big(ex.city_delta) / &three) * (big(ey.city_delta) / &three);
    let sim = big(2 * ex.city_map.intersection_size(&ey.city_map))
        / big(ex.city_map.cardinality() + ey.city_map.cardinality());
    num += &delta * big(weights.city) * &sim;
    den += &delta * big(weights.city);

    // Exact fields.
    for i in 0..4 {
        let delta = (big(ex.exact_deltas[i]) / &three) * (big(ey.exact_deltas[i]) / &three);
        let sim = big(u64::from(ex.exact_values[i] == ey.exact_values[i]));
        num += &delta * big(weights.exact[i]) * &sim;
        den += &delta * big(weights.exact[i]);
    }

    if den.is_zero() {
        return BigRational::zero();
    }
    num / den
}

fn as_rational(f: &ScoreFraction) -> BigRational {
    big(f.numerator) / big(f.denominator)
}

const FIRST: &[&str] = &[
    "anna", "maria", "elena", "josef", "karl", "hans", "ute", "jörg", "sören", "anne-kathrin",
];
const LAST: &[&str] = &[
    "meier", "müller", "schmidt", "schneider", "weiß", "becker", "hoffmann", "o'brien",
];
const CITY: &[&str] = &[
    "tübingen", "stuttgart", "münchen", "berlin", "köln", "", "freiburg im breisgau",
];

fn random_record(rng: &mut ChaCha12Rng) -> EncodedRecord {
    let pick = |rng: &mut ChaCha12Rng, opts: &[&str], missing: f64| -> String {
        if rng.gen_bool(missing) {
            String::new()
        } else {
            opts.choose(rng).unwrap().to_string()
        }
    };
    let raw = RawRecord {
        first_name: pick(rng, FIRST, 0.1),
        last_name: pick(rng, LAST, 0.1),
        birth_name: pick(rng, LAST, 0.6),
        city: pick(rng, CITY, 0.1),
        postcode: if rng.gen_bool(0.1) {
            String::new()
        } else {
            format!("{}", rng.gen_range(10000..99999))
        },
        birth_year: format!("{}", rng.gen_range(1930..2010)),
        birth_month: format!("{}", rng.gen_range(1..13)),
        birth_day: format!("{}", rng.gen_range(1..29)),
    };
    encode_record(&raw).unwrap()
}

fn random_config(rng: &mut ChaCha12Rng) -> LinkageConfig {
    let mut weights = FieldWeights {
        combined_name: rng.gen_range(1..2000),
        city: rng.gen_range(1..1000),
        exact: [
            rng.gen_range(1..800),
            rng.gen_range(1..800),
            rng.gen_range(1..800),
            rng.gen_range(1..800),
        ],
    };
    while 9 * weights.sum() > pprl_linkage::WEIGHT_BUDGET {
        weights.combined_name = weights.combined_name / 2 + 1;
        weights.city = weights.city / 2 + 1;
        for w in &mut weights.exact {
            *w = *w / 2 + 1;
        }
    }
    LinkageConfig::new(weights, rng.gen_range(0.55..0.9), Disclosure::Full)
}

#[test]
fn fraction_matches_rational_oracle_on_random_pairs() {
    let mut rng = ChaCha12Rng::seed_from_u64(2024);
    for _ in 0..10_000 {
        let cfg = random_config(&mut rng);
        let x = random_record(&mut rng);
        let y = random_record(&mut rng);
        let fast = record_score_fraction(&x, &y, &cfg);
        let slow = rational_score(&x, &y, &cfg.weights);
        assert_eq!(as_rational(&fast), slow, "score mismatch for {x:?} vs {y:?}");
    }
}

#[test]
fn fraction_range_invariant() {
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    for _ in 0..2_000 {
        let cfg = random_config(&mut rng);
        let x = random_record(&mut rng);
        let y = random_record(&mut rng);
        let f = record_score_fraction(&x, &y, &cfg);
        assert!(f.numerator <= f.denominator);
        assert!(f.denominator >= 1);
        assert!(f.denominator < 1 << 30);
    }
}

#[test]
fn argmax_agrees_with_rational_ordering() {
    let mut rng = ChaCha12Rng::seed_from_u64(99);
    for _ in 0..200 {
        let cfg = random_config(&mut rng);
        let q = random_record(&mut rng);
        let db: Vec<EncodedRecord> = (0..17).map(|_| random_record(&mut rng)).collect();
        let (idx, score, _) = best_match_plain(&q, &db, &cfg).unwrap();

        let mut best = 0usize;
        let mut best_val = rational_score(&q, &db[0], &cfg.weights);
        for (j, y) in db.iter().enumerate().skip(1) {
            let v = rational_score(&q, y, &cfg.weights);
            if v > best_val {
                best_val = v;
                best = j;
            }
        }
        assert_eq!(idx, best);
        assert_eq!(as_rational(&score), best_val);
    }
}

#[test]
fn cross_multiplication_agrees_with_rational_ordering() {
    let mut rng = ChaCha12Rng::seed_from_u64(3);
    for _ in 0..10_000 {
        let a = ScoreFraction::new(rng.gen_range(0..1 << 30), rng.gen_range(1..1 << 30));
        let b = ScoreFraction::new(rng.gen_range(0..1 << 30), rng.gen_range(1..1 << 30));
        let exact = as_rational(&a).cmp(&as_rational(&b));
        assert_eq!(compare_fractions(&a, &b), exact);
    }
}
