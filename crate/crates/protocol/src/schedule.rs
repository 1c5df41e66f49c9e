use pprl_linkage::Disclosure;

/// Correlated-randomness demand of one proxy-to-proxy round, in the
/// canonical request order pair, cube, bool, a2b.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RoundDemand {
    pub pairs: usize,
    pub cubes: usize,
    pub bools: usize,
    pub a2b: usize,
}

const EXACT_FIELDS: usize = 4;
const FIELDS: usize = 6;
const MAP_LEN: usize = 900;
/// Opening, six Kogge-Stone levels, conversion.
pub const COMPARE_ROUNDS: u32 = 8;
/// Opening, six OR-tree levels, fused conversion-and-product round.
pub const SIMILARITY_ROUNDS: u32 = 8;

pub fn tournament_levels(m: usize) -> u32 {
    debug_assert!(m >= 1);
    (m.max(1) as u64).next_power_of_two().trailing_zeros()
}

/// Total proxy-to-proxy rounds of a session: the similarity phase, one
/// cross-multiply round plus a comparison per tournament level (the winner
/// multiplex rides in the comparison's conversion round), and the threshold
/// comparison with its fused reveal-shaping round.
pub fn expected_session_rounds(m: usize) -> u32 {
    SIMILARITY_ROUNDS + tournament_levels(m) * (1 + COMPARE_ROUNDS) + COMPARE_ROUNDS
}

/// The full demand schedule of a session against a database of `m` records.
/// The helper walks this to produce exactly the corrections the proxies
/// consume; any drift surfaces as leftover or missing corrections.
pub fn round_demands(m: usize, disclosure: Disclosure) -> Vec<RoundDemand> {
    let mut out = Vec::new();

    // Similarity phase.
    // R1: bigram map ANDs and completeness products, masked opens for the
    // exact-field equality checks.
    out.push(RoundDemand {
        pairs: m * (2 * MAP_LEN + FIELDS),
        a2b: m * EXACT_FIELDS,
        ..Default::default()
    });
    // R2: fraction cubes (two fuzzy numerator terms and six denominator
    // terms per record) alongside the first OR-tree level.
    out.push(RoundDemand {
        cubes: m * (2 + FIELDS),
        bools: m * EXACT_FIELDS,
        ..Default::default()
    });
    // R3..R7: remaining OR-tree levels.
    for _ in 0..5 {
        out.push(RoundDemand {
            bools: m * EXACT_FIELDS,
            ..Default::default()
        });
    }
    // R8: equality bits folded into the exact-field score terms.
    out.push(RoundDemand {
        pairs: 2 * m * EXACT_FIELDS,
        cubes: m * EXACT_FIELDS,
        ..Default::default()
    });

    // Max tournament.
    let mut len = m;
    while len > 1 {
        let duels = len / 2;
        out.push(RoundDemand {
            pairs: 2 * duels,
            ..Default::default()
        });
        out.push(RoundDemand {
            a2b: duels,
            ..Default::default()
        });
        for _ in 0..6 {
            out.push(RoundDemand {
                bools: 2 * duels,
                ..Default::default()
            });
        }
        // Fused conversion and three-way multiplex per duel.
        out.push(RoundDemand {
            pairs: 6 * duels,
            cubes: 3 * duels,
            ..Default::default()
        });
        len -= duels;
    }

    // Threshold decision.
    out.push(RoundDemand {
        a2b: 1,
        ..Default::default()
    });
    for _ in 0..6 {
        out.push(RoundDemand {
            bools: 2,
            ..Default::default()
        });
    }
    out.push(match disclosure {
        Disclosure::Bit => RoundDemand {
            pairs: 1,
            ..Default::default()
        },
        Disclosure::Index => RoundDemand {
            pairs: 3,
            cubes: 1,
            ..Default::default()
        },
        Disclosure::Full => RoundDemand {
            pairs: 7,
            cubes: 3,
            ..Default::default()
        },
    });

    debug_assert_eq!(out.len() as u32, expected_session_rounds(m));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levels_match_ceil_log2() {
        for (m, want) in [(1, 0), (2, 1), (3, 2), (4, 2), (5, 3), (64, 6), (1000, 10)] {
            assert_eq!(tournament_levels(m), want, "m = {m}");
        }
    }

    #[test]
    fn round_counts() {
        assert_eq!(expected_session_rounds(1), 16);
        assert_eq!(expected_session_rounds(64), 16 + 9 * 6);
        assert_eq!(
            round_demands(64, Disclosure::Full).len(),
            expected_session_rounds(64) as usize
        );
    }

    #[test]
    fn duel_total_is_m_minus_one() {
        for m in [1usize, 2, 3, 5, 17, 64, 100, 1000] {
            let demands = round_demands(m, Disclosure::Full);
            // Every duel consumes one a2b in the tournament; the threshold
            // adds one more, and the similarity phase 4m.
            let a2b_total: usize = demands.iter().map(|d| d.a2b).sum();
            assert_eq!(a2b_total, 4 * m + (m - 1) + 1);
        }
    }
}
