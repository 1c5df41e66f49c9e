use pprl_ring::{
    local_linear, reconstruct, share_value, share_vector, ProxyId, RandomStream, RingElement,
    StreamPair,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn stream(seed: u8) -> RandomStream {
    RandomStream::new([seed; 16], StreamPair::Proxies)
}

#[test]
fn reconstruction_round_trip_boundary_values() {
    let mut s = stream(1);
    for v in [0u64, 1, 1 << 63, u64::MAX] {
        let secret = RingElement(v);
        let (s0, s1) = share_value(secret, &mut s);
        assert_eq!(reconstruct(&s0, &s1).unwrap(), secret);
    }
}

#[test]
fn reconstruction_round_trip_randomized_sweep() {
    let mut rng = ChaCha12Rng::seed_from_u64(42);
    let mut s = stream(2);
    for _ in 0..100_000 {
        let secret = RingElement(rng.gen());
        let (s0, s1) = share_value(secret, &mut s);
        assert_eq!(reconstruct(&s0, &s1).unwrap(), secret);
    }
}

proptest! {
    #[test]
    fn linearity_matches_plain_linear_map(
        secrets in proptest::collection::vec(any::<u64>(), 1..20),
        coeffs_seed in any::<u64>(),
        offset in any::<u64>(),
    ) {
        let mut rng = ChaCha12Rng::seed_from_u64(coeffs_seed);
        let coeffs: Vec<RingElement> =
            (0..secrets.len()).map(|_| RingElement(rng.gen())).collect();
        let secrets: Vec<RingElement> = secrets.into_iter().map(RingElement).collect();
        let offset = RingElement(offset);

        let mut s = stream(3);
        let (v0, v1) = share_vector(&secrets, &mut s);
        let r0 = local_linear(&v0, &coeffs, offset, ProxyId::P0).unwrap();
        let r1 = local_linear(&v1, &coeffs, offset, ProxyId::P1).unwrap();

        let expected = secrets
            .iter()
            .zip(&coeffs)
            .fold(offset, |acc, (&a, &c)| acc + c * a);
        prop_assert_eq!(reconstruct(&r0, &r1).unwrap(), expected);
    }
}

/// Chi-square p-value for observed byte counts against a uniform expectation.
fn chi_square_p(counts: &[u64; 256], total: u64) -> f64 {
    let expected = total as f64 / 256.0;
    let stat: f64 = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum();
    let dist = ChiSquared::new(255.0).unwrap();
    1.0 - dist.cdf(stat)
}

#[test]
fn shares_of_fixed_secret_have_uniform_low_bytes() {
    let secret = RingElement(0x00c0_ffee_0000_0042);
    let mut s = stream(4);
    let mut counts0 = [0u64; 256];
    let mut counts1 = [0u64; 256];
    let n = 200_000u64;
    for _ in 0..n {
        let (s0, s1) = share_value(secret, &mut s);
        counts0[(s0.value.0 & 0xff) as usize] += 1;
        counts1[(s1.value.0 & 0xff) as usize] += 1;
    }
    assert!(chi_square_p(&counts0, n) > 0.001);
    assert!(chi_square_p(&counts1, n) > 0.001);
}
