//! Functional correctness of every primitive against plaintext arithmetic on
//! randomized and boundary inputs, with exact equality throughout. The two
//! proxies run as threads over an in-process link; P1's correlated
//! randomness comes from a local dealer standing in for the helper.

use pprl_mpc::{
    bit_to_arithmetic_batch, secure_and_bits, secure_compare_geq_batch, secure_equals_batch,
    secure_msb_bool_batch, secure_multiplex, secure_multiply_batch, ComparisonBound,
    HelperTripleGen, MpcContext, SecureBit, TripleSource, XorBit, COMPARISON_BOUND,
};
use pprl_net::Link;
use pprl_ring::{share_vector, ProxyId, RandomStream, RingElement, Share, ShareVector, StreamPair};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::thread;

fn contexts(tag: u8) -> (MpcContext, MpcContext) {
    let (l0, l1) = Link::in_proc_pair(None, None);
    let sid = [tag; 16];
    let seed0 = [tag ^ 0x11; 16];
    let seed1 = [tag ^ 0x22; 16];
    let pair_seed = [tag ^ 0x33; 16];
    let ctx0 = MpcContext::new(
        ProxyId::P0,
        l0,
        sid,
        TripleSource::P0Stream(RandomStream::new(seed0, StreamPair::P0Helper)),
        RandomStream::new(pair_seed, StreamPair::Proxies),
    );
    let gen = HelperTripleGen::new(
        RandomStream::new(seed0, StreamPair::P0Helper),
        RandomStream::new(seed1, StreamPair::P1Helper),
    );
    let ctx1 = MpcContext::new(
        ProxyId::P1,
        l1,
        sid,
        TripleSource::Dealer(gen),
        RandomStream::new(pair_seed, StreamPair::Proxies),
    );
    (ctx0, ctx1)
}

fn run_pair<R: Send + 'static>(
    tag: u8,
    f: impl Fn(&mut MpcContext) -> R + Send + Sync + 'static,
) -> (R, R) {
    let (mut ctx0, mut ctx1) = contexts(tag);
    let f = std::sync::Arc::new(f);
    let f1 = f.clone();
    let h = thread::spawn(move || f1(&mut ctx1));
    let r0 = f(&mut ctx0);
    let r1 = h.join().unwrap();
    (r0, r1)
}

fn share_input(seed: u64, values: &[RingElement]) -> (ShareVector, ShareVector) {
    let mut stream = RandomStream::new(seed.to_le_bytes().repeat(2)[..16].try_into().unwrap(), StreamPair::Owner);
    share_vector(values, &mut stream)
}

fn reconstruct_all(a: &ShareVector, b: &ShareVector) -> Vec<RingElement> {
    pprl_ring::reconstruct_vector(a, b).unwrap()
}

fn reconstruct_bits(r0: &[SecureBit], r1: &[SecureBit]) -> Vec<u64> {
    r0.iter()
        .zip(r1)
        .map(|(a, b)| (a.0.value + b.0.value).0)
        .collect()
}

#[test]
fn multiply_matches_plaintext_on_1e5_pairs_including_wraps() {
    let mut rng = ChaCha12Rng::seed_from_u64(11);
    let n = 100_000;
    let mut xs: Vec<RingElement> = (0..n).map(|_| RingElement(rng.gen())).collect();
    let mut ys: Vec<RingElement> = (0..n).map(|_| RingElement(rng.gen())).collect();
    // Forced wrap and boundary cases.
    let forced = [
        (6u64, 7u64),
        (1 << 63, 2),
        (u64::MAX, u64::MAX),
        (u64::MAX, 2),
        (0, 12345),
        (1, u64::MAX),
    ];
    for (i, (x, y)) in forced.iter().enumerate() {
        xs[i] = RingElement(*x);
        ys[i] = RingElement(*y);
    }
    let (x0, x1) = share_input(1, &xs);
    let (y0, y1) = share_input(2, &ys);

    let (r0, r1) = run_pair(1, move |ctx| {
        let (x, y) = if ctx.party == ProxyId::P0 {
            (x0.clone(), y0.clone())
        } else {
            (x1.clone(), y1.clone())
        };
        let before = ctx.rounds;
        let out = secure_multiply_batch(ctx, &x, &y).unwrap();
        assert_eq!(ctx.rounds - before, 1, "multiply batch must be one round");
        out
    });

    let products = reconstruct_all(&r0, &r1);
    for i in 0..n {
        assert_eq!(products[i], xs[i] * ys[i], "mismatch at {i}");
    }
    assert_eq!(products[0], RingElement(42));
    assert_eq!(products[1], RingElement(0)); // 2^63 * 2 wraps to 0
}

#[test]
fn and_bits_matches_plaintext_on_900_bit_vectors() {
    let mut rng = ChaCha12Rng::seed_from_u64(13);
    let xs: Vec<RingElement> = (0..900).map(|_| RingElement(rng.gen_range(0..2u64))).collect();
    let ys: Vec<RingElement> = (0..900).map(|_| RingElement(rng.gen_range(0..2u64))).collect();
    let (x0, x1) = share_input(3, &xs);
    let (y0, y1) = share_input(4, &ys);

    let (r0, r1) = run_pair(2, move |ctx| {
        let (x, y) = if ctx.party == ProxyId::P0 {
            (x0.clone(), y0.clone())
        } else {
            (x1.clone(), y1.clone())
        };
        // Idempotence ride-along: x AND x reconstructs to x.
        let xx = secure_and_bits(ctx, &x, &x).unwrap();
        let xy = secure_and_bits(ctx, &x, &y).unwrap();
        (xx, xy)
    });

    let xx = reconstruct_all(&r0.0, &r1.0);
    assert_eq!(xx, xs);
    let out = reconstruct_all(&r0.1, &r1.1);
    for i in 0..900 {
        assert_eq!(out[i].0, xs[i].0 & ys[i].0);
    }
}

#[test]
fn msb_matches_bit63_on_random_values() {
    let mut rng = ChaCha12Rng::seed_from_u64(17);
    let n = 100_000;
    let mut zs: Vec<RingElement> = (0..n).map(|_| RingElement(rng.gen())).collect();
    zs[0] = RingElement(5);
    zs[1] = -RingElement(5);
    zs[2] = RingElement(0);
    let (z0, z1) = share_input(5, &zs);

    let (r0, r1) = run_pair(3, move |ctx| {
        let z = if ctx.party == ProxyId::P0 { &z0 } else { &z1 };
        secure_msb_bool_batch(ctx, &z.values).unwrap()
    });

    for i in 0..n {
        let bit = u64::from(r0[i].0 ^ r1[i].0);
        assert_eq!(bit, zs[i].0 >> 63, "msb mismatch at {i} for {}", zs[i].0);
    }
    assert_eq!(u64::from(r0[0].0 ^ r1[0].0), 0);
    assert_eq!(u64::from(r0[1].0 ^ r1[1].0), 1);
    assert_eq!(u64::from(r0[2].0 ^ r1[2].0), 0);
}

#[test]
fn compare_geq_exact_on_1e5_pairs_and_boundaries() {
    let bound = COMPARISON_BOUND;
    let mut rng = ChaCha12Rng::seed_from_u64(19);
    let n = 100_000;
    let mut az: Vec<RingElement> = (0..n).map(|_| RingElement(rng.gen_range(0..bound))).collect();
    let mut bz: Vec<RingElement> = (0..n).map(|_| RingElement(rng.gen_range(0..bound))).collect();
    let x = rng.gen_range(0..bound);
    let boundary = [
        (0u64, 0u64),
        (0, bound - 1),
        (bound - 1, 0),
        (x, x),
        (5, 3),
        (3, 5),
    ];
    for (i, (a, b)) in boundary.iter().enumerate() {
        az[i] = RingElement(*a);
        bz[i] = RingElement(*b);
    }
    let (a0, a1) = share_input(6, &az);
    let (b0, b1) = share_input(7, &bz);

    let (r0, r1) = run_pair(4, move |ctx| {
        let (a, b) = if ctx.party == ProxyId::P0 {
            (a0.clone(), b0.clone())
        } else {
            (a1.clone(), b1.clone())
        };
        let before = ctx.rounds;
        let out = secure_compare_geq_batch(ctx, &a, &b, ComparisonBound::default()).unwrap();
        // 1 opening + log2(64) AND rounds + 1 conversion round.
        assert_eq!(ctx.rounds - before, 8);
        out
    });

    let bits = reconstruct_bits(&r0, &r1);
    for i in 0..n {
        assert_eq!(bits[i], u64::from(az[i].0 >= bz[i].0), "geq mismatch at {i}");
    }
    // Ties yield 1.
    assert_eq!(bits[3], 1);
}

#[test]
fn equals_exact_on_near_collisions() {
    let mut rng = ChaCha12Rng::seed_from_u64(23);
    let mut az = Vec::new();
    let mut bz = Vec::new();
    // Near-collision sweep over random 16-bit operands: {a} x {a-1, a, a+1}.
    for _ in 0..20_000 {
        let a = rng.gen_range(1..u16::MAX as u64);
        for d in [-1i64, 0, 1] {
            az.push(RingElement(a));
            bz.push(RingElement((a as i64 + d) as u64));
        }
    }
    // Plus full-width values.
    for _ in 0..10_000 {
        az.push(RingElement(rng.gen()));
        bz.push(RingElement(if rng.gen_bool(0.5) {
            az.last().unwrap().0
        } else {
            rng.gen()
        }));
    }
    az.push(RingElement(42));
    bz.push(RingElement(42));
    az.push(RingElement(42));
    bz.push(RingElement(43));

    let expected: Vec<u64> = az.iter().zip(&bz).map(|(a, b)| u64::from(a == b)).collect();
    let (a0, a1) = share_input(8, &az);
    let (b0, b1) = share_input(9, &bz);

    let (r0, r1) = run_pair(5, move |ctx| {
        let (a, b) = if ctx.party == ProxyId::P0 {
            (a0.clone(), b0.clone())
        } else {
            (a1.clone(), b1.clone())
        };
        let before = ctx.rounds;
        let out = secure_equals_batch(ctx, &a, &b).unwrap();
        assert_eq!(ctx.rounds - before, 8);
        out
    });

    let bits = reconstruct_bits(&r0, &r1);
    assert_eq!(bits, expected);
}

#[test]
fn multiplex_selects_by_condition() {
    let cases = [(9u64, 4u64, 1u64), (9, 4, 0)];
    for (tag, (x, y, c)) in cases.into_iter().enumerate() {
        let (x0, x1) = share_input(10, &[RingElement(x)]);
        let (y0, y1) = share_input(11, &[RingElement(y)]);
        let (c0, c1) = share_input(12, &[RingElement(c)]);
        let (r0, r1) = run_pair(6 + tag as u8, move |ctx| {
            let (xs, ys, cs) = if ctx.party == ProxyId::P0 {
                (&x0, &y0, &c0)
            } else {
                (&x1, &y1, &c1)
            };
            let x = Share::new(ctx.party, xs.values[0]);
            let y = Share::new(ctx.party, ys.values[0]);
            let c = SecureBit(Share::new(ctx.party, cs.values[0]));
            secure_multiplex(ctx, &x, &y, &c).unwrap()
        });
        let out = (r0.value + r1.value).0;
        assert_eq!(out, if c == 1 { x } else { y });
    }
}

#[test]
fn multiplex_random_sweep() {
    let mut rng = ChaCha12Rng::seed_from_u64(29);
    for tag in 0..20 {
        let x = rng.gen::<u64>();
        let y = rng.gen::<u64>();
        let c = rng.gen_range(0..2u64);
        let (x0, x1) = share_input(rng.gen(), &[RingElement(x)]);
        let (y0, y1) = share_input(rng.gen(), &[RingElement(y)]);
        let (c0, c1) = share_input(rng.gen(), &[RingElement(c)]);
        let (r0, r1) = run_pair(100 + tag, move |ctx| {
            let (xs, ys, cs) = if ctx.party == ProxyId::P0 {
                (&x0, &y0, &c0)
            } else {
                (&x1, &y1, &c1)
            };
            secure_multiplex(
                ctx,
                &Share::new(ctx.party, xs.values[0]),
                &Share::new(ctx.party, ys.values[0]),
                &SecureBit(Share::new(ctx.party, cs.values[0])),
            )
            .unwrap()
        });
        assert_eq!((r0.value + r1.value).0, if c == 1 { x } else { y });
    }
}

#[test]
fn bit_conversion_covers_all_xor_cases() {
    // (p0_bit, p1_bit) -> XOR
    for (tag, (b0, b1)) in [(false, false), (true, true), (true, false), (false, true)]
        .into_iter()
        .enumerate()
    {
        let (r0, r1) = run_pair(60 + tag as u8, move |ctx| {
            let own = if ctx.party == ProxyId::P0 { b0 } else { b1 };
            bit_to_arithmetic_batch(ctx, &[XorBit(own)]).unwrap()
        });
        let got = (r0[0].0.value + r1[0].0.value).0;
        assert_eq!(got, u64::from(b0 ^ b1));
    }
}

#[test]
fn masking_respects_stream_freshness() {
    // Every mask offset is used once: drawing n elements advances the
    // counter by exactly n, monotonically.
    let mut s = RandomStream::new([9; 16], StreamPair::Proxies);
    let mut last = s.offset();
    for _ in 0..1000 {
        s.next_element();
        assert_eq!(s.offset(), last + 1);
        last = s.offset();
    }
}
