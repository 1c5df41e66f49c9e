use crate::meter::SessionMeter;
use crate::outsource::SharedRecord;
use crate::payload::{
    config_digest, decode_hello_proxy, encode_config, encode_hello_helper, encode_hello_proxy,
    encode_result, result_tag, ResultShares, SessionHello, SENTINEL,
};
use crate::ProtocolError;
use pprl_linkage::{validate_config, BoundCertificate, Disclosure, FieldWeights, LinkageConfig};
use pprl_linkage::TAU_SCALE;
use pprl_mpc::{
    secure_compare_geq_bool_batch, xor_bit_products, ComparisonBound, MpcContext, TripleSource,
    XorBit,
};
use pprl_net::{Frame, Link, MessageType, SessionId, RECV_TIMEOUT};
use pprl_ring::{derive_session_seed, ProxyId, RandomStream, RingElement, StreamPair};
use rand::RngCore;
use sha2::{Digest, Sha256};
use std::sync::Arc;
use std::time::Instant;

/// Long-term pairwise secrets as seen by one proxy. Production key agreement
/// is out of scope; for reproducible runs all of them derive from the
/// configured master seed.
#[derive(Debug, Clone, Copy)]
pub struct MasterSecrets {
    /// Shared by the two proxies.
    pub proxies: [u8; 16],
    /// Shared by this proxy and the helper.
    pub helper: [u8; 16],
}

fn derive_master(seed: &[u8; 16], tag: &[u8]) -> [u8; 16] {
    let mut h = Sha256::new();
    h.update(b"pprl-master-v1");
    h.update(seed);
    h.update(tag);
    let d = h.finalize();
    d[..16].try_into().unwrap()
}

/// Per-party view of the three pairwise master secrets.
pub fn derive_masters(seed: &[u8; 16], party: ProxyId) -> MasterSecrets {
    MasterSecrets {
        proxies: derive_master(seed, b"p0p1"),
        helper: match party {
            ProxyId::P0 => derive_master(seed, b"p0h"),
            ProxyId::P1 => derive_master(seed, b"p1h"),
        },
    }
}

/// The helper's copies of its two pairwise secrets.
pub fn derive_helper_masters(seed: &[u8; 16]) -> ([u8; 16], [u8; 16]) {
    (derive_master(seed, b"p0h"), derive_master(seed, b"p1h"))
}

/// Everything one proxy needs to run a linkage session.
pub struct ProxySessionDeps {
    pub party: ProxyId,
    pub sid: SessionId,
    pub config: LinkageConfig,
    pub db: Arc<Vec<SharedRecord>>,
    pub query: SharedRecord,
    pub peer: Link,
    pub helper: Link,
    pub client: Link,
    pub masters: MasterSecrets,
}

#[derive(Debug, Clone, Copy)]
struct ScoreShares {
    n: RingElement,
    d: RingElement,
    idx: RingElement,
}

fn recv_typed(
    link: &Link,
    sid: &SessionId,
    want: MessageType,
) -> Result<Frame, ProtocolError> {
    let frame = link.recv(sid, RECV_TIMEOUT)?;
    match frame.msg_type {
        t if t == want => Ok(frame),
        MessageType::Abort => Err(ProtocolError::Aborted {
            party: "peer".into(),
            reason: String::from_utf8_lossy(&frame.payload).into_owned(),
        }),
        other => Err(ProtocolError::BadPayload(format!(
            "expected {want:?}, got {other:?}"
        ))),
    }
}

/// Runs one full session on a proxy: handshake and stream derivation, the
/// three secure phases, and the result delivery to the client. Returns the
/// meter and the result shares this proxy sent.
pub fn run_proxy_session(
    deps: ProxySessionDeps,
) -> Result<(SessionMeter, ResultShares), ProtocolError> {
    let ProxySessionDeps {
        party,
        sid,
        config,
        db,
        query,
        peer,
        helper,
        client,
        masters,
    } = deps;
    let mut meter = SessionMeter::default();
    let session_start = Instant::now();

    validate_config(&config)?;
    BoundCertificate::for_config(&config)?;
    let m = db.len();
    if m == 0 {
        return Err(ProtocolError::EmptyDatabase);
    }

    // Handshake: exchange nonces and cross-check the config digest and
    // database size, then hand the helper both nonces (and, from P0, the
    // public session parameters it needs for the correction schedule).
    let t0 = Instant::now();
    let mut nonce = [0u8; 32];
    rand::rngs::OsRng.fill_bytes(&mut nonce);
    let digest = config_digest(&config);
    let hello = SessionHello {
        nonce,
        digest,
        m: m as u64,
    };
    let frame = Frame::new(MessageType::Hello, sid, encode_hello_proxy(&hello));
    meter.bytes_to_peer += frame.wire_len() as u64;
    peer.send(&frame)?;
    let peer_hello = decode_hello_proxy(&recv_typed(&peer, &sid, MessageType::Hello)?.payload)?;
    if peer_hello.digest != digest {
        return Err(ProtocolError::HandshakeMismatch(
            "config digests differ between proxies".into(),
        ));
    }
    if peer_hello.m != m as u64 {
        return Err(ProtocolError::HandshakeMismatch(format!(
            "database sizes differ: ours {m}, peer {}",
            peer_hello.m
        )));
    }
    let (nonce0, nonce1) = match party {
        ProxyId::P0 => (nonce, peer_hello.nonce),
        ProxyId::P1 => (peer_hello.nonce, nonce),
    };
    let frame = Frame::new(
        MessageType::Hello,
        sid,
        encode_hello_helper(&nonce0, &nonce1),
    );
    meter.bytes_to_helper += frame.wire_len() as u64;
    helper.send(&frame)?;
    if party == ProxyId::P0 {
        let frame = Frame::new(MessageType::Config, sid, encode_config(&config, m as u64));
        meter.bytes_to_helper += frame.wire_len() as u64;
        helper.send(&frame)?;
    }

    let pair_stream = RandomStream::new(
        derive_session_seed(&masters.proxies, StreamPair::Proxies, &sid, &nonce0, &nonce1),
        StreamPair::Proxies,
    );
    let helper_pair = match party {
        ProxyId::P0 => StreamPair::P0Helper,
        ProxyId::P1 => StreamPair::P1Helper,
    };
    let helper_stream = RandomStream::new(
        derive_session_seed(&masters.helper, helper_pair, &sid, &nonce0, &nonce1),
        helper_pair,
    );
    let source = match party {
        ProxyId::P0 => TripleSource::P0Stream(helper_stream),
        ProxyId::P1 => {
            let mut source = TripleSource::P1Stream {
                stream: helper_stream,
                corr: Default::default(),
            };
            // The helper ships the whole session's corrections up front.
            let block = recv_typed(&helper, &sid, MessageType::TripleBlock)?;
            source.feed_triple_block(&block.payload)?;
            let block = recv_typed(&helper, &sid, MessageType::BoolTripleBlock)?;
            source.feed_bool_block(&block.payload)?;
            source
        }
    };
    let mut ctx = MpcContext::new(party, peer.clone(), sid, source, pair_stream);
    // First common draw of the session masks the result tag.
    let tag_share = ctx.share_private(ProxyId::P0, result_tag(&sid));
    meter.phase("handshake", t0.elapsed());

    let t0 = Instant::now();
    let scores = similarity_phase(&mut ctx, &query, &db, &config.weights)?;
    meter.phase("similarity", t0.elapsed());

    let t0 = Instant::now();
    let best = tournament_phase(&mut ctx, scores)?;
    meter.phase("tournament", t0.elapsed());

    let t0 = Instant::now();
    let result = threshold_phase(&mut ctx, best, &config, tag_share)?;
    meter.phase("threshold", t0.elapsed());

    ctx.source.verify_drained()?;

    let frame = Frame::new(MessageType::Result, sid, encode_result(&result));
    meter.bytes_to_client += frame.wire_len() as u64;
    client.send(&frame)?;

    meter.rounds = ctx.rounds;
    meter.open_frames = ctx.rounds;
    meter.bytes_to_peer +=
        ctx.open_bytes_sent + ctx.rounds as u64 * pprl_net::HEADER_LEN as u64;
    meter.wall = session_start.elapsed();
    Ok((meter, result))
}

/// Batched similarity scores for the query against every database record:
/// one round of bigram-map products, completeness products and masked
/// equality openings, cube products assembling the division-free fraction,
/// the equality OR tree, and a fused round folding the equality bits into
/// the exact-field terms. Output fractions and index shares, one per record.
fn similarity_phase(
    ctx: &mut MpcContext,
    query: &SharedRecord,
    db: &[SharedRecord],
    weights: &FieldWeights,
) -> Result<Vec<ScoreShares>, ProtocolError> {
    let m = db.len();
    let is_p0 = ctx.party.adds_public_offset();
    let map_len = query.name_map().len();
    let stride = 2 * map_len + 6;

    let mut round = ctx.begin();
    for rec in db {
        for (q, r) in query.name_map().iter().zip(rec.name_map()) {
            round.pair(*q, *r)?;
        }
        for (q, r) in query.city_map().iter().zip(rec.city_map()) {
            round.pair(*q, *r)?;
        }
        for f in 0..6 {
            round.pair(query.delta(f), rec.delta(f))?;
        }
    }
    for rec in db {
        for e in 0..4 {
            round.a2b_open(query.exact(e) - rec.exact(e))?;
        }
    }
    let r1 = round.execute()?;

    let two = RingElement(2);
    let mut n_name = Vec::with_capacity(m);
    let mut d_name = Vec::with_capacity(m);
    let mut n_city = Vec::with_capacity(m);
    let mut d_city = Vec::with_capacity(m);
    let mut dd = Vec::with_capacity(m * 6);
    for (j, rec) in db.iter().enumerate() {
        let base = j * stride;
        let name_sum: RingElement = r1.pair_out[base..base + map_len].iter().copied().sum();
        let city_sum: RingElement = r1.pair_out[base + map_len..base + 2 * map_len]
            .iter()
            .copied()
            .sum();
        n_name.push(two * name_sum);
        n_city.push(two * city_sum);
        d_name.push(query.name_card() + rec.name_card());
        d_city.push(query.city_card() + rec.city_card());
        dd.extend_from_slice(&r1.pair_out[base + 2 * map_len..base + stride]);
    }
    // XOR shares of m ^ r per exact-field equality; zero words mean equal.
    let mut t: Vec<u64> = r1
        .a2b_out
        .iter()
        .map(|&(mv, rb)| if is_p0 { mv ^ rb } else { rb })
        .collect();

    // R2: fraction cubes next to the first OR-tree fold.
    let mut round = ctx.begin();
    for j in 0..m {
        round.cube(dd[j * 6], n_name[j], d_city[j])?;
        round.cube(dd[j * 6 + 1], n_city[j], d_name[j])?;
        for f in 0..6 {
            round.cube(dd[j * 6 + f], d_name[j], d_city[j])?;
        }
    }
    for &ti in &t {
        round.bool_and(ti >> 32, ti)?;
    }
    let r2 = round.execute()?;
    for (i, ti) in t.iter_mut().enumerate() {
        *ti = (*ti >> 32) ^ *ti ^ r2.bool_out[i];
    }

    for width in [16u32, 8, 4, 2, 1] {
        let mut round = ctx.begin();
        for &ti in &t {
            round.bool_and(ti >> width, ti)?;
        }
        let r = round.execute()?;
        for (i, ti) in t.iter_mut().enumerate() {
            *ti = (*ti >> width) ^ *ti ^ r.bool_out[i];
        }
    }

    // R8: fold each "values differ" bit into its weighted score term.
    let bits: Vec<XorBit> = t.iter().map(|&ti| XorBit(ti & 1 != 0)).collect();
    let vals: Vec<Vec<RingElement>> = (0..4 * m)
        .map(|i| {
            let j = i / 4;
            let e = i % 4;
            vec![r2.cube_out[j * 8 + 2 + e]]
        })
        .collect();
    let prods = xor_bit_products(ctx, &bits, &vals, false)?;

    let w = weights.all().map(RingElement);
    let mut scores = Vec::with_capacity(m);
    for j in 0..m {
        let cubes = &r2.cube_out[j * 8..j * 8 + 8];
        let mut num = w[0] * cubes[0] + w[1] * cubes[1];
        let mut den = RingElement::ZERO;
        for f in 0..6 {
            den += w[f] * cubes[2 + f];
        }
        for e in 0..4 {
            let k_term = cubes[4 + e];
            let differs_times_k = prods[j * 4 + e].products[0];
            num += w[2 + e] * (k_term - differs_times_k);
        }
        scores.push(ScoreShares {
            n: num,
            d: den,
            idx: ctx.share_public(RingElement(j as u64)),
        });
    }
    Ok(scores)
}

/// Binary max tournament: each level cross-multiplies numerator and
/// denominator shares, compares, and multiplexes the winning (n, d, index)
/// in the comparison's fused conversion round. Ties pick the left (lower
/// index) entrant; an odd entrant advances unchanged.
fn tournament_phase(
    ctx: &mut MpcContext,
    mut scores: Vec<ScoreShares>,
) -> Result<ScoreShares, ProtocolError> {
    while scores.len() > 1 {
        let duels = scores.len() / 2;
        let mut round = ctx.begin();
        for k in 0..duels {
            let left = &scores[2 * k];
            let right = &scores[2 * k + 1];
            round.pair(left.n, right.d)?;
            round.pair(right.n, left.d)?;
        }
        let ra = round.execute()?;
        let u: Vec<RingElement> = (0..duels).map(|k| ra.pair_out[2 * k]).collect();
        let v: Vec<RingElement> = (0..duels).map(|k| ra.pair_out[2 * k + 1]).collect();

        let left_wins =
            secure_compare_geq_bool_batch(ctx, &u, &v, ComparisonBound::default())?;

        let vals: Vec<Vec<RingElement>> = (0..duels)
            .map(|k| {
                let left = &scores[2 * k];
                let right = &scores[2 * k + 1];
                vec![
                    left.n - right.n,
                    left.d - right.d,
                    left.idx - right.idx,
                ]
            })
            .collect();
        let prods = xor_bit_products(ctx, &left_wins, &vals, false)?;

        let mut next = Vec::with_capacity(duels + scores.len() % 2);
        for (k, bp) in prods.iter().enumerate() {
            let right = &scores[2 * k + 1];
            next.push(ScoreShares {
                n: right.n + bp.products[0],
                d: right.d + bp.products[1],
                idx: right.idx + bp.products[2],
            });
        }
        if scores.len() % 2 == 1 {
            next.push(*scores.last().unwrap());
        }
        scores = next;
    }
    Ok(scores[0])
}

/// Strict threshold test `n/d > tau` via `n*2^16 >= tau_fixed*d + 1`, then
/// the disclosure-shaped result: the matched bit always, index and score
/// multiplexed against public sentinels in the same fused round.
fn threshold_phase(
    ctx: &mut MpcContext,
    best: ScoreShares,
    config: &LinkageConfig,
    tag_share: RingElement,
) -> Result<ResultShares, ProtocolError> {
    let lhs = best.n * RingElement(TAU_SCALE);
    let rhs = best.d * RingElement(config.tau_fixed) + ctx.share_public(RingElement::ONE);
    let exceeds = secure_compare_geq_bool_batch(ctx, &[lhs], &[rhs], ComparisonBound::default())?;

    let sentinel = ctx.share_public(RingElement(SENTINEL));
    let one = ctx.share_public(RingElement::ONE);
    let vals = match config.disclosure {
        Disclosure::Bit => vec![],
        Disclosure::Index => vec![best.idx - sentinel],
        Disclosure::Full => vec![best.idx - sentinel, best.n, best.d - one],
    };
    let out = &xor_bit_products(ctx, &exceeds, &[vals], true)?[0];
    let matched = out.bit.expect("bit requested");

    let (index, numerator, denominator) = match config.disclosure {
        Disclosure::Bit => (sentinel, ctx.share_public(RingElement::ZERO), one),
        Disclosure::Index => (
            sentinel + out.products[0],
            ctx.share_public(RingElement::ZERO),
            one,
        ),
        Disclosure::Full => (
            sentinel + out.products[0],
            out.products[1],
            one + out.products[2],
        ),
    };
    Ok(ResultShares {
        matched,
        index,
        numerator,
        denominator,
        tag: tag_share,
    })
}
