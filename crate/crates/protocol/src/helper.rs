use crate::meter::SessionMeter;
use crate::payload::{decode_config, decode_hello_helper};
use crate::schedule::round_demands;
use crate::ProtocolError;
use pprl_linkage::validate_config;
use pprl_mpc::{encode_bool_block, encode_triple_block, HelperTripleGen};
use pprl_net::{Frame, Link, MessageType, SessionId, RECV_TIMEOUT};
use pprl_ring::{derive_session_seed, RandomStream, RingElement, StreamPair};
use std::time::Instant;

fn recv_typed(link: &Link, sid: &SessionId, want: MessageType) -> Result<Frame, ProtocolError> {
    let frame = link.recv(sid, RECV_TIMEOUT)?;
    match frame.msg_type {
        t if t == want => Ok(frame),
        MessageType::Abort => Err(ProtocolError::Aborted {
            party: "proxy".into(),
            reason: String::from_utf8_lossy(&frame.payload).into_owned(),
        }),
        other => Err(ProtocolError::BadPayload(format!(
            "helper expected {want:?}, got {other:?}"
        ))),
    }
}

/// The helper's whole part in a session: learn the public parameters and
/// both session nonces, derive the two proxy streams, walk the demand
/// schedule once, and ship P1 its correction blocks. P0 receives nothing.
pub fn run_helper_session(
    sid: SessionId,
    p0_link: &Link,
    p1_link: &Link,
    master_p0h: [u8; 16],
    master_p1h: [u8; 16],
) -> Result<SessionMeter, ProtocolError> {
    let started = Instant::now();
    let mut meter = SessionMeter::default();

    let hello0 = recv_typed(p0_link, &sid, MessageType::Hello)?;
    let (n0a, n1a) = decode_hello_helper(&hello0.payload)?;
    let config_frame = recv_typed(p0_link, &sid, MessageType::Config)?;
    let (config, m) = decode_config(&config_frame.payload)?;
    let hello1 = recv_typed(p1_link, &sid, MessageType::Hello)?;
    let (n0b, n1b) = decode_hello_helper(&hello1.payload)?;
    if n0a != n0b || n1a != n1b {
        return Err(ProtocolError::HandshakeMismatch(
            "proxies disagree on session nonces".into(),
        ));
    }
    validate_config(&config)?;
    if m == 0 {
        return Err(ProtocolError::EmptyDatabase);
    }

    let s0 = RandomStream::new(
        derive_session_seed(&master_p0h, StreamPair::P0Helper, &sid, &n0a, &n1a),
        StreamPair::P0Helper,
    );
    let s1 = RandomStream::new(
        derive_session_seed(&master_p1h, StreamPair::P1Helper, &sid, &n0a, &n1a),
        StreamPair::P1Helper,
    );
    let mut gen = HelperTripleGen::new(s0, s1);

    let mut pair_c: Vec<RingElement> = Vec::new();
    let mut cube: Vec<[RingElement; 4]> = Vec::new();
    let mut bool_z: Vec<u64> = Vec::new();
    let mut a2b_bits: Vec<u64> = Vec::new();
    for demand in round_demands(m as usize, config.disclosure) {
        for _ in 0..demand.pairs {
            pair_c.push(gen.pair().c);
        }
        for _ in 0..demand.cubes {
            let t = gen.cube();
            cube.push([t.ab, t.ac, t.bc, t.abc]);
        }
        for _ in 0..demand.bools {
            bool_z.push(gen.bool_word().z);
        }
        for _ in 0..demand.a2b {
            a2b_bits.push(gen.a2b().r_bits);
        }
    }

    let frame = Frame::new(
        MessageType::TripleBlock,
        sid,
        encode_triple_block(&pair_c, &cube, &a2b_bits),
    );
    meter.bytes_blocks += frame.wire_len() as u64;
    p1_link.send(&frame)?;
    let frame = Frame::new(MessageType::BoolTripleBlock, sid, encode_bool_block(&bool_z));
    meter.bytes_blocks += frame.wire_len() as u64;
    p1_link.send(&frame)?;

    meter.wall = started.elapsed();
    meter.phase("corrections", meter.wall);
    Ok(meter)
}
