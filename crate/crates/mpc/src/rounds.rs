use crate::triples::{A2bMask, BoolTripleWord, CubeTriple, PairTriple, TripleSource};
use crate::MpcError;
use pprl_net::{Frame, Link, MessageType, SessionId};
use pprl_ring::{ProxyId, RandomStream, RingElement};
use std::time::Duration;

/// Per-proxy state for one session's secure computation: the peer link, the
/// correlated-randomness source and the proxies' common stream.
pub struct MpcContext {
    pub party: ProxyId,
    link: Link,
    sid: SessionId,
    pub source: TripleSource,
    /// Common randomness shared by the two proxies, used for zero-cost
    /// sharings of values one proxy holds privately.
    pub pair_stream: RandomStream,
    /// Completed proxy-to-proxy rounds.
    pub rounds: u32,
    /// OPEN payload bytes sent to the peer.
    pub open_bytes_sent: u64,
    pub timeout: Duration,
}

impl MpcContext {
    pub fn new(
        party: ProxyId,
        link: Link,
        sid: SessionId,
        source: TripleSource,
        pair_stream: RandomStream,
    ) -> Self {
        MpcContext {
            party,
            link,
            sid,
            source,
            pair_stream,
            rounds: 0,
            open_bytes_sent: 0,
            timeout: pprl_net::RECV_TIMEOUT,
        }
    }

    pub fn session_id(&self) -> SessionId {
        self.sid
    }

    pub fn begin(&mut self) -> RoundBatch<'_> {
        RoundBatch::new(self)
    }

    /// Shares a value one proxy holds privately, without communication: both
    /// proxies draw the same mask from the common stream; the owner keeps
    /// `value - mask`, the other keeps the mask.
    pub fn share_private(&mut self, owner: ProxyId, value: RingElement) -> RingElement {
        let mask = self.pair_stream.next_element();
        if self.party == owner {
            value - mask
        } else {
            mask
        }
    }

    /// Canonical sharing of a public constant: P0 holds it, P1 holds zero.
    pub fn share_public(&self, value: RingElement) -> RingElement {
        if self.party.adds_public_offset() {
            value
        } else {
            RingElement::ZERO
        }
    }

    fn recv_open(&mut self) -> Result<Vec<RingElement>, MpcError> {
        let frame = self.link.recv(&self.sid, self.timeout)?;
        match frame.msg_type {
            MessageType::Open => Ok(pprl_net::unpack_words(&frame.payload)?),
            MessageType::Abort => Err(MpcError::PeerAbort(
                String::from_utf8_lossy(&frame.payload).into_owned(),
            )),
            other => Err(MpcError::Violation(format!(
                "expected OPEN, got {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PairTok(usize);
#[derive(Debug, Clone, Copy)]
pub struct CubeTok(usize);
#[derive(Debug, Clone, Copy)]
pub struct BoolTok(usize);
#[derive(Debug, Clone, Copy)]
pub struct A2bTok(usize);

/// Request kinds in canonical order; requests within one round must be
/// issued in this order so both proxies and the helper draw their streams
/// identically.
#[derive(PartialEq, PartialOrd, Clone, Copy)]
enum Kind {
    Pair,
    Cube,
    Bool,
    A2b,
}

/// One batched proxy-to-proxy exchange. Collects product, AND and masked-open
/// requests, ships all masked differences in a single OPEN frame and combines
/// the peer's openings into output shares.
pub struct RoundBatch<'a> {
    ctx: &'a mut MpcContext,
    max_kind: Option<Kind>,
    pairs: Vec<PairTriple>,
    cubes: Vec<CubeTriple>,
    bools: Vec<BoolTripleWord>,
    a2bs: Vec<A2bMask>,
    pair_open: Vec<RingElement>,
    cube_open: Vec<RingElement>,
    bool_open: Vec<RingElement>,
    a2b_open: Vec<RingElement>,
}

/// Output shares of one executed round, indexed by the request tokens.
pub struct RoundResult {
    pub pair_out: Vec<RingElement>,
    pub cube_out: Vec<RingElement>,
    pub bool_out: Vec<u64>,
    /// Per masked open: the public `m = z + r` and this proxy's XOR share of
    /// the mask bits.
    pub a2b_out: Vec<(u64, u64)>,
}

impl RoundResult {
    pub fn pair(&self, tok: PairTok) -> RingElement {
        self.pair_out[tok.0]
    }
    pub fn cube(&self, tok: CubeTok) -> RingElement {
        self.cube_out[tok.0]
    }
    pub fn bool_word(&self, tok: BoolTok) -> u64 {
        self.bool_out[tok.0]
    }
    pub fn a2b(&self, tok: A2bTok) -> (u64, u64) {
        self.a2b_out[tok.0]
    }
}

impl<'a> RoundBatch<'a> {
    fn new(ctx: &'a mut MpcContext) -> Self {
        RoundBatch {
            ctx,
            max_kind: None,
            pairs: Vec::new(),
            cubes: Vec::new(),
            bools: Vec::new(),
            a2bs: Vec::new(),
            pair_open: Vec::new(),
            cube_open: Vec::new(),
            bool_open: Vec::new(),
            a2b_open: Vec::new(),
        }
    }

    fn enter(&mut self, kind: Kind) {
        if let Some(prev) = self.max_kind {
            assert!(
                prev <= kind,
                "round requests must be grouped pair, cube, bool, a2b"
            );
        }
        self.max_kind = Some(kind);
    }

    /// Product of two shared values via a Beaver triple.
    pub fn pair(&mut self, x: RingElement, y: RingElement) -> Result<PairTok, MpcError> {
        self.enter(Kind::Pair);
        let t = self.ctx.source.take_pair()?;
        self.pair_open.push(x - t.a);
        self.pair_open.push(y - t.b);
        self.pairs.push(t);
        Ok(PairTok(self.pairs.len() - 1))
    }

    /// Product of three shared values via a degree-3 triple.
    pub fn cube(
        &mut self,
        x: RingElement,
        y: RingElement,
        z: RingElement,
    ) -> Result<CubeTok, MpcError> {
        self.enter(Kind::Cube);
        let t = self.ctx.source.take_cube()?;
        self.cube_open.push(x - t.a);
        self.cube_open.push(y - t.b);
        self.cube_open.push(z - t.c);
        self.cubes.push(t);
        Ok(CubeTok(self.cubes.len() - 1))
    }

    /// Bitwise AND of two XOR-shared words.
    pub fn bool_and(&mut self, x: u64, y: u64) -> Result<BoolTok, MpcError> {
        self.enter(Kind::Bool);
        let t = self.ctx.source.take_bool()?;
        self.bool_open.push(RingElement(x ^ t.x));
        self.bool_open.push(RingElement(y ^ t.y));
        self.bools.push(t);
        Ok(BoolTok(self.bools.len() - 1))
    }

    /// Masked opening of a shared value: the proxies learn `m = z + r` for a
    /// helper-dealt uniform `r` whose bits they hold XOR-shared.
    pub fn a2b_open(&mut self, z: RingElement) -> Result<A2bTok, MpcError> {
        self.enter(Kind::A2b);
        let mask = self.ctx.source.take_a2b()?;
        self.a2b_open.push(z + mask.r);
        self.a2bs.push(mask);
        Ok(A2bTok(self.a2bs.len() - 1))
    }

    pub fn is_empty(&self) -> bool {
        self.max_kind.is_none()
    }

    pub fn execute(self) -> Result<RoundResult, MpcError> {
        let ctx = self.ctx;
        let header = [
            RingElement(ctx.rounds as u64),
            RingElement(self.pairs.len() as u64),
            RingElement(self.cubes.len() as u64),
            RingElement(self.bools.len() as u64),
            RingElement(self.a2bs.len() as u64),
        ];
        let mut words = Vec::with_capacity(
            header.len()
                + self.pair_open.len()
                + self.cube_open.len()
                + self.bool_open.len()
                + self.a2b_open.len(),
        );
        words.extend_from_slice(&header);
        words.extend_from_slice(&self.pair_open);
        words.extend_from_slice(&self.cube_open);
        words.extend_from_slice(&self.bool_open);
        words.extend_from_slice(&self.a2b_open);

        let payload = pprl_net::pack_words(&words);
        ctx.open_bytes_sent += payload.len() as u64;
        ctx.link
            .send(&Frame::new(MessageType::Open, ctx.sid, payload))?;
        let theirs = ctx.recv_open()?;

        if theirs.len() != words.len() || theirs[..5] != words[..5] {
            return Err(MpcError::Violation(format!(
                "open mismatch in round {}: peer sent {} words (header {:?}), expected {} ({:?})",
                ctx.rounds,
                theirs.len(),
                &theirs.get(..5),
                words.len(),
                &words[..5],
            )));
        }
        ctx.rounds += 1;

        let add_offset = ctx.party.adds_public_offset();
        let mut at = 5usize;

        let mut pair_out = Vec::with_capacity(self.pairs.len());
        for (i, t) in self.pairs.iter().enumerate() {
            let d = self.pair_open[2 * i] + theirs[at + 2 * i];
            let e = self.pair_open[2 * i + 1] + theirs[at + 2 * i + 1];
            let mut z = t.c + d * t.b + e * t.a;
            if add_offset {
                z += d * e;
            }
            pair_out.push(z);
        }
        at += self.pair_open.len();

        let mut cube_out = Vec::with_capacity(self.cubes.len());
        for (i, t) in self.cubes.iter().enumerate() {
            let d = self.cube_open[3 * i] + theirs[at + 3 * i];
            let e = self.cube_open[3 * i + 1] + theirs[at + 3 * i + 1];
            let f = self.cube_open[3 * i + 2] + theirs[at + 3 * i + 2];
            let mut out = t.abc + f * t.ab + e * t.ac + d * t.bc
                + e * f * t.a
                + d * f * t.b
                + d * e * t.c;
            if add_offset {
                out += d * e * f;
            }
            cube_out.push(out);
        }
        at += self.cube_open.len();

        let mut bool_out = Vec::with_capacity(self.bools.len());
        for (i, t) in self.bools.iter().enumerate() {
            let d = self.bool_open[2 * i].0 ^ theirs[at + 2 * i].0;
            let e = self.bool_open[2 * i + 1].0 ^ theirs[at + 2 * i + 1].0;
            let mut z = t.z ^ (d & t.y) ^ (e & t.x);
            if add_offset {
                z ^= d & e;
            }
            bool_out.push(z);
        }
        at += self.bool_open.len();

        let mut a2b_out = Vec::with_capacity(self.a2bs.len());
        for (i, mask) in self.a2bs.iter().enumerate() {
            let m = self.a2b_open[i] + theirs[at + i];
            a2b_out.push((m.0, mask.r_bits));
        }

        Ok(RoundResult {
            pair_out,
            cube_out,
            bool_out,
            a2b_out,
        })
    }
}
