use crate::MpcError;
use pprl_ring::{RandomStream, RingElement};
use std::collections::VecDeque;

/// One proxy's shares of a Beaver triple with `c = a*b`.
#[derive(Debug, Clone, Copy)]
pub struct PairTriple {
    pub a: RingElement,
    pub b: RingElement,
    pub c: RingElement,
}

/// One proxy's shares of a degree-3 product family: all pairwise products
/// and the full product of uniform `a, b, c`. Lets a three-way product open
/// in a single round.
#[derive(Debug, Clone, Copy)]
pub struct CubeTriple {
    pub a: RingElement,
    pub b: RingElement,
    pub c: RingElement,
    pub ab: RingElement,
    pub ac: RingElement,
    pub bc: RingElement,
    pub abc: RingElement,
}

/// XOR-shared word triple with `z = x & y` bitwise; one word packs 64
/// boolean triples.
#[derive(Debug, Clone, Copy)]
pub struct BoolTripleWord {
    pub x: u64,
    pub y: u64,
    pub z: u64,
}

/// Mask for an arithmetic-to-boolean opening: an additive share of a uniform
/// `r` plus an XOR share of `r`'s 64 bits.
#[derive(Debug, Clone, Copy)]
pub struct A2bMask {
    pub r: RingElement,
    pub r_bits: u64,
}

/// Per-kind draw widths from the helper-shared streams.
const P0_PAIR_DRAWS: usize = 3; // a, b, c
const P1_PAIR_DRAWS: usize = 2; // a, b (c corrected)
const P0_CUBE_DRAWS: usize = 7;
const P1_CUBE_DRAWS: usize = 3; // a, b, c (products corrected)
const P0_BOOL_DRAWS: usize = 3;
const P1_BOOL_DRAWS: usize = 2;
const P0_A2B_DRAWS: usize = 2; // r, r_bits
const P1_A2B_DRAWS: usize = 1; // r (bits corrected)

/// Correction words received from the helper, in generation order.
#[derive(Debug, Default)]
pub struct CorrQueues {
    pub pair_c: VecDeque<RingElement>,
    pub cube: VecDeque<[RingElement; 4]>,
    pub bool_z: VecDeque<u64>,
    pub a2b_bits: VecDeque<u64>,
}

impl CorrQueues {
    pub fn is_empty(&self) -> bool {
        self.pair_c.is_empty()
            && self.cube.is_empty()
            && self.bool_z.is_empty()
            && self.a2b_bits.is_empty()
    }
}

/// Where a proxy's correlated randomness comes from.
pub enum TripleSource {
    /// P0 derives every component from the stream it shares with the helper.
    P0Stream(RandomStream),
    /// P1 derives the uniform components and takes product corrections from
    /// the helper's blocks.
    P1Stream {
        stream: RandomStream,
        corr: CorrQueues,
    },
    /// Test-only: stands in for P1 by running the helper's generator
    /// locally, so primitive tests need no helper thread.
    Dealer(HelperTripleGen),
}

impl TripleSource {
    pub fn take_pair(&mut self) -> Result<PairTriple, MpcError> {
        match self {
            TripleSource::P0Stream(s) => {
                let a = s.next_element();
                let b = s.next_element();
                let c = s.next_element();
                Ok(PairTriple { a, b, c })
            }
            TripleSource::P1Stream { stream, corr } => {
                let a = stream.next_element();
                let b = stream.next_element();
                let c = corr
                    .pair_c
                    .pop_front()
                    .ok_or(MpcError::TriplesExhausted("pair corrections"))?;
                Ok(PairTriple { a, b, c })
            }
            TripleSource::Dealer(gen) => Ok(gen.pair()),
        }
    }

    pub fn take_cube(&mut self) -> Result<CubeTriple, MpcError> {
        match self {
            TripleSource::P0Stream(s) => {
                let mut next = || s.next_element();
                Ok(CubeTriple {
                    a: next(),
                    b: next(),
                    c: next(),
                    ab: next(),
                    ac: next(),
                    bc: next(),
                    abc: next(),
                })
            }
            TripleSource::P1Stream { stream, corr } => {
                let a = stream.next_element();
                let b = stream.next_element();
                let c = stream.next_element();
                let [ab, ac, bc, abc] = corr
                    .cube
                    .pop_front()
                    .ok_or(MpcError::TriplesExhausted("cube corrections"))?;
                Ok(CubeTriple {
                    a,
                    b,
                    c,
                    ab,
                    ac,
                    bc,
                    abc,
                })
            }
            TripleSource::Dealer(gen) => Ok(gen.cube()),
        }
    }

    pub fn take_bool(&mut self) -> Result<BoolTripleWord, MpcError> {
        match self {
            TripleSource::P0Stream(s) => {
                let x = s.next_element().0;
                let y = s.next_element().0;
                let z = s.next_element().0;
                Ok(BoolTripleWord { x, y, z })
            }
            TripleSource::P1Stream { stream, corr } => {
                let x = stream.next_element().0;
                let y = stream.next_element().0;
                let z = corr
                    .bool_z
                    .pop_front()
                    .ok_or(MpcError::TriplesExhausted("bool corrections"))?;
                Ok(BoolTripleWord { x, y, z })
            }
            TripleSource::Dealer(gen) => Ok(gen.bool_word()),
        }
    }

    pub fn take_a2b(&mut self) -> Result<A2bMask, MpcError> {
        match self {
            TripleSource::P0Stream(s) => {
                let r = s.next_element();
                let r_bits = s.next_element().0;
                Ok(A2bMask { r, r_bits })
            }
            TripleSource::P1Stream { stream, corr } => {
                let r = stream.next_element();
                let r_bits = corr
                    .a2b_bits
                    .pop_front()
                    .ok_or(MpcError::TriplesExhausted("a2b corrections"))?;
                Ok(A2bMask { r, r_bits })
            }
            TripleSource::Dealer(gen) => Ok(gen.a2b()),
        }
    }

    /// Unconsumed corrections at session end indicate a schedule mismatch.
    pub fn verify_drained(&self) -> Result<(), MpcError> {
        if let TripleSource::P1Stream { corr, .. } = self {
            if !corr.is_empty() {
                return Err(MpcError::MalformedTripleBlock(format!(
                    "leftover corrections: {} pair, {} cube, {} bool, {} a2b",
                    corr.pair_c.len(),
                    corr.cube.len(),
                    corr.bool_z.len(),
                    corr.a2b_bits.len()
                )));
            }
        }
        Ok(())
    }

    pub fn feed_triple_block(&mut self, payload: &[u8]) -> Result<(), MpcError> {
        match self {
            TripleSource::P1Stream { corr, .. } => decode_triple_block(payload, corr),
            _ => Err(MpcError::Violation(
                "only P1 consumes triple blocks".into(),
            )),
        }
    }

    pub fn feed_bool_block(&mut self, payload: &[u8]) -> Result<(), MpcError> {
        match self {
            TripleSource::P1Stream { corr, .. } => decode_bool_block(payload, corr),
            _ => Err(MpcError::Violation(
                "only P1 consumes bool triple blocks".into(),
            )),
        }
    }
}

/// The helper's generator: it mirrors both proxies' streams, so P0's shares
/// cost nothing to distribute and P1 needs only the product corrections.
///
/// Draw order is normative: within a round, pairs, then cubes, then bool
/// words, then a2b masks, each in request order.
pub struct HelperTripleGen {
    s0: RandomStream,
    s1: RandomStream,
}

impl HelperTripleGen {
    pub fn new(s0: RandomStream, s1: RandomStream) -> Self {
        HelperTripleGen { s0, s1 }
    }

    /// P1's completed pair triple; the `c` component is the correction word.
    pub fn pair(&mut self) -> PairTriple {
        let a0 = self.s0.next_element();
        let b0 = self.s0.next_element();
        let c0 = self.s0.next_element();
        let a1 = self.s1.next_element();
        let b1 = self.s1.next_element();
        let c1 = (a0 + a1) * (b0 + b1) - c0;
        PairTriple {
            a: a1,
            b: b1,
            c: c1,
        }
    }

    pub fn cube(&mut self) -> CubeTriple {
        let mut n0 = || self.s0.next_element();
        let a0 = n0();
        let b0 = n0();
        let c0 = n0();
        let ab0 = n0();
        let ac0 = n0();
        let bc0 = n0();
        let abc0 = n0();
        let a1 = self.s1.next_element();
        let b1 = self.s1.next_element();
        let c1 = self.s1.next_element();
        let a = a0 + a1;
        let b = b0 + b1;
        let c = c0 + c1;
        CubeTriple {
            a: a1,
            b: b1,
            c: c1,
            ab: a * b - ab0,
            ac: a * c - ac0,
            bc: b * c - bc0,
            abc: a * b * c - abc0,
        }
    }

    pub fn bool_word(&mut self) -> BoolTripleWord {
        let x0 = self.s0.next_element().0;
        let y0 = self.s0.next_element().0;
        let z0 = self.s0.next_element().0;
        let x1 = self.s1.next_element().0;
        let y1 = self.s1.next_element().0;
        let z1 = ((x0 ^ x1) & (y0 ^ y1)) ^ z0;
        BoolTripleWord {
            x: x1,
            y: y1,
            z: z1,
        }
    }

    pub fn a2b(&mut self) -> A2bMask {
        let r0 = self.s0.next_element();
        let rb0 = self.s0.next_element().0;
        let r1 = self.s1.next_element();
        let r = r0 + r1;
        A2bMask {
            r: r1,
            r_bits: r.0 ^ rb0,
        }
    }

    /// Words the two streams advance by for a given demand, used by tests to
    /// cross-check stream alignment.
    pub fn draw_widths() -> [(usize, usize); 4] {
        [
            (P0_PAIR_DRAWS, P1_PAIR_DRAWS),
            (P0_CUBE_DRAWS, P1_CUBE_DRAWS),
            (P0_BOOL_DRAWS, P1_BOOL_DRAWS),
            (P0_A2B_DRAWS, P1_A2B_DRAWS),
        ]
    }
}

/// TRIPLE_BLOCK payload: three u64 counts (pairs, cubes, a2b) followed by
/// pair `c` corrections, cube correction quadruples and a2b bit corrections,
/// all little-endian words.
pub fn encode_triple_block(
    pair_c: &[RingElement],
    cube: &[[RingElement; 4]],
    a2b_bits: &[u64],
) -> Vec<u8> {
    let mut words: Vec<RingElement> = Vec::with_capacity(3 + pair_c.len() + cube.len() * 4 + a2b_bits.len());
    words.push(RingElement(pair_c.len() as u64));
    words.push(RingElement(cube.len() as u64));
    words.push(RingElement(a2b_bits.len() as u64));
    words.extend_from_slice(pair_c);
    for q in cube {
        words.extend_from_slice(q);
    }
    words.extend(a2b_bits.iter().map(|&w| RingElement(w)));
    pprl_net::pack_words(&words)
}

pub fn decode_triple_block(payload: &[u8], corr: &mut CorrQueues) -> Result<(), MpcError> {
    let words = pprl_net::unpack_words(payload)
        .map_err(|e| MpcError::MalformedTripleBlock(e.to_string()))?;
    if words.len() < 3 {
        return Err(MpcError::MalformedTripleBlock("missing counts".into()));
    }
    let n_pair = words[0].0 as usize;
    let n_cube = words[1].0 as usize;
    let n_a2b = words[2].0 as usize;
    let expected = 3 + n_pair + n_cube * 4 + n_a2b;
    if words.len() != expected {
        return Err(MpcError::MalformedTripleBlock(format!(
            "expected {expected} words, got {}",
            words.len()
        )));
    }
    let mut it = words.into_iter().skip(3);
    for _ in 0..n_pair {
        corr.pair_c.push_back(it.next().unwrap());
    }
    for _ in 0..n_cube {
        let mut q = [RingElement::ZERO; 4];
        for slot in &mut q {
            *slot = it.next().unwrap();
        }
        corr.cube.push_back(q);
    }
    for _ in 0..n_a2b {
        corr.a2b_bits.push_back(it.next().unwrap().0);
    }
    Ok(())
}

/// BOOL_TRIPLE_BLOCK payload: u64 count then that many `z` correction words.
pub fn encode_bool_block(z: &[u64]) -> Vec<u8> {
    let mut words: Vec<RingElement> = Vec::with_capacity(1 + z.len());
    words.push(RingElement(z.len() as u64));
    words.extend(z.iter().map(|&w| RingElement(w)));
    pprl_net::pack_words(&words)
}

pub fn decode_bool_block(payload: &[u8], corr: &mut CorrQueues) -> Result<(), MpcError> {
    let words = pprl_net::unpack_words(payload)
        .map_err(|e| MpcError::MalformedTripleBlock(e.to_string()))?;
    if words.is_empty() || words.len() != 1 + words[0].0 as usize {
        return Err(MpcError::MalformedTripleBlock(
            "bool block count mismatch".into(),
        ));
    }
    for w in &words[1..] {
        corr.bool_z.push_back(w.0);
    }
    Ok(())
}
