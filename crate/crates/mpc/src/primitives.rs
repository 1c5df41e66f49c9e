use crate::rounds::MpcContext;
use crate::MpcError;
use pprl_ring::{ProxyId, RingElement, Share, ShareVector};

/// All comparison operands must be certified below this bound by the caller;
/// sign testing via the top bit is only sound for differences inside it.
pub const COMPARISON_BOUND: u64 = 1 << 61;

/// Public magnitude bound for comparison operands.
#[derive(Debug, Clone, Copy)]
pub struct ComparisonBound(pub u64);

impl Default for ComparisonBound {
    fn default() -> Self {
        ComparisonBound(COMPARISON_BOUND)
    }
}

/// An arithmetic sharing whose reconstruction is 0 or 1.
#[derive(Debug, Clone, Copy)]
pub struct SecureBit(pub Share);

/// This proxy's XOR share of a secret bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct XorBit(pub bool);

impl XorBit {
    /// Complement applied by P0 only, keeping the sharing valid.
    pub fn complement(self, party: ProxyId) -> XorBit {
        if party.adds_public_offset() {
            XorBit(!self.0)
        } else {
            self
        }
    }
}

fn check_lengths(x: &ShareVector, y: &ShareVector) -> Result<(), MpcError> {
    if x.len() != y.len() {
        return Err(MpcError::Ring(pprl_ring::RingError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        }));
    }
    Ok(())
}

/// Element-wise product of two share vectors: one Beaver triple per element,
/// one proxy-to-proxy round for the whole batch.
pub fn secure_multiply_batch(
    ctx: &mut MpcContext,
    x: &ShareVector,
    y: &ShareVector,
) -> Result<ShareVector, MpcError> {
    check_lengths(x, y)?;
    let mut round = ctx.begin();
    let mut toks = Vec::with_capacity(x.len());
    for (&xi, &yi) in x.values.iter().zip(&y.values) {
        toks.push(round.pair(xi, yi)?);
    }
    let res = round.execute()?;
    Ok(ShareVector::new(
        ctx.party,
        toks.into_iter().map(|t| res.pair(t)).collect(),
    ))
}

/// AND of arithmetically shared bits; identical to multiplication since the
/// inputs reconstruct to 0/1.
pub fn secure_and_bits(
    ctx: &mut MpcContext,
    x: &ShareVector,
    y: &ShareVector,
) -> Result<ShareVector, MpcError> {
    secure_multiply_batch(ctx, x, y)
}

/// Sign bits (bit 63) of shared values, left as XOR shares.
///
/// Construction: the helper deals an additive share of a uniform `r` and XOR
/// shares of its bits; the proxies open `m = z + r` among themselves, then
/// evaluate bit 63 of `z = m - r = m + !r + 1` as a binary addition of the
/// public `m` and the shared `!r` with a Kogge-Stone carry network. The
/// generate/propagate bits against a public addend are share-local, so only
/// the six prefix levels cost AND rounds.
pub fn secure_msb_bool_batch(
    ctx: &mut MpcContext,
    z: &[RingElement],
) -> Result<Vec<XorBit>, MpcError> {
    let n = z.len();
    let is_p0 = ctx.party.adds_public_offset();

    let mut round = ctx.begin();
    let mut toks = Vec::with_capacity(n);
    for &zi in z {
        toks.push(round.a2b_open(zi)?);
    }
    let res = round.execute()?;

    let mut g = Vec::with_capacity(n);
    let mut p = Vec::with_capacity(n);
    let mut p63 = Vec::with_capacity(n);
    for tok in toks {
        let (m, rb) = res.a2b(tok);
        let s = if is_p0 { rb ^ !0u64 } else { rb };
        let pi = if is_p0 { m ^ s } else { s };
        let gi = (m & s) ^ (pi & 1); // carry-in 1 folded into bit 0
        p63.push(pi >> 63);
        g.push(gi);
        p.push(pi);
    }

    for k in [1u32, 2, 4, 8, 16, 32] {
        let low_ones = (1u64 << k) - 1;
        let mut round = ctx.begin();
        let mut toks = Vec::with_capacity(n);
        for i in 0..n {
            let pg = round.bool_and(p[i], g[i] << k)?;
            let shifted_p = (p[i] << k) | if is_p0 { low_ones } else { 0 };
            let pp = round.bool_and(p[i], shifted_p)?;
            toks.push((pg, pp));
        }
        let res = round.execute()?;
        for (i, (pg, pp)) in toks.into_iter().enumerate() {
            g[i] ^= res.bool_word(pg);
            p[i] = res.bool_word(pp);
        }
    }

    // Sum bit 63 = p63 ^ carry-in(63), the prefix generate through bit 62.
    Ok((0..n)
        .map(|i| XorBit(((p63[i] ^ (g[i] >> 62)) & 1) != 0))
        .collect())
}

/// Sign bit as an arithmetic sharing.
pub fn secure_msb_batch(
    ctx: &mut MpcContext,
    z: &ShareVector,
) -> Result<Vec<SecureBit>, MpcError> {
    let bits = secure_msb_bool_batch(ctx, &z.values)?;
    bit_to_arithmetic_batch(ctx, &bits)
}

/// `a >= b` as XOR-shared bits: the complement of the sign of `a - b`.
/// Operands must lie in `[0, bound)` with `bound <= 2^61`.
pub fn secure_compare_geq_bool_batch(
    ctx: &mut MpcContext,
    a: &[RingElement],
    b: &[RingElement],
    bound: ComparisonBound,
) -> Result<Vec<XorBit>, MpcError> {
    assert!(bound.0 <= COMPARISON_BOUND, "comparison bound too large");
    let z: Vec<RingElement> = a.iter().zip(b).map(|(&ai, &bi)| ai - bi).collect();
    let msb = secure_msb_bool_batch(ctx, &z)?;
    let party = ctx.party;
    Ok(msb.into_iter().map(|bit| bit.complement(party)).collect())
}

/// `a >= b` as arithmetic bits; ties yield 1.
pub fn secure_compare_geq_batch(
    ctx: &mut MpcContext,
    a: &ShareVector,
    b: &ShareVector,
    bound: ComparisonBound,
) -> Result<Vec<SecureBit>, MpcError> {
    check_lengths(a, b)?;
    let bits = secure_compare_geq_bool_batch(ctx, &a.values, &b.values, bound)?;
    bit_to_arithmetic_batch(ctx, &bits)
}

/// Zero test of `a - b` as XOR-shared bits: after the masked opening of
/// `m = z + r`, `z` is zero exactly when the words `m` and `r` are equal, so
/// a log-depth OR tree over the 64 bits of `m ^ r` yields "not equal" and a
/// P0-side complement finishes.
pub fn secure_equals_bool_batch(
    ctx: &mut MpcContext,
    a: &[RingElement],
    b: &[RingElement],
) -> Result<Vec<XorBit>, MpcError> {
    let n = a.len();
    let is_p0 = ctx.party.adds_public_offset();

    let mut round = ctx.begin();
    let mut toks = Vec::with_capacity(n);
    for (&ai, &bi) in a.iter().zip(b) {
        toks.push(round.a2b_open(ai - bi)?);
    }
    let res = round.execute()?;

    let mut t: Vec<u64> = toks
        .into_iter()
        .map(|tok| {
            let (m, rb) = res.a2b(tok);
            if is_p0 {
                m ^ rb
            } else {
                rb
            }
        })
        .collect();

    for width in [32u32, 16, 8, 4, 2, 1] {
        let mut round = ctx.begin();
        let mut toks = Vec::with_capacity(n);
        for &ti in t.iter() {
            toks.push(round.bool_and(ti >> width, ti)?);
        }
        let res = round.execute()?;
        for (i, tok) in toks.into_iter().enumerate() {
            let hi = t[i] >> width;
            t[i] = hi ^ t[i] ^ res.bool_word(tok);
        }
    }

    let party = ctx.party;
    Ok(t.into_iter()
        .map(|ti| XorBit(ti & 1 != 0).complement(party))
        .collect())
}

/// Equality of two shared values as arithmetic bits.
pub fn secure_equals_batch(
    ctx: &mut MpcContext,
    a: &ShareVector,
    b: &ShareVector,
) -> Result<Vec<SecureBit>, MpcError> {
    check_lengths(a, b)?;
    let bits = secure_equals_bool_batch(ctx, &a.values, &b.values)?;
    bit_to_arithmetic_batch(ctx, &bits)
}

/// Arithmetic results of multiplying values by an XOR-shared bit, plus the
/// bit itself in arithmetic form when requested.
pub struct BitProducts {
    pub bit: Option<RingElement>,
    pub products: Vec<RingElement>,
}

/// One-round conversion and multiplication by XOR-shared bits.
///
/// Each proxy shares its bit half over the common stream at no cost; with
/// `gamma = g0 + g1 - 2*g0*g1`, products `gamma * v` need the pairwise
/// products and one cube `g0*g1*v`, all opened in the same round. This fuses
/// the bit conversion of a comparison with the multiplex that consumes it.
pub fn xor_bit_products(
    ctx: &mut MpcContext,
    bits: &[XorBit],
    vals: &[Vec<RingElement>],
    with_bit: bool,
) -> Result<Vec<BitProducts>, MpcError> {
    assert_eq!(bits.len(), vals.len());
    let n = bits.len();
    let mut g0 = Vec::with_capacity(n);
    let mut g1 = Vec::with_capacity(n);
    for bit in bits {
        let own = RingElement(u64::from(bit.0));
        g0.push(ctx.share_private(ProxyId::P0, own));
        g1.push(ctx.share_private(ProxyId::P1, own));
    }

    let mut round = ctx.begin();
    let mut bb_toks = Vec::with_capacity(n);
    let mut pair_toks = Vec::with_capacity(n);
    for i in 0..n {
        if with_bit {
            bb_toks.push(round.pair(g0[i], g1[i])?);
        }
        let mut per_val = Vec::with_capacity(vals[i].len());
        for &v in &vals[i] {
            per_val.push((round.pair(g0[i], v)?, round.pair(g1[i], v)?));
        }
        pair_toks.push(per_val);
    }
    let mut cube_toks = Vec::with_capacity(n);
    for i in 0..n {
        let mut per_val = Vec::with_capacity(vals[i].len());
        for &v in &vals[i] {
            per_val.push(round.cube(g0[i], g1[i], v)?);
        }
        cube_toks.push(per_val);
    }
    let res = round.execute()?;

    let two = RingElement(2);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let bit = if with_bit {
            Some(g0[i] + g1[i] - two * res.pair(bb_toks[i]))
        } else {
            None
        };
        let products = pair_toks[i]
            .iter()
            .zip(&cube_toks[i])
            .map(|(&(ta, tb), &tc)| res.pair(ta) + res.pair(tb) - two * res.cube(tc))
            .collect();
        out.push(BitProducts { bit, products });
    }
    Ok(out)
}

/// Converts XOR-shared bits to arithmetic sharings: `g0 + g1 - 2*g0*g1` with
/// one multiplication round.
pub fn bit_to_arithmetic_batch(
    ctx: &mut MpcContext,
    bits: &[XorBit],
) -> Result<Vec<SecureBit>, MpcError> {
    let vals = vec![Vec::new(); bits.len()];
    let party = ctx.party;
    Ok(xor_bit_products(ctx, bits, &vals, true)?
        .into_iter()
        .map(|bp| SecureBit(Share::new(party, bp.bit.unwrap())))
        .collect())
}

/// Scalar conversion of one XOR-shared bit.
pub fn bit_to_arithmetic(ctx: &mut MpcContext, bit: XorBit) -> Result<SecureBit, MpcError> {
    Ok(bit_to_arithmetic_batch(ctx, &[bit])?[0])
}

/// Selects `x` when `c` is 1, otherwise `y`: `y + c*(x - y)` with a single
/// multiplication.
pub fn secure_multiplex(
    ctx: &mut MpcContext,
    x: &Share,
    y: &Share,
    c: &SecureBit,
) -> Result<Share, MpcError> {
    let mut round = ctx.begin();
    let tok = round.pair(c.0.value, x.value - y.value)?;
    let res = round.execute()?;
    Ok(Share::new(ctx.party, y.value + res.pair(tok)))
}

