use crate::{ProxyId, RandomStream, RingElement, RingError};

/// One proxy's additive share of a secret. For any secret `a` with shares
/// `(s0, s1)`, `s0 + s1 = a` in `Z_2^64`, and either share alone is uniform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Share {
    pub party: ProxyId,
    pub value: RingElement,
}

impl Share {
    pub fn new(party: ProxyId, value: RingElement) -> Self {
        Share { party, value }
    }
}

/// Batched form of [`Share`]: one proxy's share of a logical vector. Both
/// proxies hold vectors of equal length for the same logical value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareVector {
    pub party: ProxyId,
    pub values: Vec<RingElement>,
}

impl ShareVector {
    pub fn new(party: ProxyId, values: Vec<RingElement>) -> Self {
        ShareVector { party, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Splits a secret into two additive shares using a fresh mask from `stream`:
/// `s0 = r`, `s1 = secret - r`.
pub fn share_value(secret: RingElement, stream: &mut RandomStream) -> (Share, Share) {
    let r = stream.next_element();
    (
        Share::new(ProxyId::P0, r),
        Share::new(ProxyId::P1, secret - r),
    )
}

/// Element-wise [`share_value`] over a slice.
pub fn share_vector(secrets: &[RingElement], stream: &mut RandomStream) -> (ShareVector, ShareVector) {
    let mut s0 = Vec::with_capacity(secrets.len());
    let mut s1 = Vec::with_capacity(secrets.len());
    for &secret in secrets {
        let r = stream.next_element();
        s0.push(r);
        s1.push(secret - r);
    }
    (
        ShareVector::new(ProxyId::P0, s0),
        ShareVector::new(ProxyId::P1, s1),
    )
}

/// Recombines two shares of the same logical secret.
pub fn reconstruct(s0: &Share, s1: &Share) -> Result<RingElement, RingError> {
    if s0.party == s1.party {
        return Err(RingError::PartyMismatch(s0.party));
    }
    Ok(s0.value + s1.value)
}

/// Element-wise reconstruction; the vectors must have equal length.
pub fn reconstruct_vector(s0: &ShareVector, s1: &ShareVector) -> Result<Vec<RingElement>, RingError> {
    if s0.party == s1.party {
        return Err(RingError::PartyMismatch(s0.party));
    }
    if s0.len() != s1.len() {
        return Err(RingError::LengthMismatch {
            left: s0.len(),
            right: s1.len(),
        });
    }
    Ok(s0
        .values
        .iter()
        .zip(&s1.values)
        .map(|(&a, &b)| a + b)
        .collect())
}

/// Local evaluation of `sum(c_i * a_i) + offset` on one proxy's shares.
///
/// The public offset is added by P0 only, so the two outputs remain a valid
/// sharing of the linear combination.
pub fn local_linear(
    shares: &ShareVector,
    public_coeffs: &[RingElement],
    public_offset: RingElement,
    party: ProxyId,
) -> Result<Share, RingError> {
    if public_coeffs.len() != shares.len() {
        return Err(RingError::CoefficientMismatch {
            coeffs: public_coeffs.len(),
            shares: shares.len(),
        });
    }
    let mut acc = RingElement::ZERO;
    for (&c, &a) in public_coeffs.iter().zip(&shares.values) {
        acc += c * a;
    }
    if party.adds_public_offset() {
        acc += public_offset;
    }
    Ok(Share::new(party, acc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::StreamPair;

    fn stream() -> RandomStream {
        RandomStream::new([3u8; 16], StreamPair::Proxies)
    }

    #[test]
    fn zero_secret_shares_cancel() {
        // With mask r the shares are (r, -r); e.g. r=5 pairs with 2^64-5.
        let mut s = stream();
        let (s0, s1) = share_value(RingElement::ZERO, &mut s);
        assert_eq!(s1.value, -s0.value);
        assert_eq!(reconstruct(&s0, &s1).unwrap(), RingElement::ZERO);
    }

    #[test]
    fn reconstruct_known_pairs() {
        let a = Share::new(ProxyId::P0, RingElement(5));
        let b = Share::new(ProxyId::P1, -RingElement(5));
        assert_eq!(reconstruct(&a, &b).unwrap(), RingElement::ZERO);
        let a = Share::new(ProxyId::P0, RingElement(7));
        let b = Share::new(ProxyId::P1, RingElement(35));
        assert_eq!(reconstruct(&a, &b).unwrap(), RingElement(42));
    }

    #[test]
    fn reconstruct_rejects_same_party() {
        let a = Share::new(ProxyId::P0, RingElement(1));
        let b = Share::new(ProxyId::P0, RingElement(2));
        assert_eq!(
            reconstruct(&a, &b),
            Err(RingError::PartyMismatch(ProxyId::P0))
        );
    }

    #[test]
    fn vector_length_mismatch_is_structural_error() {
        let a = ShareVector::new(ProxyId::P0, vec![RingElement(1)]);
        let b = ShareVector::new(ProxyId::P1, vec![RingElement(1), RingElement(2)]);
        assert!(matches!(
            reconstruct_vector(&a, &b),
            Err(RingError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn local_linear_identity_and_scaling() {
        let mut s = stream();
        let (a0, a1) = share_vector(&[RingElement(6)], &mut s);
        // coeffs=[1], offset=0 is the identity.
        let r0 = local_linear(&a0, &[RingElement::ONE], RingElement::ZERO, ProxyId::P0).unwrap();
        let r1 = local_linear(&a1, &[RingElement::ONE], RingElement::ZERO, ProxyId::P1).unwrap();
        assert_eq!(reconstruct(&r0, &r1).unwrap(), RingElement(6));
        // coeff 2 doubles.
        let r0 = local_linear(&a0, &[RingElement(2)], RingElement::ZERO, ProxyId::P0).unwrap();
        let r1 = local_linear(&a1, &[RingElement(2)], RingElement::ZERO, ProxyId::P1).unwrap();
        assert_eq!(reconstruct(&r0, &r1).unwrap(), RingElement(12));
    }

    #[test]
    fn local_linear_combination_with_offset() {
        let mut s = stream();
        let (v0, v1) = share_vector(&[RingElement(3), RingElement(4)], &mut s);
        let coeffs = [RingElement(2), RingElement(10)];
        let r0 = local_linear(&v0, &coeffs, RingElement::ONE, ProxyId::P0).unwrap();
        let r1 = local_linear(&v1, &coeffs, RingElement::ONE, ProxyId::P1).unwrap();
        // 2*3 + 10*4 + 1 = 47; the offset lands on P0 only.
        assert_eq!(reconstruct(&r0, &r1).unwrap(), RingElement(47));
    }

    #[test]
    fn coefficient_mismatch_rejected() {
        let v = ShareVector::new(ProxyId::P0, vec![RingElement(1), RingElement(2)]);
        assert!(matches!(
            local_linear(&v, &[RingElement::ONE], RingElement::ZERO, ProxyId::P0),
            Err(RingError::CoefficientMismatch { .. })
        ));
    }
}
