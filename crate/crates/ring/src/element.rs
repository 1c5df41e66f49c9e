use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

/// A value in `Z_2^64`. All operators wrap; there is no checked or saturating
/// arithmetic on the release path.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RingElement(pub u64);

impl RingElement {
    pub const ZERO: RingElement = RingElement(0);
    pub const ONE: RingElement = RingElement(1);

    /// Fixed little-endian 8-byte serialization, used by the wire protocol.
    pub fn to_le_bytes(self) -> [u8; 8] {
        self.0.to_le_bytes()
    }

    pub fn from_le_bytes(bytes: [u8; 8]) -> Self {
        RingElement(u64::from_le_bytes(bytes))
    }

    /// Two's-complement sign bit, i.e. bit 63.
    pub fn msb(self) -> u64 {
        self.0 >> 63
    }
}

impl fmt::Debug for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for RingElement {
    fn from(v: u64) -> Self {
        RingElement(v)
    }
}

impl Add for RingElement {
    type Output = RingElement;
    fn add(self, rhs: RingElement) -> RingElement {
        RingElement(self.0.wrapping_add(rhs.0))
    }
}

impl Sub for RingElement {
    type Output = RingElement;
    fn sub(self, rhs: RingElement) -> RingElement {
        RingElement(self.0.wrapping_sub(rhs.0))
    }
}

impl Mul for RingElement {
    type Output = RingElement;
    fn mul(self, rhs: RingElement) -> RingElement {
        RingElement(self.0.wrapping_mul(rhs.0))
    }
}

impl Neg for RingElement {
    type Output = RingElement;
    fn neg(self) -> RingElement {
        RingElement(self.0.wrapping_neg())
    }
}

impl AddAssign for RingElement {
    fn add_assign(&mut self, rhs: RingElement) {
        self.0 = self.0.wrapping_add(rhs.0);
    }
}

impl SubAssign for RingElement {
    fn sub_assign(&mut self, rhs: RingElement) {
        self.0 = self.0.wrapping_sub(rhs.0);
    }
}

impl MulAssign for RingElement {
    fn mul_assign(&mut self, rhs: RingElement) {
        self.0 = self.0.wrapping_mul(rhs.0);
    }
}

impl Sum for RingElement {
    fn sum<I: Iterator<Item = RingElement>>(iter: I) -> RingElement {
        iter.fold(RingElement::ZERO, |acc, x| acc + x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn additive_inverse_wraps_to_zero() {
        let a = RingElement(0x1234_5678_9abc_def0);
        assert_eq!(a + (-a), RingElement::ZERO);
        assert_eq!(RingElement(u64::MAX) + RingElement::ONE, RingElement::ZERO);
    }

    #[test]
    fn mul_wraps() {
        assert_eq!(
            RingElement(1 << 63) * RingElement(2),
            RingElement::ZERO
        );
    }

    #[test]
    fn le_round_trip() {
        let a = RingElement(0xdead_beef_0102_0304);
        assert_eq!(RingElement::from_le_bytes(a.to_le_bytes()), a);
        assert_eq!(a.to_le_bytes()[0], 0x04);
    }
}
