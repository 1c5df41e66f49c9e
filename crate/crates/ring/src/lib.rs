//! Exact arithmetic in the ring `Z_2^64`, 2-of-2 additive secret sharing and
//! deterministic common-randomness streams shared pairwise between parties.
//!
//! Everything secret in the linkage pipeline flows through [`RingElement`],
//! [`Share`] and [`ShareVector`]. All arithmetic wraps modulo `2^64`; overflow
//! inside the ring is correct by definition and never an error.

mod element;
mod share;
mod stream;

pub use element::RingElement;
pub use share::{local_linear, reconstruct, reconstruct_vector, share_value, share_vector};
pub use share::{Share, ShareVector};
pub use stream::{common_random_elements, derive_session_seed, RandomStream, StreamPair};

use thiserror::Error;

/// The two computation servers holding complementary additive shares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProxyId {
    P0,
    P1,
}

impl ProxyId {
    pub fn index(self) -> usize {
        match self {
            ProxyId::P0 => 0,
            ProxyId::P1 => 1,
        }
    }

    pub fn other(self) -> ProxyId {
        match self {
            ProxyId::P0 => ProxyId::P1,
            ProxyId::P1 => ProxyId::P0,
        }
    }

    /// Convention used everywhere: P0 adds public offsets so reconstruction
    /// stays correct.
    pub fn adds_public_offset(self) -> bool {
        self == ProxyId::P0
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RingError {
    #[error("share vector length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("shares belong to the same proxy ({0:?}); need one from each")]
    PartyMismatch(ProxyId),
    #[error("coefficient count {coeffs} does not match share count {shares}")]
    CoefficientMismatch { coeffs: usize, shares: usize },
}
