//! Bit-exact wire protocol, byte-stream transport, per-link metering and
//! optional latency/bandwidth shaping for reproducing wide-area network
//! conditions on a single machine.
//!
//! Wire format (normative): every frame is
//!
//! ```text
//! length   u32 little-endian, payload bytes
//! type     u8, see MessageType
//! session  16 bytes
//! payload  `length` bytes; packed little-endian u64 words except
//!          HELLO/CONFIG, whose layouts the protocol crate documents
//! ```
//!
//! When a link is shaped, each frame is preceded on the byte stream by an
//! 8-byte release timestamp (simulation shim, not metered). Shaping applies
//! only in simulation mode; metering is active in all modes.

mod frame;
mod link;
mod mesh;
mod shape;

pub use frame::{
    decode_frame, encode_frame, pack_words, unpack_words, Frame, MessageType, SessionId,
    HEADER_LEN,
};
pub use link::{Link, LinkMeter, PayloadCapture, CONTROL_SID, RECV_TIMEOUT};
pub use mesh::{accept_link, dial_link, MeshRole, PROTOCOL_VERSION};
pub use shape::{LinkShaper, NetPreset};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("unknown message type {0:#04x}")]
    UnknownMessageType(u8),
    #[error("malformed frame: {0}")]
    Malformed(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("link closed")]
    LinkClosed,
    #[error("timed out waiting for a frame")]
    Timeout,
    #[error("handshake: {0}")]
    Handshake(String),
}
