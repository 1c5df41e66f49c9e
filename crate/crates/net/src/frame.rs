use crate::NetError;
use pprl_ring::RingElement;

/// Frame header: 4-byte little-endian payload length, 1-byte type, 16-byte
/// session id.
pub const HEADER_LEN: usize = 4 + 1 + 16;

pub type SessionId = [u8; 16];

/// Message types on the wire. Payloads are packed little-endian 64-bit words
/// except HELLO and CONFIG, whose field layouts are documented on the
/// protocol payload builders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum MessageType {
    Hello = 1,
    Config = 2,
    DbShares = 3,
    QueryShares = 4,
    TripleBlock = 5,
    BoolTripleBlock = 6,
    Open = 7,
    Result = 8,
    Abort = 9,
}

impl MessageType {
    pub fn from_byte(b: u8) -> Option<MessageType> {
        match b {
            1 => Some(MessageType::Hello),
            2 => Some(MessageType::Config),
            3 => Some(MessageType::DbShares),
            4 => Some(MessageType::QueryShares),
            5 => Some(MessageType::TripleBlock),
            6 => Some(MessageType::BoolTripleBlock),
            7 => Some(MessageType::Open),
            8 => Some(MessageType::Result),
            9 => Some(MessageType::Abort),
            _ => None,
        }
    }

    /// Correlated randomness and protocol data, as opposed to handshake
    /// control traffic. The helper-blindness meter groups by this.
    pub fn is_data_plane(self) -> bool {
        !matches!(self, MessageType::Hello | MessageType::Config | MessageType::Abort)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub msg_type: MessageType,
    pub session_id: SessionId,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn new(msg_type: MessageType, session_id: SessionId, payload: Vec<u8>) -> Self {
        Frame {
            msg_type,
            session_id,
            payload,
        }
    }

    /// Total bytes this frame occupies on the wire.
    pub fn wire_len(&self) -> usize {
        HEADER_LEN + self.payload.len()
    }
}

pub fn encode_frame(frame: &Frame) -> Vec<u8> {
    let mut out = Vec::with_capacity(frame.wire_len());
    out.extend_from_slice(&(frame.payload.len() as u32).to_le_bytes());
    out.push(frame.msg_type as u8);
    out.extend_from_slice(&frame.session_id);
    out.extend_from_slice(&frame.payload);
    out
}

/// Decodes one frame from `bytes`, returning it and the number of bytes
/// consumed. `Ok(None)` means more bytes are needed.
pub fn decode_frame(bytes: &[u8]) -> Result<Option<(Frame, usize)>, NetError> {
    if bytes.len() < HEADER_LEN {
        return Ok(None);
    }
    let len = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
    let msg_type = MessageType::from_byte(bytes[4]).ok_or(NetError::UnknownMessageType(bytes[4]))?;
    let total = HEADER_LEN + len;
    if bytes.len() < total {
        return Ok(None);
    }
    let mut session_id = [0u8; 16];
    session_id.copy_from_slice(&bytes[5..21]);
    let payload = bytes[HEADER_LEN..total].to_vec();
    Ok(Some((
        Frame {
            msg_type,
            session_id,
            payload,
        },
        total,
    )))
}

/// Packs ring elements as little-endian 64-bit words.
pub fn pack_words(words: &[RingElement]) -> Vec<u8> {
    let mut out = Vec::with_capacity(words.len() * 8);
    for w in words {
        out.extend_from_slice(&w.to_le_bytes());
    }
    out
}

pub fn unpack_words(bytes: &[u8]) -> Result<Vec<RingElement>, NetError> {
    if bytes.len() % 8 != 0 {
        return Err(NetError::Malformed(format!(
            "word payload length {} is not a multiple of 8",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| RingElement::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn empty_abort_round_trips() {
        let f = Frame::new(MessageType::Abort, [9u8; 16], vec![]);
        let bytes = encode_frame(&f);
        let (g, used) = decode_frame(&bytes).unwrap().unwrap();
        assert_eq!(used, bytes.len());
        assert_eq!(g, f);
    }

    #[test]
    fn open_frame_round_trips_byte_exactly() {
        let words: Vec<RingElement> = (0..900u64).map(RingElement).collect();
        let f = Frame::new(MessageType::Open, [1u8; 16], pack_words(&words));
        let bytes = encode_frame(&f);
        let (g, _) = decode_frame(&bytes).unwrap().unwrap();
        assert_eq!(unpack_words(&g.payload).unwrap(), words);
        // Layout spot check: length field little-endian, then type byte.
        assert_eq!(&bytes[0..4], &(900u32 * 8).to_le_bytes());
        assert_eq!(bytes[4], MessageType::Open as u8);
    }

    #[test]
    fn truncation_asks_for_more() {
        let f = Frame::new(MessageType::Result, [2u8; 16], vec![0; 64]);
        let bytes = encode_frame(&f);
        for cut in [0, 3, HEADER_LEN - 1, HEADER_LEN + 10, bytes.len() - 1] {
            assert!(decode_frame(&bytes[..cut]).unwrap().is_none());
        }
    }

    #[test]
    fn unknown_type_is_an_error_not_a_crash() {
        let f = Frame::new(MessageType::Hello, [0u8; 16], vec![1, 2, 3]);
        let mut bytes = encode_frame(&f);
        bytes[4] = 0xEE;
        assert!(matches!(
            decode_frame(&bytes),
            Err(NetError::UnknownMessageType(0xEE))
        ));
    }

    #[test]
    fn fuzzed_bytes_never_panic() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..20_000 {
            let len = rng.gen_range(0..128);
            let mut bytes = vec![0u8; len];
            rng.fill(&mut bytes[..]);
            // Clamp the length prefix so the decoder either errors, waits for
            // more bytes, or yields a frame; it must never panic.
            let _ = decode_frame(&bytes);
        }
    }

    #[test]
    fn concatenated_frames_decode_in_order() {
        let a = Frame::new(MessageType::Open, [3u8; 16], vec![1; 8]);
        let b = Frame::new(MessageType::Result, [3u8; 16], vec![2; 16]);
        let mut bytes = encode_frame(&a);
        bytes.extend_from_slice(&encode_frame(&b));
        let (fa, used) = decode_frame(&bytes).unwrap().unwrap();
        assert_eq!(fa, a);
        let (fb, _) = decode_frame(&bytes[used..]).unwrap().unwrap();
        assert_eq!(fb, b);
    }
}
