use crate::frame::{Frame, MessageType};
use crate::link::{Link, PayloadCapture};
use crate::shape::NetPreset;
use crate::NetError;
use std::net::{TcpListener, TcpStream};
use std::sync::Arc;
use std::time::Duration;

use crate::link::CONTROL_SID;

pub const PROTOCOL_VERSION: u32 = 1;

/// The long-running parties of the mesh plus clients dialing in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshRole {
    P0,
    P1,
    Helper,
    Client,
}

impl MeshRole {
    fn code(self) -> u8 {
        match self {
            MeshRole::P0 => 0,
            MeshRole::P1 => 1,
            MeshRole::Helper => 2,
            MeshRole::Client => 3,
        }
    }

    fn from_code(code: u8) -> Option<MeshRole> {
        match code {
            0 => Some(MeshRole::P0),
            1 => Some(MeshRole::P1),
            2 => Some(MeshRole::Helper),
            3 => Some(MeshRole::Client),
            _ => None,
        }
    }

    pub fn is_mesh(self) -> bool {
        !matches!(self, MeshRole::Client)
    }
}

fn preset_code(preset: NetPreset) -> u8 {
    match preset {
        NetPreset::Off => 0,
        NetPreset::A => 1,
        NetPreset::B => 2,
        NetPreset::C => 3,
    }
}

fn handshake_payload(own: MeshRole, preset: NetPreset) -> Vec<u8> {
    let mut payload = Vec::with_capacity(6);
    payload.extend_from_slice(&PROTOCOL_VERSION.to_le_bytes());
    payload.push(own.code());
    payload.push(preset_code(preset));
    payload
}

fn verify_handshake(
    frame: &Frame,
    own: MeshRole,
    preset: NetPreset,
) -> Result<MeshRole, NetError> {
    if frame.msg_type != MessageType::Hello || frame.payload.len() != 6 {
        return Err(NetError::Handshake("malformed link HELLO".into()));
    }
    let version = u32::from_le_bytes(frame.payload[0..4].try_into().unwrap());
    if version != PROTOCOL_VERSION {
        return Err(NetError::Handshake(format!(
            "version mismatch: peer {version}, ours {PROTOCOL_VERSION}"
        )));
    }
    let role = MeshRole::from_code(frame.payload[4])
        .ok_or_else(|| NetError::Handshake("unknown peer role".into()))?;
    // Mesh links must agree on the simulation preset; client links never
    // shape, so their preset byte is ignored.
    if own.is_mesh() && role.is_mesh() && frame.payload[5] != preset_code(preset) {
        return Err(NetError::Handshake(
            "network preset disagrees between mesh endpoints".into(),
        ));
    }
    Ok(role)
}

/// Dials a peer, runs the link handshake, and enables shaping on mesh links
/// per the preset.
pub fn dial_link(
    addr: &str,
    own: MeshRole,
    preset: NetPreset,
    capture: Option<Arc<PayloadCapture>>,
) -> Result<(Link, MeshRole), NetError> {
    let mut last_err: Option<std::io::Error> = None;
    // Party processes race at startup; retry dialing for a few seconds.
    for _ in 0..100 {
        match TcpStream::connect(addr) {
            Ok(stream) => return link_handshake(stream, own, preset, capture),
            Err(e) => {
                last_err = Some(e);
                std::thread::sleep(Duration::from_millis(100));
            }
        }
    }
    Err(NetError::Io(last_err.unwrap()))
}

/// Accepts one peer connection from `listener` and runs the handshake.
pub fn accept_link(
    listener: &TcpListener,
    own: MeshRole,
    preset: NetPreset,
    capture: Option<Arc<PayloadCapture>>,
) -> Result<(Link, MeshRole), NetError> {
    let (stream, _) = listener.accept()?;
    link_handshake(stream, own, preset, capture)
}

/// Runs the handshake on the raw stream, before the link's reader thread
/// exists, so the shaping decision is fixed by the time any session frame
/// can arrive.
fn link_handshake(
    mut stream: TcpStream,
    own: MeshRole,
    preset: NetPreset,
    capture: Option<Arc<PayloadCapture>>,
) -> Result<(Link, MeshRole), NetError> {
    use crate::frame::{decode_frame, encode_frame, HEADER_LEN};
    use std::io::{Read, Write};

    stream.set_nodelay(true)?;
    let hello = Frame::new(MessageType::Hello, CONTROL_SID, handshake_payload(own, preset));
    stream.write_all(&encode_frame(&hello))?;
    stream.flush()?;

    stream.set_read_timeout(Some(Duration::from_secs(30)))?;
    let mut buf = vec![0u8; HEADER_LEN + 6];
    stream.read_exact(&mut buf)?;
    stream.set_read_timeout(None)?;
    let (frame, _) = decode_frame(&buf)?
        .ok_or_else(|| NetError::Handshake("short link HELLO".into()))?;
    let peer = verify_handshake(&frame, own, preset)?;

    let shape = if own.is_mesh() && peer.is_mesh() {
        let proxy_to_proxy = matches!(
            (own, peer),
            (MeshRole::P0, MeshRole::P1) | (MeshRole::P1, MeshRole::P0)
        );
        preset.shape(proxy_to_proxy)
    } else {
        None
    };
    let link = Link::from_tcp(stream, shape, capture)?;
    Ok((link, peer))
}
