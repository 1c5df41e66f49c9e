use crate::frame::{decode_frame, encode_frame, Frame, SessionId, HEADER_LEN};
use crate::shape::LinkShaper;
use crate::NetError;
use std::collections::{HashMap, VecDeque};
use std::io::{BufReader, Read, Write};
use std::net::TcpStream;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc;
use std::sync::{Arc, Condvar, Mutex};
use std::thread;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

/// Default wait for a frame before declaring the peer gone.
pub const RECV_TIMEOUT: Duration = Duration::from_secs(180);

/// Control session id carrying per-connection handshakes.
pub const CONTROL_SID: SessionId = [0u8; 16];

/// Byte and frame counters for one link endpoint.
#[derive(Debug, Default)]
pub struct LinkMeter {
    pub bytes_sent: AtomicU64,
    pub frames_sent: AtomicU64,
    pub bytes_received: AtomicU64,
    pub frames_received: AtomicU64,
}

impl LinkMeter {
    fn on_send(&self, wire_len: usize) {
        self.bytes_sent.fetch_add(wire_len as u64, Ordering::Relaxed);
        self.frames_sent.fetch_add(1, Ordering::Relaxed);
    }

    fn on_recv(&self, wire_len: usize) {
        self.bytes_received
            .fetch_add(wire_len as u64, Ordering::Relaxed);
        self.frames_received.fetch_add(1, Ordering::Relaxed);
    }
}

/// Records payload bytes of received session frames for the blindness meter.
/// Connection handshakes and the public CONFIG/ABORT control frames are not
/// session payload and are excluded.
#[derive(Debug, Default)]
pub struct PayloadCapture {
    inner: Mutex<CaptureInner>,
}

#[derive(Debug, Default)]
struct CaptureInner {
    bytes: Vec<u8>,
    data_plane_bytes: u64,
}

impl PayloadCapture {
    fn record(&self, frame: &Frame) {
        use crate::MessageType;
        if frame.session_id == CONTROL_SID
            || matches!(frame.msg_type, MessageType::Config | MessageType::Abort)
        {
            return;
        }
        let mut inner = self.inner.lock().unwrap();
        inner.bytes.extend_from_slice(&frame.payload);
        if frame.msg_type.is_data_plane() {
            inner.data_plane_bytes += frame.payload.len() as u64;
        }
    }

    pub fn captured_bytes(&self) -> Vec<u8> {
        self.inner.lock().unwrap().bytes.clone()
    }

    pub fn data_plane_bytes(&self) -> u64 {
        self.inner.lock().unwrap().data_plane_bytes
    }
}

enum Sink {
    Tcp(TcpStream),
    InProc(mpsc::Sender<Envelope>),
}

struct Envelope {
    release: Option<SystemTime>,
    frame: Frame,
}

struct WriterInner {
    sink: Sink,
    busy_until: Option<SystemTime>,
}

#[derive(Default)]
struct DemuxInner {
    queues: HashMap<SessionId, VecDeque<Frame>>,
    new_sessions: VecDeque<SessionId>,
    closed: bool,
}

struct Demux {
    inner: Mutex<DemuxInner>,
    cv: Condvar,
}

impl Demux {
    fn new() -> Self {
        Demux {
            inner: Mutex::new(DemuxInner::default()),
            cv: Condvar::new(),
        }
    }

    fn push(&self, frame: Frame) {
        let mut inner = self.inner.lock().unwrap();
        let sid = frame.session_id;
        match inner.queues.get_mut(&sid) {
            Some(q) => q.push_back(frame),
            None => {
                inner.queues.insert(sid, VecDeque::from([frame]));
                inner.new_sessions.push_back(sid);
            }
        }
        self.cv.notify_all();
    }

    fn close(&self) {
        self.inner.lock().unwrap().closed = true;
        self.cv.notify_all();
    }

    fn recv(&self, sid: &SessionId, timeout: Duration) -> Result<Frame, NetError> {
        let deadline = SystemTime::now() + timeout;
        let mut inner = self.inner.lock().unwrap();
        loop {
            // Touch the queue so a later push does not re-announce this sid.
            if let Some(frame) = inner.queues.entry(*sid).or_default().pop_front() {
                return Ok(frame);
            }
            if inner.closed {
                return Err(NetError::LinkClosed);
            }
            let now = SystemTime::now();
            let left = deadline
                .duration_since(now)
                .map_err(|_| NetError::Timeout)?;
            let (guard, res) = self.cv.wait_timeout(inner, left).unwrap();
            inner = guard;
            if res.timed_out() && inner.queues.get(sid).map_or(true, |q| q.is_empty()) {
                if inner.closed {
                    return Err(NetError::LinkClosed);
                }
                return Err(NetError::Timeout);
            }
        }
    }

    fn next_new_session(&self, timeout: Duration) -> Result<SessionId, NetError> {
        let deadline = SystemTime::now() + timeout;
        let mut inner = self.inner.lock().unwrap();
        loop {
            if let Some(sid) = inner.new_sessions.pop_front() {
                return Ok(sid);
            }
            if inner.closed {
                return Err(NetError::LinkClosed);
            }
            let left = deadline
                .duration_since(SystemTime::now())
                .map_err(|_| NetError::Timeout)?;
            let (guard, res) = self.cv.wait_timeout(inner, left).unwrap();
            inner = guard;
            if res.timed_out() && inner.new_sessions.is_empty() {
                if inner.closed {
                    return Err(NetError::LinkClosed);
                }
                return Err(NetError::Timeout);
            }
        }
    }

    fn drop_session(&self, sid: &SessionId) {
        self.inner.lock().unwrap().queues.remove(sid);
    }
}

/// One endpoint of a bidirectional frame link. Cloning shares the endpoint;
/// one writer per (session, link) at a time is the intended discipline, and
/// reads are dispatched to the owning session by session id.
#[derive(Clone)]
pub struct Link {
    writer: Arc<Mutex<WriterInner>>,
    demux: Arc<Demux>,
    shape: Option<LinkShaper>,
    meter: Arc<LinkMeter>,
    capture: Option<Arc<PayloadCapture>>,
}

impl Link {
    /// Wraps an established TCP stream whose handshake already ran; `shape`
    /// must match the peer endpoint's.
    pub fn from_tcp(
        stream: TcpStream,
        shape: Option<LinkShaper>,
        capture: Option<Arc<PayloadCapture>>,
    ) -> Result<Link, NetError> {
        stream.set_nodelay(true)?;
        let read_half = stream.try_clone()?;
        let link = Link {
            writer: Arc::new(Mutex::new(WriterInner {
                sink: Sink::Tcp(stream),
                busy_until: None,
            })),
            demux: Arc::new(Demux::new()),
            shape,
            meter: Arc::new(LinkMeter::default()),
            capture,
        };
        link.spawn_tcp_reader(read_half);
        Ok(link)
    }

    /// An in-process link pair, used by tests and single-process simulations.
    pub fn in_proc_pair(
        shape: Option<LinkShaper>,
        capture_b: Option<Arc<PayloadCapture>>,
    ) -> (Link, Link) {
        let (tx_ab, rx_ab) = mpsc::channel::<Envelope>();
        let (tx_ba, rx_ba) = mpsc::channel::<Envelope>();
        let a = Link {
            writer: Arc::new(Mutex::new(WriterInner {
                sink: Sink::InProc(tx_ab),
                busy_until: None,
            })),
            demux: Arc::new(Demux::new()),
            shape,
            meter: Arc::new(LinkMeter::default()),
            capture: None,
        };
        let b = Link {
            writer: Arc::new(Mutex::new(WriterInner {
                sink: Sink::InProc(tx_ba),
                busy_until: None,
            })),
            demux: Arc::new(Demux::new()),
            shape,
            meter: Arc::new(LinkMeter::default()),
            capture: capture_b,
        };
        a.spawn_in_proc_reader(rx_ba);
        b.spawn_in_proc_reader(rx_ab);
        (a, b)
    }

    pub fn meter(&self) -> Arc<LinkMeter> {
        self.meter.clone()
    }

    /// Sends one frame, applying bandwidth serialization and stamping the
    /// release time when the link is shaped.
    pub fn send(&self, frame: &Frame) -> Result<(), NetError> {
        let wire_len = frame.wire_len();
        let mut writer = self.writer.lock().unwrap();
        let release = if let Some(shape) = &self.shape {
            let now = SystemTime::now();
            let start = match writer.busy_until {
                Some(busy) if busy > now => busy,
                _ => now,
            };
            let release = start + shape.transmission_time(wire_len);
            writer.busy_until = Some(release);
            if let Ok(wait) = release.duration_since(now) {
                thread::sleep(wait);
            }
            Some(release)
        } else {
            None
        };
        match &mut writer.sink {
            Sink::Tcp(stream) => {
                if let Some(release) = release {
                    let nanos = release
                        .duration_since(UNIX_EPOCH)
                        .unwrap_or_default()
                        .as_nanos() as u64;
                    stream.write_all(&nanos.to_le_bytes())?;
                }
                stream.write_all(&encode_frame(frame))?;
                stream.flush()?;
            }
            Sink::InProc(tx) => {
                tx.send(Envelope {
                    release,
                    frame: frame.clone(),
                })
                .map_err(|_| NetError::LinkClosed)?;
            }
        }
        drop(writer);
        self.meter.on_send(wire_len);
        Ok(())
    }

    /// Receives the next frame for `sid`, FIFO per (session, link).
    pub fn recv(&self, sid: &SessionId, timeout: Duration) -> Result<Frame, NetError> {
        self.demux.recv(sid, timeout)
    }

    /// Blocks until a frame for a previously unseen session id arrives.
    pub fn next_new_session(&self, timeout: Duration) -> Result<SessionId, NetError> {
        self.demux.next_new_session(timeout)
    }

    pub fn drop_session(&self, sid: &SessionId) {
        self.demux.drop_session(sid);
    }

    fn deliver(
        demux: &Demux,
        meter: &LinkMeter,
        capture: &Option<Arc<PayloadCapture>>,
        shape: Option<LinkShaper>,
        release: Option<SystemTime>,
        frame: Frame,
    ) {
        if let (Some(shape), Some(release)) = (shape, release) {
            let due = release + shape.latency;
            if let Ok(wait) = due.duration_since(SystemTime::now()) {
                thread::sleep(wait);
            }
        }
        meter.on_recv(frame.wire_len());
        if let Some(capture) = capture {
            capture.record(&frame);
        }
        demux.push(frame);
    }

    fn spawn_in_proc_reader(&self, rx: mpsc::Receiver<Envelope>) {
        let demux = self.demux.clone();
        let meter = self.meter.clone();
        let capture = self.capture.clone();
        let shape = self.shape;
        thread::spawn(move || {
            while let Ok(envelope) = rx.recv() {
                Self::deliver(
                    &demux,
                    &meter,
                    &capture,
                    shape,
                    envelope.release,
                    envelope.frame,
                );
            }
            demux.close();
        });
    }

    fn spawn_tcp_reader(&self, stream: TcpStream) {
        let demux = self.demux.clone();
        let meter = self.meter.clone();
        let capture = self.capture.clone();
        let shape = self.shape;
        thread::spawn(move || {
            let mut reader = BufReader::with_capacity(1 << 16, stream);
            let mut buf = Vec::new();
            loop {
                let release = if shape.is_some() {
                    let mut stamp = [0u8; 8];
                    if reader.read_exact(&mut stamp).is_err() {
                        break;
                    }
                    Some(UNIX_EPOCH + Duration::from_nanos(u64::from_le_bytes(stamp)))
                } else {
                    None
                };
                buf.resize(HEADER_LEN, 0);
                if reader.read_exact(&mut buf[..HEADER_LEN]).is_err() {
                    break;
                }
                let len = u32::from_le_bytes(buf[0..4].try_into().unwrap()) as usize;
                buf.resize(HEADER_LEN + len, 0);
                if reader.read_exact(&mut buf[HEADER_LEN..]).is_err() {
                    break;
                }
                match decode_frame(&buf) {
                    Ok(Some((frame, _))) => {
                        Self::deliver(&demux, &meter, &capture, shape, release, frame)
                    }
                    // Unknown type or corrupt header: the stream is beyond
                    // recovery, close the link.
                    _ => break,
                }
            }
            demux.close();
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::MessageType;
    use std::time::Instant;

    #[test]
    fn in_proc_round_trip_and_meter() {
        let (a, b) = Link::in_proc_pair(None, None);
        let sid = [1u8; 16];
        let f = Frame::new(MessageType::Open, sid, vec![7; 24]);
        a.send(&f).unwrap();
        let g = b.recv(&sid, Duration::from_secs(1)).unwrap();
        assert_eq!(g, f);
        assert_eq!(a.meter().bytes_sent.load(Ordering::Relaxed), f.wire_len() as u64);
        assert_eq!(
            b.meter().bytes_received.load(Ordering::Relaxed),
            f.wire_len() as u64
        );
    }

    #[test]
    fn sessions_demux_independently() {
        let (a, b) = Link::in_proc_pair(None, None);
        let s1 = [1u8; 16];
        let s2 = [2u8; 16];
        a.send(&Frame::new(MessageType::Open, s1, vec![1])).unwrap();
        a.send(&Frame::new(MessageType::Open, s2, vec![2])).unwrap();
        a.send(&Frame::new(MessageType::Open, s1, vec![3])).unwrap();
        // Reading s2 first does not disturb s1's FIFO order.
        assert_eq!(b.recv(&s2, Duration::from_secs(1)).unwrap().payload, vec![2]);
        assert_eq!(b.recv(&s1, Duration::from_secs(1)).unwrap().payload, vec![1]);
        assert_eq!(b.recv(&s1, Duration::from_secs(1)).unwrap().payload, vec![3]);
    }

    #[test]
    fn shaped_link_delays_delivery() {
        let shape = LinkShaper {
            latency: Duration::from_millis(40),
            bandwidth_bps: 1_000_000_000,
        };
        let (a, b) = Link::in_proc_pair(Some(shape), None);
        let sid = [3u8; 16];
        let start = Instant::now();
        a.send(&Frame::new(MessageType::Open, sid, vec![0; 64])).unwrap();
        b.recv(&sid, Duration::from_secs(2)).unwrap();
        assert!(start.elapsed() >= Duration::from_millis(40));
    }

    #[test]
    fn capture_records_session_hello_and_data_but_not_config_or_control() {
        let capture = Arc::new(PayloadCapture::default());
        let (a, b) = Link::in_proc_pair(None, Some(capture.clone()));
        let sid = [4u8; 16];
        a.send(&Frame::new(MessageType::Hello, CONTROL_SID, vec![0x11; 4])).unwrap();
        a.send(&Frame::new(MessageType::Hello, sid, vec![0xAA; 4])).unwrap();
        a.send(&Frame::new(MessageType::Config, sid, vec![0xBB; 4])).unwrap();
        a.send(&Frame::new(MessageType::TripleBlock, sid, vec![0xCC; 4])).unwrap();
        for _ in 0..3 {
            let _ = b.recv(&sid, Duration::from_secs(1));
        }
        let _ = b.recv(&CONTROL_SID, Duration::from_secs(1));
        assert_eq!(capture.captured_bytes(), vec![0xAA, 0xAA, 0xAA, 0xAA, 0xCC, 0xCC, 0xCC, 0xCC]);
        assert_eq!(capture.data_plane_bytes(), 4);
    }

    #[test]
    fn timeout_when_no_frame() {
        let (_a, b) = Link::in_proc_pair(None, None);
        let err = b.recv(&[5u8; 16], Duration::from_millis(30)).unwrap_err();
        assert!(matches!(err, NetError::Timeout));
    }
}
