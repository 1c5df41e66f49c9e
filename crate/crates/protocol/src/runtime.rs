use crate::client::ClientSession;
use crate::helper::run_helper_session;
use crate::meter::SessionMeter;
use crate::outsource::SharedRecord;
use crate::payload::{decode_config, decode_db_shares, decode_query};
use crate::proxy::{derive_helper_masters, derive_masters, run_proxy_session, ProxySessionDeps};
use crate::ProtocolError;
use pprl_net::{
    accept_link, dial_link, Frame, Link, MeshRole, MessageType, NetPreset, PayloadCapture,
    SessionId, RECV_TIMEOUT,
};
use pprl_ring::ProxyId;
use std::net::TcpListener;
use std::ops::Range;
use std::sync::{Arc, Condvar, Mutex, RwLock};
use std::thread;
use std::time::Duration;

/// How a party process is stood up.
#[derive(Debug, Clone)]
pub struct PartySpec {
    pub role: MeshRole,
    /// Address to listen on; use port 0 to pick one.
    pub listen: String,
    /// P0 dials P1 here.
    pub p1_addr: Option<String>,
    /// P0 and P1 dial the helper here.
    pub helper_addr: Option<String>,
    pub master_seed: [u8; 16],
    pub preset: NetPreset,
    /// Print one summary line per finished session.
    pub verbose: bool,
}

/// Outcome and accounting of one session as seen by this party.
#[derive(Debug, Clone)]
pub struct SessionReport {
    pub sid: SessionId,
    pub meter: SessionMeter,
    pub error: Option<String>,
}

/// The proxies' share of the logical database, with owner-tagged ranges.
#[derive(Debug, Default)]
pub struct DbStore {
    pub records: Arc<Vec<SharedRecord>>,
    pub owners: Vec<(u64, Range<usize>)>,
}

impl DbStore {
    fn ingest(&mut self, reset: bool, owner: u64, incoming: Vec<SharedRecord>) {
        if reset {
            self.owners.clear();
            let start = 0;
            self.owners.push((owner, start..incoming.len()));
            self.records = Arc::new(incoming);
        } else {
            let mut all = (*self.records).clone();
            let start = all.len();
            all.extend(incoming);
            self.owners.push((owner, start..all.len()));
            self.records = Arc::new(all);
        }
    }
}

/// Blocking slot for a link that another thread will provide.
#[derive(Clone, Default)]
struct LinkSlot(Arc<(Mutex<Option<Link>>, Condvar)>);

impl LinkSlot {
    fn set(&self, link: Link) {
        let (lock, cv) = &*self.0;
        *lock.lock().unwrap() = Some(link);
        cv.notify_all();
    }

    fn get(&self, timeout: Duration) -> Result<Link, ProtocolError> {
        let (lock, cv) = &*self.0;
        let mut guard = lock.lock().unwrap();
        let deadline = std::time::Instant::now() + timeout;
        while guard.is_none() {
            let left = deadline
                .checked_duration_since(std::time::Instant::now())
                .ok_or(ProtocolError::HandshakeMismatch(
                    "mesh peer never connected".into(),
                ))?;
            let (g, _) = cv.wait_timeout(guard, left).unwrap();
            guard = g;
        }
        Ok(guard.as_ref().unwrap().clone())
    }
}

/// Handle to a spawned party; threads run for the life of the process.
pub struct PartyHandle {
    pub role: MeshRole,
    pub local_addr: String,
    pub reports: Arc<Mutex<Vec<SessionReport>>>,
    /// Helper only: payload bytes received on session traffic.
    pub capture: Option<Arc<PayloadCapture>>,
    pub db: Option<Arc<RwLock<DbStore>>>,
}

impl PartyHandle {
    pub fn take_reports(&self) -> Vec<SessionReport> {
        std::mem::take(&mut *self.reports.lock().unwrap())
    }

    pub fn wait_for_reports(&self, n: usize, timeout: Duration) -> Vec<SessionReport> {
        let deadline = std::time::Instant::now() + timeout;
        loop {
            {
                let reports = self.reports.lock().unwrap();
                if reports.len() >= n {
                    return reports.clone();
                }
            }
            if std::time::Instant::now() > deadline {
                return self.reports.lock().unwrap().clone();
            }
            thread::sleep(Duration::from_millis(20));
        }
    }
}

#[derive(Clone)]
struct ProxyShared {
    party: ProxyId,
    masters: crate::proxy::MasterSecrets,
    db: Arc<RwLock<DbStore>>,
    peer: LinkSlot,
    helper: LinkSlot,
    reports: Arc<Mutex<Vec<SessionReport>>>,
    verbose: bool,
}

fn sid_prefix(sid: &SessionId) -> String {
    sid[..4].iter().map(|b| format!("{b:02x}")).collect()
}

fn abort_frame(sid: SessionId, reason: &str) -> Frame {
    Frame::new(MessageType::Abort, sid, reason.as_bytes().to_vec())
}

/// Binds the listener, wires the mesh per role and starts serving sessions.
pub fn spawn_party(spec: PartySpec) -> Result<PartyHandle, ProtocolError> {
    let listener = TcpListener::bind(&spec.listen).map_err(pprl_net::NetError::Io)?;
    let local_addr = listener.local_addr().map_err(pprl_net::NetError::Io)?.to_string();
    let reports: Arc<Mutex<Vec<SessionReport>>> = Arc::new(Mutex::new(Vec::new()));

    match spec.role {
        MeshRole::Helper => {
            let capture = Arc::new(PayloadCapture::default());
            let (p0_slot, p1_slot) = (LinkSlot::default(), LinkSlot::default());
            let masters = derive_helper_masters(&spec.master_seed);
            {
                let capture = capture.clone();
                let (p0_slot, p1_slot) = (p0_slot.clone(), p1_slot.clone());
                let reports = reports.clone();
                let spec = spec.clone();
                thread::spawn(move || loop {
                    match accept_link(
                        &listener,
                        MeshRole::Helper,
                        spec.preset,
                        Some(capture.clone()),
                    ) {
                        Ok((link, MeshRole::P0)) => {
                            p0_slot.set(link.clone());
                            spawn_helper_dispatcher(
                                link,
                                p1_slot.clone(),
                                masters,
                                reports.clone(),
                                spec.verbose,
                            );
                        }
                        Ok((link, MeshRole::P1)) => {
                            p1_slot.set(link.clone());
                            drain_announcements(link);
                        }
                        Ok((_, role)) => {
                            eprintln!("helper: unexpected {role:?} connection, dropping");
                        }
                        Err(e) => {
                            eprintln!("helper: accept failed: {e}");
                            thread::sleep(Duration::from_millis(100));
                        }
                    }
                });
            }
            Ok(PartyHandle {
                role: spec.role,
                local_addr,
                reports,
                capture: Some(capture),
                db: None,
            })
        }
        MeshRole::P0 | MeshRole::P1 => {
            let party = if spec.role == MeshRole::P0 {
                ProxyId::P0
            } else {
                ProxyId::P1
            };
            let shared = ProxyShared {
                party,
                masters: derive_masters(&spec.master_seed, party),
                db: Arc::new(RwLock::new(DbStore::default())),
                peer: LinkSlot::default(),
                helper: LinkSlot::default(),
                reports: reports.clone(),
                verbose: spec.verbose,
            };

            let helper_addr = spec.helper_addr.clone().ok_or_else(|| {
                ProtocolError::HandshakeMismatch("proxy needs a helper address".into())
            })?;
            let (helper_link, peer_role) =
                dial_link(&helper_addr, spec.role, spec.preset, None)?;
            if peer_role != MeshRole::Helper {
                return Err(ProtocolError::HandshakeMismatch(format!(
                    "{helper_addr} answered as {peer_role:?}"
                )));
            }
            drain_announcements(helper_link.clone());
            shared.helper.set(helper_link);

            if party == ProxyId::P0 {
                let p1_addr = spec.p1_addr.clone().ok_or_else(|| {
                    ProtocolError::HandshakeMismatch("P0 needs P1's address".into())
                })?;
                let (peer_link, peer_role) = dial_link(&p1_addr, MeshRole::P0, spec.preset, None)?;
                if peer_role != MeshRole::P1 {
                    return Err(ProtocolError::HandshakeMismatch(format!(
                        "{p1_addr} answered as {peer_role:?}"
                    )));
                }
                drain_announcements(peer_link.clone());
                shared.peer.set(peer_link);
            }

            {
                let shared = shared.clone();
                let preset = spec.preset;
                let role = spec.role;
                thread::spawn(move || loop {
                    match accept_link(&listener, role, preset, None) {
                        Ok((link, MeshRole::Client)) => {
                            let shared = shared.clone();
                            thread::spawn(move || serve_client_link(shared, link));
                        }
                        Ok((link, MeshRole::P0)) if shared.party == ProxyId::P1 => {
                            drain_announcements(link.clone());
                            shared.peer.set(link);
                        }
                        Ok((_, other)) => {
                            eprintln!("proxy: unexpected {other:?} connection, dropping");
                        }
                        Err(e) => {
                            eprintln!("proxy: accept failed: {e}");
                            thread::sleep(Duration::from_millis(100));
                        }
                    }
                });
            }
            Ok(PartyHandle {
                role: spec.role,
                local_addr,
                reports,
                capture: None,
                db: Some(shared.db),
            })
        }
        MeshRole::Client => Err(ProtocolError::HandshakeMismatch(
            "clients use ClientSession, not spawn_party".into(),
        )),
    }
}

/// Mesh links carry many sessions; their new-session announcements are only
/// consumed where sessions are born. Everyone else discards them so the
/// queue cannot grow without bound.
fn drain_announcements(link: Link) {
    thread::spawn(move || loop {
        match link.next_new_session(Duration::from_secs(3600)) {
            Ok(_) => {}
            Err(pprl_net::NetError::Timeout) => {}
            Err(_) => return,
        }
    });
}

fn spawn_helper_dispatcher(
    p0_link: Link,
    p1_slot: LinkSlot,
    masters: ([u8; 16], [u8; 16]),
    reports: Arc<Mutex<Vec<SessionReport>>>,
    verbose: bool,
) {
    thread::spawn(move || loop {
        let sid = match p0_link.next_new_session(Duration::from_secs(3600)) {
            Ok(sid) => sid,
            Err(pprl_net::NetError::Timeout) => continue,
            Err(_) => return,
        };
        let p0_link = p0_link.clone();
        let p1_slot = p1_slot.clone();
        let reports = reports.clone();
        thread::spawn(move || {
            let result = p1_slot
                .get(RECV_TIMEOUT)
                .and_then(|p1_link| {
                    let out = run_helper_session(sid, &p0_link, &p1_link, masters.0, masters.1);
                    p1_link.drop_session(&sid);
                    out
                });
            p0_link.drop_session(&sid);
            let report = match result {
                Ok(meter) => SessionReport {
                    sid,
                    meter,
                    error: None,
                },
                Err(e) => SessionReport {
                    sid,
                    meter: SessionMeter::default(),
                    error: Some(e.to_string()),
                },
            };
            if verbose {
                match &report.error {
                    None => println!("helper {}", report.meter.summary_line(&sid_prefix(&sid))),
                    Some(e) => eprintln!("helper session {} failed: {e}", sid_prefix(&sid)),
                }
            }
            reports.lock().unwrap().push(report);
        });
    });
}

fn serve_client_link(shared: ProxyShared, link: Link) {
    loop {
        match link.next_new_session(Duration::from_secs(3600)) {
            Ok(sid) => {
                let shared = shared.clone();
                let link = link.clone();
                thread::spawn(move || handle_client_session(shared, link, sid));
            }
            Err(pprl_net::NetError::Timeout) => {}
            Err(_) => return,
        }
    }
}

fn handle_client_session(shared: ProxyShared, client: Link, sid: SessionId) {
    let result = client_session_inner(&shared, &client, sid);
    match result {
        Ok(Some(meter)) => {
            if shared.verbose {
                println!(
                    "{:?} {}",
                    shared.party,
                    meter.summary_line(&sid_prefix(&sid))
                );
            }
            shared.reports.lock().unwrap().push(SessionReport {
                sid,
                meter,
                error: None,
            });
        }
        Ok(None) => {}
        Err(e) => {
            let reason = e.to_string();
            let _ = client.send(&abort_frame(sid, &reason));
            if let Ok(peer) = shared.peer.get(Duration::from_millis(50)) {
                let _ = peer.send(&abort_frame(sid, &reason));
                peer.drop_session(&sid);
            }
            if shared.party == ProxyId::P0 {
                if let Ok(helper) = shared.helper.get(Duration::from_millis(50)) {
                    let _ = helper.send(&abort_frame(sid, &reason));
                }
            }
            if shared.verbose {
                eprintln!(
                    "{:?} session {} failed: {reason}",
                    shared.party,
                    sid_prefix(&sid)
                );
            }
            shared.reports.lock().unwrap().push(SessionReport {
                sid,
                meter: SessionMeter::default(),
                error: Some(reason),
            });
        }
    }
    client.drop_session(&sid);
}

fn client_session_inner(
    shared: &ProxyShared,
    client: &Link,
    sid: SessionId,
) -> Result<Option<SessionMeter>, ProtocolError> {
    let first = client.recv(&sid, RECV_TIMEOUT)?;
    match first.msg_type {
        MessageType::DbShares => {
            let (reset, owner, records) = decode_db_shares(&first.payload)?;
            let count = records.len() as u64;
            shared.db.write().unwrap().ingest(reset, owner, records);
            client.send(&Frame::new(
                MessageType::Result,
                sid,
                count.to_le_bytes().to_vec(),
            ))?;
            Ok(None)
        }
        MessageType::Config => {
            let (config, _) = decode_config(&first.payload)?;
            let query_frame = client.recv(&sid, RECV_TIMEOUT)?;
            if query_frame.msg_type != MessageType::QueryShares {
                return Err(ProtocolError::BadPayload(format!(
                    "expected QUERY_SHARES, got {:?}",
                    query_frame.msg_type
                )));
            }
            let query = decode_query(&query_frame.payload)?;
            let db = shared.db.read().unwrap().records.clone();
            let peer = shared.peer.get(Duration::from_secs(10))?;
            let helper = shared.helper.get(Duration::from_secs(10))?;
            let deps = ProxySessionDeps {
                party: shared.party,
                sid,
                config,
                db,
                query,
                peer: peer.clone(),
                helper,
                client: client.clone(),
                masters: shared.masters,
            };
            let out = run_proxy_session(deps);
            peer.drop_session(&sid);
            out.map(|(meter, _)| Some(meter))
        }
        MessageType::Abort => Ok(None),
        other => Err(ProtocolError::BadPayload(format!(
            "unexpected first frame {other:?}"
        ))),
    }
}

/// Spins up the full three-party mesh in this process on loopback; used by
/// the benchmark harness and tests.
pub fn spawn_local_mesh(
    master_seed: [u8; 16],
    preset: NetPreset,
    verbose: bool,
) -> Result<(PartyHandle, PartyHandle, PartyHandle), ProtocolError> {
    let helper = spawn_party(PartySpec {
        role: MeshRole::Helper,
        listen: "127.0.0.1:0".into(),
        p1_addr: None,
        helper_addr: None,
        master_seed,
        preset,
        verbose,
    })?;
    let p1 = spawn_party(PartySpec {
        role: MeshRole::P1,
        listen: "127.0.0.1:0".into(),
        p1_addr: None,
        helper_addr: Some(helper.local_addr.clone()),
        master_seed,
        preset,
        verbose,
    })?;
    let p0 = spawn_party(PartySpec {
        role: MeshRole::P0,
        listen: "127.0.0.1:0".into(),
        p1_addr: Some(p1.local_addr.clone()),
        helper_addr: Some(helper.local_addr.clone()),
        master_seed,
        preset,
        verbose,
    })?;
    Ok((p0, p1, helper))
}

/// Convenience client against a local mesh.
pub fn connect_local_client(
    p0: &PartyHandle,
    p1: &PartyHandle,
) -> Result<ClientSession, ProtocolError> {
    ClientSession::connect(&p0.local_addr, &p1.local_addr)
}
