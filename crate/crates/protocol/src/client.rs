use crate::outsource::outsource_record;
use crate::payload::{
    decode_result, encode_config, encode_db_shares, encode_query, result_tag, SENTINEL,
};
use crate::ProtocolError;
use pprl_linkage::{validate_config, Disclosure, EncodedRecord, LinkageConfig, ScoreFraction};
use pprl_net::{dial_link, Frame, Link, MeshRole, MessageType, NetPreset, SessionId, RECV_TIMEOUT};
use pprl_ring::RandomStream;
use rand::RngCore;

/// What the query client learns from a session, per disclosure mode.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchOutcome {
    pub matched: bool,
    pub index: Option<u64>,
    pub score: Option<ScoreFraction>,
}

/// A client's connections to the two proxies. One client may upload records
/// and run any number of query sessions.
pub struct ClientSession {
    p0: Link,
    p1: Link,
}

impl ClientSession {
    pub fn connect(p0_addr: &str, p1_addr: &str) -> Result<Self, ProtocolError> {
        let (p0, role) = dial_link(p0_addr, MeshRole::Client, NetPreset::Off, None)?;
        if role != MeshRole::P0 {
            return Err(ProtocolError::HandshakeMismatch(format!(
                "{p0_addr} is {role:?}, expected P0"
            )));
        }
        let (p1, role) = dial_link(p1_addr, MeshRole::Client, NetPreset::Off, None)?;
        if role != MeshRole::P1 {
            return Err(ProtocolError::HandshakeMismatch(format!(
                "{p1_addr} is {role:?}, expected P1"
            )));
        }
        Ok(ClientSession { p0, p1 })
    }

    pub fn from_links(p0: Link, p1: Link) -> Self {
        ClientSession { p0, p1 }
    }

    /// Bytes this client pushed to the proxies so far.
    pub fn bytes_sent(&self) -> u64 {
        use std::sync::atomic::Ordering;
        self.p0.meter().bytes_sent.load(Ordering::Relaxed)
            + self.p1.meter().bytes_sent.load(Ordering::Relaxed)
    }

    fn fresh_sid() -> SessionId {
        let mut sid = [0u8; 16];
        rand::rngs::OsRng.fill_bytes(&mut sid);
        sid
    }

    fn recv_result(
        &self,
        link: &Link,
        sid: &SessionId,
    ) -> Result<crate::payload::ResultShares, ProtocolError> {
        let frame = link.recv(sid, RECV_TIMEOUT)?;
        match frame.msg_type {
            MessageType::Result => decode_result(&frame.payload),
            MessageType::Abort => Err(ProtocolError::Aborted {
                party: "proxy".into(),
                reason: String::from_utf8_lossy(&frame.payload).into_owned(),
            }),
            other => Err(ProtocolError::BadPayload(format!(
                "expected RESULT, got {other:?}"
            ))),
        }
    }

    /// Secret-shares the records and uploads one share to each proxy,
    /// waiting for both ingestion acknowledgements.
    pub fn upload_db(
        &self,
        records: &[EncodedRecord],
        owner_tag: u64,
        reset: bool,
        stream: &mut RandomStream,
    ) -> Result<(), ProtocolError> {
        let sid = Self::fresh_sid();
        let mut shares0 = Vec::with_capacity(records.len());
        let mut shares1 = Vec::with_capacity(records.len());
        for record in records {
            let (s0, s1) = outsource_record(record, stream);
            shares0.push(s0);
            shares1.push(s1);
        }
        self.p0.send(&Frame::new(
            MessageType::DbShares,
            sid,
            encode_db_shares(reset, owner_tag, &shares0),
        ))?;
        self.p1.send(&Frame::new(
            MessageType::DbShares,
            sid,
            encode_db_shares(reset, owner_tag, &shares1),
        ))?;
        for link in [&self.p0, &self.p1] {
            let ack = link.recv(&sid, RECV_TIMEOUT)?;
            if ack.msg_type != MessageType::Result {
                return Err(ProtocolError::BadPayload(format!(
                    "expected upload ack, got {:?}",
                    ack.msg_type
                )));
            }
        }
        self.p0.drop_session(&sid);
        self.p1.drop_session(&sid);
        Ok(())
    }

    /// Runs one linkage session: shares the query record, triggers the
    /// protocol and reconstructs the disclosed result.
    pub fn query(
        &self,
        config: &LinkageConfig,
        record: &EncodedRecord,
        stream: &mut RandomStream,
    ) -> Result<MatchOutcome, ProtocolError> {
        validate_config(config)?;
        let sid = Self::fresh_sid();
        let (q0, q1) = outsource_record(record, stream);
        let config_payload = encode_config(config, 0);
        self.p0.send(&Frame::new(
            MessageType::Config,
            sid,
            config_payload.clone(),
        ))?;
        self.p0
            .send(&Frame::new(MessageType::QueryShares, sid, encode_query(&q0)))?;
        self.p1
            .send(&Frame::new(MessageType::Config, sid, config_payload))?;
        self.p1
            .send(&Frame::new(MessageType::QueryShares, sid, encode_query(&q1)))?;

        let r0 = self.recv_result(&self.p0, &sid);
        let r1 = self.recv_result(&self.p1, &sid);
        self.p0.drop_session(&sid);
        self.p1.drop_session(&sid);
        let (r0, r1) = (r0?, r1?);

        if r0.tag + r1.tag != result_tag(&sid) {
            return Err(ProtocolError::ResultMismatch(
                "redundancy tag does not reconstruct".into(),
            ));
        }
        let matched = (r0.matched + r1.matched).0;
        if matched > 1 {
            return Err(ProtocolError::ResultMismatch(format!(
                "matched bit reconstructs to {matched}"
            )));
        }
        let matched = matched == 1;
        let index = (r0.index + r1.index).0;
        if !matched && index != SENTINEL {
            return Err(ProtocolError::ResultMismatch(
                "unmatched result carries a non-sentinel index".into(),
            ));
        }

        let index_out = match config.disclosure {
            Disclosure::Bit => None,
            _ if !matched => None,
            _ => Some(index),
        };
        let score_out = match config.disclosure {
            Disclosure::Full if matched => {
                let n = (r0.numerator + r1.numerator).0;
                let d = (r0.denominator + r1.denominator).0;
                if d == 0 {
                    return Err(ProtocolError::ResultMismatch(
                        "zero score denominator".into(),
                    ));
                }
                Some(ScoreFraction::new(n, d))
            }
            _ => None,
        };
        Ok(MatchOutcome {
            matched,
            index: index_out,
            score: score_out,
        })
    }
}

/// Convenience wrappers used by the command-line tools.
pub fn upload_db(
    session: &ClientSession,
    records: &[EncodedRecord],
    owner_tag: u64,
    reset: bool,
    stream: &mut RandomStream,
) -> Result<(), ProtocolError> {
    session.upload_db(records, owner_tag, reset, stream)
}

pub fn query_session(
    session: &ClientSession,
    config: &LinkageConfig,
    record: &EncodedRecord,
    stream: &mut RandomStream,
) -> Result<MatchOutcome, ProtocolError> {
    session.query(config, record, stream)
}
