use std::time::Duration;

/// Per-session accounting: proxy-to-proxy rounds, bytes per link and
/// wall-clock per phase, from this party's point of view.
#[derive(Debug, Clone, Default)]
pub struct SessionMeter {
    pub rounds: u32,
    pub bytes_to_peer: u64,
    pub bytes_to_helper: u64,
    pub bytes_to_client: u64,
    /// Helper-side: correction block bytes shipped to P1.
    pub bytes_blocks: u64,
    pub open_frames: u32,
    pub phases: Vec<(&'static str, Duration)>,
    pub wall: Duration,
}

impl SessionMeter {
    pub fn phase(&mut self, name: &'static str, took: Duration) {
        self.phases.push((name, took));
    }

    /// Every byte this party pushed onto a wire during the session.
    pub fn bytes_sent(&self) -> u64 {
        self.bytes_to_peer + self.bytes_to_helper + self.bytes_to_client + self.bytes_blocks
    }

    pub fn summary_line(&self, sid_prefix: &str) -> String {
        let phases: Vec<String> = self
            .phases
            .iter()
            .map(|(n, d)| format!("{n}={:.3}s", d.as_secs_f64()))
            .collect();
        format!(
            "session={sid_prefix} rounds={} sent_peer={}B sent_helper={}B sent_client={}B blocks={}B wall={:.3}s {}",
            self.rounds,
            self.bytes_to_peer,
            self.bytes_to_helper,
            self.bytes_to_client,
            self.bytes_blocks,
            self.wall.as_secs_f64(),
            phases.join(" ")
        )
    }
}
