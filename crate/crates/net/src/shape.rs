use std::time::Duration;

/// Added one-way latency and bandwidth cap for one ordered party pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkShaper {
    pub latency: Duration,
    pub bandwidth_bps: u64,
}

impl LinkShaper {
    /// Wire time for a payload of `bytes` at the configured bandwidth.
    pub fn transmission_time(&self, bytes: usize) -> Duration {
        Duration::from_secs_f64(bytes as f64 * 8.0 / self.bandwidth_bps as f64)
    }
}

/// The benchmark network settings: a wide-area layout, the same layout capped
/// at 100 Mbps, and a local network. P0 and P1 play the east/west regions,
/// the helper the central one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetPreset {
    A,
    B,
    C,
    Off,
}

impl NetPreset {
    pub fn parse(s: &str) -> Option<NetPreset> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Some(NetPreset::A),
            "b" => Some(NetPreset::B),
            "c" => Some(NetPreset::C),
            "off" => Some(NetPreset::Off),
            _ => None,
        }
    }

    /// Shape for a link, by whether it connects the two proxies (east-west)
    /// or a proxy with the helper (to central).
    pub fn shape(self, proxy_to_proxy: bool) -> Option<LinkShaper> {
        let ms = Duration::from_millis;
        match self {
            NetPreset::A => Some(if proxy_to_proxy {
                LinkShaper {
                    latency: ms(63),
                    bandwidth_bps: 330_000_000,
                }
            } else {
                LinkShaper {
                    latency: ms(32),
                    bandwidth_bps: 700_000_000,
                }
            }),
            NetPreset::B => Some(LinkShaper {
                latency: if proxy_to_proxy { ms(63) } else { ms(32) },
                bandwidth_bps: 100_000_000,
            }),
            NetPreset::C => Some(LinkShaper {
                latency: Duration::from_micros(100),
                bandwidth_bps: 25_000_000_000,
            }),
            NetPreset::Off => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets() {
        let b = NetPreset::B.shape(true).unwrap();
        assert_eq!(b.latency, Duration::from_millis(63));
        assert_eq!(b.bandwidth_bps, 100_000_000);
        assert!(NetPreset::Off.shape(true).is_none());
        // 100 Mbps moves 12.5 MB/s.
        let t = b.transmission_time(1_250_000);
        assert!((t.as_secs_f64() - 0.1).abs() < 1e-9);
    }
}
