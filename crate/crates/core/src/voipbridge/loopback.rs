//! A far-end stand-in that records exactly what the remote party would hear.

use std::collections::{BTreeMap, HashSet};
use std::io;
use std::net::{SocketAddr, UdpSocket};
use std::path::Path;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::mulaw::mulaw_decode;
use super::rtp::{parse_rtp, RtpPacket, PAYLOAD_TYPE_PCMU};
use super::session::FRAME_SAMPLES;
use super::BridgeError;
use crate::speech::{write_wav, AudioBuffer, TELEPHONY_RATE};

/// Packets may arrive up to this many sequence numbers late and still be placed.
pub const REORDER_WINDOW: i64 = 16;

/// Header fields of a packet that made it into the decoded audio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacedPacket {
    pub sequence: u16,
    pub timestamp: u32,
    pub marker: bool,
}

/// Counters and packet log; everything in a [`ReceiveReport`] except the audio.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReceiveStats {
    pub packets_received: u64,
    pub packets_lost: u64,
    pub out_of_order: u64,
    pub duplicates: u64,
    /// Arrived after their slot had already been filled with silence.
    pub late: u64,
    /// Datagrams that were not PCMU RTP.
    pub invalid: u64,
    pub samples: usize,
    pub duration_ms: u64,
    pub packets: Vec<PlacedPacket>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReceiveReport {
    pub audio: AudioBuffer,
    pub stats: ReceiveStats,
}

impl ReceiveReport {
    pub fn packets_received(&self) -> u64 {
        self.stats.packets_received
    }

    pub fn packets_lost(&self) -> u64 {
        self.stats.packets_lost
    }

    pub fn out_of_order(&self) -> u64 {
        self.stats.out_of_order
    }

    /// Writes `received.wav` and `stats.json` into `dir`.
    pub fn write_to_dir(&self, dir: &Path) -> io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("received.wav"), write_wav(&self.audio))?;
        let json = serde_json::to_string_pretty(&self.stats).map_err(io::Error::other)?;
        std::fs::write(dir.join("stats.json"), json)
    }
}

/// Puts packets back in sequence order and turns them into audio.
///
/// Packets are held until either the reorder window has been exceeded or the
/// stream is finished; a missing sequence number is then replaced by one frame
/// of silence.
#[derive(Debug, Default)]
pub struct Reassembler {
    pending: BTreeMap<i64, RtpPacket>,
    next: Option<i64>,
    highest: Option<i64>,
    released_any: bool,
    filled: HashSet<i64>,
    samples: Vec<i16>,
    stats: ReceiveStats,
}

impl Reassembler {
    pub fn new() -> Self {
        Self::default()
    }

    fn extend_sequence(&self, seq: u16) -> i64 {
        match self.highest {
            None => seq as i64 + (1 << 16),
            Some(h) => h + (seq.wrapping_sub(h as u16) as i16) as i64,
        }
    }

    pub fn push_datagram(&mut self, bytes: &[u8]) {
        match parse_rtp(bytes) {
            Ok(p) if p.payload_type == PAYLOAD_TYPE_PCMU => self.push(p),
            _ => self.stats.invalid += 1,
        }
    }

    pub fn push(&mut self, packet: RtpPacket) {
        self.stats.packets_received += 1;
        let ext = self.extend_sequence(packet.sequence);

        let already_released = self.next.is_some_and(|n| ext < n) && self.released_any;
        if already_released || self.pending.contains_key(&ext) {
            if self.filled.remove(&ext) {
                self.stats.late += 1;
                self.stats.out_of_order += 1;
            } else {
                self.stats.duplicates += 1;
            }
            return;
        }
        if self.highest.is_some_and(|h| ext < h) {
            self.stats.out_of_order += 1;
        }
        self.highest = Some(self.highest.map_or(ext, |h| h.max(ext)));
        self.next = Some(self.next.map_or(ext, |n| n.min(ext)));
        self.pending.insert(ext, packet);

        let highest = self.highest.expect("set above");
        while self.next.is_some_and(|n| highest - n >= REORDER_WINDOW) {
            self.release_next();
        }
    }

    fn release_next(&mut self) {
        let n = self.next.expect("release only after first packet");
        match self.pending.remove(&n) {
            Some(p) => {
                self.samples.extend(p.payload.iter().map(|&b| mulaw_decode(b)));
                self.stats.packets.push(PlacedPacket {
                    sequence: p.sequence,
                    timestamp: p.timestamp,
                    marker: p.marker,
                });
            }
            None => {
                self.samples.extend(std::iter::repeat_n(0, FRAME_SAMPLES));
                self.stats.packets_lost += 1;
                self.filled.insert(n);
            }
        }
        self.released_any = true;
        self.next = Some(n + 1);
    }

    /// Flushes everything still held and returns the decoded stream.
    pub fn finish(mut self) -> ReceiveReport {
        if let Some(h) = self.highest {
            while self.next.is_some_and(|n| n <= h) {
                self.release_next();
            }
        }
        self.stats.samples = self.samples.len();
        let audio = AudioBuffer::new(TELEPHONY_RATE, self.samples).expect("telephony rate is valid");
        self.stats.duration_ms = audio.duration_ms();
        ReceiveReport {
            audio,
            stats: self.stats,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LoopbackOptions {
    /// Upper bound on how long to listen.
    pub duration: Duration,
    /// Stop this long after the last packet, once at least one has arrived.
    pub idle_timeout: Option<Duration>,
}

impl LoopbackOptions {
    pub fn for_duration(duration: Duration) -> Self {
        Self {
            duration,
            idle_timeout: None,
        }
    }
}

/// UDP receiver standing in for the remote party.
#[derive(Debug)]
pub struct LoopbackPeer {
    socket: UdpSocket,
}

impl LoopbackPeer {
    pub fn bind(addr: SocketAddr) -> Result<Self, BridgeError> {
        let socket = UdpSocket::bind(addr).map_err(|source| BridgeError::Bind { addr, source })?;
        Ok(Self { socket })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.socket.local_addr()
    }

    pub fn run(&self, opts: LoopbackOptions) -> Result<ReceiveReport, BridgeError> {
        let start = Instant::now();
        let mut last_packet: Option<Instant> = None;
        let mut reassembler = Reassembler::new();
        let mut buf = [0u8; 2048];
        loop {
            let now = Instant::now();
            let mut remaining = opts.duration.saturating_sub(now - start);
            if let (Some(idle), Some(last)) = (opts.idle_timeout, last_packet) {
                remaining = remaining.min(idle.saturating_sub(now - last));
            }
            if remaining.is_zero() {
                break;
            }
            self.socket.set_read_timeout(Some(remaining.min(Duration::from_millis(50))))?;
            match self.socket.recv_from(&mut buf) {
                Ok((n, _)) => {
                    last_packet = Some(Instant::now());
                    reassembler.push_datagram(&buf[..n]);
                }
                Err(e) if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => {}
                Err(e) => return Err(e.into()),
            }
        }
        Ok(reassembler.finish())
    }
}

/// Binds `0.0.0.0:port` and listens for `duration`.
pub fn run_loopback_peer(port: u16, duration: Duration) -> Result<ReceiveReport, BridgeError> {
    LoopbackPeer::bind(SocketAddr::from(([0, 0, 0, 0], port)))?.run(LoopbackOptions::for_duration(duration))
}
