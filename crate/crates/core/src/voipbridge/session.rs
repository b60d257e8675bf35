use std::net::SocketAddr;

use super::mulaw::{mulaw_encode, MULAW_SILENCE};
use super::rtp::RtpPacket;
use super::BridgeError;
use crate::speech::{AudioBuffer, TELEPHONY_RATE};

/// Samples per RTP packet: 20 ms at 8 kHz.
pub const FRAME_SAMPLES: usize = 160;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionState {
    Idle,
    Streaming,
}

/// One outbound RTP stream: its identity and the next sequence number and
/// timestamp to use. Both counters wrap and only ever move forward.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallSession {
    pub peer: SocketAddr,
    pub ssrc: u32,
    pub next_sequence: u16,
    pub next_timestamp: u32,
    pub state: SessionState,
}

impl CallSession {
    /// New session with random SSRC, initial sequence number and timestamp.
    pub fn new(peer: SocketAddr) -> Self {
        Self::with_ids(peer, rand::random(), rand::random(), rand::random())
    }

    pub fn with_ids(peer: SocketAddr, ssrc: u32, sequence: u16, timestamp: u32) -> Self {
        Self {
            peer,
            ssrc,
            next_sequence: sequence,
            next_timestamp: timestamp,
            state: SessionState::Idle,
        }
    }

    fn next_packet(&mut self, marker: bool, payload: Vec<u8>) -> RtpPacket {
        let p = RtpPacket::pcmu(marker, self.next_sequence, self.next_timestamp, self.ssrc, payload);
        self.next_sequence = self.next_sequence.wrapping_add(1);
        self.next_timestamp = self.next_timestamp.wrapping_add(FRAME_SAMPLES as u32);
        p
    }

    /// Splits an 8 kHz buffer into 160-sample mu-law packets.
    ///
    /// The buffer is one talkspurt: only its first packet carries the marker
    /// bit. A short final frame is padded with mu-law silence.
    pub fn packetize(&mut self, buf: &AudioBuffer) -> Result<Vec<RtpPacket>, BridgeError> {
        if buf.sample_rate_hz() != TELEPHONY_RATE {
            return Err(BridgeError::WrongRate(buf.sample_rate_hz()));
        }
        Ok(buf
            .samples()
            .chunks(FRAME_SAMPLES)
            .enumerate()
            .map(|(i, frame)| {
                let mut payload: Vec<u8> = frame.iter().map(|&s| mulaw_encode(s)).collect();
                payload.resize(FRAME_SAMPLES, MULAW_SILENCE);
                self.next_packet(i == 0, payload)
            })
            .collect())
    }

    /// A keepalive frame of silence, sent between utterances.
    pub fn silence_packet(&mut self) -> RtpPacket {
        self.next_packet(false, vec![MULAW_SILENCE; FRAME_SAMPLES])
    }
}
