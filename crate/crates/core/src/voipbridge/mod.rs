//! Network injection of synthesized speech.
//!
//! Audio from the synthesizer is mu-law encoded, framed as RTP/PCMU and sent
//! over UDP on a 20 ms grid. This module deals only in [`AudioBuffer`]s and
//! sockets; it has no notion of a sound card, so nothing played locally can
//! leak back into the outbound stream.
//!
//! [`AudioBuffer`]: crate::speech::AudioBuffer

mod loopback;
mod mulaw;
mod rtp;
mod session;
mod stream;

use std::io;
use std::net::SocketAddr;

pub use loopback::{
    run_loopback_peer, LoopbackOptions, LoopbackPeer, PlacedPacket, ReceiveReport, ReceiveStats,
    Reassembler, REORDER_WINDOW,
};
pub use mulaw::{mulaw_decode, mulaw_encode, MULAW_SILENCE};
pub use rtp::{parse_rtp, serialize_rtp, RtpPacket, PAYLOAD_TYPE_PCMU, RTP_HEADER_LEN, RTP_VERSION};
pub use session::{CallSession, SessionState, FRAME_SAMPLES};
pub use stream::{
    Clock, MemorySink, PacerCommand, PacerEvent, Pacer, PacingLoop, PacketSink, SimulatedClock,
    Streamer, UdpSink, WallClock, PACKET_INTERVAL,
};

#[derive(Debug, thiserror::Error)]
pub enum BridgeError {
    #[error("RTP packet too short: {0} bytes")]
    ShortPacket(usize),
    #[error("unsupported RTP version {0}")]
    BadVersion(u8),
    #[error("malformed RTP packet: {0}")]
    MalformedPacket(&'static str),
    #[error("packetizer needs 8000 Hz audio, got {0} Hz")]
    WrongRate(u32),
    #[error("session is not streaming")]
    NotStreaming,
    #[error("send failed: {0}")]
    Send(io::Error),
    #[error("stream stopped: {0}")]
    Stopped(String),
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: SocketAddr, source: io::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
}
