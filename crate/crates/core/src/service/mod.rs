//! Control plane: the composer session, its JSON protocol, the HTTP and
//! WebSocket server, and the command line.

mod cli;
mod composer;
mod config;
mod protocol;
mod server;

use std::io;
use std::net::SocketAddr;
use std::path::PathBuf;

use serde::Serialize;

pub use cli::run_cli;
pub use composer::{CollectingOutlet, Composer, DirectOutlet, NoCall, Reply, SpeakJob, VoiceOutlet};
pub use config::{AppConfig, ConfigError, FeatureFlags, SynthChoice, CONFIG_ENV};
pub use protocol::{ClientMessage, ComposerSnapshot, ScanView, ServerMessage};
pub use server::{router, Server, SessionHandle};

use crate::speech::{resample_linear, ExternalSynth, SpeechError, Synthesizer, ToneSynth, TELEPHONY_RATE};
use crate::textaccel::{load_abbreviations, DEFAULT_ABBREVIATIONS};
use crate::voipbridge::{BridgeError, CallSession, Streamer, UdpSink, WallClock};

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    BadConfig(#[from] ConfigError),
    #[error("cannot load {path}: {reason}", path = .0.display(), reason = .1)]
    Load(PathBuf, String),
    #[error("cannot bind {0}: {1}")]
    Bind(SocketAddr, io::Error),
    #[error("no call peer configured (use --peer host:port)")]
    NoPeer,
    #[error("nothing to speak")]
    EmptyText,
    #[error(transparent)]
    Speech(#[from] SpeechError),
    #[error(transparent)]
    Bridge(#[from] BridgeError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Result of a one-shot speak.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpeakOnceReport {
    pub peer: SocketAddr,
    pub text: String,
    pub expanded: String,
    pub samples: usize,
    pub duration_ms: u64,
    pub packets: usize,
    pub ssrc: u32,
    pub first_sequence: u16,
}

/// The configured synthesizer.
pub fn build_synth(cfg: &AppConfig) -> Box<dyn Synthesizer> {
    match cfg.external_synth() {
        Some(spec) => Box::new(ExternalSynth::new(spec)),
        None => Box::new(ToneSynth::default()),
    }
}

/// Expands, synthesizes and streams `text` to the configured peer, then
/// returns. Only the utterance itself is sent: no keepalive frames.
pub fn speak_once(cfg: &AppConfig, text: &str) -> Result<SpeakOnceReport, ServiceError> {
    if text.trim().is_empty() {
        return Err(ServiceError::EmptyText);
    }
    let peer = cfg.peer_addr()?.ok_or(ServiceError::NoPeer)?;
    let expanded = if cfg.features.abbrev_on {
        let bundled = || load_abbreviations(DEFAULT_ABBREVIATIONS.as_bytes()).expect("bundled abbreviations are valid");
        let table = match &cfg.abbrev_path {
            Some(p) => match std::fs::File::open(p) {
                Ok(file) => load_abbreviations(io::BufReader::new(file))
                    .map_err(|e| ServiceError::Load(p.clone(), e.to_string()))?,
                Err(e) if e.kind() == io::ErrorKind::NotFound => bundled(),
                Err(e) => return Err(ServiceError::Load(p.clone(), e.to_string())),
            },
            None => bundled(),
        };
        table.expand(text)
    } else {
        text.to_string()
    };

    let audio = build_synth(cfg).synthesize(&expanded)?;
    let audio = resample_linear(&audio, TELEPHONY_RATE).map_err(SpeechError::from)?;
    let session = CallSession::new(peer);
    let (ssrc, first_sequence) = (session.ssrc, session.next_sequence);
    let mut streamer = Streamer::new(session, WallClock::new(), UdpSink::connect(peer)?);
    let packets = streamer.speak(&audio)?;
    streamer.hang_up();

    Ok(SpeakOnceReport {
        peer,
        text: text.to_string(),
        expanded,
        samples: audio.len(),
        duration_ms: audio.duration_ms(),
        packets,
        ssrc,
        first_sequence,
    })
}
