//! Typed speech for voice calls.
//!
//! A user who cannot speak types (or scans with a single switch), the text is
//! expanded and synthesized, and the resulting audio is sent straight into an
//! outbound RTP/PCMU stream. Nothing in the outbound path touches a speaker or
//! a microphone, so the far end never hears its own voice echoed back.
//!
//! The crate is organised by subsystem:
//!
//! - [`textaccel`]: recent-message archive, prefix word completion, abbreviations
//! - [`scankb`]: the single-switch scanning keyboard state machine
//! - [`speech`]: PCM buffers, WAV I/O, tone and external-process synthesizers, resampling
//! - [`voipbridge`]: G.711 mu-law, RTP framing, paced UDP streaming, loopback receiver
//! - [`service`]: the composer session, JSON control protocol, HTTP/WebSocket server and CLI

pub mod feature;
mod fsutil;
pub mod scankb;
pub mod service;
pub mod speech;
pub mod textaccel;
pub mod voipbridge;

pub use feature::Feature;
