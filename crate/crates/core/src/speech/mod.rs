//! Text to PCM audio.
//!
//! [`ToneSynth`] is a deterministic stand-in engine; [`ExternalSynth`] runs any
//! command-line TTS program that can write a WAV file. Both implement
//! [`Synthesizer`]. Engine output at any rate is brought to the 8 kHz telephony
//! rate with [`resample_linear`].

mod audio;
mod external;
mod resample;
mod tone;
mod wav;

pub use audio::{AudioBuffer, AudioError, MAX_SAMPLE_RATE, MIN_SAMPLE_RATE, TELEPHONY_RATE};
pub use external::{synthesize_external, ExternalSynth, ExternalSynthSpec};
pub use resample::resample_linear;
pub use tone::{synthesize_tone, ToneSynth, ToneSynthConfig};
pub use wav::{parse_wav, write_wav, WavError};

use std::io;
use std::time::Duration;

#[derive(Debug, thiserror::Error)]
pub enum SpeechError {
    #[error("synthesizer template must contain both {{text}} and {{out}}: {0:?}")]
    BadTemplate(String),
    #[error("failed to start synthesizer `{program}`: {source}")]
    Spawn { program: String, source: io::Error },
    #[error("synthesizer exited with {status}: {stderr}")]
    NonZeroExit { status: String, stderr: String },
    #[error("synthesizer did not finish within {0:?}")]
    Timeout(Duration),
    #[error("synthesizer output: {0}")]
    Wav(#[from] WavError),
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Anything that turns text into mono PCM.
pub trait Synthesizer: Send + Sync {
    fn synthesize(&self, text: &str) -> Result<AudioBuffer, SpeechError>;
}
