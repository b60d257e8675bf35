use std::f64::consts::TAU;

use super::{AudioBuffer, AudioError, SpeechError, Synthesizer};

/// Length of the fade in and fade out applied to every character segment.
const RAMP_MS: u64 = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToneSynthConfig {
    pub per_char_ms: u32,
    pub base_freq_hz: f64,
    pub amplitude: i16,
    pub sample_rate_hz: u32,
}

impl Default for ToneSynthConfig {
    fn default() -> Self {
        Self {
            per_char_ms: 80,
            base_freq_hz: 220.0,
            amplitude: 12000,
            sample_rate_hz: 8000,
        }
    }
}

impl ToneSynthConfig {
    /// Pitch used for `c`: one of 36 steps spanning an octave above the base.
    pub fn frequency_for(&self, c: char) -> f64 {
        let step = (c as u32 % 36) as f64;
        self.base_freq_hz * (step / 36.0).exp2()
    }
}

/// Renders `text` as one sine segment per character (silence for whitespace).
///
/// The buffer holds exactly `chars · per_char_ms · rate / 1000` samples
/// (rounded down). Segment boundaries are placed on the same grid, so a
/// character's segment may be one sample longer than its neighbour's when the
/// product is not integral.
pub fn synthesize_tone(text: &str, cfg: &ToneSynthConfig) -> Result<AudioBuffer, AudioError> {
    let rate = cfg.sample_rate_hz as u64;
    let per_char = cfg.per_char_ms.max(1) as u64;
    let boundary = |i: u64| (i * per_char * rate / 1000) as usize;
    let ramp = (RAMP_MS * rate / 1000).max(1) as f64;
    let amplitude = cfg.amplitude.max(1) as f64;

    let n_chars = text.chars().count() as u64;
    let mut samples = Vec::with_capacity(boundary(n_chars));
    for (i, c) in text.chars().enumerate() {
        let len = boundary(i as u64 + 1) - boundary(i as u64);
        if c.is_whitespace() {
            samples.extend(std::iter::repeat_n(0i16, len));
            continue;
        }
        let step = TAU * cfg.frequency_for(c) / rate as f64;
        samples.extend((0..len).map(|t| {
            let fade_in = t as f64 / ramp;
            let fade_out = (len - 1 - t) as f64 / ramp;
            let gain = fade_in.min(fade_out).min(1.0);
            (amplitude * gain * (step * t as f64).sin()).round() as i16
        }));
    }
    AudioBuffer::new(cfg.sample_rate_hz, samples)
}

/// Deterministic test engine built on [`synthesize_tone`].
#[derive(Debug, Clone, Default)]
pub struct ToneSynth {
    pub config: ToneSynthConfig,
}

impl ToneSynth {
    pub fn new(config: ToneSynthConfig) -> Self {
        Self { config }
    }
}

impl Synthesizer for ToneSynth {
    fn synthesize(&self, text: &str) -> Result<AudioBuffer, SpeechError> {
        Ok(synthesize_tone(text, &self.config)?)
    }
}
