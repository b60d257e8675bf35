use std::time::Duration;

pub const MIN_SAMPLE_RATE: u32 = 8000;
pub const MAX_SAMPLE_RATE: u32 = 48000;
pub const TELEPHONY_RATE: u32 = 8000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AudioError {
    #[error("sample rate {0} Hz outside {MIN_SAMPLE_RATE}..={MAX_SAMPLE_RATE}")]
    UnsupportedRate(u32),
}

/// Mono signed 16-bit PCM.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AudioBuffer {
    sample_rate_hz: u32,
    samples: Vec<i16>,
}

impl AudioBuffer {
    pub fn new(sample_rate_hz: u32, samples: Vec<i16>) -> Result<Self, AudioError> {
        if !(MIN_SAMPLE_RATE..=MAX_SAMPLE_RATE).contains(&sample_rate_hz) {
            return Err(AudioError::UnsupportedRate(sample_rate_hz));
        }
        Ok(Self {
            sample_rate_hz,
            samples,
        })
    }

    pub fn silent(sample_rate_hz: u32, len: usize) -> Result<Self, AudioError> {
        Self::new(sample_rate_hz, vec![0; len])
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn samples(&self) -> &[i16] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<i16> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> Duration {
        Duration::from_secs_f64(self.samples.len() as f64 / self.sample_rate_hz as f64)
    }

    /// Duration in whole milliseconds, rounded to nearest.
    pub fn duration_ms(&self) -> u64 {
        (self.samples.len() as u64 * 1000 + self.sample_rate_hz as u64 / 2) / self.sample_rate_hz as u64
    }
}
