//! RIFF/WAVE PCM16 reader and writer.

use super::{AudioBuffer, AudioError};

const FORMAT_PCM: u16 = 1;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WavError {
    #[error("not a RIFF/WAVE file")]
    BadMagic,
    #[error("unsupported format code {0} (only PCM is accepted)")]
    NotPcm(u16),
    #[error("unsupported bit depth {0} (only 16-bit is accepted)")]
    BitDepth(u16),
    #[error("unsupported channel count {0}")]
    Channels(u16),
    #[error("missing `{0}` chunk")]
    MissingChunk(&'static str),
    #[error("`{0}` chunk is truncated")]
    Truncated(&'static str),
    #[error(transparent)]
    Audio(#[from] AudioError),
}

struct Format {
    code: u16,
    channels: u16,
    sample_rate: u32,
    bits: u16,
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

/// Decodes a PCM16 WAV file (mono or stereo) into a mono buffer.
///
/// Stereo frames are averaged. Chunks other than `fmt ` and `data` are
/// skipped.
pub fn parse_wav(bytes: &[u8]) -> Result<AudioBuffer, WavError> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(WavError::BadMagic);
    }
    let mut format: Option<Format> = None;
    let mut data: Option<&[u8]> = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_at(bytes, pos + 4) as usize;
        let body_start = pos + 8;
        let body_end = body_start.checked_add(size).unwrap_or(usize::MAX);
        match id {
            b"fmt " => {
                if size < 16 || body_end > bytes.len() {
                    return Err(WavError::Truncated("fmt "));
                }
                let b = &bytes[body_start..];
                format = Some(Format {
                    code: u16_at(b, 0),
                    channels: u16_at(b, 2),
                    sample_rate: u32_at(b, 4),
                    bits: u16_at(b, 14),
                });
            }
            b"data" => {
                if body_end > bytes.len() {
                    return Err(WavError::Truncated("data"));
                }
                data = Some(&bytes[body_start..body_end]);
                break;
            }
            _ => {}
        }
        // chunks are word aligned
        pos = body_end.saturating_add(size & 1);
    }

    let format = format.ok_or(WavError::MissingChunk("fmt "))?;
    if format.code != FORMAT_PCM {
        return Err(WavError::NotPcm(format.code));
    }
    if format.bits != 16 {
        return Err(WavError::BitDepth(format.bits));
    }
    if !(1..=2).contains(&format.channels) {
        return Err(WavError::Channels(format.channels));
    }
    let data = data.ok_or(WavError::MissingChunk("data"))?;
    let frame_bytes = 2 * format.channels as usize;
    if data.len() % frame_bytes != 0 {
        return Err(WavError::Truncated("data"));
    }

    let samples = data
        .chunks_exact(frame_bytes)
        .map(|frame| {
            if format.channels == 1 {
                i16::from_le_bytes([frame[0], frame[1]])
            } else {
                let l = i16::from_le_bytes([frame[0], frame[1]]) as i32;
                let r = i16::from_le_bytes([frame[2], frame[3]]) as i32;
                ((l + r) / 2) as i16
            }
        })
        .collect();
    Ok(AudioBuffer::new(format.sample_rate, samples)?)
}

/// Encodes a buffer as a canonical 44-byte-header mono PCM16 WAV.
pub fn write_wav(buf: &AudioBuffer) -> Vec<u8> {
    let data_len = (buf.len() * 2) as u32;
    let rate = buf.sample_rate_hz();
    let mut out = Vec::with_capacity(44 + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&rate.to_le_bytes());
    out.extend_from_slice(&(rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for s in buf.samples() {
        out.extend_from_slice(&s.to_le_bytes());
    }
    out
}
