use super::{AudioBuffer, AudioError};

/// Linear-interpolation resampler.
///
/// Output length is `round(len · target / source)`. Output sample `i` is taken
/// at source position `i · source / target`, interpolating between the two
/// neighbouring input samples. A buffer already at `target_rate_hz` is returned
/// as is.
pub fn resample_linear(buf: &AudioBuffer, target_rate_hz: u32) -> Result<AudioBuffer, AudioError> {
    let source = buf.sample_rate_hz();
    if source == target_rate_hz {
        return Ok(buf.clone());
    }
    let input = buf.samples();
    let len = input.len() as u64;
    let (src, dst) = (source as u64, target_rate_hz as u64);
    let out_len = ((len * dst + src / 2) / src) as usize;
    if input.is_empty() {
        return AudioBuffer::new(target_rate_hz, Vec::new());
    }

    let last = input.len() - 1;
    let samples = (0..out_len)
        .map(|i| {
            // exact rational position: whole = floor(i*src/dst), frac = rem/dst
            let num = i as u64 * src;
            let whole = ((num / dst) as usize).min(last);
            let frac = (num % dst) as f64 / dst as f64;
            let a = input[whole] as f64;
            let b = input[(whole + 1).min(last)] as f64;
            (a + (b - a) * frac).round() as i16
        })
        .collect();
    AudioBuffer::new(target_rate_hz, samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_rate_is_identity() {
        let b = AudioBuffer::new(16000, vec![1, -2, 3]).unwrap();
        assert_eq!(resample_linear(&b, 16000).unwrap(), b);
    }

    #[test]
    fn halves_length() {
        let b = AudioBuffer::silent(16000, 1600).unwrap();
        let out = resample_linear(&b, 8000).unwrap();
        assert_eq!((out.sample_rate_hz(), out.len()), (8000, 800));
    }

    #[test]
    fn upsample_interpolates_midpoints() {
        let b = AudioBuffer::new(8000, vec![0, 100, -100]).unwrap();
        let out = resample_linear(&b, 16000).unwrap();
        assert_eq!(out.samples(), [0, 50, 100, 0, -100, -100]);
    }

    #[test]
    fn empty_stays_empty() {
        let b = AudioBuffer::new(22050, vec![]).unwrap();
        assert!(resample_linear(&b, 8000).unwrap().is_empty());
    }

    #[test]
    fn rejects_bad_target() {
        let b = AudioBuffer::new(8000, vec![1]).unwrap();
        assert!(resample_linear(&b, 96000).is_err());
    }
}
