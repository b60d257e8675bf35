//! Renders text with the tone synthesizer and writes a WAV file.
//!
//! ```bash
//! cargo run -p easyvoice --example tone_to_wav -- "hello there" hello.wav
//! ```

use easyvoice::speech::{parse_wav, resample_linear, synthesize_tone, write_wav, ToneSynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let text = args.next().unwrap_or_else(|| "hello".into());
    let out = args.next().unwrap_or_else(|| "tone.wav".into());

    let cfg = ToneSynthConfig {
        sample_rate_hz: 16000,
        ..Default::default()
    };
    let audio = synthesize_tone(&text, &cfg)?;
    for c in text.chars().filter(|c| !c.is_whitespace()).take(5) {
        println!("{c:?} at {:.1} Hz", cfg.frequency_for(c));
    }

    let phone = resample_linear(&audio, 8000)?;
    let bytes = write_wav(&phone);
    std::fs::write(&out, &bytes)?;

    let check = parse_wav(&bytes)?;
    println!(
        "{} samples at {} Hz ({} ms) written to {out}",
        check.len(),
        check.sample_rate_hz(),
        check.duration_ms()
    );
    Ok(())
}
