//! Runs an external command as the synthesizer.
//!
//! The command gets the text as `{text}` and must write a WAV file to
//! `{out}`. Without arguments this uses a shell one-liner that copies a WAV
//! prepared by the example itself, so no speech engine is needed:
//!
//! ```bash
//! cargo run -p easyvoice --example external_synth
//! cargo run -p easyvoice --example external_synth -- "espeak-ng -w {out} {text}"
//! ```

use std::time::Duration;

use easyvoice::speech::{synthesize_tone, write_wav, ExternalSynthSpec, SpeechError, ToneSynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let template = match std::env::args().nth(1) {
        Some(t) => t,
        None => {
            let canned = dir.path().join("canned.wav");
            std::fs::write(&canned, write_wav(&synthesize_tone("canned", &ToneSynthConfig::default())?))?;
            format!("sh -c 'cp {} \"$1\"; echo said: \"$0\" >&2' {{text}} {{out}}", canned.display())
        }
    };

    let spec = ExternalSynthSpec::new(template)?.with_timeout(Duration::from_secs(5));
    println!("argv: {:?}", spec.render("good morning", "<out>"));

    match easyvoice::speech::synthesize_external(&spec, "good morning") {
        Ok(audio) => println!("{} samples at {} Hz", audio.len(), audio.sample_rate_hz()),
        Err(SpeechError::Timeout(t)) => println!("gave up after {t:?}"),
        Err(e) => println!("synthesis failed: {e}"),
    }
    Ok(())
}
