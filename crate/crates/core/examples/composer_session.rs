//! A scripted UI session against the composer, printing every reply as the
//! JSON a WebSocket client would receive.

use std::sync::Arc;

use easyvoice::service::{CollectingOutlet, Composer};
use easyvoice::speech::{ToneSynth, ToneSynthConfig};
use easyvoice::textaccel::{load_dictionary, SAMPLE_DICTIONARY};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let outlet = Arc::new(CollectingOutlet::new());
    let synth = Arc::new(ToneSynth::new(ToneSynthConfig::default()));
    let mut composer =
        Composer::new(synth, outlet.clone()).with_dictionary(load_dictionary(SAMPLE_DICTIONARY.as_bytes())?);

    let script = [
        r#"{"kind":"type_text","text":"see you th"}"#,
        r#"{"kind":"pick_suggestion","index":0}"#,
        r#"{"kind":"define_abbrev","abbrev":"omw","expansion":"on my way"}"#,
        r#"{"kind":"speak","text":"omw btw"}"#,
        r#"{"kind":"set_feature","completion":false}"#,
        r#"{"kind":"type_text","text":"wh"}"#,
        r#"{"kind":"no_such_message"}"#,
    ];
    for raw in script {
        println!("> {raw}");
        for reply in composer.handle_client_message(raw) {
            println!("< {}", serde_json::to_string(&reply)?);
        }
    }

    for (i, u) in outlet.utterances().iter().enumerate() {
        println!("utterance {i}: {} ms at {} Hz", u.duration_ms(), u.sample_rate_hz());
    }
    Ok(())
}
