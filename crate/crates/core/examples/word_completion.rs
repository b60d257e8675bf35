//! Prefix completion over the bundled frequency list.
//!
//! ```bash
//! cargo run -p easyvoice --example word_completion -- th wh xyz
//! ```

use easyvoice::textaccel::{load_dictionary, SAMPLE_DICTIONARY};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dict = load_dictionary(SAMPLE_DICTIONARY.as_bytes())?;
    println!("{} words loaded, up to {} suggestions each", dict.len(), dict.max_suggestions());

    let mut prefixes: Vec<String> = std::env::args().skip(1).collect();
    if prefixes.is_empty() {
        prefixes = vec!["th".into(), "Wh".into(), "q".into()];
    }
    for prefix in &prefixes {
        let words = dict.complete(prefix);
        if words.is_empty() {
            println!("{prefix:>6}: (no match)");
        } else {
            println!("{prefix:>6}: {}", words.join(", "));
        }
    }
    Ok(())
}
