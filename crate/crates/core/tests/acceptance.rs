//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line with
//! its measured runtime and bound; the test fails if any criterion fails.

mod common;

use std::collections::HashSet;
use std::net::SocketAddr;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::{arb_events, arb_layout, check_gating, complete_oracle_folded, ref_decode, ref_encode, segment_step, ScanEvent};
use easyvoice::scankb::{load_layout, press, tick, KeyAction, ScanConfig, ScanState};
use easyvoice::service::{CollectingOutlet, Composer, ServerMessage};
use easyvoice::speech::{synthesize_tone, ToneSynth, ToneSynthConfig};
use easyvoice::textaccel::{AbbreviationTable, DictionaryEntry, FrequencyDictionary};
use easyvoice::voipbridge::{mulaw_decode, mulaw_encode, LoopbackOptions, LoopbackPeer};
use easyvoice::Feature;
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const COMPLETION_BOUND: Duration = Duration::from_secs(10);
const ABBREV_BOUND: Duration = Duration::from_secs(5);
const SCANNING_BOUND: Duration = Duration::from_secs(10);
const MULAW_BOUND: Duration = Duration::from_secs(5);
const E2E_BOUND: Duration = Duration::from_secs(5);
const STRUCTURAL_BOUND: Duration = Duration::from_secs(5);
const GATING_BOUND: Duration = Duration::from_secs(10);

const MAX_SUGGESTIONS: usize = 8;

/// A word of 1 to 8 letters from `a..=f`, about one in ten upper-cased, and a
/// frequency below 32, all decoded from a single random draw. Also returns a
/// key identifying the case-folded spelling.
fn random_entry(bits: u64) -> (String, u64, u64) {
    let len = 1 + (bits & 7) as usize;
    let mut rest = bits >> 3;
    let mut word = String::with_capacity(len);
    let mut key = len as u64;
    for _ in 0..len {
        let letter = (rest % 6) as u8;
        let upper = (rest >> 3) % 10 == 0;
        rest >>= 7;
        key = key * 8 + letter as u64;
        let c = char::from(b'a' + letter);
        word.push(if upper { c.to_ascii_uppercase() } else { c });
    }
    (word, bits >> 59, key)
}

fn completion_contract() -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(0x5EED_0001);
    let mut prefixes_checked = 0;
    for d in 0..200 {
        let size = if d < 10 { 10_000 } else { rng.random_range(0..=10_000) };
        let mut seen = HashSet::with_capacity(size);
        let mut entries = Vec::with_capacity(size);
        while entries.len() < size {
            let (word, frequency, key) = random_entry(rng.random());
            if seen.insert(key) {
                entries.push((word, frequency));
            }
        }
        let dict = FrequencyDictionary::new(entries.iter().map(|(w, f)| DictionaryEntry::new(w.clone(), *f).unwrap()))
            .map_err(|e| e.to_string())?;
        let folded: Vec<(String, String, u64)> =
            entries.iter().map(|(w, f)| (w.to_lowercase(), w.clone(), *f)).collect();
        for _ in 0..10 {
            let plen = rng.random_range(0..=6);
            let prefix: String = (0..plen).map(|_| char::from(b'a' + rng.random_range(0..6u8))).collect();
            let got: Vec<String> = dict.complete(&prefix).into_iter().map(str::to_string).collect();
            if got.len() > MAX_SUGGESTIONS {
                return Err(format!("{} suggestions for {prefix:?}", got.len()));
            }
            let want = complete_oracle_folded(&folded, &prefix, MAX_SUGGESTIONS);
            if got != want {
                return Err(format!("dictionary {d}, prefix {prefix:?}: got {got:?}, oracle {want:?}"));
            }
            prefixes_checked += 1;
        }
    }
    Ok(format!("200 dictionaries, {prefixes_checked} prefixes identical to oracle, all <= 8"))
}

fn abbreviation_expansion() -> Result<String, String> {
    let mut table = AbbreviationTable::new();
    table.define("btw", "by the way").map_err(|e| e.to_string())?;
    let outlet = Arc::new(CollectingOutlet::new());
    let mut c = Composer::new(Arc::new(ToneSynth::default()), outlet.clone()).with_abbreviations(table.clone(), None);
    let msgs = c.handle_client_message(r#"{"kind":"speak","text":"btw"}"#);
    let expanded = msgs.iter().find_map(|m| match m {
        ServerMessage::Spoken { expanded, .. } => Some(expanded.clone()),
        _ => None,
    });
    if expanded.as_deref() != Some("by the way") {
        return Err(format!("ack.expanded = {expanded:?}"));
    }
    let spoken = synthesize_tone("by the way", &ToneSynthConfig::default()).map_err(|e| e.to_string())?;
    if outlet.utterances() != [spoken] {
        return Err("spoken audio is not the audio of \"by the way\"".into());
    }

    let mut rng = StdRng::seed_from_u64(0x5EED_0002);
    let alphabet: Vec<char> = "abcdefghijklmnopqrstuvwxyzABC ,.!?;:'-\t\n".chars().collect();
    let mut checked = 0;
    while checked < 1000 {
        let len = rng.random_range(0..80);
        let text: String = (0..len).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect();
        let has_btw = text
            .split(|c: char| c.is_whitespace() || c.is_ascii_punctuation())
            .any(|t| t.eq_ignore_ascii_case("btw"));
        if has_btw {
            continue;
        }
        if table.expand(&text) != text {
            return Err(format!("identity violated for {text:?}"));
        }
        checked += 1;
    }
    Ok("\"btw\" spoken as \"by the way\"; 1000 texts without abbreviations unchanged".into())
}

fn scanning_determinism() -> Result<String, String> {
    let mut runner = TestRunner::deterministic();
    let strategy = (arb_layout(), arb_events(), 50u64..1500, 1u32..4, 1u64..20_000, 1u64..20_000);
    let mut steps = 0;
    for case in 0..100 {
        let (layout, events, period, cycles, a, b) = strategy
            .new_tree(&mut runner)
            .map_err(|e| e.to_string())?
            .current();
        let cfg = ScanConfig::new(period, cycles).map_err(|e| e.to_string())?;
        let mut s = ScanState::new();
        for e in &events {
            s = match e {
                ScanEvent::Tick(dt) => tick(&layout, &s, &cfg, *dt),
                ScanEvent::Press => press(&layout, &s).0,
            };
            if !s.is_valid_for(&layout) || s.elapsed_ms >= period || s.cycles > cycles {
                return Err(format!("layout {case}: invalid state {s:?}"));
            }
            let split = tick(&layout, &tick(&layout, &s, &cfg, a), &cfg, b);
            if split != tick(&layout, &s, &cfg, a + b) {
                return Err(format!("layout {case}: tick({a}) then tick({b}) differs from tick({})", a + b));
            }
            steps += 1;
        }
    }

    let abc = load_layout(
        r#"{"label":"root","children":[
            {"label":"A","action":{"append":"a"}},
            {"label":"B","action":{"append":"b"}},
            {"label":"C","action":{"append":"c"}}]}"#,
    )
    .map_err(|e| e.to_string())?;
    let cfg = ScanConfig::new(1000, 2).map_err(|e| e.to_string())?;
    let mut s = ScanState::new();
    for dt in [1000, 1000, 100] {
        s = tick(&abc, &s, &cfg, dt);
    }
    match press(&abc, &s).1 {
        Some(KeyAction::AppendChar('c')) => {}
        other => return Err(format!("press at t=2100 gave {other:?}")),
    }
    Ok(format!("100 layouts, {steps} traced steps valid and additive; 'C' selected at t=2100 ms"))
}

fn mulaw_exhaustive() -> Result<String, String> {
    for x in i16::MIN..=i16::MAX {
        let err = (mulaw_decode(mulaw_encode(x)) as i32 - x as i32).abs();
        if err > segment_step(x) {
            return Err(format!("sample {x}: error {err} exceeds step {}", segment_step(x)));
        }
        let ref_err = (ref_decode(ref_encode(x)) as i32 - x as i32).abs();
        if ref_err > segment_step(x) {
            return Err(format!("reference coder out of bound at {x}"));
        }
    }
    if mulaw_decode(mulaw_encode(0)) != 0 || mulaw_encode(0) != 0xFF {
        return Err("zero is not a fixed point".into());
    }
    Ok("65536 samples within their segment's quantization step; decode(encode(0)) = 0".into())
}

fn end_to_end_injection() -> Result<String, String> {
    let peer = LoopbackPeer::bind("127.0.0.1:0".parse().unwrap()).map_err(|e| e.to_string())?;
    let addr: SocketAddr = peer.local_addr().map_err(|e| e.to_string())?;
    let receiver = std::thread::spawn(move || {
        peer.run(LoopbackOptions {
            duration: Duration::from_secs(4),
            idle_timeout: Some(Duration::from_millis(250)),
        })
    });
    let out = Command::new(env!("CARGO_BIN_EXE_easyvoice"))
        .args(["speak-once", "--peer", &addr.to_string(), "--text", "hi", "--synth", "tone"])
        .env_remove("EASYVOICE_CONFIG")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("speak-once failed: {}", String::from_utf8_lossy(&out.stderr)));
    }
    let report = receiver.join().unwrap().map_err(|e| e.to_string())?;

    let placed = &report.stats.packets;
    if placed.len() != 8 || report.packets_received() != 8 || report.packets_lost() != 0 {
        return Err(format!("{} packets received, {} lost", report.packets_received(), report.packets_lost()));
    }
    for w in placed.windows(2) {
        if w[1].sequence != w[0].sequence.wrapping_add(1) || w[1].timestamp != w[0].timestamp.wrapping_add(160) {
            return Err(format!("discontinuity between {:?} and {:?}", w[0], w[1]));
        }
    }
    let source = synthesize_tone("hi", &ToneSynthConfig::default()).map_err(|e| e.to_string())?;
    let expected: Vec<i16> = source.samples().iter().map(|&s| mulaw_decode(mulaw_encode(s))).collect();
    if source.len() != 1280 || report.audio.samples() != expected.as_slice() {
        return Err("received audio differs from the mu-law round trip of the source".into());
    }
    Ok("8 packets, consecutive sequence numbers, timestamps +160, 1280 samples bit-identical".into())
}

/// Crates that open sound devices.
const AUDIO_DEVICE_CRATES: &[&str] = &[
    "cpal", "rodio", "alsa", "alsa-sys", "portaudio", "portaudio-rs", "libpulse-binding", "libpulse-simple-binding",
    "pulse", "coreaudio-rs", "coreaudio-sys", "oboe", "jack", "sdl2", "kira", "soundio", "openal", "wasapi", "asio-sys",
];

/// Identifiers that would indicate a playback or capture path.
const DEVICE_WORDS: &[&str] = &[
    "speaker", "microphone", "mic_", "playback", "capture", "sound_card", "soundcard", "audio_device", "AudioDevice",
    "OutputStream", "InputStream", "cpal", "rodio", "alsa", "portaudio", "pulseaudio",
];

fn code_lines(src: &str) -> impl Iterator<Item = (usize, &str)> {
    src.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_start()))
        .filter(|(_, l)| !l.starts_with("//"))
}

fn echo_avoidance() -> Result<String, String> {
    let manifest_dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let module = manifest_dir.join("src/voipbridge");
    let mut files = 0;
    for entry in std::fs::read_dir(&module).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let src = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
        for (n, line) in code_lines(&src) {
            let lower = line.to_lowercase();
            if let Some(w) = DEVICE_WORDS.iter().find(|w| lower.contains(&w.to_lowercase())) {
                return Err(format!("{}:{n} mentions `{w}`", path.display()));
            }
        }
        files += 1;
    }

    let lock = manifest_dir.join("../../Cargo.lock");
    let lock = std::fs::read_to_string(&lock).map_err(|e| format!("{}: {e}", lock.display()))?;
    let packages: HashSet<&str> = lock
        .lines()
        .filter_map(|l| l.strip_prefix("name = \""))
        .filter_map(|l| l.strip_suffix('"'))
        .collect();
    if let Some(c) = AUDIO_DEVICE_CRATES.iter().find(|c| packages.contains(*c)) {
        return Err(format!("dependency graph contains audio-device crate `{c}`"));
    }
    Ok(format!(
        "{files} voipbridge sources and {} locked packages free of speaker/microphone interfaces",
        packages.len()
    ))
}

fn feature_gating() -> Result<String, String> {
    for f in Feature::ALL {
        check_gating(f)?;
    }
    Ok("archive, completion, abbrev and scankb each leave no trace when off".into())
}

#[test]
fn acceptance() {
    let criteria: [(&str, Duration, fn() -> Result<String, String>); 7] = [
        ("completion contract", COMPLETION_BOUND, completion_contract),
        ("abbreviation expansion", ABBREV_BOUND, abbreviation_expansion),
        ("scanning determinism", SCANNING_BOUND, scanning_determinism),
        ("mu-law exhaustive roundtrip", MULAW_BOUND, mulaw_exhaustive),
        ("end-to-end injection fidelity", E2E_BOUND, end_to_end_injection),
        ("echo avoidance (structural)", STRUCTURAL_BOUND, echo_avoidance),
        ("feature gating", GATING_BOUND, feature_gating),
    ];
    let mut failures = Vec::new();
    for (name, bound, check) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let result = match result {
            Ok(detail) if elapsed > bound => Err(format!("{detail}, but took {elapsed:.2?}")),
            other => other,
        };
        match &result {
            Ok(detail) => println!("PASS  {name}: {detail} ({elapsed:.2?}, bound {bound:?})"),
            Err(why) => {
                println!("FAIL  {name}: {why} ({elapsed:.2?}, bound {bound:?})");
                failures.push(name);
            }
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
