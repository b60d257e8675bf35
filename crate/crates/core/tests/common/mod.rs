//! Independent reference implementations shared by the integration tests.
//! None of these call into the code under test.

#![allow(dead_code)]

use easyvoice::scankb::{KeyAction, ScanNode};
use proptest::prelude::*;

/// Filter, stable sort by (-frequency, folded word), truncate.
pub fn complete_oracle(entries: &[(String, u64)], prefix: &str, max: usize) -> Vec<String> {
    let folded: Vec<(String, String, u64)> = entries
        .iter()
        .map(|(w, f)| (w.to_lowercase(), w.clone(), *f))
        .collect();
    complete_oracle_folded(&folded, prefix, max)
}

/// As [`complete_oracle`], over `(folded, word, frequency)` triples.
pub fn complete_oracle_folded(entries: &[(String, String, u64)], prefix: &str, max: usize) -> Vec<String> {
    let p = prefix.to_lowercase();
    let mut hits: Vec<&(String, String, u64)> = entries.iter().filter(|(k, _, _)| k.starts_with(&p)).collect();
    hits.sort_by(|a, b| b.2.cmp(&a.2).then_with(|| a.0.cmp(&b.0)));
    hits.into_iter().take(max).map(|(_, w, _)| w.clone()).collect()
}

/// Splits into alternating runs of token and non-token characters and
/// replaces each token found in `table` (keys already lowercase).
pub fn expand_oracle(table: &[(String, String)], text: &str) -> String {
    let delim = |c: char| c.is_whitespace() || c.is_ascii_punctuation();
    let mut out = String::new();
    let mut token = String::new();
    let flush = |token: &mut String, out: &mut String| {
        if !token.is_empty() {
            let lower = token.to_lowercase();
            match table.iter().find(|(a, _)| *a == lower) {
                Some((_, e)) => out.push_str(e),
                None => out.push_str(token),
            }
            token.clear();
        }
    };
    for c in text.chars() {
        if delim(c) {
            flush(&mut token, &mut out);
            out.push(c);
        } else {
            token.push(c);
        }
    }
    flush(&mut token, &mut out);
    out
}

// G.711 μ-law reference coder, written from the segment-end table.
const SEG_END: [i32; 8] = [0x3F, 0x7F, 0xFF, 0x1FF, 0x3FF, 0x7FF, 0xFFF, 0x1FFF];

pub fn ref_encode(sample: i16) -> u8 {
    // 14-bit magnitude, clip 8159, bias 33 (the 16-bit constants divided by 4)
    let mut pcm = (sample as i32) >> 2;
    let mask: u8 = if pcm < 0 {
        pcm = -pcm;
        0x7F
    } else {
        0xFF
    };
    pcm = pcm.min(8159) + 33;
    match SEG_END.iter().position(|&end| pcm <= end) {
        Some(seg) => {
            let uval = ((seg as i32) << 4) | ((pcm >> (seg + 1)) & 0xF);
            (uval as u8) ^ mask
        }
        None => 0x7F ^ mask,
    }
}

pub fn ref_decode(byte: u8) -> i16 {
    let u = !byte;
    let seg = ((u >> 4) & 7) as i32;
    let mant = (u & 0xF) as i32;
    let mag = (((2 * mant + 33) << seg) - 33) * 4;
    if u & 0x80 != 0 {
        -mag as i16
    } else {
        mag as i16
    }
}

/// Width of one quantization interval in the segment `x` encodes into.
pub fn segment_step(x: i16) -> i32 {
    let seg = ((!ref_encode(x)) >> 4) & 7;
    8 << seg
}

/// Counts sign changes, ignoring exact zeros.
pub fn zero_crossings(samples: &[i16]) -> usize {
    let mut last = 0i16;
    let mut n = 0;
    for &s in samples {
        if s == 0 {
            continue;
        }
        if last != 0 && (s > 0) != (last > 0) {
            n += 1;
        }
        last = s;
    }
    n
}

pub fn sine(freq: f64, rate: u32, len: usize, amplitude: f64, phase: f64) -> Vec<i16> {
    (0..len)
        .map(|i| {
            let t = i as f64 / rate as f64;
            (amplitude * (2.0 * std::f64::consts::PI * freq * t + phase).sin()).round() as i16
        })
        .collect()
}

/// Counts leaves by explicit stack walk.
pub fn count_leaves(root: &ScanNode) -> usize {
    let mut stack = vec![root];
    let mut n = 0;
    while let Some(node) = stack.pop() {
        match node {
            ScanNode::Leaf { .. } => n += 1,
            ScanNode::Group { children, .. } => stack.extend(children.iter()),
        }
    }
    n
}

fn leaf(i: usize) -> ScanNode {
    let c = char::from(b'a' + (i % 26) as u8);
    ScanNode::Leaf {
        label: format!("k{i}"),
        action: KeyAction::AppendChar(c),
    }
}

/// Random layout: a root group, up to three levels deep, 1..=6 children each.
pub fn arb_layout() -> impl Strategy<Value = ScanNode> {
    let leaf_s = (0usize..26).prop_map(leaf);
    let tree = leaf_s.prop_recursive(3, 40, 6, |inner| {
        prop::collection::vec(inner, 1..=6).prop_map(|children| ScanNode::Group {
            label: "g".into(),
            children,
        })
    });
    prop::collection::vec(tree, 1..=6).prop_map(|children| ScanNode::Group {
        label: "root".into(),
        children,
    })
}

#[derive(Debug, Clone)]
pub enum ScanEvent {
    Tick(u64),
    Press,
}

pub fn arb_events() -> impl Strategy<Value = Vec<ScanEvent>> {
    prop::collection::vec(
        prop_oneof![
            3 => (1u64..5_000).prop_map(ScanEvent::Tick),
            1 => Just(ScanEvent::Press),
        ],
        0..60,
    )
}

/// Random dictionary over a small alphabet so prefixes collide often, with
/// frequencies drawn from a narrow range so ties are common.
pub fn arb_dictionary(max_len: usize) -> impl Strategy<Value = Vec<(String, u64)>> {
    prop::collection::btree_map("[a-eA-E]{1,7}", 0u64..20, 0..max_len).prop_map(|m| {
        let mut seen = std::collections::HashSet::new();
        m.into_iter()
            .filter(|(w, _)| seen.insert(w.to_lowercase()))
            .collect()
    })
}

use std::path::Path;
use std::sync::Arc;

use easyvoice::service::{AppConfig, CollectingOutlet, Composer, FeatureFlags, ServerMessage};

/// What a scripted session exposed to the outside world.
#[derive(Debug, Default)]
pub struct Observed {
    pub messages: Vec<ServerMessage>,
    pub nonempty_suggestions: bool,
    pub nonempty_archive: bool,
    pub scan_messages: usize,
    pub expanded: Vec<String>,
    pub utterance_samples: Vec<usize>,
    pub archive_file: bool,
    pub abbrev_file: bool,
    pub final_state: Option<easyvoice::service::ComposerSnapshot>,
}

/// Drives one composer through a fixed transcript touching all four features.
pub fn gating_transcript(features: FeatureFlags, dir: &Path) -> Observed {
    let cfg = AppConfig {
        archive_path: Some(dir.join("archive.json")),
        abbrev_path: Some(dir.join("abbrev.tsv")),
        features,
        ..AppConfig::default()
    };
    let outlet = Arc::new(CollectingOutlet::new());
    let mut c = Composer::from_config(&cfg, outlet.clone()).unwrap();
    let period = c.scan_config().scan_period_ms();

    let mut msgs = Vec::new();
    let mut send = |c: &mut Composer, raw: &str| msgs.extend(c.handle_client_message(raw));
    send(&mut c, r#"{"kind":"type_text","text":"th"}"#);
    let tick = c.tick_scanner(period);
    send(&mut c, r#"{"kind":"press_switch"}"#);
    send(&mut c, r#"{"kind":"define_abbrev","abbrev":"omw","expansion":"on my way"}"#);
    send(&mut c, r#"{"kind":"speak","text":"btw omw"}"#);
    send(&mut c, r#"{"kind":"pick_archive","index":0}"#);
    send(&mut c, r#"{"kind":"type_text","text":"wh"}"#);
    send(&mut c, r#"{"kind":"pick_suggestion","index":0}"#);
    send(&mut c, r#"{"kind":"get_state"}"#);
    msgs.extend(tick);

    let mut o = Observed::default();
    for m in &msgs {
        match m {
            ServerMessage::Suggestions { words } => o.nonempty_suggestions |= !words.is_empty(),
            ServerMessage::Archive { messages } => o.nonempty_archive |= !messages.is_empty(),
            ServerMessage::ScanState(_) => o.scan_messages += 1,
            ServerMessage::Spoken { expanded, .. } => o.expanded.push(expanded.clone()),
            ServerMessage::State(s) => {
                o.nonempty_suggestions |= !s.suggestions.is_empty();
                o.nonempty_archive |= !s.archive.is_empty();
                o.scan_messages += s.scan.is_some() as usize;
                o.final_state = Some(s.clone());
            }
            _ => {}
        }
    }
    o.utterance_samples = outlet.utterances().iter().map(|u| u.len()).collect();
    o.archive_file = dir.join("archive.json").exists();
    o.abbrev_file = dir.join("abbrev.tsv").exists();
    o.messages = msgs;
    o
}

pub fn all_on_except(f: easyvoice::Feature) -> FeatureFlags {
    let mut flags = FeatureFlags::default();
    flags.set(f, false);
    flags
}

/// Checks that the feature's side effects are absent when it is off and
/// present when every feature is on. Returns a description of the first
/// violation.
pub fn check_gating(f: easyvoice::Feature) -> Result<(), String> {
    use easyvoice::Feature;
    let on_dir = tempfile::tempdir().unwrap();
    let off_dir = tempfile::tempdir().unwrap();
    let on = gating_transcript(FeatureFlags::default(), on_dir.path());
    let off = gating_transcript(all_on_except(f), off_dir.path());
    let expect = |cond: bool, what: &str| if cond { Ok(()) } else { Err(format!("{f}: {what}")) };
    // one utterance of "btw omw" either way; only its content may differ
    expect(on.utterance_samples.len() == 1 && off.utterance_samples.len() == 1, "exactly one utterance")?;
    match f {
        Feature::Completion => {
            expect(on.nonempty_suggestions, "suggestions shown when on")?;
            expect(!off.nonempty_suggestions, "no suggestions when off")?;
        }
        Feature::Archive => {
            expect(on.nonempty_archive && on.archive_file, "archive used when on")?;
            expect(!off.nonempty_archive, "archive never shown when off")?;
            expect(!off.archive_file, "archive never written when off")?;
        }
        Feature::Abbrev => {
            expect(on.expanded == ["by the way on my way"], "expansion when on")?;
            expect(on.abbrev_file, "abbreviation saved when on")?;
            expect(off.expanded == ["btw omw"], "no expansion when off")?;
            expect(off.utterance_samples == [7 * 640], "audio of unexpanded text when off")?;
            expect(!off.abbrev_file, "no abbreviation file when off")?;
        }
        Feature::Scankb => {
            expect(on.scan_messages > 0, "scan messages when on")?;
            expect(off.scan_messages == 0, "no scan messages when off")?;
            expect(off.final_state.as_ref().is_some_and(|s| s.scan.is_none()), "no scan state when off")?;
        }
    }
    Ok(())
}
