//! The composer session: text panel, suggestions, archive and scanning
//! keyboard state, driven by client messages and scanner ticks.

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use super::config::{AppConfig, FeatureFlags};
use super::protocol::{ClientMessage, ComposerSnapshot, ScanView, ServerMessage};
use super::ServiceError;
use crate::scankb::{self, load_layout, KeyAction, ScanConfig, ScanNode, ScanState, DEFAULT_LAYOUT};
use crate::speech::{
    resample_linear, AudioBuffer, ExternalSynth, SpeechError, Synthesizer, ToneSynth, TELEPHONY_RATE,
};
use crate::textaccel::{
    load_abbreviations, load_dictionary, AbbreviationTable, FrequencyDictionary, MessageArchive,
    DEFAULT_ABBREVIATIONS, SAMPLE_DICTIONARY,
};
use crate::voipbridge::{BridgeError, Clock, PacketSink, Pacer, Streamer, FRAME_SAMPLES};
use crate::Feature;

/// Destination for finished 8 kHz utterances.
pub trait VoiceOutlet: Send + Sync {
    fn send(&self, audio: AudioBuffer) -> Result<(), BridgeError>;
}

impl VoiceOutlet for Pacer {
    fn send(&self, audio: AudioBuffer) -> Result<(), BridgeError> {
        self.speak(audio)
    }
}

/// Used when no peer is configured: every utterance is refused.
#[derive(Debug, Default)]
pub struct NoCall;

impl VoiceOutlet for NoCall {
    fn send(&self, _: AudioBuffer) -> Result<(), BridgeError> {
        Err(BridgeError::Stopped("no call peer configured".into()))
    }
}

/// Streams each utterance right away on the caller's thread, with no
/// keepalive frames in between.
pub struct DirectOutlet<C, S>(Mutex<Streamer<C, S>>);

impl<C: Clock, S: PacketSink> DirectOutlet<C, S> {
    pub fn new(streamer: Streamer<C, S>) -> Self {
        Self(Mutex::new(streamer))
    }

    pub fn into_inner(self) -> Streamer<C, S> {
        self.0.into_inner().expect("streamer lock")
    }
}

impl<C: Clock + Send, S: PacketSink + Send> VoiceOutlet for DirectOutlet<C, S> {
    fn send(&self, audio: AudioBuffer) -> Result<(), BridgeError> {
        self.0.lock().expect("streamer lock").speak(&audio).map(|_| ())
    }
}

/// Keeps every utterance in memory.
#[derive(Debug, Default)]
pub struct CollectingOutlet {
    utterances: Mutex<Vec<AudioBuffer>>,
}

impl CollectingOutlet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn utterances(&self) -> Vec<AudioBuffer> {
        self.utterances.lock().expect("outlet lock").clone()
    }
}

impl VoiceOutlet for CollectingOutlet {
    fn send(&self, audio: AudioBuffer) -> Result<(), BridgeError> {
        self.utterances.lock().expect("outlet lock").push(audio);
        Ok(())
    }
}

/// Synthesis work detached from the session so it can run elsewhere.
pub struct SpeakJob {
    pub text: String,
    pub expanded: String,
    buffer_at_start: String,
    synth: Arc<dyn Synthesizer>,
}

impl SpeakJob {
    /// Synthesizes the expanded text and converts it to 8 kHz.
    pub fn synthesize(&self) -> Result<AudioBuffer, SpeechError> {
        let audio = self.synth.synthesize(&self.expanded)?;
        Ok(resample_linear(&audio, TELEPHONY_RATE)?)
    }
}

/// Messages for the UI plus, for a speak request, the synthesis still to run.
#[derive(Default)]
pub struct Reply {
    pub messages: Vec<ServerMessage>,
    pub job: Option<SpeakJob>,
}

impl From<Vec<ServerMessage>> for Reply {
    fn from(messages: Vec<ServerMessage>) -> Self {
        Self { messages, job: None }
    }
}

impl From<ServerMessage> for Reply {
    fn from(m: ServerMessage) -> Self {
        vec![m].into()
    }
}

pub struct Composer {
    text: String,
    suggestions: Vec<String>,
    archive: MessageArchive,
    archive_path: Option<PathBuf>,
    scan: ScanState,
    scan_config: ScanConfig,
    layout: Arc<ScanNode>,
    features: FeatureFlags,
    dictionary: Arc<FrequencyDictionary>,
    abbreviations: AbbreviationTable,
    abbrev_path: Option<PathBuf>,
    synth: Arc<dyn Synthesizer>,
    outlet: Arc<dyn VoiceOutlet>,
    speaking: bool,
}

fn is_word_boundary(c: char) -> bool {
    c.is_whitespace() || c.is_ascii_punctuation()
}

impl Composer {
    /// A composer with the bundled dictionary, abbreviations and layout.
    pub fn new(synth: Arc<dyn Synthesizer>, outlet: Arc<dyn VoiceOutlet>) -> Self {
        let dictionary = load_dictionary(SAMPLE_DICTIONARY.as_bytes()).expect("bundled dictionary is valid");
        let abbreviations =
            load_abbreviations(DEFAULT_ABBREVIATIONS.as_bytes()).expect("bundled abbreviations are valid");
        let layout = load_layout(DEFAULT_LAYOUT).expect("bundled layout is valid");
        let mut c = Self {
            text: String::new(),
            suggestions: Vec::new(),
            archive: MessageArchive::new(),
            archive_path: None,
            scan: ScanState::new(),
            scan_config: ScanConfig::default(),
            layout: Arc::new(layout),
            features: FeatureFlags::default(),
            dictionary: Arc::new(dictionary),
            abbreviations,
            abbrev_path: None,
            synth,
            outlet,
            speaking: false,
        };
        c.refresh_suggestions();
        c
    }

    /// Builds a composer from configuration, loading every configured file.
    ///
    /// A file that fails to load is an error when its feature is enabled. When
    /// the feature is disabled the bundled default is used instead.
    pub fn from_config(cfg: &AppConfig, outlet: Arc<dyn VoiceOutlet>) -> Result<Self, ServiceError> {
        let synth: Arc<dyn Synthesizer> = match cfg.external_synth() {
            Some(spec) => Arc::new(ExternalSynth::new(spec)),
            None => Arc::new(ToneSynth::default()),
        };
        let mut c = Self::new(synth, outlet)
            .with_scan_config(cfg.scan_config().map_err(|e| ServiceError::Config(e.to_string()))?)
            .with_features(cfg.features);
        let f = cfg.features;

        if let Some(p) = &cfg.dict_path {
            match File::open(p).map_err(|e| e.to_string()).and_then(|file| {
                load_dictionary(BufReader::new(file)).map_err(|e| e.to_string())
            }) {
                Ok(d) => c = c.with_dictionary(d),
                Err(e) if f.completion_on => return Err(ServiceError::Load(p.clone(), e)),
                Err(e) => tracing::warn!("ignoring dictionary {}: {e}", p.display()),
            }
        }
        if let Some(p) = &cfg.abbrev_path {
            let loaded = match File::open(p) {
                Ok(file) => load_abbreviations(BufReader::new(file)).map_err(|e| e.to_string()),
                // a missing file starts from the bundled table and is created
                // on the first definition
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(c.abbreviations.clone()),
                Err(e) => Err(e.to_string()),
            };
            match loaded {
                Ok(t) => c = c.with_abbreviations(t, Some(p.clone())),
                Err(e) if f.abbrev_on => return Err(ServiceError::Load(p.clone(), e)),
                Err(e) => tracing::warn!("ignoring abbreviations {}: {e}", p.display()),
            }
        }
        if let Some(p) = &cfg.layout_path {
            match std::fs::read_to_string(p)
                .map_err(|e| e.to_string())
                .and_then(|s| load_layout(&s).map_err(|e| e.to_string()))
            {
                Ok(l) => c = c.with_layout(l),
                Err(e) if f.scankb_on => return Err(ServiceError::Load(p.clone(), e)),
                Err(e) => tracing::warn!("ignoring layout {}: {e}", p.display()),
            }
        }
        let archive = match &cfg.archive_path {
            Some(p) => match MessageArchive::load(p, cfg.archive_capacity) {
                Ok(a) => a,
                Err(e) if f.archive_on => return Err(ServiceError::Load(p.clone(), e.to_string())),
                Err(_) => MessageArchive::with_capacity(cfg.archive_capacity)
                    .map_err(|e| ServiceError::Config(e.to_string()))?,
            },
            None => MessageArchive::with_capacity(cfg.archive_capacity)
                .map_err(|e| ServiceError::Config(e.to_string()))?,
        };
        Ok(c.with_archive(archive, cfg.archive_path.clone()))
    }

    pub fn with_dictionary(mut self, dictionary: FrequencyDictionary) -> Self {
        self.dictionary = Arc::new(dictionary);
        self.refresh_suggestions();
        self
    }

    pub fn with_abbreviations(mut self, table: AbbreviationTable, path: Option<PathBuf>) -> Self {
        self.abbreviations = table;
        self.abbrev_path = path;
        self
    }

    pub fn with_layout(mut self, layout: ScanNode) -> Self {
        self.layout = Arc::new(layout);
        self.scan = ScanState::new();
        self
    }

    pub fn with_scan_config(mut self, config: ScanConfig) -> Self {
        self.scan_config = config;
        self
    }

    pub fn with_features(mut self, features: FeatureFlags) -> Self {
        self.features = features;
        self.refresh_suggestions();
        self
    }

    pub fn with_archive(mut self, archive: MessageArchive, path: Option<PathBuf>) -> Self {
        self.archive = archive;
        self.archive_path = path;
        self
    }

    pub fn with_synth(mut self, synth: Arc<dyn Synthesizer>) -> Self {
        self.synth = synth;
        self
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn suggestions(&self) -> &[String] {
        &self.suggestions
    }

    pub fn archive(&self) -> &MessageArchive {
        &self.archive
    }

    pub fn features(&self) -> FeatureFlags {
        self.features
    }

    pub fn scan_state(&self) -> &ScanState {
        &self.scan
    }

    pub fn scan_config(&self) -> &ScanConfig {
        &self.scan_config
    }

    pub fn layout(&self) -> &ScanNode {
        &self.layout
    }

    pub fn abbreviations(&self) -> &AbbreviationTable {
        &self.abbreviations
    }

    pub fn is_speaking(&self) -> bool {
        self.speaking
    }

    pub fn snapshot(&self) -> ComposerSnapshot {
        ComposerSnapshot {
            text: self.text.clone(),
            suggestions: self.suggestions.clone(),
            archive: if self.features.archive_on {
                self.archive.messages().to_vec()
            } else {
                Vec::new()
            },
            scan: self.features.scankb_on.then(|| self.scan_view()),
            features: self.features,
            speaking: self.speaking,
        }
    }

    pub fn layout_message(&self) -> ServerMessage {
        ServerMessage::Layout {
            layout: self.layout.to_json(),
        }
    }

    fn scan_view(&self) -> ScanView {
        let focused = self.scan.focused(&self.layout);
        ScanView {
            path: self.scan.path.clone(),
            cursor: self.scan.cursor,
            focused: focused.map(|n| n.label().to_string()).unwrap_or_default(),
            group: focused.is_some_and(ScanNode::is_group),
        }
    }

    /// Byte offset where the word being typed starts.
    fn word_start(&self) -> usize {
        self.text
            .char_indices()
            .rev()
            .find(|&(_, c)| is_word_boundary(c))
            .map_or(0, |(i, c)| i + c.len_utf8())
    }

    fn refresh_suggestions(&mut self) {
        self.suggestions = if self.features.completion_on {
            let prefix = &self.text[self.word_start()..];
            self.dictionary
                .complete(prefix)
                .into_iter()
                .map(str::to_string)
                .collect()
        } else {
            Vec::new()
        };
    }

    fn text_changed(&mut self) -> Vec<ServerMessage> {
        self.refresh_suggestions();
        vec![
            ServerMessage::Text {
                text: self.text.clone(),
            },
            self.suggestions_message(),
        ]
    }

    fn suggestions_message(&self) -> ServerMessage {
        ServerMessage::Suggestions {
            words: self.suggestions.clone(),
        }
    }

    fn archive_message(&self) -> ServerMessage {
        ServerMessage::Archive {
            messages: if self.features.archive_on {
                self.archive.messages().to_vec()
            } else {
                Vec::new()
            },
        }
    }

    /// Parses one raw client message and applies it, running any speech
    /// synthesis inline. Malformed input yields a single error message and
    /// leaves the state untouched.
    pub fn handle_client_message(&mut self, raw: &str) -> Vec<ServerMessage> {
        let msg = match ClientMessage::parse(raw) {
            Ok(m) => m,
            Err(e) => return vec![ServerMessage::error(format!("bad message: {e}"))],
        };
        let Reply { mut messages, job } = self.handle(msg);
        if let Some(job) = job {
            let result = job.synthesize();
            messages.extend(self.finish_speak(job, result));
        }
        messages
    }

    /// Applies a parsed message. Speech synthesis is returned as a job for the
    /// caller to run and hand back through [`Composer::finish_speak`].
    pub fn handle(&mut self, msg: ClientMessage) -> Reply {
        match msg {
            ClientMessage::TypeText { text } => {
                self.text = text;
                self.text_changed().into()
            }
            ClientMessage::PressSwitch {} => self.press_switch(),
            ClientMessage::PickSuggestion { index } => self.pick_suggestion(index).into(),
            ClientMessage::PickArchive { index } => self.pick_archive(index).into(),
            ClientMessage::Speak { text } => {
                let text = text.unwrap_or_else(|| self.text.clone());
                self.begin_speak(text)
            }
            ClientMessage::SetFeature {
                archive,
                completion,
                abbrev,
                scankb,
            } => {
                let changes = [
                    (Feature::Archive, archive),
                    (Feature::Completion, completion),
                    (Feature::Abbrev, abbrev),
                    (Feature::Scankb, scankb),
                ];
                self.set_features(changes.into_iter().filter_map(|(f, v)| v.map(|v| (f, v))))
                    .into()
            }
            ClientMessage::DefineAbbrev { abbrev, expansion } => self.define_abbrev(abbrev, expansion).into(),
            ClientMessage::GetState {} => ServerMessage::State(self.snapshot()).into(),
        }
    }

    fn press_switch(&mut self) -> Reply {
        if !self.features.scankb_on {
            return ServerMessage::error("scanning keyboard is off").into();
        }
        let (next, action) = scankb::press(&self.layout, &self.scan);
        self.scan = next;
        let mut reply = Reply::from(ServerMessage::ScanState(self.scan_view()));
        if let Some(action) = action {
            let more = self.apply_key(action);
            reply.messages.extend(more.messages);
            reply.job = more.job;
        }
        reply
    }

    fn apply_key(&mut self, action: KeyAction) -> Reply {
        match action {
            KeyAction::AppendChar(c) => {
                self.text.push(c);
                self.text_changed().into()
            }
            KeyAction::Space => {
                self.text.push(' ');
                self.text_changed().into()
            }
            KeyAction::Backspace => {
                self.text.pop();
                self.text_changed().into()
            }
            KeyAction::Speak => self.begin_speak(self.text.clone()),
            KeyAction::ToggleFeature(f) => {
                let on = !self.features.get(f);
                self.set_features([(f, on)]).into()
            }
        }
    }

    fn pick_suggestion(&mut self, index: usize) -> Vec<ServerMessage> {
        if !self.features.completion_on {
            return vec![ServerMessage::error("word completion is off")];
        }
        let Some(word) = self.suggestions.get(index).cloned() else {
            return vec![ServerMessage::error(format!(
                "suggestion {index} out of range ({} shown)",
                self.suggestions.len()
            ))];
        };
        let start = self.word_start();
        self.text.truncate(start);
        self.text.push_str(&word);
        self.text.push(' ');
        self.text_changed()
    }

    fn pick_archive(&mut self, index: usize) -> Vec<ServerMessage> {
        if !self.features.archive_on {
            return vec![ServerMessage::error("message archive is off")];
        }
        match self.archive.pick(index) {
            Ok(message) => {
                self.text = message;
                let mut out = vec![self.archive_message()];
                out.extend(self.save_archive());
                out.extend(self.text_changed());
                out
            }
            Err(e) => vec![ServerMessage::error(e.to_string())],
        }
    }

    fn save_archive(&self) -> Option<ServerMessage> {
        let path = self.archive_path.as_ref()?;
        self.archive
            .save(path)
            .err()
            .map(|e| ServerMessage::error(format!("archive not saved to {}: {e}", path.display())))
    }

    fn set_features(&mut self, changes: impl IntoIterator<Item = (Feature, bool)>) -> Vec<ServerMessage> {
        let before = self.features;
        for (f, on) in changes {
            self.features.set(f, on);
        }
        let mut out = vec![ServerMessage::Features(self.features)];
        if before.completion_on != self.features.completion_on {
            self.refresh_suggestions();
            out.push(self.suggestions_message());
        }
        if before.archive_on != self.features.archive_on {
            out.push(self.archive_message());
        }
        if !before.scankb_on && self.features.scankb_on {
            self.scan = ScanState::new();
            out.push(ServerMessage::ScanState(self.scan_view()));
        }
        out
    }

    fn define_abbrev(&mut self, abbrev: String, expansion: String) -> Vec<ServerMessage> {
        if !self.features.abbrev_on {
            return vec![ServerMessage::error("abbreviations are off")];
        }
        if let Err(e) = self.abbreviations.define(abbrev.clone(), expansion.clone()) {
            return vec![ServerMessage::error(e.to_string())];
        }
        let mut out = vec![ServerMessage::Abbreviation { abbrev, expansion }];
        if let Some(path) = &self.abbrev_path {
            if let Err(e) = crate::fsutil::write_atomic(path, self.abbreviations.to_tsv().as_bytes()) {
                out.push(ServerMessage::error(format!(
                    "abbreviations not saved to {}: {e}",
                    path.display()
                )));
            }
        }
        out
    }

    /// Validates and expands `text`, returning the synthesis job.
    pub fn begin_speak(&mut self, text: String) -> Reply {
        if self.speaking {
            return ServerMessage::error("still speaking the previous message").into();
        }
        if text.trim().is_empty() {
            return ServerMessage::error("nothing to speak").into();
        }
        let expanded = if self.features.abbrev_on {
            self.abbreviations.expand(&text)
        } else {
            text.clone()
        };
        self.speaking = true;
        Reply {
            messages: vec![ServerMessage::Speaking {
                text: text.clone(),
                expanded: expanded.clone(),
            }],
            job: Some(SpeakJob {
                text,
                expanded,
                buffer_at_start: self.text.clone(),
                synth: Arc::clone(&self.synth),
            }),
        }
    }

    /// Completes a speak request with the synthesis result: streams the audio,
    /// archives the message and clears the text panel. On any failure the
    /// typed text is left exactly as it was.
    pub fn finish_speak(&mut self, job: SpeakJob, result: Result<AudioBuffer, SpeechError>) -> Vec<ServerMessage> {
        self.speaking = false;
        let audio = match result {
            Ok(a) => a,
            Err(e) => return vec![ServerMessage::error(format!("speech synthesis failed: {e}"))],
        };
        let samples = audio.len();
        let duration_ms = audio.duration_ms();
        if let Err(e) = self.outlet.send(audio) {
            return vec![ServerMessage::error(format!("call: {e}"))];
        }

        let mut out = vec![ServerMessage::Spoken {
            text: job.text.clone(),
            expanded: job.expanded,
            duration_ms,
            samples,
            packets: samples.div_ceil(FRAME_SAMPLES),
        }];
        if self.features.archive_on && self.archive.add(&job.text).is_ok() {
            out.push(self.archive_message());
            out.extend(self.save_archive());
        }
        if self.text == job.buffer_at_start {
            self.text.clear();
            out.extend(self.text_changed());
        }
        out
    }

    /// Advances the scanning cursor by `dt_ms` of simulated time. Returns the
    /// new cursor position, or nothing when the scanning keyboard is off.
    pub fn tick_scanner(&mut self, dt_ms: u64) -> Option<ServerMessage> {
        if !self.features.scankb_on {
            return None;
        }
        self.scan = scankb::tick(&self.layout, &self.scan, &self.scan_config, dt_ms);
        Some(ServerMessage::ScanState(self.scan_view()))
    }
}
