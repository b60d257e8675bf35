use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::net::{SocketAddr, ToSocketAddrs};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::scankb::{load_layout, ScanConfig};
use crate::speech::ExternalSynthSpec;
use crate::textaccel::{load_abbreviations, load_dictionary};
use crate::Feature;

/// Environment variable naming the config file when `--config` is absent.
pub const CONFIG_ENV: &str = "EASYVOICE_CONFIG";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("invalid synthesizer `{0}`: expected `tone` or `cmd:<template>`")]
    Synth(String),
    #[error("cannot resolve peer `{0}`")]
    Peer(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureFlags {
    #[serde(rename = "archive")]
    pub archive_on: bool,
    #[serde(rename = "completion")]
    pub completion_on: bool,
    #[serde(rename = "abbrev")]
    pub abbrev_on: bool,
    #[serde(rename = "scankb")]
    pub scankb_on: bool,
}

impl Default for FeatureFlags {
    fn default() -> Self {
        Self {
            archive_on: true,
            completion_on: true,
            abbrev_on: true,
            scankb_on: true,
        }
    }
}

impl FeatureFlags {
    pub fn get(&self, f: Feature) -> bool {
        match f {
            Feature::Archive => self.archive_on,
            Feature::Completion => self.completion_on,
            Feature::Abbrev => self.abbrev_on,
            Feature::Scankb => self.scankb_on,
        }
    }

    pub fn set(&mut self, f: Feature, on: bool) {
        match f {
            Feature::Archive => self.archive_on = on,
            Feature::Completion => self.completion_on = on,
            Feature::Abbrev => self.abbrev_on = on,
            Feature::Scankb => self.scankb_on = on,
        }
    }
}

/// Which engine turns text into audio.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SynthChoice {
    #[default]
    Tone,
    Command(String),
}

impl FromStr for SynthChoice {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "tone" {
            Ok(SynthChoice::Tone)
        } else if let Some(template) = s.strip_prefix("cmd:") {
            ExternalSynthSpec::new(template).map_err(|_| ConfigError::Synth(s.to_string()))?;
            Ok(SynthChoice::Command(template.to_string()))
        } else {
            Err(ConfigError::Synth(s.to_string()))
        }
    }
}

impl TryFrom<String> for SynthChoice {
    type Error = ConfigError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<SynthChoice> for String {
    fn from(c: SynthChoice) -> String {
        c.to_string()
    }
}

impl fmt::Display for SynthChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SynthChoice::Tone => f.write_str("tone"),
            SynthChoice::Command(t) => write!(f, "cmd:{t}"),
        }
    }
}

/// Everything the service needs to start. Read from one JSON document; any
/// field may be omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    /// Far end of the call, `host:port`.
    pub peer: Option<String>,
    pub listen_port: u16,
    pub ui_port: u16,
    pub ui_dir: Option<PathBuf>,
    pub dict_path: Option<PathBuf>,
    pub abbrev_path: Option<PathBuf>,
    pub layout_path: Option<PathBuf>,
    pub archive_path: Option<PathBuf>,
    pub archive_capacity: usize,
    pub scan_period_ms: u64,
    pub scan_max_cycles: u32,
    pub synth: SynthChoice,
    pub synth_timeout_ms: u64,
    pub features: FeatureFlags,
}

impl Default for AppConfig {
    fn default() -> Self {
        Self {
            peer: None,
            listen_port: 4000,
            ui_port: 8080,
            ui_dir: None,
            dict_path: None,
            abbrev_path: None,
            layout_path: None,
            archive_path: None,
            archive_capacity: crate::textaccel::DEFAULT_ARCHIVE_CAPACITY,
            scan_period_ms: 1000,
            scan_max_cycles: 2,
            synth: SynthChoice::Tone,
            synth_timeout_ms: ExternalSynthSpec::DEFAULT_TIMEOUT.as_millis() as u64,
            features: FeatureFlags::default(),
        }
    }
}

impl AppConfig {
    pub fn from_json(json: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(json)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn peer_addr(&self) -> Result<Option<SocketAddr>, ConfigError> {
        let Some(peer) = &self.peer else {
            return Ok(None);
        };
        peer.to_socket_addrs()
            .ok()
            .and_then(|mut it| it.next())
            .map(Some)
            .ok_or_else(|| ConfigError::Peer(peer.clone()))
    }

    pub fn scan_config(&self) -> Result<ScanConfig, crate::scankb::ConfigError> {
        ScanConfig::new(self.scan_period_ms, self.scan_max_cycles)
    }

    pub fn external_synth(&self) -> Option<ExternalSynthSpec> {
        match &self.synth {
            SynthChoice::Tone => None,
            SynthChoice::Command(t) => ExternalSynthSpec::new(t.as_str())
                .ok()
                .map(|s| s.with_timeout(Duration::from_millis(self.synth_timeout_ms))),
        }
    }

    /// Checks everything that can be checked without starting the service.
    /// Each problem is one human-readable line; an empty list means the
    /// configuration is usable.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (name, port) in [("listen_port", self.listen_port), ("ui_port", self.ui_port)] {
            if port == 0 {
                out.push(format!("{name} must be in 1..=65535"));
            }
        }
        if let Err(e) = self.peer_addr() {
            out.push(e.to_string());
        }
        if let Err(e) = self.scan_config() {
            out.push(format!("scan settings: {e}"));
        }
        if self.archive_capacity == 0 {
            out.push("archive_capacity must be at least 1".into());
        }

        let f = &self.features;
        if f.completion_on {
            if let Some(p) = &self.dict_path {
                if let Err(e) = open(p).and_then(|r| load_dictionary(r).map_err(|e| e.to_string())) {
                    out.push(format!("dictionary {}: {e}", p.display()));
                }
            }
        }
        if f.abbrev_on {
            if let Some(p) = &self.abbrev_path {
                // a missing file is created on the first definition
                if p.exists() {
                    if let Err(e) = open(p).and_then(|r| load_abbreviations(r).map_err(|e| e.to_string())) {
                        out.push(format!("abbreviations {}: {e}", p.display()));
                    }
                } else if !parent_dir(p).is_dir() {
                    out.push(format!("abbreviations {}: directory {} does not exist", p.display(), parent_dir(p).display()));
                }
            }
        }
        if f.scankb_on {
            if let Some(p) = &self.layout_path {
                let res = std::fs::read_to_string(p)
                    .map_err(|e| e.to_string())
                    .and_then(|s| load_layout(&s).map(|_| ()).map_err(|e| e.to_string()));
                if let Err(e) = res {
                    out.push(format!("layout {}: {e}", p.display()));
                }
            }
        }
        if f.archive_on {
            if let Some(p) = &self.archive_path {
                let dir = parent_dir(p);
                if !dir.is_dir() {
                    out.push(format!("archive {}: directory {} does not exist", p.display(), dir.display()));
                }
            }
        }
        if let Some(dir) = &self.ui_dir {
            if !dir.is_dir() {
                out.push(format!("ui_dir {}: not a directory", dir.display()));
            }
        }
        out
    }
}

fn parent_dir(path: &Path) -> &Path {
    path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."))
}

fn open(path: &Path) -> Result<BufReader<File>, String> {
    File::open(path).map(BufReader::new).map_err(|e| e.to_string())
}
