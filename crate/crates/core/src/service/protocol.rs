//! JSON messages exchanged with UI clients over `/ws`.
//!
//! Every message is one JSON object with a `kind` field.

use serde::{Deserialize, Serialize};

use super::config::FeatureFlags;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientMessage {
    /// The text panel's full current content.
    TypeText { text: String },
    PressSwitch {},
    PickSuggestion { index: usize },
    PickArchive { index: usize },
    /// Speak `text`, or the text panel's content when absent.
    Speak {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        text: Option<String>,
    },
    /// Any subset of the four flags.
    SetFeature {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        archive: Option<bool>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        completion: Option<bool>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        abbrev: Option<bool>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scankb: Option<bool>,
    },
    DefineAbbrev { abbrev: String, expansion: String },
    GetState {},
}

impl ClientMessage {
    pub fn parse(raw: &str) -> Result<Self, String> {
        serde_json::from_str(raw).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanView {
    pub path: Vec<usize>,
    pub cursor: usize,
    /// Label of the option under the cursor.
    pub focused: String,
    /// Whether the option under the cursor is a group.
    pub group: bool,
}

/// Snapshot of the composer, as served by `GET /state`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComposerSnapshot {
    pub text: String,
    pub suggestions: Vec<String>,
    pub archive: Vec<String>,
    pub scan: Option<ScanView>,
    pub features: FeatureFlags,
    pub speaking: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ServerMessage {
    State(ComposerSnapshot),
    Layout { layout: serde_json::Value },
    Text { text: String },
    Suggestions { words: Vec<String> },
    Archive { messages: Vec<String> },
    ScanState(ScanView),
    Features(FeatureFlags),
    Abbreviation { abbrev: String, expansion: String },
    /// Synthesis started; the spoken acknowledgement follows.
    Speaking { text: String, expanded: String },
    Spoken {
        text: String,
        expanded: String,
        duration_ms: u64,
        samples: usize,
        packets: usize,
    },
    Error { detail: String },
}

impl ServerMessage {
    pub fn error(detail: impl Into<String>) -> Self {
        ServerMessage::Error {
            detail: detail.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        matches!(self, ServerMessage::Error { .. })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server messages serialize")
    }
}
