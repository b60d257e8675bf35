use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// One of the optional typing aids that can be switched on and off at runtime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    Archive,
    Completion,
    Abbrev,
    Scankb,
}

impl Feature {
    pub const ALL: [Feature; 4] = [
        Feature::Archive,
        Feature::Completion,
        Feature::Abbrev,
        Feature::Scankb,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Feature::Archive => "archive",
            Feature::Completion => "completion",
            Feature::Abbrev => "abbrev",
            Feature::Scankb => "scankb",
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown feature `{0}`")]
pub struct UnknownFeature(pub String);

impl FromStr for Feature {
    type Err = UnknownFeature;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Feature::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| UnknownFeature(s.to_string()))
    }
}
