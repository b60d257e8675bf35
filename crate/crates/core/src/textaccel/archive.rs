use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub const DEFAULT_ARCHIVE_CAPACITY: usize = 50;

#[derive(Debug, thiserror::Error)]
pub enum ArchiveError {
    #[error("message is empty")]
    EmptyMessage,
    #[error("archive index {index} out of range (archive holds {len})")]
    OutOfRange { index: usize, len: usize },
    #[error("archive capacity must be at least 1")]
    ZeroCapacity,
    #[error("archive file: {0}")]
    Io(#[from] io::Error),
    #[error("archive file: {0}")]
    Json(#[from] serde_json::Error),
}

/// Recently spoken messages, most recent first, without duplicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageArchive {
    messages: Vec<String>,
    capacity: usize,
}

#[derive(Serialize, Deserialize)]
struct ArchiveFile {
    messages: Vec<String>,
}

impl Default for MessageArchive {
    fn default() -> Self {
        Self {
            messages: Vec::new(),
            capacity: DEFAULT_ARCHIVE_CAPACITY,
        }
    }
}

impl MessageArchive {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(capacity: usize) -> Result<Self, ArchiveError> {
        if capacity == 0 {
            return Err(ArchiveError::ZeroCapacity);
        }
        Ok(Self {
            messages: Vec::new(),
            capacity,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn messages(&self) -> &[String] {
        &self.messages
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    /// Puts `message` (trimmed) at the front, dropping an older copy of it and
    /// evicting the oldest entry when full. Blank messages are rejected and
    /// leave the archive as it was.
    pub fn add(&mut self, message: &str) -> Result<(), ArchiveError> {
        let message = message.trim();
        if message.is_empty() {
            return Err(ArchiveError::EmptyMessage);
        }
        if let Some(pos) = self.messages.iter().position(|m| m == message) {
            let m = self.messages.remove(pos);
            self.messages.insert(0, m);
        } else {
            self.messages.insert(0, message.to_string());
            self.messages.truncate(self.capacity);
        }
        Ok(())
    }

    /// Returns the message at `index` and moves it to the front.
    pub fn pick(&mut self, index: usize) -> Result<String, ArchiveError> {
        if index >= self.messages.len() {
            return Err(ArchiveError::OutOfRange {
                index,
                len: self.messages.len(),
            });
        }
        let m = self.messages.remove(index);
        self.messages.insert(0, m.clone());
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ArchiveFile {
            messages: self.messages.clone(),
        })
        .expect("string list serializes")
    }

    /// Parses `{"messages": [...]}`. Blank and repeated entries are dropped and
    /// the list is cut to `capacity`.
    pub fn from_json(json: &str, capacity: usize) -> Result<Self, ArchiveError> {
        let file: ArchiveFile = serde_json::from_str(json)?;
        let mut archive = Self::with_capacity(capacity)?;
        for m in file.messages {
            let m = m.trim();
            if m.is_empty() || archive.messages.iter().any(|x| x == m) {
                continue;
            }
            if archive.messages.len() == capacity {
                break;
            }
            archive.messages.push(m.to_string());
        }
        Ok(archive)
    }

    /// Loads from `path`; a missing file gives an empty archive.
    pub fn load(path: &Path, capacity: usize) -> Result<Self, ArchiveError> {
        match std::fs::read_to_string(path) {
            Ok(s) => Self::from_json(&s, capacity),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Self::with_capacity(capacity),
            Err(e) => Err(e.into()),
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), ArchiveError> {
        crate::fsutil::write_atomic(path, self.to_json().as_bytes())?;
        Ok(())
    }
}
