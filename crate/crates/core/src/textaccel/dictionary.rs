use std::cmp::Ordering;
use std::collections::HashMap;
use std::io::{self, BufRead};

use super::{data_lines, fold};

pub const DEFAULT_MAX_SUGGESTIONS: usize = 8;

#[derive(Debug, thiserror::Error)]
pub enum DictionaryError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("duplicate word `{word}` at line {line}")]
    Duplicate { word: String, line: usize },
    #[error("invalid entry `{0}`: words must be non-empty and contain no whitespace")]
    InvalidWord(String),
    #[error("max_suggestions must be at least 1")]
    ZeroSuggestions,
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DictionaryEntry {
    pub word: String,
    pub frequency: u64,
}

impl DictionaryEntry {
    pub fn new(word: impl Into<String>, frequency: u64) -> Result<Self, DictionaryError> {
        let word = word.into();
        if !is_valid_word(&word) {
            return Err(DictionaryError::InvalidWord(word));
        }
        Ok(Self { word, frequency })
    }
}

fn is_valid_word(word: &str) -> bool {
    !word.is_empty() && !word.chars().any(char::is_whitespace)
}

/// Word list with corpus frequencies, indexed for prefix lookup.
///
/// Entries are kept sorted by their case-folded spelling, so all words sharing a
/// prefix form one contiguous run that can be found with two binary searches.
#[derive(Debug, Clone)]
pub struct FrequencyDictionary {
    // (folded word, entry), sorted by folded word
    index: Vec<(String, DictionaryEntry)>,
    max_suggestions: usize,
}

impl FrequencyDictionary {
    pub fn new(entries: impl IntoIterator<Item = DictionaryEntry>) -> Result<Self, DictionaryError> {
        let mut keyed = Vec::new();
        for (i, entry) in entries.into_iter().enumerate() {
            if !is_valid_word(&entry.word) {
                return Err(DictionaryError::InvalidWord(entry.word));
            }
            keyed.push((fold(&entry.word), i, entry));
        }
        // stable on position, so of two equal spellings the later one is reported
        keyed.sort_unstable_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
        if let Some(pair) = keyed.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(DictionaryError::Duplicate {
                word: pair[1].2.word.clone(),
                line: pair[1].1 + 1,
            });
        }
        Ok(Self {
            index: keyed.into_iter().map(|(k, _, e)| (k, e)).collect(),
            max_suggestions: DEFAULT_MAX_SUGGESTIONS,
        })
    }

    pub fn with_max_suggestions(mut self, max: usize) -> Result<Self, DictionaryError> {
        if max == 0 {
            return Err(DictionaryError::ZeroSuggestions);
        }
        self.max_suggestions = max;
        Ok(self)
    }

    pub fn max_suggestions(&self) -> usize {
        self.max_suggestions
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &DictionaryEntry> {
        self.index.iter().map(|(_, e)| e)
    }

    pub fn get(&self, word: &str) -> Option<&DictionaryEntry> {
        let key = fold(word);
        self.index
            .binary_search_by(|(k, _)| k.as_str().cmp(&key))
            .ok()
            .map(|i| &self.index[i].1)
    }

    /// Words starting with `prefix` (case-insensitive), most frequent first.
    ///
    /// Ties in frequency are ordered by the case-folded word. At most
    /// `max_suggestions` words are returned, in their stored casing. An empty
    /// prefix yields the globally most frequent words.
    pub fn complete(&self, prefix: &str) -> Vec<&str> {
        let key = fold(prefix);
        let start = self.index.partition_point(|(k, _)| k.as_str() < key.as_str());
        let len = self.index[start..].partition_point(|(k, _)| k.starts_with(&key));
        let mut run: Vec<&(String, DictionaryEntry)> = self.index[start..start + len].iter().collect();

        let by_rank = |a: &&(String, DictionaryEntry), b: &&(String, DictionaryEntry)| -> Ordering {
            b.1.frequency.cmp(&a.1.frequency).then_with(|| a.0.cmp(&b.0))
        };
        let k = self.max_suggestions;
        if run.len() > k {
            run.select_nth_unstable_by(k - 1, by_rank);
            run.truncate(k);
        }
        run.sort_by(by_rank);
        run.into_iter().map(|(_, e)| e.word.as_str()).collect()
    }
}

/// Parses a `word<TAB>frequency` list. `#` lines and blank lines are ignored.
pub fn load_dictionary<R: BufRead>(source: R) -> Result<FrequencyDictionary, DictionaryError> {
    let mut seen = HashMap::new();
    let mut entries = Vec::new();
    for item in data_lines(source) {
        let (line, text) = item?;
        let malformed = |reason: &str| DictionaryError::Malformed {
            line,
            reason: reason.to_string(),
        };
        let (word, freq) = text
            .split_once('\t')
            .ok_or_else(|| malformed("expected `word<TAB>frequency`"))?;
        let word = word.trim();
        if !is_valid_word(word) {
            return Err(malformed("word is empty or contains whitespace"));
        }
        let frequency: u64 = freq
            .trim()
            .parse()
            .map_err(|_| malformed(&format!("invalid frequency `{}`", freq.trim())))?;
        if seen.insert(fold(word), line).is_some() {
            return Err(DictionaryError::Duplicate {
                word: word.to_string(),
                line,
            });
        }
        entries.push(DictionaryEntry {
            word: word.to_string(),
            frequency,
        });
    }
    FrequencyDictionary::new(entries)
}
