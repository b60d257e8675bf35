use std::collections::BTreeMap;
use std::io::{self, BufRead};

use super::{data_lines, fold};

#[derive(Debug, thiserror::Error)]
pub enum AbbrevError {
    #[error("abbreviation `{0}` must be a single word (no whitespace or punctuation)")]
    InvalidAbbreviation(String),
    #[error("expansion for `{0}` is empty")]
    EmptyExpansion(String),
    #[error("line {line}: expected `abbreviation<TAB>expansion`")]
    Malformed { line: usize },
    #[error("duplicate abbreviation `{abbrev}` at line {line}")]
    Duplicate { abbrev: String, line: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// True for characters that end a token: whitespace and punctuation.
fn is_delimiter(c: char) -> bool {
    c.is_whitespace()
        || c.is_ascii_punctuation()
        || matches!(c,
            '\u{00A1}' | '\u{00AB}' | '\u{00B7}' | '\u{00BB}' | '\u{00BF}'
            | '\u{2010}'..='\u{2027}'
            | '\u{2030}'..='\u{205E}'
            | '\u{3000}'..='\u{303F}')
}

/// User-defined short forms, matched case-insensitively as whole tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AbbreviationTable {
    // folded abbreviation -> (abbreviation as defined, expansion)
    entries: BTreeMap<String, (String, String)>,
}

impl AbbreviationTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds or replaces an abbreviation. Returns the previous expansion, if any.
    /// Surrounding whitespace is trimmed from the expansion.
    pub fn define(
        &mut self,
        abbrev: impl Into<String>,
        expansion: impl Into<String>,
    ) -> Result<Option<String>, AbbrevError> {
        let abbrev = abbrev.into();
        let expansion = expansion.into().trim().to_string();
        if abbrev.is_empty() || abbrev.chars().any(is_delimiter) {
            return Err(AbbrevError::InvalidAbbreviation(abbrev));
        }
        if expansion.is_empty() {
            return Err(AbbrevError::EmptyExpansion(abbrev));
        }
        Ok(self
            .entries
            .insert(fold(&abbrev), (abbrev, expansion))
            .map(|(_, old)| old))
    }

    pub fn remove(&mut self, abbrev: &str) -> Option<String> {
        self.entries.remove(&fold(abbrev)).map(|(_, e)| e)
    }

    pub fn get(&self, abbrev: &str) -> Option<&str> {
        self.entries.get(&fold(abbrev)).map(|(_, e)| e.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `(abbreviation, expansion)` pairs ordered by folded abbreviation.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.values().map(|(a, e)| (a.as_str(), e.as_str()))
    }

    /// Replaces every whole token of `text` that matches an abbreviation.
    ///
    /// Tokens are maximal runs of characters that are neither whitespace nor
    /// punctuation. Everything between tokens is copied through untouched, and
    /// the output is never re-scanned, so an expansion containing another
    /// abbreviation stays as written.
    pub fn expand(&self, text: &str) -> String {
        if self.entries.is_empty() {
            return text.to_string();
        }
        let mut out = String::with_capacity(text.len());
        let mut token_start: Option<usize> = None;
        let flush = |out: &mut String, token: &str| match self.get(token) {
            Some(expansion) => out.push_str(expansion),
            None => out.push_str(token),
        };
        for (i, c) in text.char_indices() {
            if is_delimiter(c) {
                if let Some(start) = token_start.take() {
                    flush(&mut out, &text[start..i]);
                }
                out.push(c);
            } else if token_start.is_none() {
                token_start = Some(i);
            }
        }
        if let Some(start) = token_start {
            flush(&mut out, &text[start..]);
        }
        out
    }

    /// Serializes in the same `abbreviation<TAB>expansion` format `load_abbreviations` reads.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("# abbreviation<TAB>expansion\n");
        for (a, e) in self.iter() {
            out.push_str(a);
            out.push('\t');
            out.push_str(e);
            out.push('\n');
        }
        out
    }
}

/// Parses an `abbreviation<TAB>expansion` file. `#` lines and blank lines are ignored.
pub fn load_abbreviations<R: BufRead>(source: R) -> Result<AbbreviationTable, AbbrevError> {
    let mut table = AbbreviationTable::new();
    for item in data_lines(source) {
        let (line, text) = item?;
        let (abbrev, expansion) = text
            .split_once('\t')
            .ok_or(AbbrevError::Malformed { line })?;
        let abbrev = abbrev.trim();
        if table.get(abbrev).is_some() {
            return Err(AbbrevError::Duplicate {
                abbrev: abbrev.to_string(),
                line,
            });
        }
        table.define(abbrev, expansion.trim())?;
    }
    Ok(table)
}
