//! Text-side typing aids: recent-message archive, frequency-ranked prefix
//! completion and user-defined abbreviations.

mod abbrev;
mod archive;
mod dictionary;

use std::io::{self, BufRead};

pub use abbrev::{load_abbreviations, AbbrevError, AbbreviationTable};
pub use archive::{ArchiveError, MessageArchive, DEFAULT_ARCHIVE_CAPACITY};
pub use dictionary::{
    load_dictionary, DictionaryEntry, DictionaryError, FrequencyDictionary,
    DEFAULT_MAX_SUGGESTIONS,
};

/// A small English frequency list bundled with the crate.
pub const SAMPLE_DICTIONARY: &str = include_str!("../../assets/dictionary.tsv");

/// The abbreviation table used when no file is configured.
pub const DEFAULT_ABBREVIATIONS: &str = include_str!("../../assets/abbreviations.tsv");

/// Yields `(line_number, line)` for every line that carries data: blank lines
/// and lines whose first non-blank character is `#` are skipped. Line numbers
/// are 1-based. A trailing `\r` is stripped.
pub(crate) fn data_lines<R: BufRead>(
    reader: R,
) -> impl Iterator<Item = io::Result<(usize, String)>> {
    reader
        .lines()
        .enumerate()
        .filter_map(|(idx, line)| match line {
            Err(e) => Some(Err(e)),
            Ok(mut line) => {
                if line.ends_with('\r') {
                    line.pop();
                }
                let trimmed = line.trim_start();
                if trimmed.is_empty() || trimmed.starts_with('#') {
                    None
                } else {
                    Some(Ok((idx + 1, line)))
                }
            }
        })
}

/// Case folding used for every case-insensitive comparison in this module.
pub(crate) fn fold(s: &str) -> String {
    s.to_lowercase()
}
