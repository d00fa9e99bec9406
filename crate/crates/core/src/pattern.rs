//! Compiled token patterns.
//!
//! Patterns use the RE2-style syntax of `regex-automata`: literals, character
//! classes, `* + ? |`, groups, counted repetition and backslash escapes. A
//! pattern is always matched anchored at a given offset and reports its
//! longest match there.

use std::fmt;

use regex_automata::meta::Regex;
use regex_automata::{Anchored, Input, MatchKind};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PatternError {
    #[error("pattern `{pattern}` does not compile: {message}")]
    Syntax { pattern: String, message: String },
    #[error("pattern `{0}` matches the empty string")]
    MatchesEmpty(String),
}

#[derive(Clone)]
pub struct Pattern {
    source: String,
    regex: Regex,
}

impl Pattern {
    pub fn new(source: &str) -> Result<Self, PatternError> {
        let regex = Regex::builder()
            .configure(Regex::config().match_kind(MatchKind::All))
            .build(source)
            .map_err(|e| PatternError::Syntax {
                pattern: source.to_string(),
                message: e.to_string(),
            })?;
        let pattern = Pattern { source: source.to_string(), regex };
        if pattern.regex.is_match(Input::new("").anchored(Anchored::Yes)) {
            return Err(PatternError::MatchesEmpty(source.to_string()));
        }
        Ok(pattern)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// End offset of the longest non-empty match starting exactly at `at`.
    pub fn longest_match_at(&self, haystack: &str, at: usize) -> Option<usize> {
        let input = Input::new(haystack).range(at..).anchored(Anchored::Yes);
        self.regex
            .find(input)
            .map(|m| m.end())
            .filter(|&end| end > at)
    }

    /// True when the whole of `text` is one match.
    pub fn matches_exactly(&self, text: &str) -> bool {
        self.longest_match_at(text, 0) == Some(text.len())
    }
}

impl fmt::Debug for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Pattern").field(&self.source).finish()
    }
}

impl PartialEq for Pattern {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
    }
}

impl Eq for Pattern {}
