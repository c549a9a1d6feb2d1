//! Word splitting ahead of subword segmentation.
//!
//! No normalization is applied in any mode: no case folding, no accent or
//! Unicode normalization. Every returned word is a slice of the input line.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use unicode_general_category::{get_general_category, GeneralCategory};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PretokMode {
    /// Split on Unicode whitespace only.
    Raw,
    /// Whitespace split, then detach punctuation from word edges.
    #[serde(rename = "rules")]
    RuleBased,
    /// Input was tokenized by an external tool; split on whitespace.
    External,
}

impl PretokMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PretokMode::Raw => "raw",
            PretokMode::RuleBased => "rules",
            PretokMode::External => "external",
        }
    }

    /// Whether the mode stands for a pre-tokenized condition.
    pub fn is_pretokenized(self) -> bool {
        self != PretokMode::Raw
    }
}

impl fmt::Display for PretokMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PretokMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(PretokMode::Raw),
            "rules" | "rule-based" => Ok(PretokMode::RuleBased),
            "external" => Ok(PretokMode::External),
            other => Err(Error::Config(format!(
                "unknown pretokenization mode {other:?} (expected raw, rules or external)"
            ))),
        }
    }
}

/// True for code points in Unicode general category P* (Pc, Pd, Ps, Pe, Pi, Pf, Po).
pub fn is_punctuation(c: char) -> bool {
    matches!(
        get_general_category(c),
        GeneralCategory::ConnectorPunctuation
            | GeneralCategory::DashPunctuation
            | GeneralCategory::OpenPunctuation
            | GeneralCategory::ClosePunctuation
            | GeneralCategory::InitialPunctuation
            | GeneralCategory::FinalPunctuation
            | GeneralCategory::OtherPunctuation
    )
}

/// Splits `line` into words according to `mode`.
pub fn pretokenize(line: &str, mode: PretokMode) -> Vec<&str> {
    match mode {
        PretokMode::Raw | PretokMode::External => line.split_whitespace().collect(),
        PretokMode::RuleBased => {
            let mut out = Vec::new();
            for word in line.split_whitespace() {
                split_punctuation(word, &mut out);
            }
            out
        }
    }
}

/// Peels punctuation off both edges of `word`, one code point per token.
/// Words made only of punctuation (`...`, `--`) stay whole; internal
/// punctuation (`don't`, `well-known`) stays attached.
fn split_punctuation<'a>(word: &'a str, out: &mut Vec<&'a str>) {
    if word.chars().all(is_punctuation) {
        out.push(word);
        return;
    }
    let core_start = word
        .char_indices()
        .find(|&(_, c)| !is_punctuation(c))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let core_end = word
        .char_indices()
        .rev()
        .find(|&(_, c)| !is_punctuation(c))
        .map(|(i, c)| i + c.len_utf8())
        .unwrap_or(word.len());
    for (i, c) in word[..core_start].char_indices() {
        out.push(&word[i..i + c.len_utf8()]);
    }
    out.push(&word[core_start..core_end]);
    for (i, c) in word[core_end..].char_indices() {
        let at = core_end + i;
        out.push(&word[at..at + c.len_utf8()]);
    }
}
