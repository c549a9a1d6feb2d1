use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use serde::Serialize;

use crate::error::{Error, Result};

/// How a lexicon line marked its entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundness {
    /// `cat`
    Free,
    /// `co-`: attaches to a following stem.
    PrefixBound,
    /// `-ing`: attaches to a preceding stem.
    SuffixBound,
}

/// A line that could not be turned into an entry.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SkippedLine {
    pub line: usize,
    pub text: String,
    pub reason: String,
}

/// Gold morpheme strings with their boundness markers.
///
/// Entries are hyphen-free and unique; a string listed both as `-s` and `s`
/// is one entry carrying both markers.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MorphLexicon {
    entries: BTreeMap<String, BTreeSet<Boundness>>,
    fold_case: bool,
    skipped: Vec<SkippedLine>,
}

impl MorphLexicon {
    /// Parses one morpheme per line. A leading hyphen marks a suffix-bound
    /// form, a trailing one a prefix-bound form. Blank lines and lines
    /// starting with `#` are ignored; entries that still contain a hyphen
    /// after stripping are skipped and recorded.
    pub fn read_from<R: BufRead>(source: R, fold_case: bool) -> Result<Self> {
        let mut lex = MorphLexicon {
            fold_case,
            ..Self::default()
        };
        for (i, line) in source.lines().enumerate() {
            let line = line?;
            let text = line.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            lex.insert_line(i + 1, text);
        }
        if lex.entries.is_empty() {
            return Err(Error::InvalidInput("lexicon has no entries".into()));
        }
        if !lex.skipped.is_empty() {
            log::warn!("skipped {} malformed lexicon lines", lex.skipped.len());
        }
        Ok(lex)
    }

    pub fn load(path: impl AsRef<std::path::Path>, fold_case: bool) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(file), fold_case)
    }

    fn insert_line(&mut self, lineno: usize, text: &str) {
        let (body, suffix) = match text.strip_prefix('-') {
            Some(rest) => (rest, true),
            None => (text, false),
        };
        let (body, prefix) = match body.strip_suffix('-') {
            Some(rest) => (rest, true),
            None => (body, false),
        };
        let reason = if body.is_empty() {
            Some("empty after removing hyphens")
        } else if body.contains('-') {
            Some("internal hyphen")
        } else if body.chars().any(char::is_whitespace) {
            Some("contains whitespace")
        } else {
            None
        };
        if let Some(reason) = reason {
            self.skipped.push(SkippedLine {
                line: lineno,
                text: text.to_owned(),
                reason: reason.to_owned(),
            });
            return;
        }
        let markers = self.entries.entry(self.normalize(body)).or_default();
        if suffix {
            markers.insert(Boundness::SuffixBound);
        }
        if prefix {
            markers.insert(Boundness::PrefixBound);
        }
        if !suffix && !prefix {
            markers.insert(Boundness::Free);
        }
    }

    /// Applies the lexicon's normalization (case folding, if enabled).
    pub fn normalize(&self, s: &str) -> String {
        if self.fold_case {
            s.to_lowercase()
        } else {
            s.to_owned()
        }
    }

    pub fn fold_case(&self) -> bool {
        self.fold_case
    }

    /// Membership of an already normalized string.
    pub fn contains(&self, entry: &str) -> bool {
        self.entries.contains_key(entry)
    }

    pub fn entries(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn markers(&self, entry: &str) -> Option<&BTreeSet<Boundness>> {
        self.entries.get(entry)
    }

    /// Entries carrying `kind` among their markers.
    pub fn with_marker(&self, kind: Boundness) -> BTreeSet<&str> {
        self.entries
            .iter()
            .filter(|(_, m)| m.contains(&kind))
            .map(|(e, _)| e.as_str())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn skipped(&self) -> &[SkippedLine] {
        &self.skipped
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lex(src: &str) -> MorphLexicon {
        MorphLexicon::read_from(src.as_bytes(), false).unwrap()
    }

    #[test]
    fn parse_rule() {
        let l = lex("-ing\ncat\n-s\n");
        assert_eq!(l.entries().collect::<Vec<_>>(), ["cat", "ing", "s"]);
        assert_eq!(
            l.with_marker(Boundness::SuffixBound),
            BTreeSet::from(["ing", "s"])
        );
        assert_eq!(l.with_marker(Boundness::Free), BTreeSet::from(["cat"]));
    }

    #[test]
    fn duplicates_collapse() {
        let l = lex("cat\ncat\n-s\ns\nco-\n");
        assert_eq!(l.len(), 3);
        assert_eq!(
            l.markers("s").unwrap(),
            &BTreeSet::from([Boundness::Free, Boundness::SuffixBound])
        );
        assert_eq!(
            l.markers("co").unwrap(),
            &BTreeSet::from([Boundness::PrefixBound])
        );
    }

    #[test]
    fn skips_and_reports() {
        let l = lex("# comment\n\nwell-known\n-\n--\nok\n");
        assert_eq!(l.len(), 1);
        let lines: Vec<_> = l.skipped().iter().map(|s| s.line).collect();
        assert_eq!(lines, [3, 4, 5]);
    }

    #[test]
    fn empty_is_error() {
        assert!(MorphLexicon::read_from("".as_bytes(), false).is_err());
        assert!(MorphLexicon::read_from("\n# x\n".as_bytes(), false).is_err());
    }

    #[test]
    fn fold_case() {
        let l = MorphLexicon::read_from("Cat\n-ING\n".as_bytes(), true).unwrap();
        assert!(l.contains("cat"));
        assert!(l.contains("ing"));
        assert_eq!(l.normalize("CaT"), "cat");
    }
}
