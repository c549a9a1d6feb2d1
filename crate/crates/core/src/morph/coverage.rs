use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::vocab::{strip_mark, PositionClass, Vocabulary};

use super::MorphLexicon;

/// Lexicon entries matched by a vocabulary, each with the position classes
/// of the pieces that matched it.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Coverage {
    pub matched: BTreeMap<String, BTreeSet<PositionClass>>,
    pub lexicon_size: usize,
}

impl Coverage {
    pub fn count(&self) -> usize {
        self.matched.len()
    }

    pub fn fraction(&self) -> f64 {
        if self.lexicon_size == 0 {
            0.0
        } else {
            self.count() as f64 / self.lexicon_size as f64
        }
    }

    pub fn matched_set(&self) -> BTreeSet<&str> {
        self.matched.keys().map(String::as_str).collect()
    }
}

/// Bare (mark-stripped, lexicon-normalized) strings of every non-reserved
/// piece, with the position classes they occur in. Pieces that are only a
/// mark are left out.
pub fn bare_pieces(vocab: &Vocabulary, lexicon: &MorphLexicon) -> BTreeMap<String, BTreeSet<PositionClass>> {
    let mut out: BTreeMap<String, BTreeSet<PositionClass>> = BTreeMap::new();
    for p in vocab.non_reserved() {
        let (bare, class) = strip_mark(&p.surface, vocab.scheme(), vocab.meta());
        if bare.is_empty() {
            continue;
        }
        out.entry(lexicon.normalize(&bare)).or_default().insert(class);
    }
    out
}

/// An entry is matched iff some piece's bare string equals it. Boundness
/// and position are not checked.
pub fn coverage(vocab: &Vocabulary, lexicon: &MorphLexicon) -> Coverage {
    let matched = bare_pieces(vocab, lexicon)
        .into_iter()
        .filter(|(bare, _)| lexicon.contains(bare))
        .collect();
    Coverage {
        matched,
        lexicon_size: lexicon.len(),
    }
}

/// Number of entries matched by at least one of the two vocabularies.
pub fn union_coverage(a: &Vocabulary, b: &Vocabulary, lexicon: &MorphLexicon) -> usize {
    let ca = coverage(a, lexicon);
    let cb = coverage(b, lexicon);
    ca.matched_set().union(&cb.matched_set()).count()
}

/// Entries matched by only one of two vocabularies.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ExclusiveMatches {
    pub only_a: BTreeMap<String, BTreeSet<PositionClass>>,
    pub only_b: BTreeMap<String, BTreeSet<PositionClass>>,
}

pub fn exclusive_matches(a: &Vocabulary, b: &Vocabulary, lexicon: &MorphLexicon) -> ExclusiveMatches {
    let ca = coverage(a, lexicon).matched;
    let cb = coverage(b, lexicon).matched;
    let only = |x: &BTreeMap<String, BTreeSet<PositionClass>>,
                y: &BTreeMap<String, BTreeSet<PositionClass>>| {
        x.iter()
            .filter(|(k, _)| !y.contains_key(*k))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    };
    ExclusiveMatches {
        only_a: only(&ca, &cb),
        only_b: only(&cb, &ca),
    }
}
