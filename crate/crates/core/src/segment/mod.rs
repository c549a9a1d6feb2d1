//! Marking, lattice construction and Viterbi encoding for both schemes.
//!
//! `Fin` is implemented by code-point reversal: a word is reversed and
//! marked at the front, decoded against reversed piece surfaces, and the
//! resulting pieces are reversed back. Literal meta-symbols in the input are
//! escaped to [`ESCAPE`] before marking and restored by [`decode`]; input
//! text must therefore not contain U+E000 itself.

mod lattice;
mod trie;

use std::borrow::Cow;
use std::collections::HashMap;
use std::sync::RwLock;

pub use lattice::{Edge, Lattice, Path, PieceIndex};
pub use trie::PrefixTrie;

use crate::pretok::{pretokenize, PretokMode};
use crate::vocab::{MarkingScheme, Vocabulary};

/// Private-use code point standing in for literal meta-symbols in text.
pub const ESCAPE: char = '\u{E000}';

/// Default bound on the number of cached word segmentations.
pub const DEFAULT_CACHE_CAPACITY: usize = 1 << 16;

/// Attaches the boundary mark: prepended for `Init`, appended for `Fin`.
/// No escaping is done here.
pub fn mark_word(word: &str, scheme: MarkingScheme, meta: char) -> String {
    let mut out = String::with_capacity(word.len() + meta.len_utf8());
    match scheme {
        MarkingScheme::Init => {
            out.push(meta);
            out.push_str(word);
        }
        MarkingScheme::Fin => {
            out.push_str(word);
            out.push(meta);
        }
    }
    out
}

/// Replaces literal `meta` code points with [`ESCAPE`].
pub fn escape_meta(text: &str, meta: char) -> Cow<'_, str> {
    if text.contains(meta) {
        Cow::Owned(text.replace(meta, ESCAPE.encode_utf8(&mut [0; 4])))
    } else {
        Cow::Borrowed(text)
    }
}

/// Inverse of [`escape_meta`].
pub fn unescape_meta(text: &str, meta: char) -> Cow<'_, str> {
    if text.contains(ESCAPE) {
        Cow::Owned(text.replace(ESCAPE, meta.encode_utf8(&mut [0; 4])))
    } else {
        Cow::Borrowed(text)
    }
}

/// Escaped word in oriented form: the mark first, then the word's code
/// points, reversed for `Fin`.
pub fn orient_word(word: &str, scheme: MarkingScheme, meta: char) -> Vec<char> {
    let mut chars = Vec::with_capacity(word.len() + 1);
    chars.push(meta);
    let escaped = word.chars().map(|c| if c == meta { ESCAPE } else { c });
    if scheme.is_reversed() {
        let mut body: Vec<char> = escaped.collect();
        body.reverse();
        chars.extend(body);
    } else {
        chars.extend(escaped);
    }
    chars
}

/// Piece surface in oriented form (reversed for `Fin`).
pub fn orient_surface(surface: &str, scheme: MarkingScheme) -> Cow<'_, str> {
    if scheme.is_reversed() {
        Cow::Owned(surface.chars().rev().collect())
    } else {
        Cow::Borrowed(surface)
    }
}

fn piece_index(vocab: &Vocabulary) -> (PieceIndex, Vec<String>) {
    let scheme = vocab.scheme();
    let pieces: Vec<_> = vocab.non_reserved().collect();
    let oriented: Vec<Cow<'_, str>> = pieces
        .iter()
        .map(|p| orient_surface(&p.surface, scheme))
        .collect();
    let index = PieceIndex::new(
        oriented.iter().map(|s| s.as_ref()),
        pieces.iter().map(|p| p.score).collect(),
        vocab.unk_score(),
    );
    let surfaces = pieces.iter().map(|p| p.surface.clone()).collect();
    (index, surfaces)
}

/// Lattice of an already marked word (`▁cat` for `Init`, `cat▁` for `Fin`).
///
/// Positions are oriented: for `Fin` the lattice spans the reversed word, so
/// position 0 is the mark. Code points no piece covers get a single
/// `<unk>` edge (`piece == None`).
pub fn build_lattice(marked_word: &str, vocab: &Vocabulary) -> Lattice {
    let (index, _) = piece_index(vocab);
    let reversed = vocab.scheme().is_reversed();
    let chars: Vec<char> = if reversed {
        marked_word.chars().rev().collect()
    } else {
        marked_word.chars().collect()
    };
    index.lattice(chars, reversed)
}

/// Best segmentation of `lattice` as forward-oriented surfaces in forward
/// word order, with its total score.
pub fn viterbi(lattice: &Lattice) -> Option<(Vec<String>, f64)> {
    let path = lattice.viterbi()?;
    Some((path_surfaces(lattice, &path), path.score))
}

fn path_surfaces(lattice: &Lattice, path: &Path) -> Vec<String> {
    let mut out: Vec<String> = path
        .edges
        .iter()
        .map(|&i| lattice.surface(&lattice.edges()[i]))
        .collect();
    if lattice.is_reversed() {
        out.reverse();
    }
    out
}

/// Encoder bound to one vocabulary, with a per-word segmentation cache.
///
/// Safe to share across threads. The cache is cleared wholesale when it
/// reaches capacity.
pub struct Segmenter<'v> {
    vocab: &'v Vocabulary,
    index: PieceIndex,
    pretok: PretokMode,
    cache: RwLock<HashMap<String, Vec<String>>>,
    capacity: usize,
}

impl<'v> Segmenter<'v> {
    pub fn new(vocab: &'v Vocabulary, pretok: PretokMode) -> Self {
        Self::with_capacity(vocab, pretok, DEFAULT_CACHE_CAPACITY)
    }

    pub fn with_capacity(vocab: &'v Vocabulary, pretok: PretokMode, capacity: usize) -> Self {
        let (index, _) = piece_index(vocab);
        Segmenter {
            vocab,
            index,
            pretok,
            cache: RwLock::new(HashMap::new()),
            capacity,
        }
    }

    pub fn vocab(&self) -> &Vocabulary {
        self.vocab
    }

    pub fn pretok(&self) -> PretokMode {
        self.pretok
    }

    /// Lattice of an unmarked word, in oriented form.
    pub fn lattice(&self, word: &str) -> Lattice {
        let scheme = self.vocab.scheme();
        let chars = orient_word(word, scheme, self.vocab.meta());
        self.index.lattice(chars, scheme.is_reversed())
    }

    /// Pieces of one unmarked word, forward-oriented and in word order.
    pub fn segment_word(&self, word: &str) -> Vec<String> {
        if let Some(hit) = self.cache.read().expect("cache lock").get(word) {
            return hit.clone();
        }
        let lattice = self.lattice(word);
        let (pieces, _) = viterbi(&lattice).expect("unk edges make every lattice connected");
        if self.capacity > 0 {
            let mut cache = self.cache.write().expect("cache lock");
            if cache.len() >= self.capacity {
                cache.clear();
            }
            cache.insert(word.to_owned(), pieces.clone());
        }
        pieces
    }

    /// Pretokenizes `line` and segments every word.
    pub fn encode_line(&self, line: &str) -> Vec<String> {
        let mut out = Vec::new();
        for word in pretokenize(line, self.pretok) {
            out.extend(self.segment_word(word));
        }
        out
    }

    /// Number of pretokenized words in `line`.
    pub fn count_words(&self, line: &str) -> usize {
        pretokenize(line, self.pretok).len()
    }
}

/// One-shot encoding. Builds a fresh [`Segmenter`]; use one directly for
/// more than a handful of lines.
pub fn encode_line(line: &str, vocab: &Vocabulary, pretok: PretokMode) -> Vec<String> {
    Segmenter::with_capacity(vocab, pretok, 0).encode_line(line)
}

/// Rebuilds text from pieces: each mark becomes a word boundary, words are
/// joined by single spaces, and escaped meta-symbols are restored.
pub fn decode<S: AsRef<str>>(pieces: &[S], scheme: MarkingScheme, meta: char) -> String {
    let joined: String = pieces.iter().map(AsRef::as_ref).collect();
    let mut words: Vec<&str> = joined.split(meta).collect();
    match scheme {
        MarkingScheme::Init => {
            if words.first() == Some(&"") {
                words.remove(0);
            }
        }
        MarkingScheme::Fin => {
            if words.last() == Some(&"") {
                words.pop();
            }
        }
    }
    unescape_meta(&words.join(" "), meta).into_owned()
}
