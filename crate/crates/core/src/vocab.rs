//! The vocabulary artifact and its on-disk format.
//!
//! A vocab file is UTF-8 TSV with LF line endings:
//!
//! ```text
//! #scheme: init
//! #meta: 2581
//! ▁the	-3.1415926535897931e0
//! ...
//! ```
//!
//! Pieces are ordered by descending score, ties broken by surface. `Fin`
//! vocabularies keep their pieces forward-oriented (`cat▁`); any reversal is
//! internal to the segmenter and trainer.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default boundary mark, U+2581 LOWER ONE EIGHTH BLOCK.
pub const DEFAULT_META: char = '\u{2581}';

/// Surface of the reserved unknown piece.
pub const UNK_SURFACE: &str = "<unk>";

/// Distance in nats between the lowest trained score and the unknown piece.
pub const UNK_PENALTY: f64 = 10.0;

/// Which edge of a word carries the boundary mark.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarkingScheme {
    /// The word-initial piece is marked: `▁cat`.
    Init,
    /// The word-final piece is marked: `cat▁`.
    Fin,
}

impl MarkingScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            MarkingScheme::Init => "init",
            MarkingScheme::Fin => "fin",
        }
    }

    /// Whether the segmenter works on code-point-reversed text.
    pub fn is_reversed(self) -> bool {
        self == MarkingScheme::Fin
    }
}

impl fmt::Display for MarkingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MarkingScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "init" => Ok(MarkingScheme::Init),
            "fin" => Ok(MarkingScheme::Fin),
            other => Err(Error::Config(format!(
                "unknown marking scheme {other:?} (expected init or fin)"
            ))),
        }
    }
}

/// A vocabulary entry: a surface string and its natural-log probability.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub surface: String,
    pub score: f64,
}

impl Piece {
    pub fn new(surface: impl Into<String>, score: f64) -> Self {
        Piece {
            surface: surface.into(),
            score,
        }
    }

    pub fn is_reserved(&self) -> bool {
        self.surface == UNK_SURFACE
    }
}

/// Where a piece sits inside a word, judged by its boundary mark.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PositionClass {
    WordInitial,
    WordFinal,
    Internal,
}

/// Removes the boundary mark from the scheme-appropriate edge of `surface`.
///
/// Marks on the other edge are left alone, so `strip_mark("cat▁", Init, ▁)`
/// is `("cat▁", Internal)`.
pub fn strip_mark(surface: &str, scheme: MarkingScheme, meta: char) -> (String, PositionClass) {
    match scheme {
        MarkingScheme::Init => match surface.strip_prefix(meta) {
            Some(bare) => (bare.to_string(), PositionClass::WordInitial),
            None => (surface.to_string(), PositionClass::Internal),
        },
        MarkingScheme::Fin => match surface.strip_suffix(meta) {
            Some(bare) => (bare.to_string(), PositionClass::WordFinal),
            None => (surface.to_string(), PositionClass::Internal),
        },
    }
}

/// An immutable, validated piece inventory.
///
/// Construction enforces: at least one piece, unique non-empty surfaces free
/// of whitespace, finite scores, and `score <= 0` for every piece except the
/// reserved `<unk>`. Pieces are kept in file order (descending score, then
/// surface).
#[derive(Clone, Debug)]
pub struct Vocabulary {
    pieces: Vec<Piece>,
    scheme: MarkingScheme,
    meta: char,
    index: HashMap<String, usize>,
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.scheme == other.scheme && self.meta == other.meta && self.pieces == other.pieces
    }
}

impl Vocabulary {
    pub fn new(mut pieces: Vec<Piece>, scheme: MarkingScheme, meta: char) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidVocab("empty vocabulary".into()));
        }
        if meta.is_whitespace() {
            return Err(Error::InvalidVocab(format!(
                "meta-symbol U+{:04X} is whitespace",
                meta as u32
            )));
        }
        for piece in &pieces {
            validate_piece(piece)?;
        }
        sort_pieces(&mut pieces);
        let mut index = HashMap::with_capacity(pieces.len());
        for (i, piece) in pieces.iter().enumerate() {
            if index.insert(piece.surface.clone(), i).is_some() {
                return Err(Error::InvalidVocab(format!(
                    "duplicate piece {:?}",
                    piece.surface
                )));
            }
        }
        Ok(Vocabulary {
            pieces,
            scheme,
            meta,
            index,
        })
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn scheme(&self) -> MarkingScheme {
        self.scheme
    }

    pub fn meta(&self) -> char {
        self.meta
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn score(&self, surface: &str) -> Option<f64> {
        self.index.get(surface).map(|&i| self.pieces[i].score)
    }

    pub fn contains(&self, surface: &str) -> bool {
        self.index.contains_key(surface)
    }

    /// Every piece except the reserved unknown piece.
    pub fn non_reserved(&self) -> impl Iterator<Item = &Piece> {
        self.pieces.iter().filter(|p| !p.is_reserved())
    }

    pub fn non_reserved_len(&self) -> usize {
        self.non_reserved().count()
    }

    /// Score used for code points no piece covers: the stored `<unk>` score
    /// if present, otherwise the lowest score minus [`UNK_PENALTY`].
    pub fn unk_score(&self) -> f64 {
        if let Some(s) = self.score(UNK_SURFACE) {
            return s;
        }
        let min = self
            .non_reserved()
            .map(|p| p.score)
            .fold(f64::INFINITY, f64::min);
        if min.is_finite() {
            min - UNK_PENALTY
        } else {
            -UNK_PENALTY
        }
    }

    /// Σ exp(score) over non-reserved pieces; 1 for a freshly trained model.
    pub fn probability_mass(&self) -> f64 {
        self.non_reserved().map(|p| p.score.exp()).sum()
    }

    pub fn write_to<W: Write>(&self, mut sink: W) -> Result<()> {
        writeln!(sink, "#scheme: {}", self.scheme)?;
        writeln!(sink, "#meta: {:04X}", self.meta as u32)?;
        for piece in &self.pieces {
            writeln!(sink, "{}\t{}", piece.surface, format_score(piece.score))?;
        }
        sink.flush()?;
        Ok(())
    }

    pub fn read_from<R: BufRead>(source: R) -> Result<Self> {
        let mut scheme = None;
        let mut meta = None;
        let mut pieces = Vec::new();
        let mut seen: HashMap<String, usize> = HashMap::new();
        for (i, line) in source.lines().enumerate() {
            let lineno = i + 1;
            let line = line?;
            if pieces.is_empty() && !line.contains('\t') && line.starts_with('#') {
                let (key, value) = line[1..]
                    .split_once(':')
                    .ok_or_else(|| Error::parse(lineno, format!("malformed header {line:?}")))?;
                let value = value.trim();
                match key.trim() {
                    "scheme" => scheme = Some(value.parse::<MarkingScheme>().map_err(|e| {
                        Error::parse(lineno, e.to_string())
                    })?),
                    "meta" => {
                        let cp = u32::from_str_radix(value, 16)
                            .ok()
                            .and_then(char::from_u32)
                            .ok_or_else(|| {
                                Error::parse(lineno, format!("bad meta code point {value:?}"))
                            })?;
                        meta = Some(cp);
                    }
                    // unknown headers are tolerated for forward compatibility
                    _ => {}
                }
                continue;
            }
            let (surface, score) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(lineno, format!("expected surface<TAB>score, got {line:?}")))?;
            if scheme.is_none() || meta.is_none() {
                return Err(Error::parse(
                    lineno,
                    "missing #scheme or #meta header before the first piece",
                ));
            }
            let score: f64 = score
                .parse()
                .map_err(|_| Error::parse(lineno, format!("bad score {score:?}")))?;
            let piece = Piece::new(surface, score);
            validate_piece(&piece).map_err(|e| Error::parse(lineno, e.to_string()))?;
            if let Some(prev) = seen.insert(piece.surface.clone(), lineno) {
                return Err(Error::parse(
                    lineno,
                    format!("duplicate piece {surface:?} (first seen on line {prev})"),
                ));
            }
            pieces.push(piece);
        }
        let (Some(scheme), Some(meta)) = (scheme, meta) else {
            return Err(Error::parse(1, "missing #scheme or #meta header"));
        };
        if pieces.is_empty() {
            return Err(Error::parse(1, "empty vocabulary"));
        }
        Vocabulary::new(pieces, scheme, meta)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = File::create(path)?;
        self.write_to(BufWriter::new(file))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file = File::open(path)?;
        Vocabulary::read_from(BufReader::new(file))
    }
}

/// Writes `vocab` in the TSV vocab format.
pub fn save_vocab<W: Write>(vocab: &Vocabulary, sink: W) -> Result<()> {
    vocab.write_to(sink)
}

/// Parses the TSV vocab format.
pub fn load_vocab<R: BufRead>(source: R) -> Result<Vocabulary> {
    Vocabulary::read_from(source)
}

/// 17 significant digits, enough to reproduce any f64 exactly.
fn format_score(score: f64) -> String {
    format!("{score:.16e}")
}

fn validate_piece(piece: &Piece) -> Result<()> {
    if piece.surface.is_empty() {
        return Err(Error::InvalidVocab("empty piece surface".into()));
    }
    if piece.surface.chars().any(char::is_whitespace) {
        return Err(Error::InvalidVocab(format!(
            "piece {:?} contains whitespace",
            piece.surface
        )));
    }
    if !piece.score.is_finite() {
        return Err(Error::InvalidVocab(format!(
            "piece {:?} has non-finite score",
            piece.surface
        )));
    }
    if piece.score > 0.0 && !piece.is_reserved() {
        return Err(Error::InvalidVocab(format!(
            "piece {:?} has positive log-probability {}",
            piece.surface, piece.score
        )));
    }
    Ok(())
}

pub(crate) fn sort_pieces(pieces: &mut [Piece]) {
    pieces.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.surface.cmp(&b.surface))
    });
}
