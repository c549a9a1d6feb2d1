//! Tokens-per-word, corpus entropy, model type entropy and piece-length
//! histograms. Entropies are in bits.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::segment::Segmenter;
use crate::vocab::{strip_mark, Vocabulary};

/// Piece-type frequencies of an encoded corpus.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenCounts {
    counts: BTreeMap<String, u64>,
    total: u64,
}

impl TokenCounts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, piece: &str, n: u64) {
        if n == 0 {
            return;
        }
        *self.counts.entry(piece.to_owned()).or_insert(0) += n;
        self.total += n;
    }

    pub fn extend<S: AsRef<str>>(&mut self, pieces: impl IntoIterator<Item = S>) {
        for p in pieces {
            self.add(p.as_ref(), 1);
        }
    }

    pub fn merge(&mut self, other: &TokenCounts) {
        for (piece, &n) in &other.counts {
            self.add(piece, n);
        }
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of distinct piece types observed.
    pub fn distinct(&self) -> usize {
        self.counts.len()
    }
}

impl<S: AsRef<str>> FromIterator<(S, u64)> for TokenCounts {
    fn from_iter<I: IntoIterator<Item = (S, u64)>>(iter: I) -> Self {
        let mut tc = TokenCounts::new();
        for (s, n) in iter {
            tc.add(s.as_ref(), n);
        }
        tc
    }
}

/// Pieces per word.
pub fn token_ratio(piece_count: u64, word_count: u64) -> Result<f64> {
    if word_count == 0 {
        return Err(Error::InvalidInput("token ratio needs at least one word".into()));
    }
    Ok(piece_count as f64 / word_count as f64)
}

/// Shannon entropy of the piece distribution, in bits.
pub fn corpus_entropy(counts: &TokenCounts) -> Result<f64> {
    if counts.total == 0 {
        return Err(Error::InvalidInput("entropy of an empty count table".into()));
    }
    let total = counts.total as f64;
    let h: f64 = counts
        .counts
        .values()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum();
    Ok(h.max(0.0))
}

/// Entropy in bits of the vocabulary's unigram distribution, over
/// non-reserved pieces.
pub fn type_entropy(vocab: &Vocabulary) -> f64 {
    let h: f64 = vocab
        .non_reserved()
        .map(|p| -p.score.exp() * p.score / std::f64::consts::LN_2)
        .sum();
    h.max(0.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthHistogram {
    /// Code-point length without the mark → number of pieces.
    pub counts: BTreeMap<usize, usize>,
    /// `None` when the vocabulary has no non-reserved pieces.
    pub mean: Option<f64>,
}

impl LengthHistogram {
    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }
}

/// Piece lengths after [`strip_mark`], over non-reserved pieces.
pub fn length_histogram(vocab: &Vocabulary) -> LengthHistogram {
    let mut counts = BTreeMap::new();
    for p in vocab.non_reserved() {
        let (bare, _) = strip_mark(&p.surface, vocab.scheme(), vocab.meta());
        *counts.entry(bare.chars().count()).or_insert(0) += 1;
    }
    let n: usize = counts.values().sum();
    let mean = (n > 0).then(|| {
        let sum: usize = counts.iter().map(|(len, c)| len * c).sum();
        sum as f64 / n as f64
    });
    LengthHistogram { counts, mean }
}

/// An encoded corpus: piece sequences per line plus the word count the
/// tokens-per-word ratio divides by (pretokenized words).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EncodedCorpus {
    pub lines: Vec<Vec<String>>,
    pub words: u64,
}

impl EncodedCorpus {
    pub fn tokens(&self) -> u64 {
        self.lines.iter().map(|l| l.len() as u64).sum()
    }

    pub fn counts(&self) -> TokenCounts {
        let mut tc = TokenCounts::new();
        for line in &self.lines {
            tc.extend(line);
        }
        tc
    }
}

/// Encodes `lines` in parallel, preserving line order.
pub fn encode_corpus<S: AsRef<str> + Sync>(segmenter: &Segmenter<'_>, lines: &[S]) -> EncodedCorpus {
    let encoded: Vec<(Vec<String>, u64)> = lines
        .par_iter()
        .map(|l| {
            let l = l.as_ref();
            (segmenter.encode_line(l), segmenter.count_words(l) as u64)
        })
        .collect();
    let words = encoded.iter().map(|(_, w)| w).sum();
    EncodedCorpus {
        lines: encoded.into_iter().map(|(l, _)| l).collect(),
        words,
    }
}

/// One (model, corpus) cell of the corpus-level table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub model_id: String,
    pub corpus_id: String,
    pub words: u64,
    pub tokens: u64,
    pub tokens_per_word: f64,
    pub corpus_entropy_bits: f64,
    pub type_entropy_bits: f64,
    pub distinct_pieces: usize,
    /// Base-2 per-token bigram perplexity, when computed.
    pub perplexity: Option<f64>,
}

impl StatsReport {
    pub fn new(
        model_id: &str,
        corpus_id: &str,
        vocab: &Vocabulary,
        corpus: &EncodedCorpus,
    ) -> Result<Self> {
        let counts = corpus.counts();
        let tokens = counts.total();
        Ok(StatsReport {
            model_id: model_id.to_owned(),
            corpus_id: corpus_id.to_owned(),
            words: corpus.words,
            tokens,
            tokens_per_word: token_ratio(tokens, corpus.words)?,
            corpus_entropy_bits: corpus_entropy(&counts)?,
            type_entropy_bits: type_entropy(vocab),
            distinct_pieces: counts.distinct(),
            perplexity: None,
        })
    }
}
