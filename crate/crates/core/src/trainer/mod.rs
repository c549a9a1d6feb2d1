//! Unigram LM vocabulary training: seeding, EM, and likelihood-loss pruning.
//!
//! Everything here runs on *oriented* words (see [`crate::segment`]): the
//! mark is always at the front and `Fin` words are reversed. Piece surfaces
//! are only turned back to forward orientation in [`Model::to_vocabulary`].
//! Training `Fin` on a corpus is therefore the same computation as training
//! `Init` on the code-point-reversed corpus.

mod em;
mod model;
mod prune;
mod seed;

use std::collections::BTreeMap;

use serde::Serialize;

pub use em::{corpus_loglik, em_step, expected_counts, EmOutcome, REQUIRED_COUNT_FLOOR};
pub use model::{Model, ModelPiece};
pub use prune::{piece_losses, prune, prune_target, PruneOutcome};
pub use seed::{seed_vocabulary, SeedCandidate};

use crate::error::{Error, Result};
use crate::pretok::{pretokenize, PretokMode};
use crate::segment::orient_word;
use crate::vocab::{MarkingScheme, Vocabulary, DEFAULT_META};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrainerConfig {
    /// Number of trained pieces, not counting the reserved `<unk>`.
    pub target_vocab_size: usize,
    /// Fraction of prunable pieces kept per round.
    pub shrink_factor: f64,
    /// Cap on non-required seed pieces; `None` means
    /// `min(100 × target_vocab_size, 1_000_000)`.
    pub seed_max_size: Option<usize>,
    /// Longest seed piece, in code points.
    pub seed_max_piece_len: usize,
    /// Minimum weighted frequency of a non-required seed piece.
    pub seed_min_count: u64,
    pub em_iters_per_round: usize,
    /// EM iterations after the last prune.
    pub final_em_iters: usize,
    pub scheme: MarkingScheme,
    pub pretok: PretokMode,
    pub meta: char,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig {
            target_vocab_size: 32_000,
            shrink_factor: 0.75,
            seed_max_size: None,
            seed_max_piece_len: 16,
            seed_min_count: 2,
            em_iters_per_round: 2,
            final_em_iters: 8,
            scheme: MarkingScheme::Init,
            pretok: PretokMode::Raw,
            meta: DEFAULT_META,
        }
    }
}

impl TrainerConfig {
    pub fn effective_seed_max_size(&self) -> usize {
        self.seed_max_size
            .unwrap_or_else(|| self.target_vocab_size.saturating_mul(100).min(1_000_000))
    }

    pub fn validate(&self) -> Result<()> {
        if self.target_vocab_size == 0 {
            return Err(Error::Config("target_vocab_size must be positive".into()));
        }
        if !(self.shrink_factor > 0.0 && self.shrink_factor < 1.0) {
            return Err(Error::Config(format!(
                "shrink_factor {} outside (0, 1)",
                self.shrink_factor
            )));
        }
        if self.seed_max_piece_len == 0 {
            return Err(Error::Config("seed_max_piece_len must be positive".into()));
        }
        if self.seed_max_size == Some(0) {
            return Err(Error::Config("seed_max_size must be positive".into()));
        }
        if self.em_iters_per_round == 0 {
            return Err(Error::Config("em_iters_per_round must be positive".into()));
        }
        if self.meta.is_whitespace() {
            return Err(Error::Config("meta-symbol must not be whitespace".into()));
        }
        Ok(())
    }
}

/// A distinct oriented word and its corpus frequency.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Word {
    pub text: String,
    pub chars: Vec<char>,
    pub freq: u64,
}

/// Word-frequency table, sorted by oriented text.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WordCounts {
    words: Vec<Word>,
}

impl WordCounts {
    /// Pretokenizes, escapes and orients every word of `lines`.
    pub fn from_lines<I, S>(lines: I, scheme: MarkingScheme, pretok: PretokMode, meta: char) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut table: BTreeMap<Vec<char>, u64> = BTreeMap::new();
        for line in lines {
            for word in pretokenize(line.as_ref(), pretok) {
                *table.entry(orient_word(word, scheme, meta)).or_insert(0) += 1;
            }
        }
        Self::from_table(table)
    }

    /// Builds a table from words that are already oriented and marked as
    /// desired. Repeated words are summed.
    pub fn from_oriented<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = (S, u64)>,
        S: AsRef<str>,
    {
        let mut table: BTreeMap<Vec<char>, u64> = BTreeMap::new();
        for (w, f) in words {
            *table.entry(w.as_ref().chars().collect()).or_insert(0) += f;
        }
        Self::from_table(table)
    }

    fn from_table(table: BTreeMap<Vec<char>, u64>) -> Self {
        // Vec<char> order is code-point order, which equals String order
        let words = table
            .into_iter()
            .filter(|(c, f)| !c.is_empty() && *f > 0)
            .map(|(chars, freq)| Word {
                text: chars.iter().collect(),
                chars,
                freq,
            })
            .collect();
        WordCounts { words }
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn iter(&self) -> impl Iterator<Item = &Word> {
        self.words.iter()
    }

    /// Number of distinct words.
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Number of running words.
    pub fn total(&self) -> u64 {
        self.words.iter().map(|w| w.freq).sum()
    }
}

/// One prune round: the EM iterations before it and the prune itself.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundTrace {
    pub round: usize,
    pub size_before: usize,
    /// Corpus log-likelihood (nats) before each EM iteration, followed by the
    /// value after the last one.
    pub em_logliks: Vec<f64>,
    pub mass_after_em: f64,
    pub size_after: usize,
    pub mass_after_prune: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrainTrace {
    pub distinct_words: usize,
    pub running_words: u64,
    pub seed_size: usize,
    pub required_pieces: usize,
    /// Size actually trained to; raised to the required-piece count when the
    /// configured target was smaller.
    pub effective_target: usize,
    pub clamped: bool,
    pub rounds: Vec<RoundTrace>,
    /// Log-likelihoods of the final refinement, same layout as
    /// [`RoundTrace::em_logliks`].
    pub final_em_logliks: Vec<f64>,
    pub final_mass: f64,
}

#[derive(Clone, Debug)]
pub struct Trained {
    pub vocab: Vocabulary,
    pub trace: TrainTrace,
}

/// Trains a vocabulary on `lines`.
pub fn train<I, S>(lines: I, config: &TrainerConfig) -> Result<Trained>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    config.validate()?;
    let words = WordCounts::from_lines(lines, config.scheme, config.pretok, config.meta);
    train_words(&words, config)
}

/// Trains on an existing oriented word table.
pub fn train_words(words: &WordCounts, config: &TrainerConfig) -> Result<Trained> {
    config.validate()?;
    if words.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let seeds = seed_vocabulary(words, config)?;
    let mut model = Model::from_seeds(&seeds)?;
    let required = model.required_len();
    let clamped = config.target_vocab_size < required;
    if clamped {
        log::warn!(
            "target vocabulary size {} is below the {} required pieces; training to {}",
            config.target_vocab_size,
            required,
            required
        );
    }
    let target = config.target_vocab_size.max(required);
    log::info!(
        "{} distinct words, {} seed pieces ({} required), target {}",
        words.len(),
        seeds.len(),
        required,
        target
    );

    let mut rounds = Vec::new();
    while model.len() > target {
        let size_before = model.len();
        let (next, em_logliks) = run_em(words, model, config.em_iters_per_round)?;
        model = next;
        let mass_after_em = model.probability_mass();
        if model.len() <= target {
            rounds.push(RoundTrace {
                round: rounds.len(),
                size_before,
                em_logliks,
                mass_after_em,
                size_after: model.len(),
                mass_after_prune: mass_after_em,
            });
            break;
        }
        let pruned = prune(&model, words, config.shrink_factor, target)?;
        model = pruned.model;
        let mass_after_prune = model.probability_mass();
        log::debug!(
            "round {}: {} -> {} pieces, loglik {:?}",
            rounds.len(),
            size_before,
            model.len(),
            em_logliks.last()
        );
        rounds.push(RoundTrace {
            round: rounds.len(),
            size_before,
            em_logliks,
            mass_after_em,
            size_after: model.len(),
            mass_after_prune,
        });
    }
    let (model, final_em_logliks) = run_em(words, model, config.final_em_iters)?;
    let final_mass = model.probability_mass();
    let vocab = model.to_vocabulary(config.scheme, config.meta)?;
    Ok(Trained {
        vocab,
        trace: TrainTrace {
            distinct_words: words.len(),
            running_words: words.total(),
            seed_size: seeds.len(),
            required_pieces: required,
            effective_target: target,
            clamped,
            rounds,
            final_em_logliks,
            final_mass,
        },
    })
}

fn run_em(words: &WordCounts, mut model: Model, iters: usize) -> Result<(Model, Vec<f64>)> {
    let mut logliks = Vec::with_capacity(iters + 1);
    for _ in 0..iters {
        let out = em_step(words, &model)?;
        logliks.push(out.loglik);
        model = out.model;
    }
    logliks.push(corpus_loglik(words, &model)?);
    Ok((model, logliks))
}
