//! Unigram LM subword tokenization with a configurable word-boundary mark.
//!
//! A vocabulary marks either the word-initial piece ([`MarkingScheme::Init`],
//! `▁cat`) or the word-final piece ([`MarkingScheme::Fin`], `cat▁`). Word-final
//! marking is implemented by code-point reversal: training and decoding run on
//! reversed words with an initial mark, and the resulting pieces are reversed
//! back, so a `Fin` model is exactly the mirror image of an `Init` model
//! trained on reversed text.
//!
//! Besides the trainer and segmenter the crate carries the evaluation battery
//! used to compare the two schemes: corpus statistics ([`stats`]), an
//! add-ε bigram language model ([`bigram`]), morphological coverage and
//! agreement regression ([`morph`]), and an orchestrator that runs all four
//! conditions end to end ([`experiment`]).

pub mod bigram;
pub mod error;
pub mod experiment;
pub mod morph;
pub mod pretok;
pub mod segment;
pub mod stats;
pub mod trainer;
pub mod vocab;

pub use error::{Error, Result};
pub use pretok::{pretokenize, PretokMode};
pub use segment::{decode, encode_line, mark_word, Segmenter};
pub use trainer::{train, TrainerConfig};
pub use vocab::{strip_mark, MarkingScheme, Piece, PositionClass, Vocabulary};
