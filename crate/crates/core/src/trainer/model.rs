use crate::error::{Error, Result};
use crate::segment::{Lattice, PieceIndex};
use crate::vocab::{MarkingScheme, Piece, Vocabulary, UNK_PENALTY, UNK_SURFACE};

use super::seed::SeedCandidate;
use super::Word;

/// A piece during training. Surfaces are oriented (reversed for `Fin`).
#[derive(Clone, Debug, PartialEq)]
pub struct ModelPiece {
    pub surface: String,
    pub log_prob: f64,
    /// Required pieces (single code points and marked first characters) are
    /// never pruned.
    pub required: bool,
}

/// The in-training piece inventory, kept sorted by oriented surface so piece
/// ids are canonical.
#[derive(Clone, Debug)]
pub struct Model {
    pieces: Vec<ModelPiece>,
    index: PieceIndex,
}

impl Model {
    pub fn new(mut pieces: Vec<ModelPiece>) -> Result<Self> {
        pieces.sort_by(|a, b| a.surface.cmp(&b.surface));
        if let Some(w) = pieces.windows(2).find(|w| w[0].surface == w[1].surface) {
            return Err(Error::InvalidInput(format!(
                "duplicate piece {:?}",
                w[0].surface
            )));
        }
        if let Some(p) = pieces.iter().find(|p| p.surface.is_empty()) {
            return Err(Error::InvalidInput(format!("empty piece {p:?}")));
        }
        // training lattices have no unknown fallback
        let index = PieceIndex::new(
            pieces.iter().map(|p| p.surface.as_str()),
            pieces.iter().map(|p| p.log_prob).collect(),
            f64::NEG_INFINITY,
        );
        Ok(Model { pieces, index })
    }

    /// Non-required pieces from `(surface, probability)` pairs; a test and
    /// scripting convenience.
    pub fn from_probs(probs: &[(&str, f64)]) -> Result<Self> {
        Model::new(
            probs
                .iter()
                .map(|&(s, p)| ModelPiece {
                    surface: s.to_string(),
                    log_prob: p.ln(),
                    required: false,
                })
                .collect(),
        )
    }

    /// Initial model: seed counts normalized over their total.
    pub fn from_seeds(seeds: &[SeedCandidate]) -> Result<Self> {
        let total: f64 = seeds.iter().map(|s| s.count as f64).sum();
        Model::new(
            seeds
                .iter()
                .map(|s| ModelPiece {
                    surface: s.surface.clone(),
                    log_prob: (s.count as f64 / total).ln(),
                    required: s.required,
                })
                .collect(),
        )
    }

    pub fn pieces(&self) -> &[ModelPiece] {
        &self.pieces
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn required_len(&self) -> usize {
        self.pieces.iter().filter(|p| p.required).count()
    }

    pub fn probability_mass(&self) -> f64 {
        self.pieces.iter().map(|p| p.log_prob.exp()).sum()
    }

    pub fn log_prob(&self, surface: &str) -> Option<f64> {
        self.pieces
            .binary_search_by(|p| p.surface.as_str().cmp(surface))
            .ok()
            .map(|i| self.pieces[i].log_prob)
    }

    pub(crate) fn lattice(&self, word: &Word) -> Lattice {
        self.index.lattice(word.chars.clone(), false)
    }

    /// Converts to a vocabulary, un-reversing surfaces for `Fin` and adding
    /// the reserved `<unk>` piece.
    pub fn to_vocabulary(&self, scheme: MarkingScheme, meta: char) -> Result<Vocabulary> {
        let mut pieces: Vec<Piece> = self
            .pieces
            .iter()
            .map(|p| {
                let surface = if scheme.is_reversed() {
                    p.surface.chars().rev().collect()
                } else {
                    p.surface.clone()
                };
                Piece::new(surface, p.log_prob)
            })
            .collect();
        let min = self
            .pieces
            .iter()
            .map(|p| p.log_prob)
            .fold(f64::INFINITY, f64::min);
        if min.is_finite() && !self.pieces.iter().any(|p| p.surface == UNK_SURFACE) {
            pieces.push(Piece::new(UNK_SURFACE, min - UNK_PENALTY));
        }
        Vocabulary::new(pieces, scheme, meta)
    }
}
