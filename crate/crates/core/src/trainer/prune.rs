use std::cmp::Ordering;

use rayon::prelude::*;

use crate::error::{Error, Result};

use super::model::{Model, ModelPiece};
use super::WordCounts;

#[derive(Clone, Debug)]
pub struct PruneOutcome {
    pub model: Model,
    /// Set when `min_size` was below the number of required pieces, so only
    /// the required set survives.
    pub clamped: bool,
    pub removed: usize,
}

/// Estimated log-likelihood loss of removing each piece, indexed like the
/// model's pieces.
///
/// For every word, the best path is decoded; for each distinct non-required
/// piece on it, the word is decoded again with that piece disabled, and the
/// piece is charged `freq × (best − alternative)`. Pieces on no best path
/// have loss 0. Required pieces are never charged.
pub fn piece_losses(words: &WordCounts, model: &Model) -> Result<Vec<f64>> {
    let pieces = model.pieces();
    let per_word: Vec<Vec<(u32, f64)>> = words
        .words()
        .par_iter()
        .map(|word| {
            let lattice = model.lattice(word);
            let best = lattice
                .viterbi()
                .filter(|p| p.score.is_finite())
                .ok_or_else(|| Error::Unsegmentable(word.text.clone()))?;
            let mut ids: Vec<u32> = best
                .edges
                .iter()
                .filter_map(|&e| lattice.edges()[e].piece)
                .filter(|&id| !pieces[id as usize].required)
                .collect();
            ids.sort_unstable();
            ids.dedup();
            let freq = word.freq as f64;
            ids.into_iter()
                .map(|id| {
                    let alt = lattice
                        .viterbi_excluding(Some(id))
                        .map_or(f64::NEG_INFINITY, |p| p.score);
                    Ok((id, freq * (best.score - alt)))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut loss = vec![0.0; model.len()];
    for contrib in per_word {
        for (id, l) in contrib {
            loss[id as usize] += l;
        }
    }
    Ok(loss)
}

/// Number of pieces a prune step keeps: all required pieces plus
/// `ceil(shrink × prunable)`, at least one prunable piece fewer than before,
/// but never fewer than `min_size` in total.
pub fn prune_target(required: usize, prunable: usize, shrink: f64, min_size: usize) -> usize {
    let keep = ((shrink * prunable as f64).ceil() as usize).min(prunable.saturating_sub(1));
    let keep = keep.max(min_size.saturating_sub(required)).min(prunable);
    required + keep
}

/// Drops the lowest-loss prunable pieces and renormalizes the survivors.
///
/// Ranking: loss descending, then score descending, then oriented surface.
pub fn prune(model: &Model, words: &WordCounts, shrink: f64, min_size: usize) -> Result<PruneOutcome> {
    if !(shrink > 0.0 && shrink < 1.0) {
        return Err(Error::Config(format!("shrink factor {shrink} outside (0, 1)")));
    }
    let pieces = model.pieces();
    let required = model.required_len();
    let prunable = pieces.len() - required;
    let clamped = min_size < required;
    let target = prune_target(required, prunable, shrink, min_size);
    if target >= pieces.len() {
        return Ok(PruneOutcome {
            model: model.clone(),
            clamped,
            removed: 0,
        });
    }
    let loss = piece_losses(words, model)?;
    let mut ranked: Vec<usize> = (0..pieces.len()).filter(|&i| !pieces[i].required).collect();
    ranked.sort_by(|&a, &b| {
        loss[b]
            .partial_cmp(&loss[a])
            .unwrap_or(Ordering::Equal)
            .then_with(|| pieces[b].log_prob.total_cmp(&pieces[a].log_prob))
            .then_with(|| pieces[a].surface.cmp(&pieces[b].surface))
    });
    let mut keep = vec![false; pieces.len()];
    for (i, p) in pieces.iter().enumerate() {
        keep[i] = p.required;
    }
    for &i in ranked.iter().take(target - required) {
        keep[i] = true;
    }
    let survivors: Vec<&ModelPiece> = pieces
        .iter()
        .zip(&keep)
        .filter_map(|(p, &k)| k.then_some(p))
        .collect();
    let log_mass = survivors
        .iter()
        .map(|p| p.log_prob.exp())
        .sum::<f64>()
        .ln();
    let renormalized = survivors
        .into_iter()
        .map(|p| ModelPiece {
            log_prob: p.log_prob - log_mass,
            ..p.clone()
        })
        .collect();
    Ok(PruneOutcome {
        model: Model::new(renormalized)?,
        clamped,
        removed: pieces.len() - target,
    })
}
