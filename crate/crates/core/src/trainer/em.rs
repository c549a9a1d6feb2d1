use rayon::prelude::*;

use crate::error::{Error, Result};

use super::model::{Model, ModelPiece};
use super::WordCounts;

/// Expected-count floor for required pieces, so they keep a finite score
/// when their posterior mass underflows.
pub const REQUIRED_COUNT_FLOOR: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct EmOutcome {
    /// Re-estimated model. Non-required pieces with zero expected count are
    /// dropped.
    pub model: Model,
    /// Σ freq(w) · log Z(w) under the *input* model, in nats.
    pub loglik: f64,
    /// Expected counts indexed like the input model's pieces.
    pub expected: Vec<f64>,
}

/// Per-word expected counts and `freq · log Z`, computed in parallel and
/// merged serially in word order so the result does not depend on the
/// thread count.
pub fn expected_counts(words: &WordCounts, model: &Model) -> Result<(Vec<f64>, f64)> {
    let per_word: Vec<(Vec<(u32, f64)>, f64)> = words
        .words()
        .par_iter()
        .map(|word| {
            let lattice = model.lattice(word);
            let (log_z, posteriors) = lattice
                .forward_backward()
                .filter(|(z, _)| z.is_finite())
                .ok_or_else(|| Error::Unsegmentable(word.text.clone()))?;
            let freq = word.freq as f64;
            let contrib = lattice
                .edges()
                .iter()
                .zip(posteriors)
                .filter_map(|(e, p)| e.piece.map(|id| (id, freq * p)))
                .collect();
            Ok((contrib, freq * log_z))
        })
        .collect::<Result<_>>()?;
    let mut expected = vec![0.0; model.len()];
    let mut loglik = 0.0;
    for (contrib, ll) in per_word {
        for (id, c) in contrib {
            expected[id as usize] += c;
        }
        loglik += ll;
    }
    Ok((expected, loglik))
}

/// Σ freq(w) · log Z(w) under `model`.
pub fn corpus_loglik(words: &WordCounts, model: &Model) -> Result<f64> {
    let per_word: Vec<f64> = words
        .words()
        .par_iter()
        .map(|word| {
            let lattice = model.lattice(word);
            lattice
                .forward_backward()
                .map(|(z, _)| z)
                .filter(|z| z.is_finite())
                .map(|z| word.freq as f64 * z)
                .ok_or_else(|| Error::Unsegmentable(word.text.clone()))
        })
        .collect::<Result<_>>()?;
    Ok(per_word.into_iter().sum())
}

/// One EM iteration: forward–backward expected counts, then maximum
/// likelihood re-estimation.
pub fn em_step(words: &WordCounts, model: &Model) -> Result<EmOutcome> {
    let (expected, loglik) = expected_counts(words, model)?;
    let mut kept: Vec<(ModelPiece, f64)> = Vec::with_capacity(model.len());
    for (piece, &count) in model.pieces().iter().zip(&expected) {
        let count = if piece.required {
            count.max(REQUIRED_COUNT_FLOOR)
        } else {
            count
        };
        if count > 0.0 {
            kept.push((piece.clone(), count));
        }
    }
    let total: f64 = kept.iter().map(|(_, c)| c).sum();
    if total <= 0.0 {
        return Err(Error::Invariant("EM produced no probability mass".into()));
    }
    let log_total = total.ln();
    let pieces = kept
        .into_iter()
        .map(|(mut p, c)| {
            p.log_prob = c.ln() - log_total;
            p
        })
        .collect();
    Ok(EmOutcome {
        model: Model::new(pieces)?,
        loglik,
        expected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn single_path() {
        let model = Model::from_probs(&[("a", 0.5), ("b", 0.5)]).unwrap();
        let words = WordCounts::from_oriented([("ab", 1)]);
        let out = em_step(&words, &model).unwrap();
        assert_eq!(out.expected, [1.0, 1.0]);
        assert!(close(out.loglik, 0.25f64.ln(), 1e-12));
        assert!(close(out.model.log_prob("a").unwrap(), 0.5f64.ln(), 1e-12));
        assert!(close(out.model.log_prob("b").unwrap(), 0.5f64.ln(), 1e-12));
    }

    #[test]
    fn two_paths_match_enumeration() {
        let (pa, pab, pb) = (0.4 / 1.4, 0.6 / 1.4, 0.4 / 1.4);
        let model = Model::from_probs(&[("a", pa), ("ab", pab), ("b", pb)]).unwrap();
        let words = WordCounts::from_oriented([("ab", 1)]);
        let out = em_step(&words, &model).unwrap();
        let z = pab + pa * pb;
        let post_split = pa * pb / z;
        let post_whole = pab / z;
        assert!(close(out.loglik, z.ln(), 1e-12));
        // pieces are sorted by surface: a, ab, b
        assert!(close(out.expected[0], post_split, 1e-12));
        assert!(close(out.expected[1], post_whole, 1e-12));
        assert!(close(out.expected[2], post_split, 1e-12));
        let total = 2.0 * post_split + post_whole;
        assert!(close(out.model.log_prob("ab").unwrap(), (post_whole / total).ln(), 1e-12));
        assert!(close(out.model.probability_mass(), 1.0, 1e-12));
    }

    #[test]
    fn probability_one_path() {
        let model = Model::from_probs(&[("a", 1.0)]).unwrap();
        let words = WordCounts::from_oriented([("a", 3)]);
        let out = em_step(&words, &model).unwrap();
        assert_eq!(out.expected, [3.0]);
        assert_eq!(out.loglik, 0.0);
    }

    #[test]
    fn unsegmentable_word_is_named() {
        let model = Model::from_probs(&[("a", 1.0)]).unwrap();
        let words = WordCounts::from_oriented([("ab", 1)]);
        match em_step(&words, &model) {
            Err(Error::Unsegmentable(w)) => assert_eq!(w, "ab"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_count_pieces_dropped() {
        let model = Model::from_probs(&[("a", 0.5), ("z", 0.5)]).unwrap();
        let words = WordCounts::from_oriented([("a", 2)]);
        let out = em_step(&words, &model).unwrap();
        assert_eq!(out.model.len(), 1);
        assert_eq!(out.model.log_prob("a"), Some(0.0));
    }
}
