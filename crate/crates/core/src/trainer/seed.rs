use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::vocab::UNK_SURFACE;

use super::{TrainerConfig, WordCounts};

/// A seed piece with its weighted corpus frequency. Surfaces are oriented.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SeedCandidate {
    pub surface: String,
    pub count: u64,
    pub required: bool,
}

/// Enumerates substrings of every word (weighted by word frequency) and keeps
/// those with `count >= seed_min_count` and length `<= seed_max_piece_len`,
/// truncated to the `seed_max_size` most frequent. Required pieces are always
/// included whatever their count: every code point, and the mark plus first
/// code point of every word.
///
/// Output order: count descending, then surface.
pub fn seed_vocabulary(words: &WordCounts, config: &TrainerConfig) -> Result<Vec<SeedCandidate>> {
    if words.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let max_len = config.seed_max_piece_len.max(1);
    let meta = config.meta;
    let mut counts: HashMap<&[char], u64> = HashMap::new();
    let mut required: HashMap<&[char], ()> = HashMap::new();
    for word in words.iter() {
        let chars = &word.chars[..];
        for start in 0..chars.len() {
            let end_max = (start + max_len).min(chars.len());
            for end in start + 1..=end_max {
                *counts.entry(&chars[start..end]).or_insert(0) += word.freq;
            }
            required.insert(&chars[start..start + 1], ());
        }
        if chars.len() >= 2 && chars[0] == meta {
            required.insert(&chars[..2], ());
            if max_len < 2 {
                *counts.entry(&chars[..2]).or_insert(0) += word.freq;
            }
        }
    }

    let unk_oriented: String = if config.scheme.is_reversed() {
        UNK_SURFACE.chars().rev().collect()
    } else {
        UNK_SURFACE.to_string()
    };
    let mut out: Vec<SeedCandidate> = Vec::with_capacity(required.len());
    let mut optional: Vec<SeedCandidate> = Vec::new();
    for (chars, count) in counts {
        let is_required = required.contains_key(chars);
        if !is_required && count < config.seed_min_count {
            continue;
        }
        let surface: String = chars.iter().collect();
        if !is_required && surface == unk_oriented {
            continue;
        }
        let cand = SeedCandidate {
            surface,
            count,
            required: is_required,
        };
        if is_required {
            out.push(cand);
        } else {
            optional.push(cand);
        }
    }
    let by_rank = |a: &SeedCandidate, b: &SeedCandidate| {
        b.count.cmp(&a.count).then_with(|| a.surface.cmp(&b.surface))
    };
    optional.sort_by(by_rank);
    optional.truncate(config.effective_seed_max_size());
    out.extend(optional);
    out.sort_by(by_rank);
    Ok(out)
}
