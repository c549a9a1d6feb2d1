//! Segmentation lattices over code-point positions.
//!
//! Lattices are always built in *oriented* form: for word-final marking the
//! word and every piece are code-point reversed, so the mark sits at
//! position 0 in both schemes. Decoding, tie-breaking and forward–backward
//! sums all run in that orientation, which is what makes a `Fin` model the
//! exact mirror of an `Init` model trained on reversed text.

use std::cmp::Ordering;

use super::trie::PrefixTrie;

/// Piece lookup used to populate lattices: oriented surfaces, their scores,
/// and the score assigned to uncovered code points.
#[derive(Clone, Debug)]
pub struct PieceIndex {
    trie: PrefixTrie,
    scores: Vec<f64>,
    unk_score: f64,
}

impl PieceIndex {
    /// `surfaces` must already be oriented and unique; ids are positions in
    /// the iterator.
    pub fn new<'a, I>(surfaces: I, scores: Vec<f64>, unk_score: f64) -> Self
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut trie = PrefixTrie::new();
        let mut n = 0;
        for (id, s) in surfaces.into_iter().enumerate() {
            let prev = trie.insert(s.chars(), id as u32);
            debug_assert!(prev.is_none(), "duplicate surface {s:?}");
            n += 1;
        }
        assert_eq!(n, scores.len(), "one score per surface");
        PieceIndex {
            trie,
            scores,
            unk_score,
        }
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn unk_score(&self) -> f64 {
        self.unk_score
    }

    pub fn lookup(&self, oriented: &str) -> Option<u32> {
        self.trie.get(oriented.chars())
    }

    /// Builds the lattice of an oriented, marked word.
    pub fn lattice(&self, chars: Vec<char>, reversed: bool) -> Lattice {
        let mut edges = Vec::new();
        for start in 0..chars.len() {
            let mut has_single = false;
            for (len, id) in self.trie.common_prefixes(&chars[start..]) {
                has_single |= len == 1;
                edges.push(Edge {
                    start,
                    end: start + len,
                    piece: Some(id),
                    score: self.scores[id as usize],
                });
            }
            if !has_single {
                // keep single-char edges ahead of longer ones from `start`
                let at = edges
                    .iter()
                    .rposition(|e| e.start < start)
                    .map_or(0, |i| i + 1);
                edges.insert(
                    at,
                    Edge {
                        start,
                        end: start + 1,
                        piece: None,
                        score: self.unk_score,
                    },
                );
            }
        }
        Lattice {
            chars,
            edges,
            reversed,
        }
    }
}

/// One vocabulary match `chars[start..end]`; `piece` is `None` for the
/// unknown-character fallback.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub start: usize,
    pub end: usize,
    pub piece: Option<u32>,
    pub score: f64,
}

/// A best path: edge indices in oriented order and the left-to-right sum of
/// their scores.
#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    pub edges: Vec<usize>,
    pub score: f64,
}

#[derive(Clone, Debug)]
pub struct Lattice {
    chars: Vec<char>,
    /// Sorted by `(start, end)`.
    edges: Vec<Edge>,
    reversed: bool,
}

#[derive(Clone, Copy)]
struct Best {
    score: f64,
    count: usize,
    edge: usize,
}

impl Lattice {
    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Whether positions and surfaces are in reversed (word-final) orientation.
    pub fn is_reversed(&self) -> bool {
        self.reversed
    }

    /// Oriented surface spanned by an edge.
    pub fn oriented_surface(&self, edge: &Edge) -> String {
        self.chars[edge.start..edge.end].iter().collect()
    }

    /// Forward-oriented surface spanned by an edge.
    pub fn surface(&self, edge: &Edge) -> String {
        if self.reversed {
            self.chars[edge.start..edge.end].iter().rev().collect()
        } else {
            self.oriented_surface(edge)
        }
    }

    pub fn has_full_path(&self) -> bool {
        let n = self.chars.len();
        let mut reach = vec![false; n + 1];
        reach[0] = true;
        for e in &self.edges {
            if reach[e.start] {
                reach[e.end] = true;
            }
        }
        reach[n]
    }

    /// Highest-scoring segmentation. Exact score ties go to the path with
    /// fewer pieces, then to the lexicographically smaller sequence of
    /// oriented surfaces.
    pub fn viterbi(&self) -> Option<Path> {
        self.viterbi_excluding(None)
    }

    /// Viterbi with every edge of piece `excluded` removed.
    pub fn viterbi_excluding(&self, excluded: Option<u32>) -> Option<Path> {
        let n = self.chars.len();
        if n == 0 {
            return Some(Path {
                edges: Vec::new(),
                score: 0.0,
            });
        }
        let mut best: Vec<Option<Best>> = vec![None; n + 1];
        let mut start_score = vec![f64::NEG_INFINITY; n + 1];
        start_score[0] = 0.0;
        for (ei, e) in self.edges.iter().enumerate() {
            if excluded.is_some() && e.piece == excluded {
                continue;
            }
            let (base, count) = if e.start == 0 {
                (0.0, 0)
            } else {
                match best[e.start] {
                    Some(b) => (b.score, b.count),
                    None => continue,
                }
            };
            let cand = Best {
                score: base + e.score,
                count: count + 1,
                edge: ei,
            };
            let replace = match best[e.end] {
                None => true,
                Some(cur) => self.compare(&best, cand, cur) == Ordering::Greater,
            };
            if replace {
                best[e.end] = Some(cand);
            }
        }
        let last = best[n]?;
        let mut edges = Vec::with_capacity(last.count);
        let mut pos = n;
        while pos > 0 {
            let b = best[pos].expect("back-pointer chain is complete");
            edges.push(b.edge);
            pos = self.edges[b.edge].start;
        }
        edges.reverse();
        Some(Path {
            edges,
            score: last.score,
        })
    }

    /// `Greater` means `a` is the better candidate for the same end node.
    fn compare(&self, best: &[Option<Best>], a: Best, b: Best) -> Ordering {
        match a.score.partial_cmp(&b.score) {
            Some(Ordering::Equal) | None => {}
            Some(o) => return o,
        }
        match b.count.cmp(&a.count) {
            Ordering::Equal => {}
            o => return o,
        }
        let sa = self.surfaces_to(best, a);
        let sb = self.surfaces_to(best, b);
        sb.cmp(&sa)
    }

    fn surfaces_to(&self, best: &[Option<Best>], tip: Best) -> Vec<String> {
        let mut out = Vec::with_capacity(tip.count);
        let mut edge = tip.edge;
        loop {
            let e = &self.edges[edge];
            out.push(self.oriented_surface(e));
            if e.start == 0 {
                break;
            }
            edge = best[e.start].expect("reachable start").edge;
        }
        out.reverse();
        out
    }

    /// Forward–backward in log space. Returns `log Z` (the log of the total
    /// probability of all segmentations) and the posterior of every edge, or
    /// `None` when no full path exists.
    pub fn forward_backward(&self) -> Option<(f64, Vec<f64>)> {
        let n = self.chars.len();
        if n == 0 {
            return Some((0.0, Vec::new()));
        }
        let mut alpha = vec![f64::NEG_INFINITY; n + 1];
        alpha[0] = 0.0;
        for e in &self.edges {
            alpha[e.end] = log_add(alpha[e.end], alpha[e.start] + e.score);
        }
        let log_z = alpha[n];
        if log_z == f64::NEG_INFINITY {
            return None;
        }
        let mut beta = vec![f64::NEG_INFINITY; n + 1];
        beta[n] = 0.0;
        for e in self.edges.iter().rev() {
            beta[e.start] = log_add(beta[e.start], e.score + beta[e.end]);
        }
        let posteriors = self
            .edges
            .iter()
            .map(|e| (alpha[e.start] + e.score + beta[e.end] - log_z).exp())
            .collect();
        Some((log_z, posteriors))
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}
