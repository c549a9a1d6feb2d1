//! Add-ε smoothed bigram language model over piece sequences.
//!
//! Every sentence is framed as `<s> t1 … tn </s>`. Types unseen at fit time
//! map to one unknown type, so `V = distinct training types + 3`. The
//! smoothed conditional is
//!
//! ```text
//! p(t | u) = (c(u, t) + ε) / (c(u) + ε·V)
//! ```
//!
//! where `c(u)` counts occurrences of `u` as a context. Perplexity is base 2
//! and per predicted token, `</s>` included.

use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BOS: u32 = 0;
pub const EOS: u32 = 1;
pub const UNK: u32 = 2;
const RESERVED: u32 = 3;

/// Default smoothing constant.
pub const DEFAULT_EPSILON: f64 = 0.005;

#[derive(Clone, Debug)]
pub struct BigramModel {
    types: HashMap<String, u32>,
    /// Context counts by type id.
    unigram: Vec<u64>,
    bigram: HashMap<(u32, u32), u64>,
    epsilon: f64,
}

impl BigramModel {
    /// Counts bigrams over framed sentences. Type ids are assigned in
    /// surface order after the three reserved ids.
    pub fn fit<L, S>(lines: &[L], epsilon: f64) -> Result<Self>
    where
        L: AsRef<[S]> + Sync,
        S: AsRef<str> + Sync,
    {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Config(format!("epsilon must be positive, got {epsilon}")));
        }
        if lines.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let names: BTreeSet<&str> = lines
            .iter()
            .flat_map(|l| l.as_ref().iter().map(AsRef::as_ref))
            .collect();
        let types: HashMap<String, u32> = names
            .into_iter()
            .enumerate()
            .map(|(i, s)| (s.to_owned(), RESERVED + i as u32))
            .collect();
        let mut model = BigramModel {
            unigram: vec![0; types.len() + RESERVED as usize],
            types,
            bigram: HashMap::new(),
            epsilon,
        };
        for line in lines {
            let ids = model.frame(line.as_ref());
            for w in ids.windows(2) {
                model.unigram[w[0] as usize] += 1;
                *model.bigram.entry((w[0], w[1])).or_insert(0) += 1;
            }
        }
        Ok(model)
    }

    fn frame<S: AsRef<str>>(&self, line: &[S]) -> Vec<u32> {
        let mut ids = Vec::with_capacity(line.len() + 2);
        ids.push(BOS);
        ids.extend(line.iter().map(|t| self.id(t.as_ref())));
        ids.push(EOS);
        ids
    }

    /// Type id of a token; unseen tokens map to [`UNK`].
    pub fn id(&self, token: &str) -> u32 {
        self.types.get(token).copied().unwrap_or(UNK)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Same counts, different ε.
    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        BigramModel {
            epsilon,
            ..self.clone()
        }
    }

    /// `V`: distinct training types plus `<s>`, `</s>` and the unknown type.
    pub fn vocab_size(&self) -> usize {
        self.unigram.len()
    }

    /// Occurrences of `id` as a context.
    pub fn unigram_count(&self, id: u32) -> u64 {
        self.unigram.get(id as usize).copied().unwrap_or(0)
    }

    pub fn bigram_count(&self, prev: u32, next: u32) -> u64 {
        self.bigram.get(&(prev, next)).copied().unwrap_or(0)
    }

    /// Smoothed `p(next | prev)`.
    pub fn prob(&self, prev: u32, next: u32) -> f64 {
        let num = self.bigram_count(prev, next) as f64 + self.epsilon;
        let den = self.unigram_count(prev) as f64 + self.epsilon * self.vocab_size() as f64;
        num / den
    }

    /// Base-2 per-token perplexity of `lines`.
    pub fn perplexity<L, S>(&self, lines: &[L]) -> Result<Perplexity>
    where
        L: AsRef<[S]> + Sync,
        S: AsRef<str> + Sync,
    {
        if lines.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let partials: Vec<(NeumaierSum, u64)> = lines
            .par_iter()
            .map(|line| {
                let ids = self.frame(line.as_ref());
                let mut sum = NeumaierSum::default();
                for w in ids.windows(2) {
                    sum.add(self.prob(w[0], w[1]).log2());
                }
                (sum, ids.len() as u64 - 1)
            })
            .collect();
        let mut total = NeumaierSum::default();
        let mut n = 0;
        for (s, k) in partials {
            total.add(s.value());
            n += k;
        }
        let log2_sum = total.value();
        Ok(Perplexity {
            perplexity: (-log2_sum / n as f64).exp2(),
            predicted_tokens: n,
            log2_prob: log2_sum,
        })
    }

    /// Writes the count tables as TSV: `prev<TAB>next<TAB>count`, sorted.
    pub fn write_counts<W: Write>(&self, mut sink: W) -> Result<()> {
        let mut names = vec![String::new(); self.vocab_size()];
        names[BOS as usize] = "<s>".into();
        names[EOS as usize] = "</s>".into();
        names[UNK as usize] = "<unk2>".into();
        for (s, &i) in &self.types {
            names[i as usize] = s.clone();
        }
        let mut rows: Vec<_> = self.bigram.iter().collect();
        rows.sort();
        for (&(a, b), &c) in rows {
            writeln!(sink, "{}\t{}\t{}", names[a as usize], names[b as usize], c)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Perplexity {
    pub perplexity: f64,
    /// Number of predicted tokens, `</s>` included.
    pub predicted_tokens: u64,
    /// Σ log2 p over all predictions.
    pub log2_prob: f64,
}

/// Kahan–Babuška–Neumaier compensated summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Reads a token file: one sentence per line, pieces separated by spaces.
pub fn read_token_lines<R: BufRead>(source: R) -> Result<Vec<Vec<String>>> {
    source
        .lines()
        .map(|l| Ok(l?.split_whitespace().map(String::from).collect()))
        .collect()
}

/// Writes piece sequences in the token file format.
pub fn write_token_lines<W: Write, S: AsRef<str>>(mut sink: W, lines: &[Vec<S>]) -> Result<()> {
    for line in lines {
        let mut first = true;
        for p in line {
            if !first {
                sink.write_all(b" ")?;
            }
            sink.write_all(p.as_ref().as_bytes())?;
            first = false;
        }
        sink.write_all(b"\n")?;
    }
    sink.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lines(v: &[&[&str]]) -> Vec<Vec<String>> {
        v.iter()
            .map(|l| l.iter().map(|s| s.to_string()).collect())
            .collect()
    }

    #[test]
    fn counts_single_sentence() {
        let m = BigramModel::fit(&lines(&[&["a", "b"]]), DEFAULT_EPSILON).unwrap();
        let (a, b) = (m.id("a"), m.id("b"));
        assert_eq!(m.bigram_count(BOS, a), 1);
        assert_eq!(m.bigram_count(a, b), 1);
        assert_eq!(m.bigram_count(b, EOS), 1);
        assert_eq!(m.unigram_count(BOS), 1);
        assert_eq!(m.unigram_count(a), 1);
        assert_eq!(m.unigram_count(b), 1);
        assert_eq!(m.unigram_count(EOS), 0);
        assert_eq!(m.vocab_size(), 5);
    }

    #[test]
    fn counts_repeated() {
        let m = BigramModel::fit(&lines(&[&["a"], &["a"]]), DEFAULT_EPSILON).unwrap();
        let a = m.id("a");
        assert_eq!(m.bigram_count(BOS, a), 2);
        assert_eq!(m.bigram_count(a, EOS), 2);
    }

    #[test]
    fn deterministic_limit() {
        let train = lines(&[&["a"] as &[&str]; 100]);
        let m = BigramModel::fit(&train, 1e-9).unwrap();
        let ppl = m.perplexity(&lines(&[&["a"]])).unwrap();
        assert!(ppl.perplexity <= 1.001);
        assert_eq!(ppl.predicted_tokens, 2);
    }

    #[test]
    fn unseen_contexts_give_v() {
        let m = BigramModel::fit(&lines(&[&["a", "b"], &["c"]]), DEFAULT_EPSILON).unwrap();
        let v = m.vocab_size() as f64;
        for next in [m.id("a"), EOS, UNK] {
            assert!((m.prob(UNK, next) - 1.0 / v).abs() < 1e-15);
        }
        // a long run of unseen tokens: every context but <s> is empty
        let eval = vec![vec!["zz".to_string(); 20_000]];
        let ppl = m.perplexity(&eval).unwrap().perplexity;
        assert!((ppl / v - 1.0).abs() < 0.01);
    }

    #[test]
    fn empty_corpus() {
        let empty: Vec<Vec<String>> = vec![];
        assert!(BigramModel::fit(&empty, DEFAULT_EPSILON).is_err());
        let m = BigramModel::fit(&lines(&[&["a"]]), DEFAULT_EPSILON).unwrap();
        assert!(m.perplexity(&empty).is_err());
    }

    #[test]
    fn neumaier_beats_naive() {
        let mut s = NeumaierSum::default();
        for x in [1.0, 1e100, 1.0, -1e100] {
            s.add(x);
        }
        assert_eq!(s.value(), 2.0);
    }

    #[test]
    fn token_file_round_trip() {
        let l = lines(&[&["▁a", "b"], &[], &["c▁"]]);
        let mut buf = Vec::new();
        write_token_lines(&mut buf, &l).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "▁a b\n\nc▁\n");
        assert_eq!(read_token_lines(&buf[..]).unwrap(), l);
    }

    fn corpus() -> impl Strategy<Value = Vec<Vec<String>>> {
        proptest::collection::vec(
            proptest::collection::vec("[a-e]", 0..6),
            1..12,
        )
    }

    proptest! {
        #[test]
        fn successors_sum_to_context_count(c in corpus()) {
            let m = BigramModel::fit(&c, DEFAULT_EPSILON).unwrap();
            let v = m.vocab_size() as u32;
            for prev in 0..v {
                let s: u64 = (0..v).map(|n| m.bigram_count(prev, n)).sum();
                prop_assert_eq!(s, m.unigram_count(prev));
            }
        }

        #[test]
        fn conditionals_normalize(c in corpus(), eps in 1e-6f64..1.0) {
            let m = BigramModel::fit(&c, eps).unwrap();
            let v = m.vocab_size() as u32;
            for prev in 0..v {
                let s: f64 = (0..v).map(|n| m.prob(prev, n)).sum();
                prop_assert!((s - 1.0).abs() < 1e-9);
            }
        }

        #[test]
        fn larger_epsilon_moves_toward_uniform(c in corpus(), e1 in 1e-4f64..0.5, d in 1e-3f64..2.0) {
            let m1 = BigramModel::fit(&c, e1).unwrap();
            let m2 = m1.with_epsilon(e1 + d);
            let v = m1.vocab_size() as u32;
            let u = 1.0 / v as f64;
            for prev in 0..v {
                for next in 0..v {
                    let (p1, p2) = (m1.prob(prev, next), m2.prob(prev, next));
                    prop_assert!((p2 - u).abs() <= (p1 - u).abs() + 1e-15);
                }
            }
        }

        #[test]
        fn training_ppl_beats_uniform(c in corpus()) {
            let m = BigramModel::fit(&c, DEFAULT_EPSILON).unwrap();
            let ppl = m.perplexity(&c).unwrap().perplexity;
            prop_assert!(ppl <= m.vocab_size() as f64 + 1e-9);
        }
    }
}
