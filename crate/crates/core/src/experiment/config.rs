use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::bigram::DEFAULT_EPSILON;
use crate::error::{Error, Result};
use crate::pretok::PretokMode;
use crate::trainer::TrainerConfig;
use crate::vocab::{MarkingScheme, DEFAULT_META};

/// One of the four training conditions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Condition {
    RawInit,
    RawFin,
    StanInit,
    StanFin,
}

impl Condition {
    pub const ALL: [Condition; 4] = [
        Condition::RawInit,
        Condition::RawFin,
        Condition::StanInit,
        Condition::StanFin,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Condition::RawInit => "RawInit",
            Condition::RawFin => "RawFin",
            Condition::StanInit => "StanInit",
            Condition::StanFin => "StanFin",
        }
    }

    pub fn scheme(self) -> MarkingScheme {
        match self {
            Condition::RawInit | Condition::StanInit => MarkingScheme::Init,
            Condition::RawFin | Condition::StanFin => MarkingScheme::Fin,
        }
    }

    pub fn is_stan(self) -> bool {
        matches!(self, Condition::StanInit | Condition::StanFin)
    }

    /// `raw` or `stan`: conditions sharing a group are compared in the
    /// morphology analysis.
    pub fn group(self) -> &'static str {
        if self.is_stan() {
            "stan"
        } else {
            "raw"
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Condition::ALL
            .into_iter()
            .find(|c| c.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown condition {s:?}")))
    }
}

/// The three evaluation corpora, in report order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CorpusId {
    Train,
    InDomain,
    OutOfDomain,
}

impl CorpusId {
    pub const ALL: [CorpusId; 3] = [CorpusId::Train, CorpusId::InDomain, CorpusId::OutOfDomain];

    pub fn as_str(self) -> &'static str {
        match self {
            CorpusId::Train => "train",
            CorpusId::InDomain => "in_domain",
            CorpusId::OutOfDomain => "out_of_domain",
        }
    }
}

impl fmt::Display for CorpusId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Experiment settings. Read from a flat `key = value` file; see
/// [`ExperimentConfig::KEYS`] for the schema.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub conditions: Vec<Condition>,
    pub train: PathBuf,
    pub in_domain: PathBuf,
    pub out_of_domain: PathBuf,
    /// Pre-tokenized versions of the corpora for the Stan conditions, used
    /// with `stan_pretok = external`.
    pub stan_train: Option<PathBuf>,
    pub stan_in_domain: Option<PathBuf>,
    pub stan_out_of_domain: Option<PathBuf>,
    pub stan_pretok: PretokMode,
    pub lexicon: Option<PathBuf>,
    pub fold_case: bool,
    pub vocab_size: usize,
    pub epsilon: f64,
    pub shrink: f64,
    pub seed_max_size: Option<usize>,
    pub seed_max_len: usize,
    pub seed_min_count: u64,
    pub em_iters: usize,
    pub final_em_iters: usize,
    pub meta: char,
    pub threads: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let t = TrainerConfig::default();
        ExperimentConfig {
            conditions: Condition::ALL.to_vec(),
            train: PathBuf::from("data/corpus/train.txt"),
            in_domain: PathBuf::from("data/corpus/in_domain.txt"),
            out_of_domain: PathBuf::from("data/corpus/out_of_domain.txt"),
            stan_train: None,
            stan_in_domain: None,
            stan_out_of_domain: None,
            stan_pretok: PretokMode::RuleBased,
            lexicon: None,
            fold_case: false,
            vocab_size: t.target_vocab_size,
            epsilon: DEFAULT_EPSILON,
            shrink: t.shrink_factor,
            seed_max_size: t.seed_max_size,
            seed_max_len: t.seed_max_piece_len,
            seed_min_count: t.seed_min_count,
            em_iters: t.em_iters_per_round,
            final_em_iters: t.final_em_iters,
            meta: DEFAULT_META,
            threads: 1,
        }
    }
}

impl ExperimentConfig {
    /// Recognized keys, in echo order.
    pub const KEYS: [&'static str; 21] = [
        "conditions",
        "train",
        "in_domain",
        "out_of_domain",
        "stan_train",
        "stan_in_domain",
        "stan_out_of_domain",
        "stan_pretok",
        "lexicon",
        "fold_case",
        "vocab_size",
        "epsilon",
        "shrink",
        "seed_max_size",
        "seed_max_len",
        "seed_min_count",
        "em_iters",
        "final_em_iters",
        "meta",
        "threads",
        "version",
    ];

    /// Parses a config file; relative paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(i + 1, format!("expected key = value, got {line:?}")))?;
            cfg.set(key.trim(), value.trim(), base)
                .map_err(|e| Error::parse(i + 1, e.to_string()))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        Self::parse(&text, base)
    }

    /// Applies one `key = value` setting. Paths are joined onto `base`
    /// unless absolute.
    pub fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<()> {
        let path = || base.join(value);
        let opt_path = || (!value.is_empty()).then(|| base.join(value));
        match key {
            "conditions" => {
                self.conditions = value
                    .split(',')
                    .map(|s| s.trim())
                    .filter(|s| !s.is_empty())
                    .map(Condition::from_str)
                    .collect::<Result<_>>()?;
                if self.conditions.is_empty() {
                    return Err(Error::Config("no conditions given".into()));
                }
            }
            "train" => self.train = path(),
            "in_domain" => self.in_domain = path(),
            "out_of_domain" => self.out_of_domain = path(),
            "stan_train" => self.stan_train = opt_path(),
            "stan_in_domain" => self.stan_in_domain = opt_path(),
            "stan_out_of_domain" => self.stan_out_of_domain = opt_path(),
            "stan_pretok" => {
                self.stan_pretok = value.parse()?;
                if self.stan_pretok == PretokMode::Raw {
                    return Err(Error::Config("stan_pretok must be rules or external".into()));
                }
            }
            "lexicon" => self.lexicon = opt_path(),
            "fold_case" => self.fold_case = parse_bool(value)?,
            "vocab_size" => self.vocab_size = parse_num(key, value)?,
            "epsilon" => self.epsilon = parse_num(key, value)?,
            "shrink" => self.shrink = parse_num(key, value)?,
            "seed_max_size" => {
                self.seed_max_size = if value.is_empty() || value == "auto" {
                    None
                } else {
                    Some(parse_num(key, value)?)
                }
            }
            "seed_max_len" => self.seed_max_len = parse_num(key, value)?,
            "seed_min_count" => self.seed_min_count = parse_num(key, value)?,
            "em_iters" => self.em_iters = parse_num(key, value)?,
            "final_em_iters" => self.final_em_iters = parse_num(key, value)?,
            "meta" => {
                self.meta = u32::from_str_radix(value.trim_start_matches("U+"), 16)
                    .ok()
                    .and_then(char::from_u32)
                    .ok_or_else(|| Error::Config(format!("bad meta code point {value:?}")))?
            }
            "threads" => self.threads = parse_num(key, value)?,
            // informational; written by the echo
            "version" => {}
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    pub fn trainer_config(&self, condition: Condition) -> TrainerConfig {
        TrainerConfig {
            target_vocab_size: self.vocab_size,
            shrink_factor: self.shrink,
            seed_max_size: self.seed_max_size,
            seed_max_piece_len: self.seed_max_len,
            seed_min_count: self.seed_min_count,
            em_iters_per_round: self.em_iters,
            final_em_iters: self.final_em_iters,
            scheme: condition.scheme(),
            pretok: self.pretok(condition),
            meta: self.meta,
        }
    }

    pub fn pretok(&self, condition: Condition) -> PretokMode {
        if condition.is_stan() {
            self.stan_pretok
        } else {
            PretokMode::Raw
        }
    }

    /// Path of `corpus` as read by `condition`.
    pub fn corpus_path(&self, condition: Condition, corpus: CorpusId) -> &Path {
        let stan = if condition.is_stan() {
            match corpus {
                CorpusId::Train => self.stan_train.as_deref(),
                CorpusId::InDomain => self.stan_in_domain.as_deref(),
                CorpusId::OutOfDomain => self.stan_out_of_domain.as_deref(),
            }
        } else {
            None
        };
        stan.unwrap_or(match corpus {
            CorpusId::Train => &self.train,
            CorpusId::InDomain => &self.in_domain,
            CorpusId::OutOfDomain => &self.out_of_domain,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.trainer_config(Condition::RawInit).validate()?;
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        let mut seen = self.conditions.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.conditions.len() {
            return Err(Error::Config("a condition is listed twice".into()));
        }
        Ok(())
    }

    /// Every setting as strings, keyed as in the config file. Paths are
    /// made absolute against the working directory so the echo can be
    /// loaded from anywhere.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let p = |p: &Path| absolute(p).display().to_string();
        let op = |p: &Option<PathBuf>| p.as_deref().map(|p| absolute(p).display().to_string()).unwrap_or_default();
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_owned(), v);
        };
        put(
            "conditions",
            self.conditions.iter().map(|c| c.label()).collect::<Vec<_>>().join(","),
        );
        put("train", p(&self.train));
        put("in_domain", p(&self.in_domain));
        put("out_of_domain", p(&self.out_of_domain));
        put("stan_train", op(&self.stan_train));
        put("stan_in_domain", op(&self.stan_in_domain));
        put("stan_out_of_domain", op(&self.stan_out_of_domain));
        put("stan_pretok", self.stan_pretok.to_string());
        put("lexicon", op(&self.lexicon));
        put("fold_case", self.fold_case.to_string());
        put("vocab_size", self.vocab_size.to_string());
        put("epsilon", self.epsilon.to_string());
        put("shrink", self.shrink.to_string());
        put(
            "seed_max_size",
            self.seed_max_size.map_or_else(|| "auto".into(), |n| n.to_string()),
        );
        put("seed_max_len", self.seed_max_len.to_string());
        put("seed_min_count", self.seed_min_count.to_string());
        put("em_iters", self.em_iters.to_string());
        put("final_em_iters", self.final_em_iters.to_string());
        put("meta", format!("{:04X}", self.meta as u32));
        put("threads", self.threads.to_string());
        put("version", env!("CARGO_PKG_VERSION").to_string());
        m
    }

    /// The echo as a config file that reproduces this configuration.
    pub fn to_config_text(&self) -> String {
        let echo = self.echo();
        let mut out = String::new();
        for key in Self::KEYS {
            out.push_str(&format!("{key} = {}\n", echo[key]));
        }
        out
    }
}

fn absolute(p: &Path) -> PathBuf {
    std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf())
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value {value:?} for {key}")))
}

fn parse_bool(value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!("bad boolean {value:?}"))),
    }
}
