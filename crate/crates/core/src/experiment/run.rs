use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bigram::{write_token_lines, BigramModel};
use crate::error::{Error, Result};
use crate::morph::{self, export_score_distributions, MorphLexicon, MorphReport};
use crate::segment::Segmenter;
use crate::stats::{encode_corpus, length_histogram, type_entropy, LengthHistogram, StatsReport};
use crate::trainer::{train, TrainTrace};
use crate::vocab::{MarkingScheme, Vocabulary, UNK_PENALTY};

use super::config::{Condition, CorpusId, ExperimentConfig};
use super::render::render_table;

/// Per-condition results that do not depend on the evaluation corpus.
#[derive(Clone, Debug, Serialize)]
pub struct ConditionReport {
    pub label: String,
    pub scheme: MarkingScheme,
    pub pretok: String,
    pub vocab_size: usize,
    pub type_entropy_bits: f64,
    pub length_histogram: LengthHistogram,
    /// `V` of the bigram model fitted on this condition's training tokens.
    pub bigram_vocab_size: usize,
    pub trace: TrainTrace,
}

/// A published trend compared against the desk-scale result. Informational.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub name: String,
    pub group: String,
    /// What the reference numbers show.
    pub reference: String,
    pub init: f64,
    pub fin: f64,
    /// Whether the desk-scale numbers point the same way.
    pub agrees: bool,
}

/// Conventions the numbers depend on, recorded with every report.
#[derive(Clone, Debug, Serialize)]
pub struct Conventions {
    pub entropy_base: u32,
    pub perplexity_unit: &'static str,
    pub sentence_framing: &'static str,
    pub word_count: &'static str,
    pub seed_min_count: u64,
    pub shrink_factor: f64,
    pub unk_penalty_nats: f64,
    pub regression: &'static str,
    pub duplicate_bare_strings: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportBundle {
    pub config: BTreeMap<String, String>,
    pub conventions: Conventions,
    pub models: Vec<String>,
    pub corpora: Vec<String>,
    pub conditions: Vec<ConditionReport>,
    /// One cell per (model, corpus), models outer.
    pub cells: Vec<StatsReport>,
    pub morph: BTreeMap<String, MorphReport>,
    pub trends: Vec<TrendRow>,
}

impl ReportBundle {
    pub fn cell(&self, model: &str, corpus: &str) -> Option<&StatsReport> {
        self.cells
            .iter()
            .find(|c| c.model_id == model && c.corpus_id == corpus)
    }

    pub fn render(&self) -> String {
        render_table(&self.cells, &self.models, &self.corpora)
    }
}

fn stage<T>(name: &str, condition: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Stage {
        stage: name.to_owned(),
        condition: condition.to_owned(),
        source: Box::new(e),
    })
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    Ok(text.lines().map(str::to_owned).collect())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Trains, encodes and evaluates every configured condition and writes the
/// report files under `out_dir`:
///
/// - `models/<label>.vocab`, `tokens/<label>.<corpus>.tok`
/// - `report.json`, `table.tsv`, `table.txt`, `lengths.tsv`, `trends.tsv`
/// - `scores.<group>.tsv` when a lexicon is configured
/// - `config.conf`, the effective configuration
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<ReportBundle> {
    config.validate()?;
    fs::create_dir_all(out_dir.join("models"))?;
    fs::create_dir_all(out_dir.join("tokens"))?;
    let lexicon = match &config.lexicon {
        Some(p) => Some(stage("lexicon", "all", MorphLexicon::load(p, config.fold_case))?),
        None => None,
    };

    let mut corpora_cache: BTreeMap<&Path, Vec<String>> = BTreeMap::new();
    let mut conditions = Vec::new();
    let mut cells = Vec::new();
    let mut vocabs: BTreeMap<Condition, Vocabulary> = BTreeMap::new();

    for &cond in &config.conditions {
        let label = cond.label();
        for corpus in CorpusId::ALL {
            let path = config.corpus_path(cond, corpus);
            if !corpora_cache.contains_key(path) {
                let lines = stage("read corpus", label, read_lines(path))?;
                corpora_cache.insert(path, lines);
            }
        }
        let train_lines = &corpora_cache[config.corpus_path(cond, CorpusId::Train)];

        log::info!("training {label}");
        let trained = stage("train", label, train(train_lines, &config.trainer_config(cond)))?;
        let vocab = trained.vocab;
        stage("save model", label, vocab.save(out_dir.join(format!("models/{label}.vocab"))))?;

        let segmenter = Segmenter::new(&vocab, config.pretok(cond));
        let mut encoded = Vec::new();
        for corpus in CorpusId::ALL {
            let lines = &corpora_cache[config.corpus_path(cond, corpus)];
            let enc = encode_corpus(&segmenter, lines);
            let tok_path = out_dir.join(format!("tokens/{label}.{corpus}.tok"));
            stage("write tokens", label, create(&tok_path).and_then(|f| write_token_lines(f, &enc.lines)))?;
            encoded.push((corpus, enc));
        }

        let bigram = stage("fit bigram", label, BigramModel::fit(&encoded[0].1.lines, config.epsilon))?;
        for (corpus, enc) in &encoded {
            let mut cell = stage(
                "stats",
                label,
                StatsReport::new(label, corpus.as_str(), &vocab, enc),
            )?;
            let ppl = stage("perplexity", label, bigram.perplexity(&enc.lines))?;
            cell.perplexity = Some(ppl.perplexity);
            cells.push(cell);
        }

        conditions.push(ConditionReport {
            label: label.to_owned(),
            scheme: cond.scheme(),
            pretok: config.pretok(cond).to_string(),
            vocab_size: vocab.len(),
            type_entropy_bits: type_entropy(&vocab),
            length_histogram: length_histogram(&vocab),
            bigram_vocab_size: bigram.vocab_size(),
            trace: trained.trace,
        });
        vocabs.insert(cond, vocab);
    }

    let mut morph_reports = BTreeMap::new();
    if let Some(lex) = &lexicon {
        for (init, fin) in [
            (Condition::RawInit, Condition::RawFin),
            (Condition::StanInit, Condition::StanFin),
        ] {
            let (Some(vi), Some(vf)) = (vocabs.get(&init), vocabs.get(&fin)) else {
                continue;
            };
            let group = init.group();
            let (report, records) = stage("morph", group, morph::analyze(vi, vf, lex))?;
            let path = out_dir.join(format!("scores.{group}.tsv"));
            stage("export scores", group, create(&path).and_then(|f| export_score_distributions(&records, f)))?;
            morph_reports.insert(group.to_owned(), report);
        }
    }

    let models: Vec<String> = config.conditions.iter().map(|c| c.label().to_owned()).collect();
    let corpora: Vec<String> = CorpusId::ALL.iter().map(|c| c.as_str().to_owned()).collect();
    let mut bundle = ReportBundle {
        config: config.echo(),
        conventions: Conventions {
            entropy_base: 2,
            perplexity_unit: "per piece token, </s> included, <s> excluded",
            sentence_framing: "<s> and </s> added per line",
            word_count: "words after pretokenization",
            seed_min_count: config.seed_min_count,
            shrink_factor: config.shrink,
            unk_penalty_nats: UNK_PENALTY,
            regression: "OLS with intercept; predictors agreement (0-2) and model (init=0, fin=1); one row per piece per model",
            duplicate_bare_strings: "highest score among marked variants",
        },
        models,
        corpora,
        conditions,
        cells,
        morph: morph_reports,
        trends: Vec::new(),
    };
    bundle.trends = trends(&bundle);
    write_outputs(&bundle, config, out_dir)?;
    Ok(bundle)
}

/// Directional comparisons with the reference results.
pub fn trends(bundle: &ReportBundle) -> Vec<TrendRow> {
    let mut out = Vec::new();
    for (group, init, fin) in [("raw", "RawInit", "RawFin"), ("stan", "StanInit", "StanFin")] {
        let cond = |l: &str| bundle.conditions.iter().find(|c| c.label == l);
        if let (Some(ci), Some(cf)) = (cond(init), cond(fin)) {
            out.push(TrendRow {
                name: "type_entropy_bits".into(),
                group: group.into(),
                reference: "fin > init (7.549 vs 7.509 on raw)".into(),
                init: ci.type_entropy_bits,
                fin: cf.type_entropy_bits,
                agrees: cf.type_entropy_bits > ci.type_entropy_bits,
            });
        }
        for corpus in &bundle.corpora {
            if let (Some(a), Some(b)) = (bundle.cell(init, corpus), bundle.cell(fin, corpus)) {
                out.push(TrendRow {
                    name: format!("tokens_per_word.{corpus}"),
                    group: group.into(),
                    reference: "init < fin (1.356 vs 1.393 on raw train)".into(),
                    init: a.tokens_per_word,
                    fin: b.tokens_per_word,
                    agrees: a.tokens_per_word < b.tokens_per_word,
                });
                if let (Some(pa), Some(pb)) = (a.perplexity, b.perplexity) {
                    out.push(TrendRow {
                        name: format!("perplexity.{corpus}"),
                        group: group.into(),
                        reference: "fin < init (165.54 vs 174.89 on raw train)".into(),
                        init: pa,
                        fin: pb,
                        agrees: pb < pa,
                    });
                }
            }
        }
        if let Some(m) = bundle.morph.get(group) {
            out.push(TrendRow {
                name: "morph_coverage".into(),
                group: group.into(),
                reference: "fin > init (6,049 vs 5,170 on raw)".into(),
                init: m.coverage_init as f64,
                fin: m.coverage_fin as f64,
                agrees: m.coverage_fin > m.coverage_init,
            });
            if let Some(beta) = m.regression.as_ref().and_then(|r| r.coefficient("agreement")) {
                out.push(TrendRow {
                    name: "agreement_beta".into(),
                    group: group.into(),
                    reference: "beta > 0 (0.95, t = 43.5)".into(),
                    init: beta,
                    fin: beta,
                    agrees: beta > 0.0,
                });
            }
        }
    }
    out
}

/// Column header of `table.tsv`.
pub const TABLE_HEADER: &str =
    "model\tcorpus\twords\ttokens\ttokens_per_word\tcorpus_entropy_bits\ttype_entropy_bits\tperplexity";

fn write_outputs(bundle: &ReportBundle, config: &ExperimentConfig, out_dir: &Path) -> Result<()> {
    let mut f = create(&out_dir.join("report.json"))?;
    serde_json::to_writer_pretty(&mut f, bundle)
        .map_err(|e| Error::Invariant(format!("report serialization: {e}")))?;
    f.write_all(b"\n")?;
    f.flush()?;

    let mut f = create(&out_dir.join("table.tsv"))?;
    writeln!(f, "{TABLE_HEADER}")?;
    for c in &bundle.cells {
        writeln!(
            f,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            c.model_id,
            c.corpus_id,
            c.words,
            c.tokens,
            c.tokens_per_word,
            c.corpus_entropy_bits,
            c.type_entropy_bits,
            c.perplexity.map_or_else(String::new, |p| p.to_string())
        )?;
    }
    f.flush()?;

    fs::write(out_dir.join("table.txt"), bundle.render())?;

    let mut f = create(&out_dir.join("lengths.tsv"))?;
    writeln!(f, "model\tlength\tcount")?;
    for c in &bundle.conditions {
        for (len, n) in &c.length_histogram.counts {
            writeln!(f, "{}\t{}\t{}", c.label, len, n)?;
        }
    }
    f.flush()?;

    let mut f = create(&out_dir.join("trends.tsv"))?;
    writeln!(f, "name\tgroup\treference\tinit\tfin\tagrees")?;
    for t in &bundle.trends {
        writeln!(f, "{}\t{}\t{}\t{}\t{}\t{}", t.name, t.group, t.reference, t.init, t.fin, t.agrees)?;
    }
    f.flush()?;

    fs::write(out_dir.join("config.conf"), config.to_config_text())?;
    Ok(())
}
