//! `boundkit`: train, apply and evaluate boundary-marked Unigram LM
//! tokenizers.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 internal invariant violation.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use boundkit_core::bigram::{read_token_lines, write_token_lines, BigramModel, DEFAULT_EPSILON};
use boundkit_core::experiment::{run_experiment, render_table, ExperimentConfig};
use boundkit_core::morph::{self, export_score_distributions, MorphLexicon};
use boundkit_core::stats::{encode_corpus, StatsReport};
use boundkit_core::trainer::train;
use boundkit_core::vocab::{MarkingScheme, DEFAULT_META};
use boundkit_core::{Error, PretokMode, Segmenter, TrainerConfig, Vocabulary};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(name = "boundkit", version, about = "Unigram LM tokenizers with word-initial or word-final boundary marks")]
struct Cli {
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a vocabulary.
    Train(TrainArgs),
    /// Segment a corpus into pieces, one line per input line.
    Encode(EncodeArgs),
    /// Tokens per word and entropies of a model on a corpus.
    Stats(StatsArgs),
    /// Bigram perplexity of one token file under a model fitted on another.
    Ppl(PplArgs),
    /// Morpheme coverage and agreement between an Init and a Fin model.
    Morph(MorphArgs),
    /// Render the corpus table of a finished run.
    Report(ReportArgs),
    /// Run the full four-condition experiment.
    Run(RunArgs),
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    model_out: PathBuf,
    #[arg(long, default_value_t = 32_000)]
    vocab_size: usize,
    #[arg(long, default_value = "init")]
    scheme: MarkingScheme,
    #[arg(long, default_value = "raw")]
    pretok: PretokMode,
    #[arg(long, default_value_t = 0.75)]
    shrink: f64,
    #[arg(long, default_value_t = 16)]
    seed_max_len: usize,
    #[arg(long, default_value_t = 2)]
    seed_min_count: u64,
    /// Cap on non-required seed pieces [default: min(100 × vocab size, 1M)].
    #[arg(long)]
    seed_max_size: Option<usize>,
    #[arg(long, default_value_t = 2)]
    em_iters: usize,
    #[arg(long, default_value_t = 8)]
    final_em_iters: usize,
    /// Write the training trace (log-likelihoods, sizes) as JSON.
    #[arg(long)]
    trace_out: Option<PathBuf>,
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value = "raw")]
    pretok: PretokMode,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value = "raw")]
    pretok: PretokMode,
    #[arg(long)]
    out: PathBuf,
    /// Token file to fit a bigram model on; fills in `perplexity`.
    #[arg(long)]
    bigram_train: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Label for the model [default: file stem].
    #[arg(long)]
    model_id: Option<String>,
    /// Label for the corpus [default: file stem].
    #[arg(long)]
    corpus_id: Option<String>,
}

#[derive(Args)]
struct PplArgs {
    #[arg(long)]
    train_tokens: PathBuf,
    #[arg(long)]
    eval_tokens: PathBuf,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MorphArgs {
    #[arg(long)]
    init_model: PathBuf,
    #[arg(long)]
    fin_model: PathBuf,
    #[arg(long)]
    lexicon: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    export_scores: Option<PathBuf>,
    /// Lowercase lexicon entries and pieces before matching.
    #[arg(long)]
    fold_case: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// `report.json` of a run, or the run's output directory.
    #[arg(long)]
    input: PathBuf,
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
    /// Override a config key, e.g. `--set vocab_size=4000`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<Error>() {
            return match err.root() {
                Error::Config(_) => 1,
                Error::Invariant(_) => 3,
                _ => 2,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 2;
        }
    }
    1
}

fn dispatch(cli: Cli) -> Result<()> {
    if cli.threads == 0 {
        return Err(Error::Config("--threads must be at least 1".into()).into());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .context("building thread pool")?;
    pool.install(|| match cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Encode(a) => cmd_encode(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Ppl(a) => cmd_ppl(a),
        Command::Morph(a) => cmd_morph(a),
        Command::Report(a) => cmd_report(a),
        Command::Run(a) => cmd_run(a, cli.threads),
    })
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path)
        .map_err(Error::from)
        .with_context(|| format!("reading {}", path.display()))?;
    Ok(text.lines().map(str::to_owned).collect())
}

fn load_vocab(path: &Path) -> Result<Vocabulary> {
    Vocabulary::load(path).with_context(|| format!("loading model {}", path.display()))
}

fn read_tokens(path: &Path) -> Result<Vec<Vec<String>>> {
    let file = File::open(path)
        .map_err(Error::from)
        .with_context(|| format!("opening {}", path.display()))?;
    Ok(read_token_lines(BufReader::new(file))?)
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut f = BufWriter::new(File::create(path).map_err(Error::from)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n").map_err(Error::from)?;
    f.flush().map_err(Error::from)?;
    Ok(())
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn cmd_train(a: TrainArgs) -> Result<()> {
    let config = TrainerConfig {
        target_vocab_size: a.vocab_size,
        shrink_factor: a.shrink,
        seed_max_size: a.seed_max_size,
        seed_max_piece_len: a.seed_max_len,
        seed_min_count: a.seed_min_count,
        em_iters_per_round: a.em_iters,
        final_em_iters: a.final_em_iters,
        scheme: a.scheme,
        pretok: a.pretok,
        meta: DEFAULT_META,
    };
    let lines = read_lines(&a.input)?;
    let trained = train(&lines, &config).context("training")?;
    trained.vocab.save(&a.model_out).map_err(anyhow::Error::from)?;
    if let Some(p) = a.trace_out {
        write_json(&p, &json!({ "config": config, "trace": trained.trace }))?;
    }
    log::info!("wrote {} pieces to {}", trained.vocab.len(), a.model_out.display());
    Ok(())
}

fn cmd_encode(a: EncodeArgs) -> Result<()> {
    let vocab = load_vocab(&a.model)?;
    let lines = read_lines(&a.input)?;
    let seg = Segmenter::new(&vocab, a.pretok);
    let enc = encode_corpus(&seg, &lines);
    let f = BufWriter::new(File::create(&a.output).map_err(Error::from)?);
    write_token_lines(f, &enc.lines)?;
    Ok(())
}

fn cmd_stats(a: StatsArgs) -> Result<()> {
    let vocab = load_vocab(&a.model)?;
    let lines = read_lines(&a.corpus)?;
    let seg = Segmenter::new(&vocab, a.pretok);
    let enc = encode_corpus(&seg, &lines);
    let model_id = a.model_id.unwrap_or_else(|| stem(&a.model));
    let corpus_id = a.corpus_id.unwrap_or_else(|| stem(&a.corpus));
    let mut report = StatsReport::new(&model_id, &corpus_id, &vocab, &enc)?;
    if let Some(train_tokens) = &a.bigram_train {
        let bigram = BigramModel::fit(&read_tokens(train_tokens)?, a.epsilon)?;
        report.perplexity = Some(bigram.perplexity(&enc.lines)?.perplexity);
    }
    write_json(
        &a.out,
        &json!({
            "report": report,
            "config": {
                "model": a.model.display().to_string(),
                "corpus": a.corpus.display().to_string(),
                "pretok": a.pretok.as_str(),
                "scheme": vocab.scheme().as_str(),
                "bigram_train": a.bigram_train.map(|p| p.display().to_string()),
                "epsilon": a.epsilon,
                "entropy_base": 2,
            },
        }),
    )
}

fn cmd_ppl(a: PplArgs) -> Result<()> {
    let train = read_tokens(&a.train_tokens)?;
    let eval = read_tokens(&a.eval_tokens)?;
    let model = BigramModel::fit(&train, a.epsilon)?;
    let ppl = model.perplexity(&eval)?;
    write_json(
        &a.out,
        &json!({
            "perplexity": ppl.perplexity,
            "predicted_tokens": ppl.predicted_tokens,
            "log2_prob": ppl.log2_prob,
            "vocab_size": model.vocab_size(),
            "epsilon": a.epsilon,
            "train_tokens": a.train_tokens.display().to_string(),
            "eval_tokens": a.eval_tokens.display().to_string(),
        }),
    )
}

fn cmd_morph(a: MorphArgs) -> Result<()> {
    let init = load_vocab(&a.init_model)?;
    let fin = load_vocab(&a.fin_model)?;
    if init.scheme() != MarkingScheme::Init || fin.scheme() != MarkingScheme::Fin {
        return Err(Error::Config("--init-model must be an init model and --fin-model a fin model".into()).into());
    }
    let lexicon = MorphLexicon::load(&a.lexicon, a.fold_case)
        .with_context(|| format!("loading lexicon {}", a.lexicon.display()))?;
    let (report, records) = morph::analyze(&init, &fin, &lexicon)?;
    if let Some(p) = &a.export_scores {
        let f = BufWriter::new(File::create(p).map_err(Error::from)?);
        export_score_distributions(&records, f)?;
    }
    write_json(&a.out, &serde_json::to_value(&report)?)
}

fn cmd_report(a: ReportArgs) -> Result<()> {
    let path = if a.input.is_dir() {
        a.input.join("report.json")
    } else {
        a.input.clone()
    };
    let text = fs::read_to_string(&path)
        .map_err(Error::from)
        .with_context(|| format!("reading {}", path.display()))?;
    let invalid = |e: serde_json::Error| Error::InvalidInput(format!("{}: {e}", path.display()));
    let mut bundle: serde_json::Value = serde_json::from_str(&text).map_err(invalid)?;
    let mut field = |k: &str| bundle.get_mut(k).map(serde_json::Value::take).unwrap_or_default();
    let models: Vec<String> = serde_json::from_value(field("models")).map_err(invalid)?;
    let corpora: Vec<String> = serde_json::from_value(field("corpora")).map_err(invalid)?;
    let cells: Vec<StatsReport> = serde_json::from_value(field("cells")).map_err(invalid)?;
    let table = render_table(&cells, &models, &corpora);
    match a.out {
        Some(p) => fs::write(p, table).map_err(Error::from)?,
        None => print!("{table}"),
    }
    Ok(())
}

fn cmd_run(a: RunArgs, threads: usize) -> Result<()> {
    let mut config = match &a.config {
        Some(p) => ExperimentConfig::load(p).with_context(|| format!("loading config {}", p.display()))?,
        None => ExperimentConfig::default(),
    };
    for o in &a.overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {o:?}")))?;
        config.set(k.trim(), v.trim(), Path::new(""))?;
    }
    config.threads = threads;
    let bundle = run_experiment(&config, &a.out_dir)?;
    print!("{}", bundle.render());
    Ok(())
}
