use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn corpus(name: &str) -> PathBuf {
    repo().join(format!("data/corpus/{name}.txt"))
}

fn boundkit<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_boundkit"))
        .args(args)
        .output()
        .expect("spawn boundkit")
}

fn ok<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    let out = boundkit(args);
    assert!(
        out.status.success(),
        "boundkit failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const VOCAB: &str = "800";

#[test]
fn subcommands_compose_to_the_orchestrator() {
    let tmp = tempfile::tempdir().unwrap();
    let run_dir = tmp.path().join("run");
    let out = ok([
        "run",
        "--config",
        p(&repo().join("configs/desk.conf")),
        "--out-dir",
        p(&run_dir),
        "--set",
        &format!("vocab_size={VOCAB}"),
    ]);
    let report = json(&run_dir.join("report.json"));
    let table = fs::read_to_string(run_dir.join("table.txt")).unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), table);

    let find_cell = |model: &str, corpus: &str| -> Value {
        report["cells"]
            .as_array()
            .unwrap()
            .iter()
            .find(|c| c["model_id"] == model && c["corpus_id"] == corpus)
            .cloned()
            .unwrap()
    };

    for (label, scheme, pretok) in [
        ("RawInit", "init", "raw"),
        ("RawFin", "fin", "raw"),
        ("StanInit", "init", "rules"),
        ("StanFin", "fin", "rules"),
    ] {
        let dir = tmp.path().join(label);
        fs::create_dir_all(&dir).unwrap();
        let model = dir.join("model.vocab");
        ok([
            "train",
            "--input",
            p(&corpus("train")),
            "--model-out",
            p(&model),
            "--vocab-size",
            VOCAB,
            "--scheme",
            scheme,
            "--pretok",
            pretok,
        ]);
        assert_eq!(
            fs::read(&model).unwrap(),
            fs::read(run_dir.join(format!("models/{label}.vocab"))).unwrap(),
            "{label} model"
        );

        let train_tok = dir.join("train.tok");
        for name in ["train", "in_domain", "out_of_domain"] {
            let tok = dir.join(format!("{name}.tok"));
            ok([
                "encode",
                "--model",
                p(&model),
                "--input",
                p(&corpus(name)),
                "--output",
                p(&tok),
                "--pretok",
                pretok,
            ]);
            assert_eq!(
                fs::read(&tok).unwrap(),
                fs::read(run_dir.join(format!("tokens/{label}.{name}.tok"))).unwrap(),
                "{label} {name} tokens"
            );

            let stats = dir.join(format!("{name}.stats.json"));
            ok([
                "stats",
                "--model",
                p(&model),
                "--corpus",
                p(&corpus(name)),
                "--pretok",
                pretok,
                "--out",
                p(&stats),
                "--model-id",
                label,
                "--corpus-id",
                name,
                "--bigram-train",
                p(&train_tok),
            ]);
            let cell = find_cell(label, name);
            assert_eq!(json(&stats)["report"], cell, "{label} {name} stats");

            let ppl = dir.join(format!("{name}.ppl.json"));
            ok([
                "ppl",
                "--train-tokens",
                p(&train_tok),
                "--eval-tokens",
                p(&tok),
                "--out",
                p(&ppl),
            ]);
            assert_eq!(json(&ppl)["perplexity"], cell["perplexity"], "{label} {name} ppl");
        }
    }

    for (group, init, fin) in [("raw", "RawInit", "RawFin"), ("stan", "StanInit", "StanFin")] {
        let out = tmp.path().join(format!("morph.{group}.json"));
        let scores = tmp.path().join(format!("scores.{group}.tsv"));
        ok([
            "morph",
            "--init-model",
            p(&tmp.path().join(init).join("model.vocab")),
            "--fin-model",
            p(&tmp.path().join(fin).join("model.vocab")),
            "--lexicon",
            p(&repo().join("data/lexicon/morphemes.txt")),
            "--out",
            p(&out),
            "--export-scores",
            p(&scores),
        ]);
        assert_eq!(json(&out), report["morph"][group], "{group} morph");
        assert_eq!(
            fs::read(&scores).unwrap(),
            fs::read(run_dir.join(format!("scores.{group}.tsv"))).unwrap()
        );
    }

    let rendered = ok(["report", "--input", p(&run_dir)]);
    assert_eq!(String::from_utf8(rendered.stdout).unwrap(), table);
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("missing.txt");

    assert_eq!(code(&boundkit(["--help"])), 0);
    assert_eq!(code(&boundkit(["--version"])), 0);
    assert_eq!(code(&boundkit::<[&str; 0], &str>([])), 1);
    assert_eq!(code(&boundkit(["train", "--input"])), 1);
    assert_eq!(code(&boundkit(["frobnicate"])), 1);

    // bad values are usage errors
    let out = boundkit([
        "train",
        "--input",
        p(&corpus("train")),
        "--model-out",
        p(&tmp.path().join("m.vocab")),
        "--scheme",
        "middle",
    ]);
    assert_eq!(code(&out), 1);
    let out = boundkit([
        "run",
        "--out-dir",
        p(&tmp.path().join("r")),
        "--set",
        "vocab_size=lots",
    ]);
    assert_eq!(code(&out), 1);
    let out = boundkit(["run", "--out-dir", p(&tmp.path().join("r")), "--set", "nonsense=1"]);
    assert_eq!(code(&out), 1);

    // unreadable or malformed data
    let out = boundkit([
        "train",
        "--input",
        p(&missing),
        "--model-out",
        p(&tmp.path().join("m.vocab")),
    ]);
    assert_eq!(code(&out), 2);
    let bad_model = tmp.path().join("bad.vocab");
    fs::write(&bad_model, "not a vocabulary\n").unwrap();
    let out = boundkit([
        "encode",
        "--model",
        p(&bad_model),
        "--input",
        p(&corpus("out_of_domain")),
        "--output",
        p(&tmp.path().join("x.tok")),
    ]);
    assert_eq!(code(&out), 2);
    let empty = tmp.path().join("empty.txt");
    fs::write(&empty, "").unwrap();
    let out = boundkit([
        "train",
        "--input",
        p(&empty),
        "--model-out",
        p(&tmp.path().join("m.vocab")),
    ]);
    assert_eq!(code(&out), 2);
    let out = boundkit([
        "run",
        "--out-dir",
        p(&tmp.path().join("r")),
        "--set",
        &format!("train={}", p(&missing)),
    ]);
    assert_eq!(code(&out), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("RawInit"), "stage error names the condition: {stderr}");
}

#[test]
fn trained_model_round_trips_text() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in.txt");
    fs::write(&input, "the cat sat on the mat\nthe dog sat\ncats and dogs\n").unwrap();
    let model = tmp.path().join("m.vocab");
    let trace = tmp.path().join("trace.json");
    ok([
        "train",
        "--input",
        p(&input),
        "--model-out",
        p(&model),
        "--vocab-size",
        "30",
        "--scheme",
        "fin",
        "--seed-min-count",
        "1",
        "--trace-out",
        p(&trace),
    ]);
    let trace = json(&trace);
    assert_eq!(trace["config"]["target_vocab_size"], 30);
    assert!(trace["trace"]["final_mass"].as_f64().unwrap() > 0.999_999);

    let tok = tmp.path().join("out.tok");
    ok([
        "encode",
        "--model",
        p(&model),
        "--input",
        p(&input),
        "--output",
        p(&tok),
    ]);
    let decoded: Vec<String> = fs::read_to_string(&tok)
        .unwrap()
        .lines()
        .map(|l| l.split(' ').collect::<String>().replace('\u{2581}', " ").trim_end().to_owned())
        .collect();
    assert_eq!(decoded, ["the cat sat on the mat", "the dog sat", "cats and dogs"]);
}
