use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const TYPES: [&str; 16] = [
    "ENFJ", "ENFP", "ENTJ", "ENTP", "ESFJ", "ESFP", "ESTJ", "ESTP", "INFJ", "INFP", "INTJ", "INTP",
    "ISFJ", "ISFP", "ISTJ", "ISTP",
];

fn glassbox(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_glassbox"))
        .args(args)
        .env_remove("GLASSBOX_WORKERS")
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// The JSON object printed after the human-readable part.
fn trailing_json(o: &Output) -> Value {
    let out = stdout(o);
    let start = out
        .find("\n{")
        .map(|i| i + 1)
        .unwrap_or_else(|| out.find('{').unwrap());
    serde_json::from_str(&out[start..]).unwrap()
}

/// Reddit-style CSV whose letters show up as marker words.
fn reddit_csv(dir: &Path, per_type: usize) -> PathBuf {
    let mut s = String::from("type,text\n");
    for t in TYPES {
        for i in 0..per_type {
            let markers: Vec<String> = t
                .chars()
                .map(|c| format!("mark{}", c.to_ascii_lowercase()))
                .collect();
            let _ = writeln!(
                s,
                "{t},\"{} filler{} words here\"",
                markers.join(" "),
                i % 3
            );
        }
    }
    let path = dir.join("reddit.csv");
    fs::write(&path, s).unwrap();
    path
}

fn ingested(dir: &Path, per_type: usize) -> PathBuf {
    let csv = reddit_csv(dir, per_type);
    let out = dir.join("corpus.jsonl");
    let o = glassbox(&[
        "ingest",
        "--format",
        "reddit",
        "--input",
        csv.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn help_is_frozen() {
    let mut all = String::new();
    for sub in ["", "ingest", "stats", "run", "sweep", "ttest", "report"] {
        let args: Vec<&str> = if sub.is_empty() {
            vec!["--help"]
        } else {
            vec![sub, "--help"]
        };
        let o = glassbox(&args);
        assert!(o.status.success());
        let _ = writeln!(all, "==== glassbox {sub}\n{}", stdout(&o));
    }
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/help.txt");
    if std::env::var_os("GLASSBOX_BLESS").is_some() {
        fs::write(&golden, &all).unwrap();
    }
    assert_eq!(all, fs::read_to_string(&golden).unwrap());
    for flag in [
        "--seed",
        "--workers",
        "--format",
        "--input",
        "--output",
        "--corpus",
        "--iqr-k",
        "--min",
        "--max",
        "--config",
        "--kbest",
        "--report",
        "--labels",
        "--positive",
        "--welch",
        "--k-best",
        "--explain-top",
        "--leaky-prefit",
        "--stratify-by-type",
        "--per-label-selection",
    ] {
        assert!(all.contains(flag), "{flag}");
    }
}

#[test]
fn ingest_reports_counts_and_missing_file_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let csv = reddit_csv(dir.path(), 2);
    let out = dir.path().join("c.jsonl");
    let o = glassbox(&[
        "ingest",
        "--format",
        "reddit",
        "--input",
        csv.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("documents written:  32"));
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 32);

    let o = glassbox(&[
        "ingest",
        "--format",
        "reddit",
        "--input",
        "/nonexistent.csv",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn kaggle_truncation_count() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("k.csv");
    fs::write(
        &csv,
        "type,posts\nINTJ,'first post|||second post'\nENFP,'cut off here...|||fine'\n",
    )
    .unwrap();
    let out = dir.path().join("k.jsonl");
    let o = glassbox(&[
        "ingest",
        "--format",
        "kaggle",
        "--input",
        csv.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("truncated excluded: 1"));
    assert_eq!(trailing_json(&o)["report"]["truncated_excluded"], 1);
}

#[test]
fn stats_table_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = ingested(dir.path(), 2);
    let o = glassbox(&[
        "stats",
        "--corpus",
        corpus.to_str().unwrap(),
        "--min",
        "2",
        "--max",
        "100",
        "--seed",
        "9",
    ]);
    assert!(o.status.success());
    let j = trailing_json(&o);
    for key in ["q1", "q3", "lower", "upper", "ttr", "unique", "total"] {
        assert!(j.get(key).is_some(), "{key}");
    }
    assert_eq!(j["seed"], 9);
    assert!(stdout(&o).starts_with("seed: 9\n"));
    assert!(j["range"]["ttr"].as_f64().unwrap() > 0.0);
    assert_eq!(j["type_counts"]["INTJ"], 2);

    let empty = dir.path().join("empty.jsonl");
    fs::write(&empty, "").unwrap();
    assert_eq!(
        glassbox(&["stats", "--corpus", empty.to_str().unwrap()])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn run_writes_results_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = ingested(dir.path(), 5);
    let results = dir.path().join("results");
    let args = [
        "run",
        "--preset",
        "step2",
        "--classifier",
        "mnb",
        "--corpus",
        corpus.to_str().unwrap(),
        "--output",
        results.to_str().unwrap(),
        "--seed",
        "3",
    ];
    let o = glassbox(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("seed: 3\n"));
    let run_dir = results.join("step2-mnb");
    for f in [
        "spec.json",
        "report.json",
        "report.md",
        "classwise.json",
        "explain/label_0.json",
    ] {
        assert!(run_dir.join(f).exists(), "{f}");
    }
    let first = fs::read(run_dir.join("report.json")).unwrap();
    assert!(glassbox(&args).status.success());
    assert_eq!(first, fs::read(run_dir.join("report.json")).unwrap());
    let report: Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(report["seed"], 3);
    assert!(report["exact_match"].as_f64().unwrap() > 0.9);
}

#[test]
fn step3_logreg_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = ingested(dir.path(), 3);
    let results = dir.path().join("r");
    let o = glassbox(&[
        "run",
        "--preset",
        "step3",
        "--classifier",
        "logreg",
        "--corpus",
        corpus.to_str().unwrap(),
        "--output",
        results.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(4));
    assert!(results.join("step3-logreg/failure.json").exists());
    assert_eq!(trailing_json(&o)["failure"]["label"], "N/S");
}

#[test]
fn config_errors_exit_2() {
    assert_eq!(
        glassbox(&["run", "--preset", "step2"]).status.code(),
        Some(2)
    );
    assert_eq!(
        glassbox(&["run", "--preset", "step9", "--classifier", "mnb"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        glassbox(&[
            "sweep",
            "--kbest",
            "a:b:c",
            "--preset",
            "step2",
            "--classifier",
            "mnb"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(glassbox(&["frobnicate"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("x.toml");
    fs::write(&cfg, "name = \"x\"\n[cv]\nfolds = 1\n").unwrap();
    assert_eq!(
        glassbox(&["run", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = ingested(dir.path(), 4);
    let cfg = dir.path().join("exp.toml");
    fs::write(
        &cfg,
        "name = \"cfg-run\"\nregime = \"drop_NS_label\"\n[data]\npath = \"corpus.jsonl\"\n[classifier]\nkind = \"knn\"\nk = 3\n[cv]\nfolds = 4\n",
    )
    .unwrap();
    let results = dir.path().join("r");
    let o = glassbox(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--k",
        "1",
        "--output",
        results.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let spec: Value =
        serde_json::from_slice(&fs::read(results.join("cfg-run/spec.json")).unwrap()).unwrap();
    assert_eq!(spec["classifier"]["k"], 1);
    assert_eq!(spec["cv"]["folds"], 4);
    assert_eq!(spec["regime"], "drop_NS_label");
    let report: Value =
        serde_json::from_slice(&fs::read(results.join("cfg-run/report.json")).unwrap()).unwrap();
    assert_eq!(report["per_label"].as_array().unwrap().len(), 3);
    let _ = corpus;
}

#[test]
fn sweep_rows_and_best() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = ingested(dir.path(), 3);
    let results = dir.path().join("r");
    let o = glassbox(&[
        "sweep",
        "--kbest",
        "2:6:2",
        "--preset",
        "step6-full",
        "--classifier",
        "mnb",
        "--corpus",
        corpus.to_str().unwrap(),
        "--output",
        results.to_str().unwrap(),
        "--folds",
        "3",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let j = trailing_json(&o);
    let ks: Vec<u64> = j["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["k_best"].as_u64().unwrap())
        .collect();
    assert_eq!(ks, [2, 4, 6]);
    assert!(j["best_k"].is_u64());
    assert!(results.join("step6-full-mnb-sweep/sweep.json").exists());
    assert!(results.join("step6-full-mnb-k4/report.json").exists());
}

fn table8_report(dir: &Path) -> PathBuf {
    let label = |name: &str, pos: &str, p: f64, r: f64, f: f64| serde_json::json!({ "label": name, "positive": pos, "P": p, "R": r, "F1": f });
    let prf = serde_json::json!({ "P": 0.8, "R": 0.8, "F1": 0.8 });
    let report = serde_json::json!({
        "seed": 42,
        "k": 5,
        "exact_match": 0.5,
        "hamming_loss": 0.2,
        "per_label": [
            label("E/I", "I", 0.8, 0.8, 0.8),
            label("N/S", "S", 0.870, 0.981, 0.921),
            label("F/T", "T", 0.8, 0.8, 0.8),
            label("J/P", "P", 0.830, 0.751, 0.788),
        ],
        "micro": prf,
        "macro": prf,
        "folds": [],
    });
    let path = dir.join("report.json");
    fs::write(&path, serde_json::to_string(&report).unwrap()).unwrap();
    path
}

#[test]
fn ttest_on_saved_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = table8_report(dir.path());
    let o = glassbox(&[
        "ttest",
        "--report",
        report.to_str().unwrap(),
        "--labels",
        "NS",
        "JP",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("seed: 42\n"));
    let j = trailing_json(&o);
    assert!((j["p"].as_f64().unwrap() - 0.027).abs() < 0.003);
    assert!((j["t"].as_f64().unwrap() - 3.41).abs() < 0.02);
    assert_eq!(j["df"], 4.0);

    let o = glassbox(&[
        "ttest",
        "--report",
        report.to_str().unwrap(),
        "--labels",
        "NS",
        "XY",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn report_rendering() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    fs::create_dir_all(&a).unwrap();
    fs::create_dir_all(&b).unwrap();
    let ra = table8_report(&a);
    let rb = table8_report(&b);
    let o = glassbox(&["report", "--input", ra.to_str().unwrap(), "--format", "md"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("| Exact Match Ratio | 0.500 | Hamming Loss | 0.200 |"));
    let o = glassbox(&[
        "report",
        "--input",
        ra.to_str().unwrap(),
        rb.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("metric,a,b\n"));
}

#[test]
fn positive_letters_change_scoring() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = ingested(dir.path(), 3);
    let results = dir.path().join("r");
    let o = glassbox(&[
        "run",
        "--preset",
        "step2",
        "--classifier",
        "mnb",
        "--corpus",
        corpus.to_str().unwrap(),
        "--output",
        results.to_str().unwrap(),
        "--positive",
        "E",
        "N",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value =
        serde_json::from_slice(&fs::read(results.join("step2-mnb/report.json")).unwrap()).unwrap();
    let letters: Vec<&str> = report["per_label"]
        .as_array()
        .unwrap()
        .iter()
        .map(|l| l["positive"].as_str().unwrap())
        .collect();
    assert_eq!(letters, ["E", "N", "T", "P"]);
    assert_eq!(
        glassbox(&[
            "run",
            "--preset",
            "step2",
            "--classifier",
            "mnb",
            "--positive",
            "X"
        ])
        .status
        .code(),
        Some(2)
    );
}
