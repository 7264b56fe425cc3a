use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context as _;
use clap::{Args, Parser, Subcommand, ValueEnum};
use glassbox::classifiers::{ClassifierKind, Metric};
use glassbox::corpus::{
    ingest_kaggle, ingest_reddit, read_jsonl, write_jsonl, RedditLimits, TraitLabel,
};
use glassbox::evaluation::{render_csv, render_markdown, t_test, CvReport, MetricsReport};
use glassbox::experiments::{
    compare, parse_k_range, preset, run, sweep_k_best, write_outcome, DataFormat, ExperimentSpec,
    Regime, RunOptions, RunOutcome,
};
use glassbox::textprep::{
    ensure_preprocessed, filter_token_range, iqr_bounds, token_counts, token_histogram, ttr,
    PrepConfig,
};
use glassbox::Error;
use serde_json::json;

#[derive(Parser, Debug)]
#[command(
    name = "glassbox",
    version,
    about = "Multi-label MBTI classification from text with glass-box models"
)]
struct Cli {
    /// Seed for fold shuffling; overrides cv.seed and is echoed in every output
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for cross-validation folds
    #[arg(long, global = true, env = "GLASSBOX_WORKERS")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convert a raw Reddit or Kaggle CSV into a JSON-lines corpus
    Ingest(IngestArgs),
    /// Token-count IQR bounds, histogram, TTR and per-type counts
    Stats(StatsArgs),
    /// Run one cross-validated experiment
    Run(RunArgs),
    /// Run one experiment per k_best value
    Sweep(SweepArgs),
    /// Paired-label t-test over a report's per-label precision, recall and F1
    Ttest(TtestArgs),
    /// Render saved reports as markdown or CSV
    Report(ReportArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum RawFormat {
    Reddit,
    Kaggle,
}

#[derive(Args, Debug)]
struct IngestArgs {
    /// Layout of the input CSV: type,text or type,posts
    #[arg(long, value_enum)]
    format: RawFormat,
    /// Raw CSV file
    #[arg(long)]
    input: PathBuf,
    /// JSON-lines corpus to write
    #[arg(long)]
    output: PathBuf,
    /// Kaggle: keep rows containing posts cut off with "..."
    #[arg(long)]
    keep_truncated: bool,
    /// Reddit: keep at most this many documents per type
    #[arg(long)]
    max_per_type: Option<usize>,
    /// Tokenize with the default preprocessing before writing
    #[arg(long)]
    preprocess: bool,
}

#[derive(Args, Debug)]
struct StatsArgs {
    /// JSON-lines corpus; untokenized documents are preprocessed first
    #[arg(long)]
    corpus: PathBuf,
    /// Whisker multiplier for the outlier bounds
    #[arg(long, default_value_t = 1.5)]
    iqr_k: f64,
    /// Lower end of the token range for the TTR-after figure
    #[arg(long)]
    min: Option<usize>,
    /// Upper end of the token range for the TTR-after figure
    #[arg(long)]
    max: Option<usize>,
    /// Token-count histogram bin width
    #[arg(long, default_value_t = 10)]
    bin_width: usize,
    /// Write the token-count histogram as CSV here
    #[arg(long)]
    histogram_csv: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum KindArg {
    Mnb,
    Knn,
    Logreg,
}

impl From<KindArg> for ClassifierKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Mnb => ClassifierKind::Mnb,
            KindArg::Knn => ClassifierKind::Knn,
            KindArg::Logreg => ClassifierKind::Logreg,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum MetricArg {
    Euclidean,
    Cosine,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum DataFormatArg {
    Jsonl,
    Reddit,
    Kaggle,
}

#[derive(Args, Debug)]
struct SpecArgs {
    /// TOML experiment spec
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Preset name: step2 step3 step4 step5 step6-full step6-exclude-s step6-drop-ns step6-min-count
    #[arg(long)]
    preset: Option<String>,
    /// Classifier kind; required with --preset
    #[arg(long, value_enum)]
    classifier: Option<KindArg>,
    /// Corpus path (overrides data.path)
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Corpus file format (overrides data.format)
    #[arg(long, value_enum)]
    data_format: Option<DataFormatArg>,
    /// Experiment name, used as the results subdirectory
    #[arg(long)]
    name: Option<String>,
    /// full | exclude_S | drop_NS_label | min_count:N
    #[arg(long)]
    regime: Option<String>,
    /// Keep this many chi2-ranked features
    #[arg(long)]
    k_best: Option<usize>,
    /// Select features per label instead of by max chi2 across labels
    #[arg(long)]
    per_label_selection: bool,
    /// Cross-validation folds
    #[arg(long)]
    folds: Option<usize>,
    /// Deal folds per MBTI type instead of one global shuffle
    #[arg(long)]
    stratify_by_type: bool,
    /// Fit TF-IDF and selection on the whole corpus before splitting folds
    #[arg(long)]
    leaky_prefit: bool,
    /// Drop documents with fewer tokens
    #[arg(long)]
    min_tokens: Option<usize>,
    /// Drop documents with more tokens
    #[arg(long)]
    max_tokens: Option<usize>,
    /// MNB smoothing
    #[arg(long)]
    alpha: Option<f64>,
    /// kNN neighbour count
    #[arg(long)]
    k: Option<usize>,
    /// kNN distance
    #[arg(long, value_enum)]
    metric: Option<MetricArg>,
    /// Logistic regression inverse regularization
    #[arg(long = "C", alias = "c")]
    c: Option<f64>,
    /// Logistic regression sweep limit
    #[arg(long)]
    max_iter: Option<usize>,
    /// Logistic regression stopping tolerance on the optimality violation
    #[arg(long)]
    tol: Option<f64>,
    /// Letters scored as the positive class, e.g. --positive E N
    #[arg(long, num_args = 1..)]
    positive: Vec<char>,
    /// Results root directory
    #[arg(long, default_value = "results")]
    output: PathBuf,
    /// Features per direction in explanation dumps
    #[arg(long, default_value_t = 20)]
    explain_top: usize,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    spec: SpecArgs,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// start:stop:step or a comma list
    #[arg(long)]
    kbest: String,
    #[command(flatten)]
    spec: SpecArgs,
}

#[derive(Args, Debug)]
struct TtestArgs {
    /// report.json written by `run`
    #[arg(long)]
    report: PathBuf,
    /// Two labels, e.g. NS JP
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    labels: Vec<String>,
    /// Unequal-variance variant
    #[arg(long)]
    welch: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum OutFormat {
    Md,
    Csv,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// report.json files; two or more give a comparison table
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    /// Output format
    #[arg(long, value_enum, default_value = "md")]
    format: OutFormat,
}

/// Failure with its process exit status.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn config_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 2,
        error: e.into(),
    }
}

fn data_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 3,
        error: e.into(),
    }
}

fn lib_err(e: Error) -> Failure {
    let code = match &e {
        Error::SingleClass { .. } => 4,
        Error::Config(_)
        | Error::KOutOfRange { .. }
        | Error::BadColumns(_)
        | Error::BadDf(_)
        | Error::InvalidLetter(_)
        | Error::LabelAbsent(_)
        | Error::TooFewLabels => 2,
        _ => 3,
    };
    Failure {
        code,
        error: e.into(),
    }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Ingest(a) => cmd_ingest(&cli, a),
        Command::Stats(a) => cmd_stats(&cli, a),
        Command::Run(a) => cmd_run(&cli, a),
        Command::Sweep(a) => cmd_sweep(&cli, a),
        Command::Ttest(a) => cmd_ttest(&cli, a),
        Command::Report(a) => cmd_report(&cli, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn seed_line(cli: &Cli) -> String {
    match cli.seed {
        Some(s) => format!("seed: {s}"),
        None => "seed: none".into(),
    }
}

fn print_json(v: &serde_json::Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(v).expect("json values serialize")
    );
}

fn cmd_ingest(cli: &Cli, a: &IngestArgs) -> CliResult {
    let ingested = match a.format {
        RawFormat::Reddit => ingest_reddit(
            &a.input,
            &RedditLimits {
                max_per_type: a.max_per_type,
            },
        ),
        RawFormat::Kaggle => ingest_kaggle(&a.input, !a.keep_truncated),
    }
    .map_err(data_err)?;
    let mut corpus = ingested.corpus;
    if a.preprocess {
        corpus = ensure_preprocessed(corpus, &PrepConfig::default());
    }
    write_jsonl(&corpus, &a.output).map_err(data_err)?;
    let r = &ingested.report;
    println!("{}", seed_line(cli));
    println!("rows read:          {}", r.rows_read);
    println!("documents written:  {}", r.documents);
    println!("skipped rows:       {}", r.skipped.len());
    println!("truncated excluded: {}", r.truncated_excluded);
    println!("over type limit:    {}", r.over_limit);
    println!("output:             {}", a.output.display());
    print_json(&json!({ "seed": cli.seed, "output": a.output, "report": r }));
    Ok(())
}

fn load_tokenized(path: &Path) -> Result<glassbox::corpus::Corpus, Failure> {
    let corpus = read_jsonl(path).map_err(data_err)?;
    if corpus.is_empty() {
        return Err(data_err(anyhow::anyhow!(
            "{}: corpus is empty",
            path.display()
        )));
    }
    Ok(ensure_preprocessed(corpus, &PrepConfig::default()))
}

fn cmd_stats(cli: &Cli, a: &StatsArgs) -> CliResult {
    if a.iqr_k.is_nan() || a.iqr_k < 0.0 {
        return Err(config_err(anyhow::anyhow!("--iqr-k must be >= 0")));
    }
    let corpus = load_tokenized(&a.corpus)?;
    let counts = token_counts(&corpus).map_err(lib_err)?;
    let bounds = iqr_bounds(&counts, a.iqr_k).map_err(lib_err)?;
    let all = ttr(&corpus).map_err(lib_err)?;
    let histogram = token_histogram(&counts, a.bin_width);
    let types: Vec<(String, usize)> = corpus
        .type_counts()
        .into_iter()
        .map(|(t, n)| (t.code(), n))
        .collect();

    let range = if a.min.is_some() || a.max.is_some() {
        let (lo, hi) = (a.min.unwrap_or(0), a.max.unwrap_or(usize::MAX));
        if lo > hi {
            return Err(config_err(anyhow::anyhow!(
                "--min {lo} is above --max {hi}"
            )));
        }
        let kept = filter_token_range(&corpus, lo, hi).map_err(lib_err)?;
        let t = if kept.is_empty() {
            None
        } else {
            Some(ttr(&kept).map_err(lib_err)?)
        };
        Some((lo, a.max, kept.len(), t))
    } else {
        None
    };

    let mut out = String::new();
    let _ = writeln!(out, "{}", seed_line(cli));
    let _ = writeln!(out, "documents {}", corpus.len());
    let _ = writeln!(out, "| q1 | q3 | lower | upper | TTR | unique | total |");
    let _ = writeln!(out, "|---|---|---|---|---|---|---|");
    let _ = writeln!(
        out,
        "| {} | {} | {} | {} | {:.3} | {} | {} |",
        bounds.q1,
        bounds.q3,
        bounds.lower,
        bounds.upper,
        all.ratio,
        all.unique_tokens,
        all.total_tokens
    );
    if let Some((lo, hi, n, t)) = &range {
        let hi = hi.map_or("inf".to_string(), |h| h.to_string());
        match t {
            Some(t) => {
                let _ = writeln!(
                    out,
                    "\nrange {lo}..={hi}: {n} documents, TTR {:.3}",
                    t.ratio
                );
            }
            None => {
                let _ = writeln!(out, "\nrange {lo}..={hi}: no documents");
            }
        }
    }
    let _ = writeln!(
        out,
        "\n| Type | Count | Type | Count | Type | Count | Type | Count |"
    );
    let _ = writeln!(out, "|---|---|---|---|---|---|---|---|");
    for chunk in types.chunks(4) {
        let cells: Vec<String> = chunk.iter().map(|(t, n)| format!("{t} | {n}")).collect();
        let _ = writeln!(out, "| {} |", cells.join(" | "));
    }
    let _ = writeln!(out, "\n| tokens from | documents |\n|---|---|");
    for (start, n) in histogram.iter().filter(|(_, n)| *n > 0) {
        let _ = writeln!(out, "| {start} | {n} |");
    }
    print!("{out}");

    if let Some(path) = &a.histogram_csv {
        let mut csv = String::from("bin_start,bin_end,documents\n");
        for (start, n) in &histogram {
            let _ = writeln!(csv, "{start},{},{n}", start + a.bin_width.max(1) - 1);
        }
        fs::write(path, csv)
            .with_context(|| path.display().to_string())
            .map_err(data_err)?;
    }

    let mut j = json!({
        "seed": cli.seed,
        "documents": corpus.len(),
        "q1": bounds.q1,
        "q3": bounds.q3,
        "lower": bounds.lower,
        "upper": bounds.upper,
        "ttr": all.ratio,
        "unique": all.unique_tokens,
        "total": all.total_tokens,
        "type_counts": types.iter().map(|(t, n)| (t.clone(), json!(n))).collect::<serde_json::Map<_, _>>(),
        "histogram": histogram.iter().map(|(s, n)| json!([s, n])).collect::<Vec<_>>(),
    });
    if let Some((lo, hi, n, t)) = range {
        j["range"] = json!({
            "min": lo,
            "max": hi,
            "documents": n,
            "ttr": t.map(|t| t.ratio),
            "unique": t.map(|t| t.unique_tokens),
            "total": t.map(|t| t.total_tokens),
        });
    }
    print_json(&j);
    Ok(())
}

fn build_spec(cli: &Cli, a: &SpecArgs) -> Result<ExperimentSpec, Failure> {
    let mut spec = match (&a.config, &a.preset) {
        (Some(path), _) => ExperimentSpec::from_toml_file(path).map_err(|e| match e {
            Error::Config(_) => lib_err(e),
            other => config_err(other),
        })?,
        (None, Some(name)) => {
            let kind = a
                .classifier
                .ok_or_else(|| config_err(anyhow::anyhow!("--preset needs --classifier")))?;
            preset(name, kind.into()).map_err(lib_err)?
        }
        (None, None) => return Err(config_err(anyhow::anyhow!("give --config or --preset"))),
    };
    if a.config.is_some() {
        if let Some(kind) = a.classifier {
            spec.classifier.kind = kind.into();
        }
    }
    if let Some(p) = &a.corpus {
        spec.data.path = Some(p.clone());
    }
    if let Some(f) = a.data_format {
        spec.data.format = match f {
            DataFormatArg::Jsonl => DataFormat::Jsonl,
            DataFormatArg::Reddit => DataFormat::Reddit,
            DataFormatArg::Kaggle => DataFormat::Kaggle,
        };
    }
    if let Some(n) = &a.name {
        spec.name = n.clone();
    }
    if let Some(r) = &a.regime {
        spec.regime = r.parse::<Regime>().map_err(lib_err)?;
    }
    if a.k_best.is_some() {
        spec.selection.k_best = a.k_best;
    }
    spec.selection.per_label |= a.per_label_selection;
    if let Some(f) = a.folds {
        spec.cv.folds = f;
    }
    spec.cv.stratify_by_type |= a.stratify_by_type;
    spec.compat.leaky_prefit |= a.leaky_prefit;
    if let Some(s) = cli.seed {
        spec.cv.seed = s;
    }
    if a.min_tokens.is_some() {
        spec.data.min_tokens = a.min_tokens;
    }
    if a.max_tokens.is_some() {
        spec.data.max_tokens = a.max_tokens;
    }
    let c = &mut spec.classifier;
    if let Some(v) = a.alpha {
        c.alpha = v;
    }
    if let Some(v) = a.k {
        c.k = v;
    }
    if let Some(m) = a.metric {
        c.metric = match m {
            MetricArg::Euclidean => Metric::Euclidean,
            MetricArg::Cosine => Metric::Cosine,
        };
    }
    if let Some(v) = a.c {
        c.c = v;
    }
    if let Some(v) = a.max_iter {
        c.max_iter = v;
    }
    if let Some(v) = a.tol {
        c.tol = v;
    }
    if !a.positive.is_empty() {
        spec.positive = a.positive.clone();
    }
    spec.validate().map_err(lib_err)?;
    Ok(spec)
}

fn run_options(cli: &Cli, a: &SpecArgs) -> Result<RunOptions, Failure> {
    if cli.workers == Some(0) {
        return Err(config_err(anyhow::anyhow!("--workers must be >= 1")));
    }
    Ok(RunOptions {
        workers: cli.workers,
        explain_top: Some(a.explain_top),
    })
}

fn cmd_run(cli: &Cli, a: &RunArgs) -> CliResult {
    let spec = build_spec(cli, &a.spec)?;
    let options = run_options(cli, &a.spec)?;
    let corpus = spec.load_corpus().map_err(|e| match e {
        Error::Config(_) => lib_err(e),
        other => data_err(other),
    })?;
    let outcome = run(&spec, corpus, &options).map_err(lib_err)?;
    let dir = write_outcome(&outcome, &a.spec.output).map_err(data_err)?;
    println!("seed: {}", spec.cv.seed);
    match &outcome {
        RunOutcome::Completed(r) => {
            print!("{}", render_markdown(&r.report.mean, &spec.name));
            if !r.degenerate_labels.is_empty() {
                let names: Vec<&str> = r.degenerate_labels.iter().map(|l| l.pair_name()).collect();
                println!("\nconstant predictors: {}", names.join(", "));
            }
            println!("\nresults: {}", dir.display());
            print_json(&json!({
                "seed": spec.cv.seed,
                "name": spec.name,
                "results": dir,
                "duration_ms": r.duration.as_millis() as u64,
                "report": r.report,
            }));
            Ok(())
        }
        RunOutcome::Failed(f) => {
            println!("{}: failed: {}", spec.name, f.error);
            println!("results: {}", dir.display());
            print_json(
                &json!({ "seed": spec.cv.seed, "name": spec.name, "results": dir, "failure": f }),
            );
            Err(Failure {
                code: 4,
                error: anyhow::anyhow!("{}", f.error),
            })
        }
    }
}

fn cmd_sweep(cli: &Cli, a: &SweepArgs) -> CliResult {
    let ks = parse_k_range(&a.kbest).map_err(lib_err)?;
    let mut spec = build_spec(cli, &a.spec)?;
    // swept values replace the spec's k_best; this just switches selection on
    if spec.selection.k_best.is_none() {
        spec.selection.k_best = ks.first().copied();
    }
    let options = run_options(cli, &a.spec)?;
    let corpus = spec.load_corpus().map_err(|e| match e {
        Error::Config(_) => lib_err(e),
        other => data_err(other),
    })?;
    let sweep = sweep_k_best(&spec, &corpus, &ks, &options).map_err(lib_err)?;
    let mut rows = Vec::new();
    println!("seed: {}", spec.cv.seed);
    println!("| k_best | Exact Match | Hamming Loss | Macro F1 | status |");
    println!("|---|---|---|---|---|");
    for row in &sweep.rows {
        write_outcome(&row.outcome, &a.spec.output).map_err(data_err)?;
        match &row.outcome {
            RunOutcome::Completed(r) => {
                let m = &r.report.mean;
                let best = if sweep.best_k == Some(row.k_best) {
                    "best"
                } else {
                    "ok"
                };
                println!(
                    "| {} | {:.3} | {:.3} | {:.3} | {best} |",
                    row.k_best, m.exact_match, m.hamming_loss, m.macro_.f1
                );
                rows.push(json!({ "k_best": row.k_best, "name": r.spec.name, "report": r.report }));
            }
            RunOutcome::Failed(f) => {
                println!("| {} | | | | failed: {} |", row.k_best, f.error);
                rows.push(json!({ "k_best": row.k_best, "name": f.spec.name, "failure": f }));
            }
        }
    }
    let summary =
        json!({ "seed": spec.cv.seed, "name": spec.name, "best_k": sweep.best_k, "rows": rows });
    let dir = a.spec.output.join(format!("{}-sweep", spec.name));
    fs::create_dir_all(&dir).map_err(data_err)?;
    fs::write(
        dir.join("sweep.json"),
        serde_json::to_string_pretty(&summary).map_err(data_err)? + "\n",
    )
    .map_err(data_err)?;
    match sweep.best_k {
        Some(k) => println!("\nbest k_best: {k}"),
        None => println!("\nno run completed"),
    }
    print_json(&summary);
    Ok(())
}

fn read_report(path: &Path) -> Result<(Option<u64>, MetricsReport), Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| path.display().to_string())
        .map_err(data_err)?;
    if let Ok(cv) = serde_json::from_str::<CvReport>(&text) {
        return Ok((Some(cv.seed), cv.mean));
    }
    let r: MetricsReport = serde_json::from_str(&text)
        .with_context(|| format!("{}: not a metrics report", path.display()))
        .map_err(data_err)?;
    Ok((None, r))
}

fn cmd_ttest(cli: &Cli, a: &TtestArgs) -> CliResult {
    let labels: Vec<TraitLabel> = a
        .labels
        .iter()
        .map(|s| {
            TraitLabel::parse(s).ok_or_else(|| config_err(anyhow::anyhow!("unknown label {s:?}")))
        })
        .collect::<Result<_, _>>()?;
    let (seed, report) = read_report(&a.report)?;
    let triple = |l: TraitLabel| -> Result<Vec<f64>, Failure> {
        let m = report.label(l).ok_or_else(|| {
            data_err(anyhow::anyhow!(
                "label {} is not in the report",
                l.pair_name()
            ))
        })?;
        Ok(vec![m.scores.precision, m.scores.recall, m.scores.f1])
    };
    let (x, y) = (triple(labels[0])?, triple(labels[1])?);
    let r = t_test(&x, &y, a.welch).map_err(lib_err)?;
    let seed = cli.seed.or(seed);
    match seed {
        Some(s) => println!("seed: {s}"),
        None => println!("seed: none"),
    }
    println!(
        "{} vs {} ({}): t = {:.5}, df = {:.4}, p = {:.5}",
        labels[0].pair_name(),
        labels[1].pair_name(),
        if a.welch { "Welch" } else { "pooled" },
        r.t,
        r.df,
        r.p
    );
    print_json(&json!({
        "seed": seed,
        "labels": [labels[0].pair_name(), labels[1].pair_name()],
        "a": x,
        "b": y,
        "welch": a.welch,
        "t": r.t,
        "df": r.df,
        "p": r.p,
    }));
    Ok(())
}

fn cmd_report(cli: &Cli, a: &ReportArgs) -> CliResult {
    let mut loaded = Vec::new();
    for path in &a.input {
        let (seed, r) = read_report(path)?;
        // directory name is the experiment name in the results layout
        let name = path
            .parent()
            .and_then(Path::file_name)
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        loaded.push((name, seed, r));
    }
    let seeds: Vec<String> = loaded
        .iter()
        .map(|(_, s, _)| s.or(cli.seed).map_or("none".into(), |s| s.to_string()))
        .collect();
    let out = if loaded.len() == 1 {
        let (name, _, r) = &loaded[0];
        match a.format {
            OutFormat::Md => format!("seed: {}\n\n{}", seeds[0], render_markdown(r, name)),
            OutFormat::Csv => format!("# seed: {}\n{}", seeds[0], render_csv(r)),
        }
    } else {
        let refs: Vec<(String, &MetricsReport)> =
            loaded.iter().map(|(n, _, r)| (n.clone(), r)).collect();
        let table = compare(&refs);
        match a.format {
            OutFormat::Md => format!("seed: {}\n\n{}", seeds.join(", "), table.to_markdown()),
            OutFormat::Csv => format!("# seed: {}\n{}", seeds.join(","), table.to_csv()),
        }
    };
    print!("{out}");
    Ok(())
}
