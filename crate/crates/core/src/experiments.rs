//! Declarative experiment runs over the data regimes, k-best sweeps and
//! comparison tables.
//!
//! An [`ExperimentSpec`] names a data regime, a classifier, optional
//! chi-squared selection and the cross-validation setup. Specs come from
//! presets or a TOML file with sections `[data]`, `[prep]`, `[classifier]`,
//! `[tfidf]`, `[selection]`, `[cv]` and `[compat]`.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::classifiers::{BinaryClassifierConfig, ClassifierKind, Explanation};
use crate::corpus::{
    ingest_kaggle, ingest_reddit, read_jsonl, Corpus, LabelSchema, RedditLimits, TraitLabel,
};
use crate::error::{Error, Result};
use crate::evaluation::{
    cross_validate, render_class_wise_markdown, render_markdown, ClassWiseReport, CvOptions,
    CvReport, MetricsReport, Prf,
};
use crate::features::{PipelineConfig, SelectionConfig, TfidfConfig};
use crate::multilabel::BinaryRelevanceModel;
use crate::textprep::{ensure_preprocessed, filter_token_range, PrepConfig};

/// Which documents and labels an experiment trains on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Regime {
    Full,
    /// Drop every type carrying S.
    ExcludeS,
    /// Keep the documents, stop predicting N/S.
    DropNsLabel,
    /// Drop every type with fewer documents than the threshold.
    MinCount(usize),
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regime::Full => f.write_str("full"),
            Regime::ExcludeS => f.write_str("exclude_S"),
            Regime::DropNsLabel => f.write_str("drop_NS_label"),
            Regime::MinCount(t) => write!(f, "min_count:{t}"),
        }
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unknown regime {s:?}"));
        match s {
            "full" => Ok(Regime::Full),
            "exclude_S" | "exclude_s" => Ok(Regime::ExcludeS),
            "drop_NS_label" | "drop_ns_label" => Ok(Regime::DropNsLabel),
            _ => {
                let t = s
                    .strip_prefix("min_count:")
                    .or_else(|| {
                        s.strip_prefix("min_count(")
                            .and_then(|r| r.strip_suffix(')'))
                    })
                    .ok_or_else(bad)?;
                let t: usize = t.trim().parse().map_err(|_| bad())?;
                if t == 0 {
                    return Err(Error::Config("min_count threshold must be >= 1".into()));
                }
                Ok(Regime::MinCount(t))
            }
        }
    }
}

impl TryFrom<String> for Regime {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Regime> for String {
    fn from(r: Regime) -> String {
        r.to_string()
    }
}

pub fn apply_regime(corpus: &Corpus, regime: Regime) -> Result<Corpus> {
    match regime {
        Regime::Full => Ok(corpus.clone()),
        Regime::ExcludeS => corpus.filter_exclude_trait('S'),
        Regime::DropNsLabel => corpus.drop_label(TraitLabel::MindNS.index()),
        Regime::MinCount(t) => Ok(corpus.filter_min_class_count(t)),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    /// One preprocessed or raw document per line, as written by `ingest`.
    #[default]
    Jsonl,
    Reddit,
    Kaggle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub path: Option<PathBuf>,
    pub format: DataFormat,
    /// Kaggle only: drop rows with a post cut off by "...".
    pub drop_truncated: bool,
    /// Inclusive token-count range kept after preprocessing.
    pub min_tokens: Option<usize>,
    pub max_tokens: Option<usize>,
}

impl Default for DataSection {
    fn default() -> Self {
        DataSection {
            path: None,
            format: DataFormat::Jsonl,
            drop_truncated: true,
            min_tokens: None,
            max_tokens: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvSection {
    pub folds: usize,
    pub seed: u64,
    pub stratify_by_type: bool,
}

impl Default for CvSection {
    fn default() -> Self {
        CvSection {
            folds: 5,
            seed: 42,
            stratify_by_type: false,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompatSection {
    /// Fit TF-IDF and selection on the whole corpus before splitting folds.
    pub leaky_prefit: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    #[serde(default = "default_regime")]
    pub regime: Regime,
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub prep: PrepConfig,
    #[serde(default)]
    pub classifier: BinaryClassifierConfig,
    #[serde(default)]
    pub tfidf: TfidfConfig,
    #[serde(default)]
    pub selection: SelectionConfig,
    #[serde(default)]
    pub cv: CvSection,
    #[serde(default)]
    pub compat: CompatSection,
    /// Letters scored as the positive class; unlisted labels use I, S, T, P.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub positive: Vec<char>,
}

fn default_regime() -> Regime {
    Regime::Full
}

impl ExperimentSpec {
    pub fn new(
        name: impl Into<String>,
        regime: Regime,
        classifier: BinaryClassifierConfig,
    ) -> Self {
        ExperimentSpec {
            name: name.into(),
            regime,
            data: DataSection::default(),
            prep: PrepConfig::default(),
            classifier,
            tfidf: TfidfConfig::default(),
            selection: SelectionConfig::default(),
            cv: CvSection::default(),
            compat: CompatSection::default(),
            positive: Vec::new(),
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let spec: ExperimentSpec = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    /// Reads a TOML spec; a relative `data.path` resolves against the file's directory.
    pub fn from_toml_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut spec = Self::from_toml_str(&text)?;
        if let (Some(p), Some(dir)) = (&spec.data.path, path.parent()) {
            if p.is_relative() {
                spec.data.path = Some(dir.join(p));
            }
        }
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::Config(format!(
                "bad experiment name {:?}",
                self.name
            )));
        }
        if self.cv.folds < 2 {
            return Err(Error::Config(format!(
                "cv.folds must be >= 2, got {}",
                self.cv.folds
            )));
        }
        if self.selection.k_best == Some(0) {
            return Err(Error::Config("selection.k_best must be >= 1".into()));
        }
        if let (Some(lo), Some(hi)) = (self.data.min_tokens, self.data.max_tokens) {
            if lo > hi {
                return Err(Error::Config(format!("token range {lo}..={hi} is empty")));
            }
        }
        for &c in &self.positive {
            TraitLabel::from_letter(c).ok_or(Error::InvalidLetter(c))?;
        }
        self.classifier.validate()
    }

    pub fn pipeline_config(&self) -> PipelineConfig {
        PipelineConfig {
            tfidf: self.tfidf,
            selection: self.selection,
        }
    }

    fn schema(&self, labels: &[TraitLabel]) -> Result<LabelSchema> {
        let mut schema = LabelSchema::new(labels);
        for &c in &self.positive {
            let (label, _) = TraitLabel::from_letter(c).ok_or(Error::InvalidLetter(c))?;
            // a letter for a dropped label has nothing to configure
            if labels.contains(&label) {
                schema = schema.with_positive_letter(c)?;
            }
        }
        Ok(schema)
    }

    /// Loads the corpus named by `data`.
    pub fn load_corpus(&self) -> Result<Corpus> {
        let path = self
            .data
            .path
            .as_ref()
            .ok_or_else(|| Error::Config("data.path is not set".into()))?;
        match self.data.format {
            DataFormat::Jsonl => read_jsonl(path),
            DataFormat::Reddit => Ok(ingest_reddit(path, &RedditLimits::default())?.corpus),
            DataFormat::Kaggle => Ok(ingest_kaggle(path, self.data.drop_truncated)?.corpus),
        }
    }
}

/// Registered preset names.
pub const PRESETS: [&str; 8] = [
    "step2",
    "step3",
    "step4",
    "step5",
    "step6-full",
    "step6-exclude-s",
    "step6-drop-ns",
    "step6-min-count",
];

/// Minimum documents per type in the min-count regime.
pub const MIN_COUNT_THRESHOLD: usize = 550;

/// Regime and k_best of a preset for a classifier. The step6 k_best values
/// are the best found per classifier in earlier sweeps; logreg on the
/// S-excluded data never had one and takes the 250 used for mnb there.
pub fn preset_parts(name: &str, kind: ClassifierKind) -> Option<(Regime, Option<usize>)> {
    use ClassifierKind::*;
    let min_count = Regime::MinCount(MIN_COUNT_THRESHOLD);
    Some(match name {
        "step2" => (Regime::Full, None),
        "step3" => (Regime::ExcludeS, None),
        "step4" => (Regime::DropNsLabel, None),
        "step5" => (min_count, None),
        "step6-full" => (
            Regime::Full,
            Some(match kind {
                Mnb => 150,
                Knn => 50,
                Logreg => 200,
            }),
        ),
        "step6-exclude-s" => (
            Regime::ExcludeS,
            Some(match kind {
                Mnb => 250,
                Knn => 50,
                Logreg => 250,
            }),
        ),
        "step6-drop-ns" => (Regime::DropNsLabel, Some(150)),
        "step6-min-count" => (min_count, Some(150)),
        _ => return None,
    })
}

/// A spec for preset `name` with default hyperparameters for `kind`.
pub fn preset(name: &str, kind: ClassifierKind) -> Result<ExperimentSpec> {
    let (regime, k_best) = preset_parts(name, kind).ok_or_else(|| {
        Error::Config(format!(
            "unknown preset {name:?}; known: {}",
            PRESETS.join(", ")
        ))
    })?;
    let mut spec = ExperimentSpec::new(
        format!("{name}-{kind}"),
        regime,
        BinaryClassifierConfig::of_kind(kind),
    );
    spec.selection.k_best = k_best;
    Ok(spec)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelExplanation {
    pub label: TraitLabel,
    pub explanation: Explanation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub corpus_fingerprint: String,
    pub n_documents: usize,
    pub degenerate_labels: Vec<TraitLabel>,
    pub report: CvReport,
    pub class_wise: ClassWiseReport,
    /// Model fitted on the whole regime corpus.
    pub explain: Vec<LabelExplanation>,
    #[serde(skip)]
    pub duration: Duration,
}

/// A run stopped by a classifier degeneracy instead of crashing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub spec: ExperimentSpec,
    pub error: String,
    pub label: Option<TraitLabel>,
    pub fold: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RunOutcome {
    Completed(Box<ExperimentResult>),
    Failed(Box<FailureRecord>),
}

impl RunOutcome {
    pub fn completed(&self) -> Option<&ExperimentResult> {
        match self {
            RunOutcome::Completed(r) => Some(r),
            RunOutcome::Failed(_) => None,
        }
    }

    pub fn spec(&self) -> &ExperimentSpec {
        match self {
            RunOutcome::Completed(r) => &r.spec,
            RunOutcome::Failed(f) => &f.spec,
        }
    }
}

/// Run options that do not change results.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub workers: Option<usize>,
    /// Features listed per direction in explanation dumps.
    pub explain_top: Option<usize>,
}

const DEFAULT_EXPLAIN_TOP: usize = 20;

/// Preprocesses (where needed), filters, applies the regime and cross-validates.
pub fn run(spec: &ExperimentSpec, corpus: Corpus, options: &RunOptions) -> Result<RunOutcome> {
    let start = Instant::now();
    spec.validate()?;
    let mut corpus = ensure_preprocessed(corpus, &spec.prep);
    if spec.data.min_tokens.is_some() || spec.data.max_tokens.is_some() {
        corpus = filter_token_range(
            &corpus,
            spec.data.min_tokens.unwrap_or(0),
            spec.data.max_tokens.unwrap_or(usize::MAX),
        )?;
    }
    let corpus = apply_regime(&corpus, spec.regime)?;
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let schema = spec.schema(corpus.active_labels())?;
    let cv = CvOptions {
        folds: spec.cv.folds,
        seed: spec.cv.seed,
        leaky_prefit: spec.compat.leaky_prefit,
        stratify_by_type: spec.cv.stratify_by_type,
        workers: options.workers,
        schema: Some(schema),
    };
    let pipeline = spec.pipeline_config();
    let outcome = match cross_validate(&corpus, &spec.classifier, &pipeline, &cv) {
        Ok(o) => o,
        Err(Error::SingleClass { label, fold }) => {
            let error = Error::SingleClass { label, fold }.to_string();
            log::warn!("{}: {error}", spec.name);
            return Ok(RunOutcome::Failed(Box::new(FailureRecord {
                spec: spec.clone(),
                error,
                label,
                fold,
            })));
        }
        Err(e) => return Err(e),
    };
    let model = BinaryRelevanceModel::fit_corpus(&corpus, &pipeline, &spec.classifier)?;
    let explain = model
        .explain(options.explain_top.unwrap_or(DEFAULT_EXPLAIN_TOP))
        .into_iter()
        .map(|(label, explanation)| LabelExplanation { label, explanation })
        .collect();
    Ok(RunOutcome::Completed(Box::new(ExperimentResult {
        spec: spec.clone(),
        corpus_fingerprint: corpus.fingerprint(),
        n_documents: corpus.len(),
        degenerate_labels: model.degenerate_labels(),
        report: outcome.report,
        class_wise: outcome.class_wise,
        explain,
        duration: start.elapsed(),
    })))
}

/// Writes the results directory `<root>/<name>/` and returns its path.
pub fn write_outcome(outcome: &RunOutcome, root: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = root.as_ref().join(&outcome.spec().name);
    fs::create_dir_all(&dir)?;
    fs::write(
        dir.join("spec.json"),
        serde_json::to_string_pretty(outcome.spec())? + "\n",
    )?;
    match outcome {
        RunOutcome::Completed(r) => {
            fs::write(
                dir.join("report.json"),
                serde_json::to_string_pretty(&r.report)? + "\n",
            )?;
            fs::write(
                dir.join("classwise.json"),
                serde_json::to_string_pretty(&r.class_wise)? + "\n",
            )?;
            let mut md = render_markdown(&r.report.mean, &r.spec.name);
            md.push_str(&format!(
                "\nseed {} | {} folds | regime {} | {} documents\n\n",
                r.report.seed, r.report.k, r.spec.regime, r.n_documents
            ));
            md.push_str(&render_class_wise_markdown(&r.class_wise));
            fs::write(dir.join("report.md"), md)?;
            let explain_dir = dir.join("explain");
            fs::create_dir_all(&explain_dir)?;
            for e in &r.explain {
                fs::write(
                    explain_dir.join(format!("label_{}.json", e.label.index())),
                    serde_json::to_string_pretty(e)? + "\n",
                )?;
            }
        }
        RunOutcome::Failed(f) => {
            fs::write(
                dir.join("failure.json"),
                serde_json::to_string_pretty(f)? + "\n",
            )?;
            fs::write(
                dir.join("report.md"),
                format!("**{}**\n\nFailed: {}\n", f.spec.name, f.error),
            )?;
        }
    }
    Ok(dir)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub k_best: usize,
    pub outcome: RunOutcome,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Highest mean exact match among completed runs; the smaller k wins ties.
    pub best_k: Option<usize>,
}

/// One run per distinct `k`, all with the spec's seed and therefore the same folds.
pub fn sweep_k_best(
    spec: &ExperimentSpec,
    corpus: &Corpus,
    ks: &[usize],
    options: &RunOptions,
) -> Result<SweepResult> {
    if spec.selection.k_best.is_none() {
        return Err(Error::Config(
            "sweep needs selection.k_best enabled in the spec".into(),
        ));
    }
    let mut distinct: Vec<usize> = Vec::new();
    for &k in ks {
        if k == 0 {
            return Err(Error::Config("k_best values must be >= 1".into()));
        }
        if distinct.contains(&k) {
            log::warn!("k_best {k} listed more than once; running it once");
        } else {
            distinct.push(k);
        }
    }
    let mut rows = Vec::with_capacity(distinct.len());
    for k in distinct {
        let mut s = spec.clone();
        s.selection.k_best = Some(k);
        s.name = format!("{}-k{k}", spec.name);
        rows.push(SweepRow {
            k_best: k,
            outcome: run(&s, corpus.clone(), options)?,
        });
    }
    let best_k = rows
        .iter()
        .filter_map(|r| {
            r.outcome
                .completed()
                .map(|c| (r.k_best, c.report.mean.exact_match))
        })
        .fold(None, |best: Option<(usize, f64)>, (k, emr)| match best {
            Some((bk, be)) if be > emr || (be == emr && bk < k) => Some((bk, be)),
            _ => Some((k, emr)),
        })
        .map(|(k, _)| k);
    Ok(SweepResult { rows, best_k })
}

/// Expands `"50:300:50"` to `[50, 100, ..., 300]`; a bare list `"50,100"` is also accepted.
pub fn parse_k_range(s: &str) -> Result<Vec<usize>> {
    let bad = || {
        Error::Config(format!(
            "bad k range {s:?}; expected start:stop:step or a comma list"
        ))
    };
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step): (usize, usize, usize) = (
                start.trim().parse().map_err(|_| bad())?,
                stop.trim().parse().map_err(|_| bad())?,
                step.trim().parse().map_err(|_| bad())?,
            );
            if step == 0 || start == 0 || start > stop {
                return Err(bad());
            }
            Ok((start..=stop).step_by(step).collect())
        }
        [list] => list
            .split(',')
            .map(|k| k.trim().parse().map_err(|_| bad()))
            .collect(),
        _ => Err(bad()),
    }
}

/// Metric rows by experiment columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub columns: Vec<String>,
    pub rows: Vec<(String, Vec<String>)>,
}

/// Table with rows EMR, HL, micro P/R/F1, macro P/R/F1 and one column per
/// report, in the order given. Undefined cells read `NaN`.
pub fn compare(reports: &[(String, &MetricsReport)]) -> ComparisonTable {
    fn fmt(v: f64, undefined: bool) -> String {
        if undefined || v.is_nan() {
            "NaN".into()
        } else {
            format!("{v:.3}")
        }
    }
    let prf_rows = |scope: &str, get: fn(&MetricsReport) -> &Prf| {
        [("Precision", "P"), ("Recall", "R"), ("F1", "F1")].map(|(name, key)| {
            (
                format!("({scope}) {name}"),
                reports
                    .iter()
                    .map(|(_, r)| {
                        let p = get(r);
                        let v = match key {
                            "P" => p.precision,
                            "R" => p.recall,
                            _ => p.f1,
                        };
                        fmt(v, p.is_undefined(key))
                    })
                    .collect::<Vec<_>>(),
            )
        })
    };
    let mut rows = vec![
        (
            "Exact Match Ratio".to_string(),
            reports
                .iter()
                .map(|(_, r)| fmt(r.exact_match, false))
                .collect(),
        ),
        (
            "Hamming Loss".to_string(),
            reports
                .iter()
                .map(|(_, r)| fmt(r.hamming_loss, false))
                .collect(),
        ),
    ];
    rows.extend(prf_rows("Micro", |r| &r.micro));
    rows.extend(prf_rows("Macro", |r| &r.macro_));
    ComparisonTable {
        columns: reports.iter().map(|(n, _)| n.clone()).collect(),
        rows,
    }
}

impl ComparisonTable {
    pub fn to_markdown(&self) -> String {
        let mut s = format!("| | {} |\n", self.columns.join(" | "));
        s += &format!("|---|{}\n", "---|".repeat(self.columns.len()));
        for (name, cells) in &self.rows {
            s += &format!("| {name} | {} |\n", cells.join(" | "));
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header: Vec<&str> = std::iter::once("metric")
            .chain(self.columns.iter().map(String::as_str))
            .collect();
        w.write_record(&header).expect("writing to memory");
        for (name, cells) in &self.rows {
            let rec: Vec<&str> = std::iter::once(name.as_str())
                .chain(cells.iter().map(String::as_str))
                .collect();
            w.write_record(&rec).expect("writing to memory");
        }
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv output is utf-8")
    }
}
