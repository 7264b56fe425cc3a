//! Multi-label metrics, class-wise breakdowns, seeded k-fold cross-validation
//! and the two-sample t-test.
//!
//! Precision and recall use the schema's positive class per label. When a
//! ratio has a zero denominator the value depends on whether anything was
//! missed: precision with no positive predictions is 1 if there were no
//! positives to find and 0 otherwise, and recall with no positives is 1 if
//! nothing was falsely flagged and 0 otherwise. The 0 cases are marked
//! undefined and render as `NaN` in comparison tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::BinaryClassifierConfig;
use crate::corpus::{Corpus, LabelSchema, MbtiType, TraitLabel};
use crate::error::{Error, Result};
use crate::features::{FeaturePipeline, PipelineConfig};
use crate::multilabel::{BinaryRelevanceModel, PredictionMatrix};

/// Precision, recall and F1, with the names of any undefined entries.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    #[serde(rename = "P")]
    pub precision: f64,
    #[serde(rename = "R")]
    pub recall: f64,
    #[serde(rename = "F1")]
    pub f1: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub undefined: Vec<String>,
}

impl Prf {
    /// From confusion counts under the zero-division rule in the module docs.
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Prf {
        let mut undefined = Vec::new();
        let precision = if tp + fp > 0 {
            tp as f64 / (tp + fp) as f64
        } else if fn_ == 0 {
            1.0
        } else {
            undefined.push("P".to_string());
            0.0
        };
        let recall = if tp + fn_ > 0 {
            tp as f64 / (tp + fn_) as f64
        } else if fp == 0 {
            1.0
        } else {
            undefined.push("R".to_string());
            0.0
        };
        if !undefined.is_empty() {
            undefined.push("F1".to_string());
        }
        Prf {
            precision,
            recall,
            f1: harmonic(precision, recall),
            undefined,
        }
    }

    pub fn is_undefined(&self, field: &str) -> bool {
        self.undefined.iter().any(|u| u == field)
    }
}

/// `2PR / (P + R)`, or 0 when both are 0.
pub fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelMetrics {
    pub label: TraitLabel,
    /// Letter of the class scored as positive.
    pub positive: char,
    #[serde(flatten)]
    pub scores: Prf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub exact_match: f64,
    pub hamming_loss: f64,
    pub per_label: Vec<LabelMetrics>,
    pub micro: Prf,
    #[serde(rename = "macro")]
    pub macro_: Prf,
}

impl MetricsReport {
    pub fn label(&self, label: TraitLabel) -> Option<&LabelMetrics> {
        self.per_label.iter().find(|l| l.label == label)
    }
}

fn check_shapes(
    y_true: &PredictionMatrix,
    y_pred: &PredictionMatrix,
    schema: &LabelSchema,
) -> Result<()> {
    if y_true.n_rows() != y_pred.n_rows() || y_true.n_labels() != y_pred.n_labels() {
        return Err(Error::ShapeMismatch(format!(
            "truth is {}x{}, predictions are {}x{}",
            y_true.n_rows(),
            y_true.n_labels(),
            y_pred.n_rows(),
            y_pred.n_labels()
        )));
    }
    if schema.len() != y_true.n_labels() {
        return Err(Error::ShapeMismatch(format!(
            "schema has {} labels, matrices have {}",
            schema.len(),
            y_true.n_labels()
        )));
    }
    if y_true.n_rows() == 0 {
        return Err(Error::ShapeMismatch("no rows to evaluate".into()));
    }
    Ok(())
}

/// Label-wise report for row-aligned truth and predictions.
pub fn metrics(
    y_true: &PredictionMatrix,
    y_pred: &PredictionMatrix,
    schema: &LabelSchema,
) -> Result<MetricsReport> {
    check_shapes(y_true, y_pred, schema)?;
    let (n, l) = (y_true.n_rows(), y_true.n_labels());
    let mut exact = 0usize;
    let mut wrong = 0usize;
    let mut counts = vec![[0usize; 3]; l];
    for r in 0..n {
        let (t, p) = (y_true.row(r), y_pred.row(r));
        if t == p {
            exact += 1;
        }
        for (j, spec) in schema.labels.iter().enumerate() {
            if t[j] != p[j] {
                wrong += 1;
            }
            let (tp, pp) = (t[j] == spec.positive, p[j] == spec.positive);
            match (tp, pp) {
                (true, true) => counts[j][0] += 1,
                (false, true) => counts[j][1] += 1,
                (true, false) => counts[j][2] += 1,
                (false, false) => {}
            }
        }
    }
    let per_label: Vec<LabelMetrics> = schema
        .labels
        .iter()
        .zip(&counts)
        .map(|(spec, c)| LabelMetrics {
            label: spec.label,
            positive: spec.positive_letter(),
            scores: Prf::from_counts(c[0], c[1], c[2]),
        })
        .collect();
    let pooled = counts.iter().fold([0usize; 3], |acc, c| {
        [acc[0] + c[0], acc[1] + c[1], acc[2] + c[2]]
    });
    let micro = Prf::from_counts(pooled[0], pooled[1], pooled[2]);
    let macro_ = macro_average(&per_label);
    Ok(MetricsReport {
        exact_match: exact as f64 / n as f64,
        hamming_loss: wrong as f64 / (n * l) as f64,
        per_label,
        micro,
        macro_,
    })
}

/// Unweighted mean over labels; a field is undefined if it is undefined for any label.
pub fn macro_average(per_label: &[LabelMetrics]) -> Prf {
    let l = per_label.len() as f64;
    let mean = |f: fn(&Prf) -> f64| per_label.iter().map(|m| f(&m.scores)).sum::<f64>() / l;
    let mut undefined = Vec::new();
    for field in ["P", "R", "F1"] {
        if per_label.iter().any(|m| m.scores.is_undefined(field)) {
            undefined.push(field.to_string());
        }
    }
    Prf {
        precision: mean(|s| s.precision),
        recall: mean(|s| s.recall),
        f1: mean(|s| s.f1),
        undefined,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassGroup {
    #[serde(rename = "type")]
    pub mbti: MbtiType,
    pub count: usize,
    pub report: MetricsReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassWiseReport {
    pub total: usize,
    pub groups: Vec<ClassGroup>,
}

impl ClassWiseReport {
    /// Exact match averaged over groups, weighted by group size.
    pub fn weighted_exact_match(&self) -> f64 {
        let sum: f64 = self
            .groups
            .iter()
            .map(|g| g.report.exact_match * g.count as f64)
            .sum();
        sum / self.total as f64
    }
}

/// Metrics within each true type, in type order.
pub fn class_wise(
    y_true: &PredictionMatrix,
    y_pred: &PredictionMatrix,
    types: &[MbtiType],
    schema: &LabelSchema,
) -> Result<ClassWiseReport> {
    check_shapes(y_true, y_pred, schema)?;
    if types.len() != y_true.n_rows() {
        return Err(Error::ShapeMismatch(format!(
            "{} types for {} rows",
            types.len(),
            y_true.n_rows()
        )));
    }
    let mut rows: BTreeMap<MbtiType, Vec<usize>> = BTreeMap::new();
    for (r, t) in types.iter().enumerate() {
        rows.entry(*t).or_default().push(r);
    }
    let groups = rows
        .into_iter()
        .map(|(mbti, idx)| {
            Ok(ClassGroup {
                mbti,
                count: idx.len(),
                report: metrics(&y_true.select_rows(&idx), &y_pred.select_rows(&idx), schema)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ClassWiseReport {
        total: types.len(),
        groups,
    })
}

/// Test-row indices of each fold, each list ascending.
pub type Folds = Vec<Vec<usize>>;

/// Seeded shuffle of `0..n`, cut into `k` contiguous runs; the first `n % k`
/// folds get one extra row.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<Folds> {
    if k < 2 || n < k {
        return Err(Error::TooFewRows { n, k });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        let mut fold = order[start..start + size].to_vec();
        fold.sort_unstable();
        folds.push(fold);
        start += size;
    }
    Ok(folds)
}

/// Like [`kfold_split`] but deals each type's shuffled rows round-robin over
/// the folds, so every fold sees every type in near-equal share.
pub fn kfold_split_stratified(types: &[MbtiType], k: usize, seed: u64) -> Result<Folds> {
    let n = types.len();
    if k < 2 || n < k {
        return Err(Error::TooFewRows { n, k });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_type: BTreeMap<MbtiType, Vec<usize>> = BTreeMap::new();
    for (r, t) in types.iter().enumerate() {
        by_type.entry(*t).or_default().push(r);
    }
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for rows in by_type.values_mut() {
        rows.shuffle(&mut rng);
        for &r in rows.iter() {
            folds[next % k].push(r);
            next += 1;
        }
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(folds)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvOptions {
    pub folds: usize,
    pub seed: u64,
    /// Fit TF-IDF and selection once on the whole corpus before splitting.
    pub leaky_prefit: bool,
    pub stratify_by_type: bool,
    /// Threads for fold-level parallelism; `None` uses the global pool.
    pub workers: Option<usize>,
    /// Positive-class convention; defaults to the value-1 class per active label.
    pub schema: Option<LabelSchema>,
}

impl Default for CvOptions {
    fn default() -> Self {
        CvOptions {
            folds: 5,
            seed: 42,
            leaky_prefit: false,
            stratify_by_type: false,
            workers: None,
            schema: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub seed: u64,
    pub k: usize,
    #[serde(flatten)]
    pub mean: MetricsReport,
    pub folds: Vec<MetricsReport>,
}

/// Everything a cross-validation run produces.
#[derive(Clone, Debug)]
pub struct CvOutcome {
    pub report: CvReport,
    /// Out-of-fold predictions, row-aligned with the corpus.
    pub out_of_fold: PredictionMatrix,
    /// Class-wise metrics over the pooled out-of-fold predictions.
    pub class_wise: ClassWiseReport,
}

/// Field-wise arithmetic mean of reports over the same labels.
pub fn mean_report(reports: &[MetricsReport]) -> Result<MetricsReport> {
    let first = reports.first().ok_or(Error::EmptyInput)?;
    let n = reports.len() as f64;
    let avg = |f: &dyn Fn(&MetricsReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
    let avg_prf = |get: &dyn Fn(&MetricsReport) -> &Prf| {
        let mut undefined: Vec<String> = Vec::new();
        for r in reports {
            for u in &get(r).undefined {
                if !undefined.contains(u) {
                    undefined.push(u.clone());
                }
            }
        }
        undefined.sort_by_key(|u| ["P", "R", "F1"].iter().position(|x| x == u));
        Prf {
            precision: avg(&|r| get(r).precision),
            recall: avg(&|r| get(r).recall),
            f1: avg(&|r| get(r).f1),
            undefined,
        }
    };
    for r in reports {
        let same = r.per_label.len() == first.per_label.len()
            && r.per_label
                .iter()
                .zip(&first.per_label)
                .all(|(a, b)| a.label == b.label);
        if !same {
            return Err(Error::ShapeMismatch(
                "fold reports cover different labels".into(),
            ));
        }
    }
    let per_label = first
        .per_label
        .iter()
        .enumerate()
        .map(|(j, lm)| LabelMetrics {
            label: lm.label,
            positive: lm.positive,
            scores: avg_prf(&|r| &r.per_label[j].scores),
        })
        .collect();
    Ok(MetricsReport {
        exact_match: avg(&|r| r.exact_match),
        hamming_loss: avg(&|r| r.hamming_loss),
        per_label,
        micro: avg_prf(&|r| &r.micro),
        macro_: avg_prf(&|r| &r.macro_),
    })
}

struct FoldResult {
    test: Vec<usize>,
    predictions: PredictionMatrix,
    report: MetricsReport,
}

/// Seeded k-fold cross-validation of Binary Relevance over `corpus`.
///
/// Each fold fits the feature pipeline on its training split (or once on the
/// whole corpus with `leaky_prefit`), trains one classifier per active label
/// and scores the held-out rows. Errors name the first failing fold.
pub fn cross_validate(
    corpus: &Corpus,
    config: &BinaryClassifierConfig,
    pipeline_config: &PipelineConfig,
    options: &CvOptions,
) -> Result<CvOutcome> {
    config.validate()?;
    corpus.token_lists()?;
    let schema = match &options.schema {
        Some(s) => {
            if s.trait_labels() != corpus.active_labels() {
                return Err(Error::Config(
                    "label schema does not match the active labels".into(),
                ));
            }
            s.clone()
        }
        None => LabelSchema::new(corpus.active_labels()),
    };
    let folds = if options.stratify_by_type {
        kfold_split_stratified(&corpus.types(), options.folds, options.seed)?
    } else {
        kfold_split(corpus.len(), options.folds, options.seed)?
    };
    let prefit = if options.leaky_prefit {
        Some(FeaturePipeline::fit(corpus, pipeline_config)?)
    } else {
        None
    };
    let truth = corpus.label_matrix();

    let run_fold = |f: usize, test: &Vec<usize>| -> Result<FoldResult> {
        let mut in_test = vec![false; corpus.len()];
        for &r in test {
            in_test[r] = true;
        }
        let train_rows: Vec<usize> = (0..corpus.len()).filter(|&r| !in_test[r]).collect();
        let train = corpus.subset(&train_rows);
        let test_corpus = corpus.subset(test);
        let pipeline = match &prefit {
            Some(p) => p.clone(),
            None => FeaturePipeline::fit(&train, pipeline_config)?,
        };
        let model = BinaryRelevanceModel::fit_with_pipeline(&train, pipeline, config)?;
        let predictions = model.predict_corpus(&test_corpus)?;
        let report = metrics(&truth.select_rows(test), &predictions, &schema)?;
        log::info!("fold {f}: exact match {:.3}", report.exact_match);
        Ok(FoldResult {
            test: test.clone(),
            predictions,
            report,
        })
    };
    let run_all = || -> Vec<Result<FoldResult>> {
        folds
            .par_iter()
            .enumerate()
            .map(|(f, test)| run_fold(f, test).map_err(|e| e.with_fold(f)))
            .collect()
    };
    let results = match options.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(run_all),
        None => run_all(),
    };
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;

    let mut out_of_fold = PredictionMatrix::zeros(corpus.len(), corpus.active_labels().len());
    for fr in &results {
        for (i, &r) in fr.test.iter().enumerate() {
            for (j, &v) in fr.predictions.row(i).iter().enumerate() {
                out_of_fold.set(r, j, v);
            }
        }
    }
    let fold_reports: Vec<MetricsReport> = results.iter().map(|r| r.report.clone()).collect();
    let class_wise = class_wise(&truth, &out_of_fold, &corpus.types(), &schema)?;
    Ok(CvOutcome {
        report: CvReport {
            seed: options.seed,
            k: options.folds,
            mean: mean_report(&fold_reports)?,
            folds: fold_reports,
        },
        out_of_fold,
        class_wise,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t: f64,
    pub df: f64,
    pub p: f64,
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Two-sample t-test, pooled variance unless `welch`.
pub fn t_test(a: &[f64], b: &[f64], welch: bool) -> Result<TTestResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::ShapeMismatch(format!(
            "each sample needs at least 2 values, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (se, df) = if welch {
        let (qa, qb) = (va / na, vb / nb);
        let se2 = qa + qb;
        let df = if se2 == 0.0 {
            na + nb - 2.0
        } else {
            se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0))
        };
        (se2.sqrt(), df)
    } else {
        let df = na + nb - 2.0;
        let pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / df;
        ((pooled * (1.0 / na + 1.0 / nb)).sqrt(), df)
    };
    let diff = ma - mb;
    if se == 0.0 {
        if diff == 0.0 {
            return Err(Error::DegenerateVariance);
        }
        let t = diff.signum() * f64::INFINITY;
        return Ok(TTestResult { t, df, p: 0.0 });
    }
    let t = diff / se;
    Ok(TTestResult {
        t,
        df,
        p: student_t_two_tailed_p(t, df)?,
    })
}

/// `P(|T| >= |t|)` for Student's t with `df` degrees of freedom, via
/// `I_{df / (df + t^2)}(df / 2, 1 / 2)`.
pub fn student_t_two_tailed_p(t: f64, df: f64) -> Result<f64> {
    if df.is_nan() || df < 1.0 || !df.is_finite() {
        return Err(Error::BadDf(df));
    }
    if t.is_nan() {
        return Ok(f64::NAN);
    }
    if t.is_infinite() {
        return Ok(0.0);
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    let x = df / (df + t * t);
    Ok(statrs::function::beta::beta_reg(df / 2.0, 0.5, x).clamp(0.0, 1.0))
}

fn cell(v: f64, undefined: bool) -> String {
    if undefined || v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v:.3}")
    }
}

fn prf_cells(p: &Prf) -> [String; 3] {
    [
        cell(p.precision, p.is_undefined("P")),
        cell(p.recall, p.is_undefined("R")),
        cell(p.f1, p.is_undefined("F1")),
    ]
}

/// Label-wise table: EMR/HL header, one row per label, then micro and macro rows.
pub fn render_markdown(report: &MetricsReport, title: &str) -> String {
    let mut s = String::new();
    if !title.is_empty() {
        let _ = writeln!(s, "**{title}**\n");
    }
    let _ = writeln!(s, "| Label-wise results | | | |");
    let _ = writeln!(s, "|---|---|---|---|");
    let _ = writeln!(
        s,
        "| Exact Match Ratio | {:.3} | Hamming Loss | {:.3} |",
        report.exact_match, report.hamming_loss
    );
    let _ = writeln!(s, "| | Precision | Recall | F1-score |");
    for lm in &report.per_label {
        let [p, r, f] = prf_cells(&lm.scores);
        let _ = writeln!(s, "| {} | {p} | {r} | {f} |", lm.label);
    }
    for (name, prf) in [
        ("Micro average", &report.micro),
        ("Macro average", &report.macro_),
    ] {
        let [p, r, f] = prf_cells(prf);
        let _ = writeln!(s, "| {name} | {p} | {r} | {f} |");
    }
    s
}

fn csv_line(fields: &[String]) -> String {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(fields).expect("writing to memory");
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv output is utf-8")
}

/// Same layout as [`render_markdown`], as CSV with a header row.
pub fn render_csv(report: &MetricsReport) -> String {
    let mut s = csv_line(&[
        "row".into(),
        "precision".into(),
        "recall".into(),
        "f1".into(),
    ]);
    s += &csv_line(&[
        "exact_match".into(),
        format!("{:.3}", report.exact_match),
        "hamming_loss".into(),
        format!("{:.3}", report.hamming_loss),
    ]);
    for lm in &report.per_label {
        let [p, r, f] = prf_cells(&lm.scores);
        s += &csv_line(&[lm.label.to_string(), p, r, f]);
    }
    for (name, prf) in [("micro", &report.micro), ("macro", &report.macro_)] {
        let [p, r, f] = prf_cells(prf);
        s += &csv_line(&[name.into(), p, r, f]);
    }
    s
}

/// One row per type: count, EMR, HL and per-label F1.
pub fn render_class_wise_markdown(report: &ClassWiseReport) -> String {
    let mut s = String::new();
    let labels: Vec<String> = report
        .groups
        .first()
        .map(|g| {
            g.report
                .per_label
                .iter()
                .map(|l| format!("F1 {}", l.label.pair_name()))
                .collect()
        })
        .unwrap_or_default();
    let _ = writeln!(
        s,
        "| Type | n | Exact Match | Hamming Loss | {} |",
        labels.join(" | ")
    );
    let _ = writeln!(s, "|---|---|---|---|{}", "---|".repeat(labels.len()));
    for g in &report.groups {
        let f1: Vec<String> = g
            .report
            .per_label
            .iter()
            .map(|l| cell(l.scores.f1, l.scores.is_undefined("F1")))
            .collect();
        let _ = writeln!(
            s,
            "| {} | {} | {:.3} | {:.3} | {} |",
            g.mbti,
            g.count,
            g.report.exact_match,
            g.report.hamming_loss,
            f1.join(" | ")
        );
    }
    s
}
