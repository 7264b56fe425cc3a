//! Binary Relevance: one independent binary classifier per active trait label.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{
    fit_binary, BinaryClassifierConfig, ClassifierKind, Explanation, TrainedClassifier,
};
use crate::corpus::{Corpus, TraitLabel};
use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, FeaturePipeline, PipelineConfig, Selection};

/// Dense `n_rows x n_labels` matrix of 0/1 cells, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionMatrix {
    n_rows: usize,
    n_labels: usize,
    data: Vec<u8>,
}

/// Truth matrices share the prediction layout.
pub type LabelMatrix = PredictionMatrix;

impl PredictionMatrix {
    pub fn zeros(n_rows: usize, n_labels: usize) -> Self {
        PredictionMatrix {
            n_rows,
            n_labels,
            data: vec![0; n_rows * n_labels],
        }
    }

    pub fn from_rows(n_labels: usize, rows: &[Vec<u8>]) -> Result<Self> {
        let mut m = Self::zeros(rows.len(), n_labels);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n_labels {
                return Err(Error::ShapeMismatch(format!(
                    "row {r} has {} labels, expected {n_labels}",
                    row.len()
                )));
            }
            for (c, &v) in row.iter().enumerate() {
                if v > 1 {
                    return Err(Error::ShapeMismatch(format!(
                        "cell ({r}, {c}) = {v} is not 0 or 1"
                    )));
                }
                m.set(r, c, v);
            }
        }
        Ok(m)
    }

    /// Builds from per-label columns of equal length.
    pub fn from_columns(n_rows: usize, columns: &[Vec<u8>]) -> Result<Self> {
        let mut m = Self::zeros(n_rows, columns.len());
        for (c, col) in columns.iter().enumerate() {
            if col.len() != n_rows {
                return Err(Error::ShapeMismatch(format!(
                    "column {c} has {} rows, expected {n_rows}",
                    col.len()
                )));
            }
            for (r, &v) in col.iter().enumerate() {
                m.set(r, c, v);
            }
        }
        Ok(m)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_labels(&self) -> usize {
        self.n_labels
    }

    pub fn get(&self, row: usize, label: usize) -> u8 {
        self.data[row * self.n_labels + label]
    }

    /// Panics on a cell value other than 0/1.
    pub fn set(&mut self, row: usize, label: usize, value: u8) {
        assert!(value <= 1, "cell value {value} is not 0 or 1");
        self.data[row * self.n_labels + label] = value;
    }

    pub fn row(&self, row: usize) -> &[u8] {
        &self.data[row * self.n_labels..(row + 1) * self.n_labels]
    }

    pub fn column(&self, label: usize) -> Vec<u8> {
        (0..self.n_rows).map(|r| self.get(r, label)).collect()
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * self.n_labels);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        PredictionMatrix {
            n_rows: rows.len(),
            n_labels: self.n_labels,
            data,
        }
    }

    /// Reorders or subsets label columns.
    pub fn select_labels(&self, labels: &[usize]) -> Self {
        let cols: Vec<Vec<u8>> = labels.iter().map(|&l| self.column(l)).collect();
        Self::from_columns(self.n_rows, &cols).expect("columns share the row count")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelClassifier {
    Trained(TrainedClassifier),
    /// Training data for this label held a single class; predicts it everywhere.
    DegenerateConstant(u8),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelModel {
    pub label: TraitLabel,
    /// Input columns this label's classifier sees; `None` means all of them.
    pub columns: Option<Vec<usize>>,
    pub classifier: LabelClassifier,
}

impl LabelModel {
    pub fn is_degenerate(&self) -> bool {
        matches!(self.classifier, LabelClassifier::DegenerateConstant(_))
    }

    fn predict(&self, x: &FeatureMatrix) -> Result<Vec<u8>> {
        match &self.classifier {
            LabelClassifier::DegenerateConstant(class) => Ok(vec![*class; x.n_rows()]),
            LabelClassifier::Trained(model) => match &self.columns {
                Some(cols) => model.predict(&x.project(cols)?),
                None => model.predict(x),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinaryRelevanceModel {
    pub labels: Vec<TraitLabel>,
    pub entries: Vec<LabelModel>,
    pub config: BinaryClassifierConfig,
    /// Width of the input matrices the model accepts.
    pub n_features: usize,
    #[serde(skip)]
    pub pipeline: Option<FeaturePipeline>,
}

/// Fits one classifier per active label of `train` on all columns of `x`.
pub fn br_fit(
    train: &Corpus,
    x: &FeatureMatrix,
    config: &BinaryClassifierConfig,
) -> Result<BinaryRelevanceModel> {
    br_fit_with(train, x, train.active_labels(), &Selection::All, config)
}

/// Fits one classifier per entry of `labels`, in that order. `selection` picks
/// the columns each label sees, indexed by position in `labels`.
pub fn br_fit_with(
    train: &Corpus,
    x: &FeatureMatrix,
    labels: &[TraitLabel],
    selection: &Selection,
    config: &BinaryClassifierConfig,
) -> Result<BinaryRelevanceModel> {
    config.validate()?;
    if x.n_rows() != train.len() {
        return Err(Error::Alignment {
            rows: x.n_rows(),
            docs: train.len(),
        });
    }
    if train.is_empty() {
        return Err(Error::EmptyInput);
    }
    let entries = labels
        .par_iter()
        .enumerate()
        .map(|(pos, &label)| {
            let y = train.targets(label);
            let columns = selection.columns_for(pos).map(<[usize]>::to_vec);
            let single = y.iter().all(|&v| v == y[0]);
            let classifier = if single && config.kind != ClassifierKind::Logreg {
                log::warn!(
                    "{label} has only class {} in training; using a constant predictor",
                    label.letter(y[0])
                );
                LabelClassifier::DegenerateConstant(y[0])
            } else {
                let fitted = match &columns {
                    Some(cols) => fit_binary(config, &x.project(cols)?, &y),
                    None => fit_binary(config, x, &y),
                };
                LabelClassifier::Trained(fitted.map_err(|e| e.with_label(label))?)
            };
            Ok(LabelModel {
                label,
                columns,
                classifier,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BinaryRelevanceModel {
        labels: labels.to_vec(),
        entries,
        config: *config,
        n_features: x.n_cols(),
        pipeline: None,
    })
}

/// Predicts every label; column `j` comes from the model for `m.labels[j]`.
pub fn br_predict(model: &BinaryRelevanceModel, x: &FeatureMatrix) -> Result<PredictionMatrix> {
    x.check_cols(model.n_features)?;
    let columns = model
        .entries
        .par_iter()
        .map(|e| e.predict(x))
        .collect::<Result<Vec<_>>>()?;
    PredictionMatrix::from_columns(x.n_rows(), &columns)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BundleManifest {
    pub labels: Vec<TraitLabel>,
    pub kind: ClassifierKind,
    pub config: BinaryClassifierConfig,
    pub n_features: usize,
    pub corpus_fingerprint: String,
}

impl BinaryRelevanceModel {
    /// Fits the feature pipeline on `train`, then one classifier per active label.
    pub fn fit_corpus(
        train: &Corpus,
        pipeline_config: &PipelineConfig,
        config: &BinaryClassifierConfig,
    ) -> Result<BinaryRelevanceModel> {
        let pipeline = FeaturePipeline::fit(train, pipeline_config)?;
        Self::fit_with_pipeline(train, pipeline, config)
    }

    /// Trains on `train` using an already fitted pipeline.
    pub fn fit_with_pipeline(
        train: &Corpus,
        pipeline: FeaturePipeline,
        config: &BinaryClassifierConfig,
    ) -> Result<BinaryRelevanceModel> {
        let x = pipeline.transform(train)?;
        let selection = match &pipeline.selection {
            // pipeline selection is indexed by the pipeline's labels
            Selection::PerLabel(per) => Selection::PerLabel(
                train
                    .active_labels()
                    .iter()
                    .map(|l| {
                        let pos = pipeline
                            .labels
                            .iter()
                            .position(|p| p == l)
                            .ok_or(Error::LabelAbsent(l.index()))?;
                        Ok(per[pos].clone())
                    })
                    .collect::<Result<_>>()?,
            ),
            other => other.clone(),
        };
        let mut model = br_fit_with(train, &x, train.active_labels(), &selection, config)?;
        model.pipeline = Some(pipeline);
        Ok(model)
    }

    /// Vectorizes `corpus` with the stored pipeline and predicts.
    pub fn predict_corpus(&self, corpus: &Corpus) -> Result<PredictionMatrix> {
        let pipeline = self.pipeline.as_ref().ok_or(Error::NotFitted)?;
        br_predict(self, &pipeline.transform(corpus)?)
    }

    pub fn degenerate_labels(&self) -> Vec<TraitLabel> {
        self.entries
            .iter()
            .filter(|e| e.is_degenerate())
            .map(|e| e.label)
            .collect()
    }

    /// Per-label explanation with vocabulary terms as feature names when a
    /// pipeline is attached.
    pub fn explain(&self, top_n: usize) -> Vec<(TraitLabel, Explanation)> {
        self.entries
            .iter()
            .map(|e| {
                let name = |col: usize| -> String {
                    let original = e.columns.as_ref().map_or(col, |c| c[col]);
                    match &self.pipeline {
                        Some(p) => p.tfidf.vocabulary().term(original).to_string(),
                        None => format!("f{original}"),
                    }
                };
                let explanation = match &e.classifier {
                    LabelClassifier::DegenerateConstant(class) => {
                        Explanation::Constant { class: *class }
                    }
                    LabelClassifier::Trained(m) => m.explain(top_n, &name),
                };
                (e.label, explanation)
            })
            .collect()
    }

    /// Writes `manifest.json`, `pipeline.json` (when attached) and one
    /// `label_<i>.json` per label index into `dir`.
    pub fn save(&self, dir: impl AsRef<Path>, corpus_fingerprint: &str) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let manifest = BundleManifest {
            labels: self.labels.clone(),
            kind: self.config.kind,
            config: self.config,
            n_features: self.n_features,
            corpus_fingerprint: corpus_fingerprint.to_string(),
        };
        fs::write(
            dir.join("manifest.json"),
            serde_json::to_vec_pretty(&manifest)?,
        )?;
        if let Some(p) = &self.pipeline {
            fs::write(dir.join("pipeline.json"), serde_json::to_vec(p)?)?;
        }
        for e in &self.entries {
            fs::write(
                dir.join(format!("label_{}.json", e.label.index())),
                serde_json::to_vec(e)?,
            )?;
        }
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<(BinaryRelevanceModel, BundleManifest)> {
        let dir = dir.as_ref();
        let manifest: BundleManifest =
            serde_json::from_slice(&fs::read(dir.join("manifest.json"))?)?;
        let pipeline_path = dir.join("pipeline.json");
        let pipeline = if pipeline_path.exists() {
            Some(serde_json::from_slice(&fs::read(pipeline_path)?)?)
        } else {
            None
        };
        let entries = manifest
            .labels
            .iter()
            .map(|l| -> Result<LabelModel> {
                let entry: LabelModel = serde_json::from_slice(&fs::read(
                    dir.join(format!("label_{}.json", l.index())),
                )?)?;
                if entry.label != *l {
                    return Err(Error::Config(format!(
                        "label file for {l} holds {}",
                        entry.label
                    )));
                }
                Ok(entry)
            })
            .collect::<Result<Vec<_>>>()?;
        let model = BinaryRelevanceModel {
            labels: manifest.labels.clone(),
            entries,
            config: manifest.config,
            n_features: manifest.n_features,
            pipeline,
        };
        Ok((model, manifest))
    }
}
