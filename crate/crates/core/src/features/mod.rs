//! TF-IDF vectorization and chi-squared feature selection.

mod matrix;
mod select;
mod tfidf;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, TraitLabel};
use crate::error::Result;

pub use matrix::{project, FeatureMatrix, SparseRow};
pub use select::{chi2_scores, select_k_best, Chi2Scores};
pub use tfidf::{fit_tfidf, TermWeight, TfidfConfig, TfidfModel, Vocabulary};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionConfig {
    /// Keep this many columns; `None` disables selection.
    pub k_best: Option<usize>,
    /// Select separately for every label instead of one shared set.
    pub per_label: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub tfidf: TfidfConfig,
    pub selection: SelectionConfig,
}

/// Columns each label's classifier sees.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    All,
    Shared(Vec<usize>),
    PerLabel(Vec<Vec<usize>>),
}

impl Selection {
    /// Columns for the label at `position` in the active-label order.
    pub fn columns_for(&self, position: usize) -> Option<&[usize]> {
        match self {
            Selection::All => None,
            Selection::Shared(cols) => Some(cols),
            Selection::PerLabel(per) => Some(&per[position]),
        }
    }
}

/// A fitted vectorizer plus the column selection made on the same training rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeaturePipeline {
    pub tfidf: TfidfModel,
    pub labels: Vec<TraitLabel>,
    pub selection: Selection,
}

impl FeaturePipeline {
    /// Fits TF-IDF on `train` and, if configured, chi-squared selection against
    /// its active labels. The shared selection ranks each column by its best
    /// score over the labels. A `k_best` above the vocabulary size keeps every column.
    pub fn fit(train: &Corpus, config: &PipelineConfig) -> Result<FeaturePipeline> {
        let tfidf = fit_tfidf(train, config.tfidf)?;
        let labels = train.active_labels().to_vec();
        let selection = match config.selection.k_best {
            None => Selection::All,
            Some(k) => {
                let x = tfidf.transform_corpus(train)?;
                let n_features = x.n_cols();
                let k = if k > n_features {
                    log::warn!(
                        "k_best = {k} exceeds the {n_features} available features; keeping all"
                    );
                    n_features
                } else {
                    k
                };
                let per_label: Vec<Chi2Scores> = labels
                    .iter()
                    .map(|&l| chi2_scores(&x, &train.targets(l)))
                    .collect::<Result<_>>()?;
                if config.selection.per_label {
                    Selection::PerLabel(
                        per_label
                            .iter()
                            .map(|s| select_k_best(s, k))
                            .collect::<Result<_>>()?,
                    )
                } else {
                    let mut shared = per_label[0].clone();
                    for s in &per_label[1..] {
                        shared.max_with(s);
                    }
                    Selection::Shared(select_k_best(&shared, k)?)
                }
            }
        };
        Ok(FeaturePipeline {
            tfidf,
            labels,
            selection,
        })
    }

    /// Full TF-IDF matrix; per-label projection happens inside the label models.
    pub fn transform(&self, corpus: &Corpus) -> Result<FeatureMatrix> {
        self.tfidf.transform_corpus(corpus)
    }

    /// Vocabulary term behind column `col` of the matrix the label at `position` sees.
    pub fn feature_name(&self, position: usize, col: usize) -> &str {
        let original = match self.selection.columns_for(position) {
            Some(cols) => cols[col],
            None => col,
        };
        self.tfidf.vocabulary().term(original)
    }
}
