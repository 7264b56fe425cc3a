//! Glass-box binary classifiers behind one fit/predict contract.
//!
//! Targets are `0`/`1` class values; every model is deterministic given its
//! inputs and immutable after fitting.

mod knn;
mod logreg;
mod mnb;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

pub use knn::{knn_fit, KnnModel, Metric};
pub use logreg::{
    logreg_fit, objective, smooth_loss, smooth_loss_gradient, LogRegDiagnostics, LogRegModel,
    LogRegParams,
};
pub use mnb::{mnb_fit, MnbModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Mnb,
    Knn,
    #[serde(alias = "logistic")]
    Logreg,
}

impl std::str::FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mnb" | "nb" | "naive_bayes" => Ok(ClassifierKind::Mnb),
            "knn" => Ok(ClassifierKind::Knn),
            "logreg" | "logistic" | "lr" => Ok(ClassifierKind::Logreg),
            other => Err(Error::Config(format!("unknown classifier {other:?}"))),
        }
    }
}

impl std::fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ClassifierKind::Mnb => "mnb",
            ClassifierKind::Knn => "knn",
            ClassifierKind::Logreg => "logreg",
        })
    }
}

/// Classifier choice and hyperparameters for all three kinds; only the fields
/// of `kind` are used.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BinaryClassifierConfig {
    pub kind: ClassifierKind,
    /// Additive smoothing for multinomial naive Bayes.
    pub alpha: f64,
    /// Neighbour count for kNN.
    pub k: usize,
    pub metric: Metric,
    /// Inverse regularization strength for logistic regression.
    #[serde(rename = "c")]
    pub c: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for BinaryClassifierConfig {
    fn default() -> Self {
        BinaryClassifierConfig {
            kind: ClassifierKind::Mnb,
            alpha: 1.0,
            k: 89,
            metric: Metric::Euclidean,
            c: 1.0,
            max_iter: 100,
            tol: 1e-4,
        }
    }
}

impl BinaryClassifierConfig {
    pub fn of_kind(kind: ClassifierKind) -> Self {
        BinaryClassifierConfig {
            kind,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!(
                "alpha must be >= 0, got {}",
                self.alpha
            )));
        }
        if self.k == 0 {
            return Err(Error::Config("knn k must be >= 1".into()));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Config(format!("C must be > 0, got {}", self.c)));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::Config(format!("tol must be > 0, got {}", self.tol)));
        }
        Ok(())
    }

    pub fn logreg_params(&self) -> LogRegParams {
        LogRegParams {
            c: self.c,
            max_iter: self.max_iter,
            tol: self.tol,
        }
    }
}

/// A fitted binary model of any kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TrainedClassifier {
    Mnb(MnbModel),
    Knn(KnnModel),
    Logreg(LogRegModel),
}

/// Fits the configured classifier on `(x, y)`.
pub fn fit_binary(
    config: &BinaryClassifierConfig,
    x: &FeatureMatrix,
    y: &[u8],
) -> Result<TrainedClassifier> {
    config.validate()?;
    Ok(match config.kind {
        ClassifierKind::Mnb => TrainedClassifier::Mnb(mnb_fit(x, y, config.alpha)?),
        ClassifierKind::Knn => TrainedClassifier::Knn(knn_fit(x, y, config.k, config.metric)?),
        ClassifierKind::Logreg => {
            TrainedClassifier::Logreg(logreg_fit(x, y, &config.logreg_params())?)
        }
    })
}

impl TrainedClassifier {
    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<u8>> {
        match self {
            TrainedClassifier::Mnb(m) => m.predict(x),
            TrainedClassifier::Knn(m) => m.predict(x),
            TrainedClassifier::Logreg(m) => m.predict(x),
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            TrainedClassifier::Mnb(m) => m.n_features(),
            TrainedClassifier::Knn(m) => m.n_features(),
            TrainedClassifier::Logreg(m) => m.n_features(),
        }
    }

    /// Inspectable summary; `name` maps a column to its feature name.
    pub fn explain(&self, top_n: usize, name: &dyn Fn(usize) -> String) -> Explanation {
        match self {
            TrainedClassifier::Mnb(m) => m.explain(top_n, name),
            TrainedClassifier::Knn(m) => Explanation::Knn {
                k: m.k(),
                metric: m.metric(),
                training_rows: m.n_train(),
            },
            TrainedClassifier::Logreg(m) => m.explain(name),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureWeight {
    pub feature: String,
    pub column: usize,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Explanation {
    /// Features ranked by `log P(f | class 1) - log P(f | class 0)`.
    Mnb {
        class_count: [usize; 2],
        toward_class1: Vec<FeatureWeight>,
        toward_class0: Vec<FeatureWeight>,
    },
    Knn {
        k: usize,
        metric: Metric,
        training_rows: usize,
    },
    /// Nonzero weights sorted by magnitude.
    Logreg {
        bias: f64,
        nonzero: Vec<FeatureWeight>,
        iterations: usize,
        converged: bool,
        objective: f64,
    },
    Constant {
        class: u8,
    },
}

pub(crate) fn check_targets(x: &FeatureMatrix, y: &[u8]) -> Result<()> {
    if x.n_rows() != y.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} rows but {} targets",
            x.n_rows(),
            y.len()
        )));
    }
    if x.n_rows() == 0 {
        return Err(Error::EmptyInput);
    }
    if let Some(bad) = y.iter().find(|&&v| v > 1) {
        return Err(Error::ShapeMismatch(format!(
            "target value {bad} is not 0 or 1"
        )));
    }
    Ok(())
}
