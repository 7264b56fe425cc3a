use thiserror::Error;

use crate::corpus::TraitLabel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid MBTI type code {0:?}")]
    InvalidType(String),

    #[error("{0:?} is not one of the eight trait letters E I N S F T J P")]
    InvalidLetter(char),

    #[error("label {0} is not active in this corpus")]
    LabelAbsent(usize),

    #[error("at least two active labels must remain")]
    TooFewLabels,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("format error at row {row}: {message}")]
    Format { row: usize, message: String },

    #[error("input is empty")]
    EmptyInput,

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("document {0:?} has no tokens; run preprocessing first")]
    NotPreprocessed(String),

    #[error("model has no fitted vocabulary")]
    NotFitted,

    #[error("negative feature value at row {row}, column {col}")]
    NegativeFeature { row: usize, col: usize },

    #[error("k = {k} is out of range 1..={max}")]
    KOutOfRange { k: usize, max: usize },

    #[error("bad column selection: {0}")]
    BadColumns(String),

    #[error("dimension mismatch: expected {expected} columns, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{}", single_class_message(*.label, *.fold))]
    SingleClass {
        label: Option<TraitLabel>,
        fold: Option<usize>,
    },

    #[error("feature matrix has {rows} rows but the corpus has {docs} documents")]
    Alignment { rows: usize, docs: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("cannot split {n} rows into {k} folds")]
    TooFewRows { n: usize, k: usize },

    #[error("both samples have zero variance and equal means")]
    DegenerateVariance,

    #[error("degrees of freedom must be >= 1, got {0}")]
    BadDf(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn single_class_message(label: Option<TraitLabel>, fold: Option<usize>) -> String {
    let mut msg = String::from("required at least 2 classes in the data");
    if let Some(label) = label {
        msg.push_str(&format!(
            " (label {} [{}])",
            label.index(),
            label.pair_name()
        ));
    }
    if let Some(fold) = fold {
        msg.push_str(&format!(" in fold {fold}"));
    }
    msg
}

impl Error {
    /// True for the classifier degeneracy raised by logistic regression on a
    /// single-class target.
    pub fn is_single_class(&self) -> bool {
        matches!(self, Error::SingleClass { .. })
    }

    pub(crate) fn with_label(self, label: TraitLabel) -> Self {
        match self {
            Error::SingleClass { fold, .. } => Error::SingleClass {
                label: Some(label),
                fold,
            },
            other => other,
        }
    }

    pub(crate) fn with_fold(self, fold: usize) -> Self {
        match self {
            Error::SingleClass { label, .. } => Error::SingleClass {
                label,
                fold: Some(fold),
            },
            other => other,
        }
    }
}
