use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::matrix::{FeatureMatrix, SparseRow};
use crate::corpus::Corpus;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TfidfConfig {
    /// `idf = ln((1 + N) / (1 + df)) + 1` when set, `ln(N / df) + 1` otherwise.
    pub smooth_idf: bool,
    pub l2_normalize: bool,
}

impl Default for TfidfConfig {
    fn default() -> Self {
        TfidfConfig {
            smooth_idf: true,
            l2_normalize: true,
        }
    }
}

/// Term-to-column map with document frequencies. Columns follow first-seen order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    index: HashMap<String, usize>,
    terms: Vec<String>,
    document_frequency: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    terms: Vec<String>,
    document_frequency: Vec<usize>,
}

impl From<VocabularyRepr> for Vocabulary {
    fn from(r: VocabularyRepr) -> Self {
        let index = r
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocabulary {
            index,
            terms: r.terms,
            document_frequency: r.document_frequency,
        }
    }
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        VocabularyRepr {
            terms: v.terms,
            document_frequency: v.document_frequency,
        }
    }
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, index: usize) -> &str {
        &self.terms[index]
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn document_frequency(&self, index: usize) -> usize {
        self.document_frequency[index]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TfidfModel {
    vocabulary: Vocabulary,
    idf: Vec<f64>,
    n_documents: usize,
    config: TfidfConfig,
}

/// One row of the audit dump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermWeight {
    pub term: String,
    pub index: usize,
    pub df: usize,
    pub idf: f64,
}

impl TfidfModel {
    pub fn fit<S: AsRef<str>>(docs: &[&[S]], config: TfidfConfig) -> Result<TfidfModel> {
        if docs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut terms = Vec::new();
        let mut df: Vec<usize> = Vec::new();
        let mut last_doc: Vec<usize> = Vec::new();
        for (d, tokens) in docs.iter().enumerate() {
            for token in tokens.iter() {
                let token = token.as_ref();
                let col = match index.get(token) {
                    Some(&c) => c,
                    None => {
                        let c = terms.len();
                        index.insert(token.to_string(), c);
                        terms.push(token.to_string());
                        df.push(0);
                        last_doc.push(usize::MAX);
                        c
                    }
                };
                if last_doc[col] != d {
                    last_doc[col] = d;
                    df[col] += 1;
                }
            }
        }
        let n = docs.len() as f64;
        let idf = df
            .iter()
            .map(|&f| {
                let f = f as f64;
                if config.smooth_idf {
                    ((1.0 + n) / (1.0 + f)).ln() + 1.0
                } else {
                    (n / f).ln() + 1.0
                }
            })
            .collect();
        Ok(TfidfModel {
            vocabulary: Vocabulary {
                index,
                terms,
                document_frequency: df,
            },
            idf,
            n_documents: docs.len(),
            config,
        })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    pub fn n_documents(&self) -> usize {
        self.n_documents
    }

    pub fn config(&self) -> TfidfConfig {
        self.config
    }

    pub fn n_features(&self) -> usize {
        self.vocabulary.len()
    }

    /// Raw counts times idf; out-of-vocabulary tokens are ignored and empty rows stay zero.
    pub fn transform<S: AsRef<str>>(&self, docs: &[&[S]]) -> Result<FeatureMatrix> {
        if self.vocabulary.is_empty() {
            return Err(Error::NotFitted);
        }
        let rows = docs
            .iter()
            .map(|tokens| self.transform_one(tokens))
            .collect();
        FeatureMatrix::new(self.n_features(), rows)
    }

    fn transform_one<S: AsRef<str>>(&self, tokens: &[S]) -> SparseRow {
        let mut counts: HashMap<usize, f64> = HashMap::new();
        for token in tokens {
            if let Some(c) = self.vocabulary.index_of(token.as_ref()) {
                *counts.entry(c).or_insert(0.0) += 1.0;
            }
        }
        let mut row: SparseRow = counts
            .into_iter()
            .map(|(c, tf)| (c, tf * self.idf[c]))
            .collect();
        row.sort_by_key(|&(c, _)| c);
        if self.config.l2_normalize {
            let norm = row.iter().map(|&(_, v)| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                for (_, v) in row.iter_mut() {
                    *v /= norm;
                }
            }
        }
        row
    }

    pub fn transform_corpus(&self, corpus: &Corpus) -> Result<FeatureMatrix> {
        self.transform(&corpus.token_lists()?)
    }

    pub fn dump(&self) -> Vec<TermWeight> {
        (0..self.n_features())
            .map(|i| TermWeight {
                term: self.vocabulary.term(i).to_string(),
                index: i,
                df: self.vocabulary.document_frequency(i),
                idf: self.idf[i],
            })
            .collect()
    }
}

/// Fits a vectorizer on the corpus' tokens.
pub fn fit_tfidf(corpus: &Corpus, config: TfidfConfig) -> Result<TfidfModel> {
    TfidfModel::fit(&corpus.token_lists()?, config)
}
