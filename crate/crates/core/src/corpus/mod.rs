//! Labeled documents, the MBTI label schema, and the dataset-regime filters.
//!
//! An MBTI type is four binary traits. Each trait is one label of the
//! multi-label problem, encoded `0` for the first letter of its pair
//! (E, N, F, J) and `1` for the second (I, S, T, P).

mod ingest;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multilabel::PredictionMatrix;

pub use ingest::{
    ingest_kaggle, ingest_reddit, read_jsonl, write_jsonl, IngestReport, Ingested, RedditLimits,
    SkippedRow,
};

/// One of the four binary trait dimensions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TraitLabel {
    #[serde(rename = "E/I")]
    EnergyEI,
    #[serde(rename = "N/S")]
    MindNS,
    #[serde(rename = "F/T")]
    NatureFT,
    #[serde(rename = "J/P")]
    TacticsJP,
}

impl TraitLabel {
    pub const ALL: [TraitLabel; 4] = [
        TraitLabel::EnergyEI,
        TraitLabel::MindNS,
        TraitLabel::NatureFT,
        TraitLabel::TacticsJP,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<TraitLabel> {
        Self::ALL.get(index).copied()
    }

    /// `(class 0 letter, class 1 letter)`.
    pub fn letters(self) -> (char, char) {
        match self {
            TraitLabel::EnergyEI => ('E', 'I'),
            TraitLabel::MindNS => ('N', 'S'),
            TraitLabel::NatureFT => ('F', 'T'),
            TraitLabel::TacticsJP => ('J', 'P'),
        }
    }

    pub fn letter(self, class: u8) -> char {
        let (a, b) = self.letters();
        if class == 0 {
            a
        } else {
            b
        }
    }

    /// `"E/I"`, `"N/S"`, ...
    pub fn pair_name(self) -> &'static str {
        match self {
            TraitLabel::EnergyEI => "E/I",
            TraitLabel::MindNS => "N/S",
            TraitLabel::NatureFT => "F/T",
            TraitLabel::TacticsJP => "J/P",
        }
    }

    /// Finds the label owning `letter` and the class that letter encodes.
    pub fn from_letter(letter: char) -> Option<(TraitLabel, u8)> {
        let upper = letter.to_ascii_uppercase();
        Self::ALL.iter().find_map(|&label| {
            let (a, b) = label.letters();
            if upper == a {
                Some((label, 0))
            } else if upper == b {
                Some((label, 1))
            } else {
                None
            }
        })
    }

    /// Accepts `"NS"`, `"N/S"`, `"sn"`, or a bare index `"1"`.
    pub fn parse(name: &str) -> Option<TraitLabel> {
        let trimmed = name.trim();
        if let Ok(index) = trimmed.parse::<usize>() {
            return Self::from_index(index);
        }
        let letters: Vec<char> = trimmed
            .chars()
            .filter(|c| c.is_ascii_alphabetic())
            .map(|c| c.to_ascii_uppercase())
            .collect();
        if letters.len() != 2 {
            return None;
        }
        Self::ALL.iter().copied().find(|label| {
            let (a, b) = label.letters();
            (letters[0] == a && letters[1] == b) || (letters[0] == b && letters[1] == a)
        })
    }
}

impl fmt::Display for TraitLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Label {} [{}]", self.index(), self.pair_name())
    }
}

/// Binary label values in `(E/I, N/S, F/T, J/P)` order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabelVector(pub [u8; 4]);

impl LabelVector {
    pub fn get(&self, label: TraitLabel) -> u8 {
        self.0[label.index()]
    }
}

/// A valid four-letter MBTI type code.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MbtiType(LabelVector);

impl MbtiType {
    /// All sixteen types in alphabetical order of their codes.
    pub fn all() -> Vec<MbtiType> {
        let mut types: Vec<MbtiType> = (0u8..16)
            .map(|bits| {
                MbtiType(LabelVector([
                    (bits >> 3) & 1,
                    (bits >> 2) & 1,
                    (bits >> 1) & 1,
                    bits & 1,
                ]))
            })
            .collect();
        types.sort_by_key(|t| t.code());
        types
    }

    pub fn labels(self) -> LabelVector {
        self.0
    }

    pub fn value(self, label: TraitLabel) -> u8 {
        self.0.get(label)
    }

    pub fn letter(self, label: TraitLabel) -> char {
        label.letter(self.value(label))
    }

    pub fn code(self) -> String {
        TraitLabel::ALL.iter().map(|&l| self.letter(l)).collect()
    }

    pub fn has_letter(self, letter: char) -> bool {
        match TraitLabel::from_letter(letter) {
            Some((label, class)) => self.value(label) == class,
            None => false,
        }
    }

    /// Code restricted to `labels`, e.g. `"EFJ"` for ENFJ without N/S.
    pub fn reduced_code(self, labels: &[TraitLabel]) -> String {
        labels.iter().map(|&l| self.letter(l)).collect()
    }
}

impl FromStr for MbtiType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let code = s.trim();
        let chars: Vec<char> = code.chars().map(|c| c.to_ascii_uppercase()).collect();
        if chars.len() != 4 {
            return Err(Error::InvalidType(s.to_string()));
        }
        let mut values = [0u8; 4];
        for (position, (&label, &ch)) in TraitLabel::ALL.iter().zip(chars.iter()).enumerate() {
            let (a, b) = label.letters();
            values[position] = if ch == a {
                0
            } else if ch == b {
                1
            } else {
                return Err(Error::InvalidType(s.to_string()));
            };
        }
        Ok(MbtiType(LabelVector(values)))
    }
}

impl fmt::Display for MbtiType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code())
    }
}

impl fmt::Debug for MbtiType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MbtiType({})", self.code())
    }
}

impl Serialize for MbtiType {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.code())
    }
}

impl<'de> Deserialize<'de> for MbtiType {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let code = String::deserialize(deserializer)?;
        code.parse().map_err(serde::de::Error::custom)
    }
}

pub fn type_to_labels(t: MbtiType) -> LabelVector {
    t.labels()
}

pub fn labels_to_type(v: LabelVector) -> Result<MbtiType> {
    if v.0.iter().any(|&x| x > 1) {
        return Err(Error::InvalidType(format!("{:?}", v.0)));
    }
    Ok(MbtiType(v))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Reddit,
    Kaggle,
}

/// One labeled text sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    #[serde(rename = "type")]
    pub mbti: MbtiType,
    #[serde(rename = "text")]
    pub raw_text: String,
    /// `None` until the document has been preprocessed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokens: Option<Vec<String>>,
    pub source: Source,
}

impl Document {
    pub fn new(
        id: impl Into<String>,
        mbti: MbtiType,
        raw_text: impl Into<String>,
        source: Source,
    ) -> Self {
        Document {
            id: id.into(),
            mbti,
            raw_text: raw_text.into(),
            tokens: None,
            source,
        }
    }

    pub fn with_tokens(mut self, tokens: Vec<String>) -> Self {
        self.tokens = Some(tokens);
        self
    }

    pub fn tokens(&self) -> Result<&[String]> {
        self.tokens
            .as_deref()
            .ok_or_else(|| Error::NotPreprocessed(self.id.clone()))
    }
}

/// An ordered collection of documents together with the labels currently in play.
#[derive(Clone, Debug, PartialEq)]
pub struct Corpus {
    documents: Vec<Document>,
    active_labels: Vec<TraitLabel>,
}

impl Corpus {
    /// Builds a corpus over all four labels. Document ids must be unique.
    pub fn new(documents: Vec<Document>) -> Result<Corpus> {
        let mut seen = HashSet::with_capacity(documents.len());
        for (row, doc) in documents.iter().enumerate() {
            if !seen.insert(doc.id.as_str()) {
                return Err(Error::Format {
                    row: row + 1,
                    message: format!("duplicate document id {:?}", doc.id),
                });
            }
        }
        Ok(Corpus {
            documents,
            active_labels: TraitLabel::ALL.to_vec(),
        })
    }

    pub fn with_active_labels(mut self, labels: Vec<TraitLabel>) -> Result<Corpus> {
        let mut sorted = labels.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != labels.len() || sorted != labels {
            return Err(Error::Config(
                "active labels must be distinct and in E/I, N/S, F/T, J/P order".into(),
            ));
        }
        if labels.len() < 2 {
            return Err(Error::TooFewLabels);
        }
        self.active_labels = labels;
        Ok(self)
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn active_labels(&self) -> &[TraitLabel] {
        &self.active_labels
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn into_documents(self) -> Vec<Document> {
        self.documents
    }

    /// Binary target for one label, row-aligned with the documents.
    pub fn targets(&self, label: TraitLabel) -> Vec<u8> {
        self.documents.iter().map(|d| d.mbti.value(label)).collect()
    }

    /// Truth matrix over the active labels.
    pub fn label_matrix(&self) -> PredictionMatrix {
        let mut m = PredictionMatrix::zeros(self.len(), self.active_labels.len());
        for (row, doc) in self.documents.iter().enumerate() {
            for (col, &label) in self.active_labels.iter().enumerate() {
                m.set(row, col, doc.mbti.value(label));
            }
        }
        m
    }

    pub fn types(&self) -> Vec<MbtiType> {
        self.documents.iter().map(|d| d.mbti).collect()
    }

    pub fn type_counts(&self) -> BTreeMap<MbtiType, usize> {
        let mut counts = BTreeMap::new();
        for doc in &self.documents {
            *counts.entry(doc.mbti).or_insert(0) += 1;
        }
        counts
    }

    /// Token lists of every document; fails on the first unprocessed one.
    pub fn token_lists(&self) -> Result<Vec<&[String]>> {
        self.documents.iter().map(Document::tokens).collect()
    }

    /// Stable subset by row index. Indices must be in range.
    pub fn subset(&self, rows: &[usize]) -> Corpus {
        Corpus {
            documents: rows.iter().map(|&i| self.documents[i].clone()).collect(),
            active_labels: self.active_labels.clone(),
        }
    }

    /// Keeps documents satisfying `keep`, preserving order.
    pub fn retain(&self, mut keep: impl FnMut(&Document) -> bool) -> Corpus {
        Corpus {
            documents: self.documents.iter().filter(|d| keep(d)).cloned().collect(),
            active_labels: self.active_labels.clone(),
        }
    }

    pub fn map_documents(self, f: impl FnMut(Document) -> Document) -> Corpus {
        Corpus {
            documents: self.documents.into_iter().map(f).collect(),
            active_labels: self.active_labels,
        }
    }

    /// SHA-256 over ids, types, texts, tokens and active labels, as lowercase hex.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        for label in &self.active_labels {
            h.update(label.pair_name().as_bytes());
        }
        for doc in &self.documents {
            h.update([0u8]);
            h.update(doc.id.as_bytes());
            h.update([0u8]);
            h.update(doc.mbti.code().as_bytes());
            h.update([0u8]);
            h.update(doc.raw_text.as_bytes());
            if let Some(tokens) = &doc.tokens {
                for t in tokens {
                    h.update([1u8]);
                    h.update(t.as_bytes());
                }
            }
        }
        hex::encode(h.finalize())
    }

    /// Removes every document whose type carries `letter`.
    pub fn filter_exclude_trait(&self, letter: char) -> Result<Corpus> {
        let (label, class) = TraitLabel::from_letter(letter).ok_or(Error::InvalidLetter(letter))?;
        let out = self.retain(|d| d.mbti.value(label) != class);
        if out.is_empty() {
            log::warn!("excluding trait {letter} left the corpus empty");
        }
        Ok(out)
    }

    /// Removes all documents of every 16-way type with fewer than `threshold` documents.
    pub fn filter_min_class_count(&self, threshold: usize) -> Corpus {
        let counts = self.type_counts();
        let out = self.retain(|d| counts[&d.mbti] >= threshold);
        if out.is_empty() && !self.is_empty() {
            log::warn!("no type reaches {threshold} documents; corpus is now empty");
        }
        out
    }

    /// Deactivates one label. Documents are untouched.
    pub fn drop_label(&self, label_index: usize) -> Result<Corpus> {
        let label = TraitLabel::from_index(label_index).ok_or(Error::LabelAbsent(label_index))?;
        if !self.active_labels.contains(&label) {
            return Err(Error::LabelAbsent(label_index));
        }
        if self.active_labels.len() <= 2 {
            return Err(Error::TooFewLabels);
        }
        Ok(Corpus {
            documents: self.documents.clone(),
            active_labels: self
                .active_labels
                .iter()
                .copied()
                .filter(|&l| l != label)
                .collect(),
        })
    }
}

/// Per-label positive-class convention used when scoring predictions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSchema {
    pub labels: Vec<LabelSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSpec {
    pub label: TraitLabel,
    /// Class value (0 or 1) counted as positive.
    pub positive: u8,
}

impl LabelSpec {
    pub fn name(&self) -> String {
        self.label.to_string()
    }

    pub fn positive_letter(&self) -> char {
        self.label.letter(self.positive)
    }
}

impl LabelSchema {
    /// Schema over `labels` with the value-1 class (I, S, T, P) positive.
    pub fn new(labels: &[TraitLabel]) -> LabelSchema {
        LabelSchema {
            labels: labels
                .iter()
                .map(|&label| LabelSpec { label, positive: 1 })
                .collect(),
        }
    }

    pub fn full() -> LabelSchema {
        Self::new(&TraitLabel::ALL)
    }

    /// Makes `letter` the positive class of the label that owns it.
    pub fn with_positive_letter(mut self, letter: char) -> Result<LabelSchema> {
        let (label, class) = TraitLabel::from_letter(letter).ok_or(Error::InvalidLetter(letter))?;
        let spec = self
            .labels
            .iter_mut()
            .find(|s| s.label == label)
            .ok_or(Error::LabelAbsent(label.index()))?;
        spec.positive = class;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn trait_labels(&self) -> Vec<TraitLabel> {
        self.labels.iter().map(|s| s.label).collect()
    }
}
