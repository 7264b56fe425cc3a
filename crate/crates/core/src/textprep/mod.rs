//! Text normalization, token-count outlier bounds, and type-to-token ratio.
//!
//! [`normalize`] runs up to eight steps in a fixed order:
//!
//! 1. lowercase
//! 2. strip emoticons (whitespace-delimited ASCII emoticons, and emoji anywhere)
//! 3. strip URLs (`http://`, `https://`, `www.`)
//! 4. strip punctuation (every non-alphanumeric, non-space character becomes a space)
//! 5. tokenize on whitespace
//! 6. remove stopwords (bundled list `en-v1`)
//! 7. lemmatize (bundled rule table, see [`lemma`])
//! 8. remove tokens made only of digits
//!
//! With every step enabled the output is a fixed point: normalizing the
//! space-joined output again gives the same tokens.

pub mod lemma;

use std::collections::HashSet;
use std::sync::LazyLock;

use rayon::prelude::*;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};

static STOPWORDS_EN_V1: LazyLock<HashSet<&'static str>> = LazyLock::new(|| {
    include_str!("../../data/stopwords_en.txt")
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect()
});

static EMOTICON: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r#"(?xi)^(?:
            [<>}\]]?[:;=][-o*'^]?[)\](\[dp/\\|}{@3*$\#x]+
          | [)\](\[dp/\\|}{@]+[-o*'^]?[:;=][<>]?
          | </?3+
          | \^[_.\-]*\^
          | -[_.]+-
          | o[_.]o
          | t[_.]t
          | ;[_.];
          | >[_.]<
        )$"#,
    )
    .expect("emoticon pattern")
});

static EMOJI: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"[\x{1F000}-\x{1FAFF}\x{2600}-\x{27BF}\x{2B00}-\x{2BFF}\x{FE00}-\x{FE0F}\x{200D}\x{20E3}\x{E0020}-\x{E007F}]",
    )
    .expect("emoji pattern")
});

static URL: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)(?:https?://|www\.)\S+").expect("url pattern"));

/// Bundled stopword list snapshots.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopwordList {
    #[default]
    #[serde(rename = "en-v1")]
    EnV1,
    #[serde(rename = "none")]
    Empty,
}

impl StopwordList {
    pub fn words(self) -> Option<&'static HashSet<&'static str>> {
        match self {
            StopwordList::EnV1 => Some(&STOPWORDS_EN_V1),
            StopwordList::Empty => None,
        }
    }

    pub fn contains(self, word: &str) -> bool {
        self.words().is_some_and(|w| w.contains(word))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrepConfig {
    pub lowercase: bool,
    pub strip_emoticons: bool,
    pub strip_urls: bool,
    pub strip_punctuation: bool,
    pub tokenize: bool,
    pub remove_stopwords: bool,
    pub lemmatize: bool,
    pub remove_standalone_numbers: bool,
    pub stopwords: StopwordList,
}

impl Default for PrepConfig {
    fn default() -> Self {
        PrepConfig {
            lowercase: true,
            strip_emoticons: true,
            strip_urls: true,
            strip_punctuation: true,
            tokenize: true,
            remove_stopwords: true,
            lemmatize: true,
            remove_standalone_numbers: true,
            stopwords: StopwordList::EnV1,
        }
    }
}

fn strip_emoticons(text: &str) -> String {
    let without_emoji = EMOJI.replace_all(text, " ");
    without_emoji
        .split_whitespace()
        .filter(|chunk| !EMOTICON.is_match(chunk))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Runs the configured steps over `text` and returns its tokens.
pub fn normalize(text: &str, cfg: &PrepConfig) -> Vec<String> {
    let mut s = if cfg.lowercase {
        text.to_lowercase()
    } else {
        text.to_string()
    };
    if cfg.strip_emoticons {
        s = strip_emoticons(&s);
    }
    if cfg.strip_urls {
        s = URL.replace_all(&s, " ").into_owned();
    }
    if cfg.strip_punctuation {
        s = s
            .chars()
            .map(|c| {
                if c.is_alphanumeric() || c.is_whitespace() {
                    c
                } else {
                    ' '
                }
            })
            .collect();
    }
    let mut tokens: Vec<String> = if cfg.tokenize {
        s.split_whitespace().map(str::to_string).collect()
    } else {
        let whole = s.trim();
        if whole.is_empty() {
            Vec::new()
        } else {
            vec![whole.to_string()]
        }
    };
    let stopwords = if cfg.remove_stopwords {
        cfg.stopwords.words()
    } else {
        None
    };
    if let Some(stop) = stopwords {
        tokens.retain(|t| !stop.contains(t.as_str()));
    }
    if cfg.lemmatize {
        for t in tokens.iter_mut() {
            *t = lemma::lemmatize(t, stopwords);
        }
    }
    if cfg.remove_standalone_numbers {
        tokens.retain(|t| !t.chars().all(char::is_numeric));
    }
    tokens
}

/// Normalizes every document, replacing any existing tokens. Order is preserved.
pub fn preprocess(corpus: Corpus, cfg: &PrepConfig) -> Corpus {
    let active = corpus.active_labels().to_vec();
    let docs: Vec<_> = corpus
        .into_documents()
        .into_par_iter()
        .map(|d| {
            let tokens = normalize(&d.raw_text, cfg);
            d.with_tokens(tokens)
        })
        .collect();
    Corpus::new(docs)
        .and_then(|c| c.with_active_labels(active))
        .expect("documents and labels came from a valid corpus")
}

/// Normalizes only documents that have no tokens yet.
pub fn ensure_preprocessed(corpus: Corpus, cfg: &PrepConfig) -> Corpus {
    if corpus.documents().iter().all(|d| d.tokens.is_some()) {
        return corpus;
    }
    corpus.map_documents(|d| {
        if d.tokens.is_some() {
            d
        } else {
            let tokens = normalize(&d.raw_text, cfg);
            d.with_tokens(tokens)
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IqrBounds {
    pub q1: f64,
    pub q3: f64,
    pub k: f64,
    pub lower: f64,
    pub upper: f64,
}

impl IqrBounds {
    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

/// Quantile by linear interpolation at position `p * (n - 1)` of the sorted sample.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Outlier bounds `q1 - k*IQR` and `q3 + k*IQR` over token counts.
pub fn iqr_bounds(counts: &[usize], k: f64) -> Result<IqrBounds> {
    if counts.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sorted: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&sorted, 0.25);
    let q3 = quantile_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    Ok(IqrBounds {
        q1,
        q3,
        k,
        lower: q1 - k * iqr,
        upper: q3 + k * iqr,
    })
}

/// Token count of every document.
pub fn token_counts(corpus: &Corpus) -> Result<Vec<usize>> {
    Ok(corpus.token_lists()?.iter().map(|t| t.len()).collect())
}

/// Keeps documents with `min_tokens <= len <= max_tokens`.
pub fn filter_token_range(corpus: &Corpus, min_tokens: usize, max_tokens: usize) -> Result<Corpus> {
    corpus.token_lists()?;
    let out = corpus.retain(|d| {
        let n = d.tokens.as_ref().map_or(0, Vec::len);
        (min_tokens..=max_tokens).contains(&n)
    });
    if out.is_empty() && !corpus.is_empty() {
        log::warn!("no document has between {min_tokens} and {max_tokens} tokens");
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TtrStat {
    pub unique_tokens: usize,
    pub total_tokens: usize,
    pub ratio: f64,
}

/// Corpus-wide type-to-token ratio.
pub fn ttr(corpus: &Corpus) -> Result<TtrStat> {
    let lists = corpus.token_lists()?;
    let total: usize = lists.iter().map(|t| t.len()).sum();
    if total == 0 {
        return Err(Error::EmptyCorpus);
    }
    let unique: HashSet<&str> = lists
        .iter()
        .flat_map(|t| t.iter().map(String::as_str))
        .collect();
    Ok(TtrStat {
        unique_tokens: unique.len(),
        total_tokens: total,
        ratio: unique.len() as f64 / total as f64,
    })
}

/// Histogram of token counts in bins of `bin_width`: `(bin_start, documents)`.
pub fn token_histogram(counts: &[usize], bin_width: usize) -> Vec<(usize, usize)> {
    let width = bin_width.max(1);
    let Some(&max) = counts.iter().max() else {
        return Vec::new();
    };
    let mut bins = vec![0usize; max / width + 1];
    for &c in counts {
        bins[c / width] += 1;
    }
    bins.into_iter()
        .enumerate()
        .map(|(i, n)| (i * width, n))
        .collect()
}
