use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::Serialize;

use super::{Corpus, Document, MbtiType, Source};
use crate::error::{Error, Result};

const KAGGLE_POST_DELIMITER: &str = "|||";

#[derive(Clone, Debug, Default)]
pub struct RedditLimits {
    /// Keep at most this many rows per type, in file order.
    pub max_per_type: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SkippedRow {
    pub row: usize,
    pub reason: String,
}

/// What ingestion kept and what it left out.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub rows_read: usize,
    pub documents: usize,
    pub skipped: Vec<SkippedRow>,
    /// Rows excluded because a post ended in `...`.
    pub truncated_excluded: usize,
    /// Rows dropped by a per-type limit.
    pub over_limit: usize,
}

#[derive(Clone, Debug)]
pub struct Ingested {
    pub corpus: Corpus,
    pub report: IngestReport,
}

struct Table {
    header: csv::StringRecord,
    records: Vec<(usize, csv::StringRecord)>,
}

fn read_table(path: &Path) -> Result<Option<Table>> {
    let mut raw = String::new();
    File::open(path)?.read_to_string(&mut raw)?;
    if raw.trim().is_empty() {
        return Ok(None);
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(raw.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::Format {
            row: 1,
            message: e.to_string(),
        })?
        .clone();
    let mut records = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| Error::Format {
            row,
            message: e.to_string(),
        })?;
        records.push((row, record));
    }
    Ok(Some(Table { header, records }))
}

fn column(header: &csv::StringRecord, name: &str) -> Result<usize> {
    header
        .iter()
        .position(|h| h.trim().eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::Format {
            row: 1,
            message: format!("missing column {name:?}"),
        })
}

fn empty_corpus(path: &Path) -> Result<Ingested> {
    log::warn!("{} contains no rows", path.display());
    Ok(Ingested {
        corpus: Corpus::new(Vec::new())?,
        report: IngestReport::default(),
    })
}

/// Reads a `type,text` file, one document per row.
pub fn ingest_reddit(path: impl AsRef<Path>, limits: &RedditLimits) -> Result<Ingested> {
    let path = path.as_ref();
    let Some(table) = read_table(path)? else {
        return empty_corpus(path);
    };
    let type_col = column(&table.header, "type")?;
    let text_col = column(&table.header, "text")?;

    let mut report = IngestReport::default();
    let mut per_type: HashMap<MbtiType, usize> = HashMap::new();
    let mut documents = Vec::new();
    for (row, record) in &table.records {
        report.rows_read += 1;
        let code = record.get(type_col).unwrap_or_default();
        let mbti = match code.parse::<MbtiType>() {
            Ok(t) => t,
            Err(_) => {
                report.skipped.push(SkippedRow {
                    row: *row,
                    reason: format!("invalid type code {code:?}"),
                });
                continue;
            }
        };
        if let Some(max) = limits.max_per_type {
            let seen = per_type.entry(mbti).or_insert(0);
            if *seen >= max {
                report.over_limit += 1;
                continue;
            }
            *seen += 1;
        }
        let text = record.get(text_col).unwrap_or_default();
        documents.push(Document::new(
            format!("reddit-{row}"),
            mbti,
            text,
            Source::Reddit,
        ));
    }
    finish(path, documents, report)
}

/// Reads a `type,posts` file where each row holds one author's posts joined by `|||`.
pub fn ingest_kaggle(path: impl AsRef<Path>, drop_truncated: bool) -> Result<Ingested> {
    let path = path.as_ref();
    let Some(table) = read_table(path)? else {
        return empty_corpus(path);
    };
    let type_col = column(&table.header, "type")?;
    let posts_col = column(&table.header, "posts")?;

    let mut report = IngestReport::default();
    let mut documents = Vec::new();
    for (row, record) in &table.records {
        report.rows_read += 1;
        let code = record.get(type_col).unwrap_or_default();
        let mbti = match code.parse::<MbtiType>() {
            Ok(t) => t,
            Err(_) => {
                report.skipped.push(SkippedRow {
                    row: *row,
                    reason: format!("invalid type code {code:?}"),
                });
                continue;
            }
        };
        let posts = split_posts(record.get(posts_col).unwrap_or_default());
        if drop_truncated && posts.iter().any(|p| is_truncated(p)) {
            report.truncated_excluded += 1;
            continue;
        }
        documents.push(Document::new(
            format!("kaggle-{row}"),
            mbti,
            posts.join(" "),
            Source::Kaggle,
        ));
    }
    finish(path, documents, report)
}

fn finish(path: &Path, documents: Vec<Document>, mut report: IngestReport) -> Result<Ingested> {
    report.documents = documents.len();
    if documents.is_empty() {
        log::warn!("{} produced no documents", path.display());
    }
    for skipped in &report.skipped {
        log::warn!("row {} skipped: {}", skipped.row, skipped.reason);
    }
    Ok(Ingested {
        corpus: Corpus::new(documents)?,
        report,
    })
}

/// The dump wraps each row's posts in single quotes; those are not part of any post.
fn split_posts(field: &str) -> Vec<&str> {
    let trimmed = field.trim();
    let unquoted = trimmed
        .strip_prefix('\'')
        .and_then(|s| s.strip_suffix('\''))
        .unwrap_or(trimmed);
    unquoted
        .split(KAGGLE_POST_DELIMITER)
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .collect()
}

fn is_truncated(post: &str) -> bool {
    post.trim_end().ends_with("...")
}

pub fn write_jsonl(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for doc in corpus.documents() {
        serde_json::to_writer(&mut out, doc)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_jsonl(path: impl AsRef<Path>) -> Result<Corpus> {
    let reader = BufReader::new(File::open(path)?);
    let mut documents = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document = serde_json::from_str(&line).map_err(|e| Error::Format {
            row: i + 1,
            message: e.to_string(),
        })?;
        documents.push(doc);
    }
    Corpus::new(documents)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file_with(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn reddit_three_rows() {
        let f = file_with("type,text\nENFJ,hello there\nINTP,\"quoted, with comma\"\nISTP,bye\n");
        let got = ingest_reddit(f.path(), &RedditLimits::default()).unwrap();
        assert_eq!(got.corpus.len(), 3);
        assert_eq!(got.corpus.documents()[1].raw_text, "quoted, with comma");
        assert!(got.report.skipped.is_empty());
    }

    #[test]
    fn reddit_invalid_type_skipped() {
        let f = file_with("type,text\nXXXX,nope\nENFJ,yes\n");
        let got = ingest_reddit(f.path(), &RedditLimits::default()).unwrap();
        assert_eq!(got.corpus.len(), 1);
        assert_eq!(got.report.skipped.len(), 1);
        assert_eq!(got.report.skipped[0].row, 2);
    }

    #[test]
    fn reddit_empty_file() {
        let f = file_with("");
        let got = ingest_reddit(f.path(), &RedditLimits::default()).unwrap();
        assert!(got.corpus.is_empty());
    }

    #[test]
    fn reddit_limit_per_type() {
        let f = file_with("type,text\nENFJ,a\nENFJ,b\nENFJ,c\nINTP,d\n");
        let limits = RedditLimits {
            max_per_type: Some(2),
        };
        let got = ingest_reddit(f.path(), &limits).unwrap();
        assert_eq!(got.corpus.len(), 3);
        assert_eq!(got.report.over_limit, 1);
    }

    #[test]
    fn reddit_missing_column_and_ragged_row() {
        let f = file_with("kind,text\nENFJ,a\n");
        assert!(matches!(
            ingest_reddit(f.path(), &RedditLimits::default()),
            Err(Error::Format { row: 1, .. })
        ));
        let f = file_with("type,text\nENFJ,a\nINTP,b,extra\n");
        assert!(matches!(
            ingest_reddit(f.path(), &RedditLimits::default()),
            Err(Error::Format { row: 3, .. })
        ));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            ingest_reddit("/nonexistent/path.csv", &RedditLimits::default()),
            Err(Error::Io(_))
        ));
    }

    #[test]
    fn kaggle_join_and_truncation() {
        let f = file_with("type,posts\nINFJ,hello there|||nice day\nENTP,'fine|||so I was...'\n");
        let kept = ingest_kaggle(f.path(), true).unwrap();
        assert_eq!(kept.corpus.len(), 1);
        assert_eq!(kept.corpus.documents()[0].raw_text, "hello there nice day");
        assert_eq!(kept.report.truncated_excluded, 1);

        let all = ingest_kaggle(f.path(), false).unwrap();
        assert_eq!(all.corpus.len(), 2);
        assert_eq!(all.corpus.documents()[1].raw_text, "fine so I was...");
    }

    #[test]
    fn jsonl_round_trip() {
        let f = file_with("type,text\nENFJ,hello\nINTP,world\n");
        let mut corpus = ingest_reddit(f.path(), &RedditLimits::default())
            .unwrap()
            .corpus;
        corpus = corpus.map_documents(|d| {
            let tokens = vec![d.raw_text.clone()];
            d.with_tokens(tokens)
        });
        let out = tempfile::NamedTempFile::new().unwrap();
        write_jsonl(&corpus, out.path()).unwrap();
        let text = std::fs::read_to_string(out.path()).unwrap();
        assert!(text.starts_with(
            r#"{"id":"reddit-2","type":"ENFJ","text":"hello","tokens":["hello"],"source":"reddit"}"#
        ));
        assert_eq!(read_jsonl(out.path()).unwrap(), corpus);
    }

    #[test]
    fn jsonl_bad_line_reports_row() {
        let f = file_with("{\"id\":\"a\",\"type\":\"ENFJ\",\"text\":\"x\",\"source\":\"reddit\"}\n{\"id\":\"b\",\"type\":\"QQQQ\",\"text\":\"x\",\"source\":\"reddit\"}\n");
        assert!(matches!(
            read_jsonl(f.path()),
            Err(Error::Format { row: 2, .. })
        ));
    }
}
