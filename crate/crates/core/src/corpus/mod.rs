//! Document corpora: loading, indexing by (corpus, year), and validation
//! against a taxonomy.
//!
//! Documents are read from JSON-lines files, one record per line:
//!
//! ```text
//! {"id":"P1","corpus":"science","year":2014,"topics":["D001","D002"],"weight":12}
//! ```
//!
//! Records that violate an invariant are rejected and listed in a
//! [`LoadReport`]; they never reach the store.

mod embeddings;

pub use embeddings::{load_embeddings, EmbeddingTable, BINARY_MAGIC};

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::taxonomy::Taxonomy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Corpus {
    Science,
    Industry,
}

impl Corpus {
    pub const ALL: [Corpus; 2] = [Corpus::Science, Corpus::Industry];

    pub fn as_str(self) -> &'static str {
        match self {
            Corpus::Science => "science",
            Corpus::Industry => "industry",
        }
    }

    fn slot(self) -> usize {
        match self {
            Corpus::Science => 0,
            Corpus::Industry => 1,
        }
    }
}

impl fmt::Display for Corpus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Inclusive calendar-year range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct YearRange {
    pub start: i32,
    pub end: i32,
}

impl YearRange {
    pub const DEFAULT: YearRange = YearRange {
        start: 2010,
        end: 2021,
    };

    pub fn new(start: i32, end: i32) -> Result<Self> {
        if end < start {
            return Err(Error::Config(format!("year range {start}:{end} is empty")));
        }
        Ok(YearRange { start, end })
    }

    pub fn len(&self) -> usize {
        (self.end - self.start + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, year: i32) -> bool {
        (self.start..=self.end).contains(&year)
    }

    /// Zero-based position of `year` inside the range.
    pub fn offset(&self, year: i32) -> Option<usize> {
        self.contains(year).then(|| (year - self.start) as usize)
    }

    pub fn years(&self) -> impl Iterator<Item = i32> {
        self.start..=self.end
    }

    /// The last `len` years of this range.
    pub fn suffix(&self, len: usize) -> YearRange {
        let len = len.clamp(1, self.len());
        YearRange {
            start: self.end - len as i32 + 1,
            end: self.end,
        }
    }
}

impl Default for YearRange {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl fmt::Display for YearRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.start, self.end)
    }
}

impl FromStr for YearRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("year range `{s}` is not of the form A:B")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<i32>()
                .map_err(|_| Error::Config(format!("bad year `{v}` in `{s}`")))
        };
        YearRange::new(parse(a)?, parse(b)?)
    }
}

/// One abstract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub corpus: Corpus,
    pub year: i32,
    /// Sorted, deduplicated topic ids.
    pub topics: Vec<String>,
    /// Citation count (science) or award amount in dollars (industry).
    pub weight: f64,
}

#[derive(Debug, Deserialize)]
struct DocumentRecord {
    id: String,
    corpus: Corpus,
    year: i32,
    topics: Vec<String>,
    weight: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    pub line: usize,
    pub id: Option<String>,
    pub reason: String,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}\t{}\t{}",
            self.line,
            self.id.as_deref().unwrap_or("-"),
            self.reason
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub accepted: [usize; 2],
    pub rejections: Vec<Rejection>,
}

impl LoadReport {
    pub fn accepted(&self, corpus: Corpus) -> usize {
        self.accepted[corpus.slot()]
    }

    /// Plain-text rejection report, one line per rejected record.
    pub fn write_rejections<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for r in &self.rejections {
            writeln!(out, "{r}")?;
        }
        Ok(())
    }
}

/// Immutable, year-indexed view over both corpora.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusStore {
    years: YearRange,
    documents: Vec<Document>,
    /// Document indices per corpus slot, then per year offset.
    by_year: [Vec<Vec<usize>>; 2],
}

impl CorpusStore {
    /// Builds a store from already-validated documents. Documents outside
    /// `years` are dropped.
    pub fn from_documents(years: YearRange, documents: Vec<Document>) -> Self {
        let documents: Vec<Document> = documents
            .into_iter()
            .filter(|d| years.contains(d.year))
            .collect();
        let mut by_year = [vec![Vec::new(); years.len()], vec![Vec::new(); years.len()]];
        for (ix, doc) in documents.iter().enumerate() {
            let t = years.offset(doc.year).expect("filtered above");
            by_year[doc.corpus.slot()][t].push(ix);
        }
        CorpusStore {
            years,
            documents,
            by_year,
        }
    }

    pub fn years(&self) -> YearRange {
        self.years
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Indices (into [`documents`](Self::documents)) of the documents of
    /// `corpus` published in `year`.
    pub fn in_year(&self, corpus: Corpus, year: i32) -> &[usize] {
        match self.years.offset(year) {
            Some(t) => &self.by_year[corpus.slot()][t],
            None => &[],
        }
    }

    /// Number of documents of `corpus` in `year`.
    pub fn total(&self, corpus: Corpus, year: i32) -> usize {
        self.in_year(corpus, year).len()
    }

    pub fn corpus_total(&self, corpus: Corpus) -> usize {
        self.by_year[corpus.slot()].iter().map(Vec::len).sum()
    }
}

fn check_record(rec: DocumentRecord, years: YearRange) -> std::result::Result<Document, String> {
    if rec.id.trim().is_empty() {
        return Err("empty id".into());
    }
    if !rec.weight.is_finite() {
        return Err("non-finite weight".into());
    }
    if rec.weight < 0.0 {
        return Err("negative weight".into());
    }
    if !years.contains(rec.year) {
        return Err(format!("year {} outside {}", rec.year, years));
    }
    if rec.topics.iter().any(|t| t.trim().is_empty()) {
        return Err("empty topic id".into());
    }
    let topics: BTreeSet<String> = rec.topics.into_iter().collect();
    if topics.is_empty() {
        return Err("no topics".into());
    }
    Ok(Document {
        id: rec.id,
        corpus: rec.corpus,
        year: rec.year,
        topics: topics.into_iter().collect(),
        weight: rec.weight,
    })
}

/// Reads documents from any line-oriented reader. `origin` names the source
/// in I/O errors.
pub fn read_documents<R: BufRead>(
    reader: R,
    origin: &Path,
    years: YearRange,
) -> Result<(CorpusStore, LoadReport)> {
    let mut report = LoadReport::default();
    let mut seen = HashSet::new();
    let mut docs = Vec::new();
    for (ix, line) in reader.lines().enumerate() {
        let line_no = ix + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: DocumentRecord = match serde_json::from_str(&line) {
            Ok(rec) => rec,
            Err(e) => {
                report.rejections.push(Rejection {
                    line: line_no,
                    id: None,
                    reason: format!("malformed record: {e}"),
                });
                continue;
            }
        };
        let id = rec.id.clone();
        let outcome = check_record(rec, years).and_then(|doc| {
            if seen.contains(&doc.id) {
                Err("duplicate id".to_string())
            } else {
                Ok(doc)
            }
        });
        match outcome {
            Ok(doc) => {
                seen.insert(doc.id.clone());
                report.accepted[doc.corpus.slot()] += 1;
                docs.push(doc);
            }
            Err(reason) => report.rejections.push(Rejection {
                line: line_no,
                id: Some(id),
                reason,
            }),
        }
    }
    Ok((CorpusStore::from_documents(years, docs), report))
}

/// Loads a JSON-lines document file.
pub fn load_documents(path: impl AsRef<Path>, years: YearRange) -> Result<(CorpusStore, LoadReport)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_documents(BufReader::new(file), path, years)
}

/// Writes documents back out in the load format.
pub fn write_documents<W: Write>(docs: &[Document], mut out: W) -> std::io::Result<()> {
    for doc in docs {
        serde_json::to_writer(&mut out, doc)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    /// Documents citing topic ids the taxonomy does not define, with those ids.
    pub unknown_topics: Vec<(String, Vec<String>)>,
    pub year_counts: BTreeMap<(Corpus, i32), usize>,
    /// Number of documents directly labeled with each known topic.
    pub topic_coverage: BTreeMap<String, usize>,
}

pub fn validate(store: &CorpusStore, taxonomy: &Taxonomy) -> ValidationReport {
    let mut report = ValidationReport::default();
    for corpus in Corpus::ALL {
        for year in store.years().years() {
            report
                .year_counts
                .insert((corpus, year), store.total(corpus, year));
        }
    }
    for doc in store.documents() {
        let mut unknown = Vec::new();
        for topic in &doc.topics {
            if taxonomy.contains(topic) {
                *report.topic_coverage.entry(topic.clone()).or_default() += 1;
            } else {
                unknown.push(topic.clone());
            }
        }
        if !unknown.is_empty() {
            report.unknown_topics.push((doc.id.clone(), unknown));
        }
    }
    report
}
