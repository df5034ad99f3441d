//! Per-topic yearly signals: frequency share and quartile-weighted impact,
//! plus min-max scaling.

mod quantizer;

pub use quantizer::{nearest_rank, ImpactBasis, QuartileQuantizer};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, CorpusStore, Document, YearRange};
use crate::error::{Error, Result};
use crate::taxonomy::{Taxonomy, TopicPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Frequency,
    Impact,
}

impl Representation {
    pub const ALL: [Representation; 2] = [Representation::Frequency, Representation::Impact];

    pub fn as_str(self) -> &'static str {
        match self {
            Representation::Frequency => "frequency",
            Representation::Impact => "impact",
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What a signal is about: a single topic or a co-occurring pair.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Subject {
    Topic(String),
    Pair(String, String),
}

impl Subject {
    pub fn pair(p: &TopicPair) -> Self {
        Subject::Pair(p.a.clone(), p.b.clone())
    }
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Topic(t) => f.write_str(t),
            Subject::Pair(a, b) => write!(f, "{a}&{b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicSignal {
    pub subject: Subject,
    pub corpus: Corpus,
    pub representation: Representation,
    pub years: YearRange,
    pub values: Vec<f64>,
    pub scaled: bool,
}

impl TopicSignal {
    pub fn scaled(&self) -> TopicSignal {
        minmax(self)
    }
}

/// Store plus taxonomy, with each document's topics resolved to taxonomy
/// indices once. Unknown topic ids are dropped here; they can never match.
#[derive(Debug)]
pub struct LabeledCorpus<'a> {
    pub store: &'a CorpusStore,
    pub taxonomy: &'a Taxonomy,
    doc_topics: Vec<Vec<usize>>,
}

impl<'a> LabeledCorpus<'a> {
    pub fn new(store: &'a CorpusStore, taxonomy: &'a Taxonomy) -> Self {
        let doc_topics = store
            .documents()
            .iter()
            .map(|d| d.topics.iter().filter_map(|t| taxonomy.ix(t).ok()).collect())
            .collect();
        LabeledCorpus {
            store,
            taxonomy,
            doc_topics,
        }
    }

    /// Taxonomy indices of document `doc`, in topic-id order.
    pub fn topics_of(&self, doc: usize) -> &[usize] {
        &self.doc_topics[doc]
    }

    pub fn matcher(&self, subject: &Subject) -> Result<TopicMatcher> {
        TopicMatcher::new(self.taxonomy, subject)
    }
}

/// Document predicate for a subject: the document must touch the subtree
/// of every member (one member for a topic, two for a pair).
#[derive(Debug, Clone)]
pub struct TopicMatcher {
    masks: Vec<Vec<bool>>,
}

impl TopicMatcher {
    pub fn new(taxonomy: &Taxonomy, subject: &Subject) -> Result<Self> {
        let members: Vec<&str> = match subject {
            Subject::Topic(t) => vec![t],
            Subject::Pair(a, b) => vec![a, b],
        };
        let masks = members
            .into_iter()
            .map(|m| taxonomy.ix(m).map(|ix| taxonomy.descendant_mask(ix)))
            .collect::<Result<_>>()?;
        Ok(TopicMatcher { masks })
    }

    pub fn matches(&self, topics: &[usize]) -> bool {
        self.masks
            .iter()
            .all(|mask| topics.iter().any(|&t| mask[t]))
    }

    /// Indices of matching documents of `corpus`, by year offset.
    pub fn matching_by_year(&self, labeled: &LabeledCorpus<'_>, corpus: Corpus) -> Vec<Vec<usize>> {
        let store = labeled.store;
        store
            .years()
            .years()
            .map(|year| {
                store
                    .in_year(corpus, year)
                    .iter()
                    .copied()
                    .filter(|&d| self.matches(labeled.topics_of(d)))
                    .collect()
            })
            .collect()
    }
}

/// 1 when the document carries `m` or any of its descendants.
/// Any number of matches counts once.
pub fn indicator(doc: &Document, m: &str, taxonomy: &Taxonomy) -> Result<u8> {
    let mask = taxonomy.descendant_mask(taxonomy.ix(m)?);
    let hits = doc
        .topics
        .iter()
        .filter_map(|t| taxonomy.ix(t).ok())
        .any(|ix| mask[ix]);
    Ok(u8::from(hits))
}

/// Matching documents of one subject, per corpus and year offset, in
/// store order.
#[derive(Debug, Clone)]
pub struct SubjectMatches {
    by_corpus: [Vec<Vec<usize>>; 2],
}

impl SubjectMatches {
    pub fn collect(labeled: &LabeledCorpus<'_>, matcher: &TopicMatcher) -> Self {
        SubjectMatches {
            by_corpus: Corpus::ALL.map(|c| matcher.matching_by_year(labeled, c)),
        }
    }

    pub fn in_year(&self, corpus: Corpus, offset: usize) -> &[usize] {
        &self.by_corpus[usize::from(corpus == Corpus::Industry)][offset]
    }

    pub fn count(&self, corpus: Corpus) -> usize {
        self.by_corpus[usize::from(corpus == Corpus::Industry)]
            .iter()
            .map(Vec::len)
            .sum()
    }
}

/// Frequency: share of `corpus` documents in year t that match `subject`.
/// Years without documents yield 0.
pub fn frequency_signal(
    labeled: &LabeledCorpus<'_>,
    subject: &Subject,
    corpus: Corpus,
) -> Result<TopicSignal> {
    let matches = SubjectMatches::collect(labeled, &labeled.matcher(subject)?);
    Ok(frequency_from(labeled.store, &matches, subject, corpus))
}

pub fn frequency_from(
    store: &CorpusStore,
    matches: &SubjectMatches,
    subject: &Subject,
    corpus: Corpus,
) -> TopicSignal {
    let values = store
        .years()
        .years()
        .enumerate()
        .map(|(t, year)| {
            let total = store.total(corpus, year);
            if total == 0 {
                return 0.0;
            }
            matches.in_year(corpus, t).len() as f64 / total as f64
        })
        .collect();
    TopicSignal {
        subject: subject.clone(),
        corpus,
        representation: Representation::Frequency,
        years: store.years(),
        values,
        scaled: false,
    }
}

/// Impact: quartile sum of the matching documents in year t over the
/// quartile sum of every document of the corpus in that year.
pub fn impact_signal(
    labeled: &LabeledCorpus<'_>,
    subject: &Subject,
    corpus: Corpus,
    basis: &ImpactBasis,
) -> Result<TopicSignal> {
    let matches = SubjectMatches::collect(labeled, &labeled.matcher(subject)?);
    Ok(impact_from(labeled.store, &matches, subject, corpus, basis))
}

pub fn impact_from(
    store: &CorpusStore,
    matches: &SubjectMatches,
    subject: &Subject,
    corpus: Corpus,
    basis: &ImpactBasis,
) -> TopicSignal {
    let values = store
        .years()
        .years()
        .enumerate()
        .map(|(t, year)| {
            let k = basis.normalizer(corpus, year);
            if k == 0.0 {
                return 0.0;
            }
            let numerator: f64 = matches
                .in_year(corpus, t)
                .iter()
                .map(|&d| f64::from(basis.quartile_of(d)))
                .sum();
            numerator / k
        })
        .collect();
    TopicSignal {
        subject: subject.clone(),
        corpus,
        representation: Representation::Impact,
        years: store.years(),
        values,
        scaled: false,
    }
}

/// Raw signal of either representation.
pub fn signal_from(
    store: &CorpusStore,
    matches: &SubjectMatches,
    subject: &Subject,
    corpus: Corpus,
    representation: Representation,
    basis: &ImpactBasis,
) -> TopicSignal {
    match representation {
        Representation::Frequency => frequency_from(store, matches, subject, corpus),
        Representation::Impact => impact_from(store, matches, subject, corpus, basis),
    }
}

/// Min-max scaling to [0, 1]; a constant series maps to all zeros.
pub fn minmax_values(values: &[f64]) -> Vec<f64> {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if values.is_empty() || hi <= lo {
        return vec![0.0; values.len()];
    }
    let span = hi - lo;
    values.iter().map(|&v| (v - lo) / span).collect()
}

pub fn minmax(signal: &TopicSignal) -> TopicSignal {
    TopicSignal {
        values: minmax_values(&signal.values),
        scaled: true,
        ..signal.clone()
    }
}

/// Restricts a signal to `years` (which must lie inside its own range)
/// without rescaling.
pub fn slice_years(signal: &TopicSignal, years: YearRange) -> Result<TopicSignal> {
    let (Some(a), Some(b)) = (signal.years.offset(years.start), signal.years.offset(years.end)) else {
        return Err(Error::RangeMismatch(format!(
            "{years} is not inside {}",
            signal.years
        )));
    };
    Ok(TopicSignal {
        values: signal.values[a..=b].to_vec(),
        years,
        ..signal.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::TopicNode;

    fn taxonomy() -> Taxonomy {
        let n = |id: &str, tns: &[&str]| TopicNode {
            id: id.into(),
            label: id.into(),
            tree_numbers: tns.iter().map(|s| s.to_string()).collect(),
        };
        Taxonomy::from_nodes(vec![
            n("A", &["A"]),
            n("B", &["A.B"]),
            n("C", &["A.C"]),
            n("D", &["A.B.D"]),
            n("Z", &["Z"]),
        ])
        .unwrap()
    }

    fn doc(id: &str, corpus: Corpus, year: i32, topics: &[&str], weight: f64) -> Document {
        Document {
            id: id.into(),
            corpus,
            year,
            topics: topics.iter().map(|s| s.to_string()).collect(),
            weight,
        }
    }

    #[test]
    fn indicator_examples() {
        let t = taxonomy();
        let d = doc("x", Corpus::Science, 2012, &["B"], 0.0);
        assert_eq!(indicator(&d, "B", &t).unwrap(), 1);
        assert_eq!(indicator(&d, "Z", &t).unwrap(), 0);
        let many = doc("y", Corpus::Science, 2012, &["B", "C", "D"], 0.0);
        assert_eq!(indicator(&many, "A", &t).unwrap(), 1);
        assert!(indicator(&d, "nope", &t).is_err());
    }

    #[test]
    fn frequency_hand_count() {
        let t = taxonomy();
        let store = CorpusStore::from_documents(
            YearRange::new(2012, 2013).unwrap(),
            vec![
                doc("1", Corpus::Science, 2012, &["B"], 1.0),
                doc("2", Corpus::Science, 2012, &["D"], 1.0),
                doc("3", Corpus::Science, 2012, &["Z"], 1.0),
            ],
        );
        let labeled = LabeledCorpus::new(&store, &t);
        let f = frequency_signal(&labeled, &Subject::Topic("B".into()), Corpus::Science).unwrap();
        assert_eq!(f.values, vec![2.0 / 3.0, 0.0]);
        let none = frequency_signal(&labeled, &Subject::Topic("C".into()), Corpus::Science).unwrap();
        assert_eq!(none.values, vec![0.0, 0.0]);
        assert!(frequency_signal(&labeled, &Subject::Topic("Q".into()), Corpus::Science).is_err());
    }

    #[test]
    fn minmax_examples() {
        assert_eq!(minmax_values(&[1.0, 2.0, 3.0]), vec![0.0, 0.5, 1.0]);
        assert_eq!(minmax_values(&[5.0, 5.0, 5.0]), vec![0.0, 0.0, 0.0]);
        assert_eq!(minmax_values(&[0.0, 4.0, 8.0, 2.0]), vec![0.0, 0.5, 1.0, 0.25]);
    }

    #[test]
    fn pair_subject_needs_both_members() {
        let t = taxonomy();
        let store = CorpusStore::from_documents(
            YearRange::new(2012, 2012).unwrap(),
            vec![
                doc("1", Corpus::Science, 2012, &["C", "Z"], 1.0),
                doc("2", Corpus::Science, 2012, &["C"], 1.0),
                doc("3", Corpus::Science, 2012, &["D", "Z"], 1.0),
                doc("4", Corpus::Science, 2012, &["Z"], 1.0),
            ],
        );
        let labeled = LabeledCorpus::new(&store, &t);
        let f = frequency_signal(&labeled, &Subject::Pair("C".into(), "Z".into()), Corpus::Science).unwrap();
        assert_eq!(f.values, vec![0.25]);
        // D is a descendant of B, so doc 3 matches (B, Z)
        let g = frequency_signal(&labeled, &Subject::Pair("B".into(), "Z".into()), Corpus::Science).unwrap();
        assert_eq!(g.values, vec![0.25]);
    }

    #[test]
    fn slice_years_bounds() {
        let s = TopicSignal {
            subject: Subject::Topic("A".into()),
            corpus: Corpus::Science,
            representation: Representation::Frequency,
            years: YearRange::DEFAULT,
            values: (0..12).map(f64::from).collect(),
            scaled: false,
        };
        let tail = slice_years(&s, YearRange::new(2020, 2021).unwrap()).unwrap();
        assert_eq!(tail.values, vec![10.0, 11.0]);
        assert!(slice_years(&s, YearRange::new(2009, 2012).unwrap()).is_err());
    }
}
