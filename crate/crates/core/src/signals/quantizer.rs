use std::collections::BTreeMap;

use crate::corpus::{Corpus, YearRange};
use crate::error::{Error, Result};

use super::LabeledCorpus;

/// Nearest-rank percentile of an ascending slice: the value at 1-based rank
/// `ceil(pct / 100 * n)`, clamped to at least 1.
pub fn nearest_rank(sorted: &[f64], pct: u32) -> f64 {
    assert!(!sorted.is_empty(), "nearest_rank on an empty pool");
    let n = sorted.len();
    let rank = (pct as usize * n).div_ceil(100).max(1);
    sorted[rank.min(n) - 1]
}

/// Quartile boundaries per (year, root ancestor) for one corpus. A pool
/// holds the weights of every document of that corpus and year whose
/// topics touch the ancestor's subtree.
#[derive(Debug, Clone)]
pub struct QuartileQuantizer {
    corpus: Corpus,
    pools: BTreeMap<(i32, usize), [f64; 3]>,
    root_ids: BTreeMap<String, usize>,
}

impl QuartileQuantizer {
    pub fn build(labeled: &LabeledCorpus<'_>, corpus: Corpus) -> Self {
        let taxonomy = labeled.taxonomy;
        let store = labeled.store;
        let roots = taxonomy.root_ixs();
        let masks: Vec<Vec<bool>> = roots.iter().map(|&r| taxonomy.descendant_mask(r)).collect();

        let mut pools = BTreeMap::new();
        for year in store.years().years() {
            let docs = store.in_year(corpus, year);
            for (&root, mask) in roots.iter().zip(&masks) {
                let mut weights: Vec<f64> = docs
                    .iter()
                    .filter(|&&d| labeled.topics_of(d).iter().any(|&t| mask[t]))
                    .map(|&d| store.documents()[d].weight)
                    .collect();
                if weights.is_empty() {
                    continue;
                }
                weights.sort_by(f64::total_cmp);
                pools.insert(
                    (year, root),
                    [
                        nearest_rank(&weights, 25),
                        nearest_rank(&weights, 50),
                        nearest_rank(&weights, 75),
                    ],
                );
            }
        }
        let root_ids = roots
            .iter()
            .map(|&r| (taxonomy.id(r).to_string(), r))
            .collect();
        QuartileQuantizer {
            corpus,
            pools,
            root_ids,
        }
    }

    pub fn corpus(&self) -> Corpus {
        self.corpus
    }

    /// `(q1, q2, q3)` for a pool, or `None` when the pool is empty.
    pub fn boundaries(&self, year: i32, ancestor: &str) -> Option<[f64; 3]> {
        let root = *self.root_ids.get(ancestor)?;
        self.pools.get(&(year, root)).copied()
    }

    pub(crate) fn boundaries_ix(&self, year: i32, root: usize) -> Option<[f64; 3]> {
        self.pools.get(&(year, root)).copied()
    }

    pub fn quantize(&self, weight: f64, year: i32, ancestor: &str) -> Result<u8> {
        let bounds = self
            .boundaries(year, ancestor)
            .ok_or_else(|| Error::AbsentPool {
                year,
                ancestor: ancestor.to_string(),
            })?;
        Ok(quartile(weight, bounds))
    }
}

fn quartile(weight: f64, [q1, q2, q3]: [f64; 3]) -> u8 {
    if weight <= q1 {
        1
    } else if weight <= q2 {
        2
    } else if weight <= q3 {
        3
    } else {
        4
    }
}

/// Per-document quartiles and yearly quartile sums (impact normalizers) for both corpora.
///
/// Each document is quantized once, against the pool of its primary
/// ancestor: the first root ancestor of its lexicographically first known
/// topic. Documents with no known topic get quartile 0.
#[derive(Debug, Clone)]
pub struct ImpactBasis {
    pub science: QuartileQuantizer,
    pub industry: QuartileQuantizer,
    doc_quartile: Vec<u8>,
    normalizer: [Vec<f64>; 2],
    years: YearRange,
}

impl ImpactBasis {
    pub fn build(labeled: &LabeledCorpus<'_>) -> Self {
        let science = QuartileQuantizer::build(labeled, Corpus::Science);
        let industry = QuartileQuantizer::build(labeled, Corpus::Industry);
        let store = labeled.store;
        let taxonomy = labeled.taxonomy;

        let doc_quartile: Vec<u8> = store
            .documents()
            .iter()
            .enumerate()
            .map(|(ix, doc)| {
                let Some(&first) = labeled.topics_of(ix).first() else {
                    return 0;
                };
                let primary = taxonomy.top_ancestor_ixs(first)[0];
                let q = match doc.corpus {
                    Corpus::Science => &science,
                    Corpus::Industry => &industry,
                };
                let bounds = q
                    .boundaries_ix(doc.year, primary)
                    .expect("a document always falls in its primary ancestor's pool");
                quartile(doc.weight, bounds)
            })
            .collect();

        let normalizer = [Corpus::Science, Corpus::Industry].map(|corpus| {
            store
                .years()
                .years()
                .map(|year| {
                    store
                        .in_year(corpus, year)
                        .iter()
                        .map(|&d| f64::from(doc_quartile[d]))
                        .sum()
                })
                .collect()
        });

        ImpactBasis {
            science,
            industry,
            doc_quartile,
            normalizer,
            years: store.years(),
        }
    }

    pub fn quartile_of(&self, doc: usize) -> u8 {
        self.doc_quartile[doc]
    }

    pub fn quartiles(&self) -> &[u8] {
        &self.doc_quartile
    }

    /// Quartile sum of all documents of the corpus in that year.
    pub fn normalizer(&self, corpus: Corpus, year: i32) -> f64 {
        let slot = match corpus {
            Corpus::Science => 0,
            Corpus::Industry => 1,
        };
        self.years
            .offset(year)
            .map_or(0.0, |t| self.normalizer[slot][t])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_rank_hundred() {
        let pool: Vec<f64> = (0..100).map(f64::from).collect();
        assert_eq!(nearest_rank(&pool, 25), 24.0);
        assert_eq!(nearest_rank(&pool, 50), 49.0);
        assert_eq!(nearest_rank(&pool, 75), 74.0);
    }

    #[test]
    fn nearest_rank_single() {
        assert_eq!(nearest_rank(&[7.0], 25), 7.0);
        assert_eq!(nearest_rank(&[7.0], 75), 7.0);
    }

    #[test]
    fn quartile_edges() {
        let b = [24.0, 49.0, 74.0];
        assert_eq!(quartile(10.0, b), 1);
        assert_eq!(quartile(30.0, b), 2);
        assert_eq!(quartile(60.0, b), 3);
        assert_eq!(quartile(90.0, b), 4);
        assert_eq!(quartile(-5.0, b), 1);
        assert_eq!(quartile(1e9, b), 4);
        assert_eq!(quartile(24.0, b), 1);
    }
}
