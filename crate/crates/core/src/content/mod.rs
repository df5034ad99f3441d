//! Content association between corpora in embedding space.
//!
//! For a subject, every matching document with a position (PCA projection
//! of its embedding, or imported 2-D coordinates) is binned on a grid,
//! weighted by its quartile. For each (science year, industry year) pair
//! the two grids are smoothed, normalized and compared, giving a year-pair
//! similarity matrix whose upper triangle holds "science earlier" cells.

mod distance;
mod grid;
mod projection;

pub use distance::{hellinger, tvd, Metric};
pub use grid::{bin_of, gaussian_kernel, grid_density, smooth_and_normalize, Bounds, DensityGrid};
pub use projection::{export_projection, fit_projection, import_projection, orient, Projection};

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, EmbeddingTable};
use crate::error::{Error, Result};
use crate::signals::{ImpactBasis, LabeledCorpus, Subject, SubjectMatches};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProjectionMode {
    Pca,
    Imported,
}

impl ProjectionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ProjectionMode::Pca => "pca",
            ProjectionMode::Imported => "imported",
        }
    }
}

impl fmt::Display for ProjectionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How grid bounds are chosen for a year pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundsMode {
    /// Tight bounds over the union of the pair's two point sets.
    #[default]
    PerPair,
    /// One set of bounds over all of the subject's points.
    Subject,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContentConfig {
    pub b1: usize,
    pub b2: usize,
    pub bandwidth: f64,
    pub bounds: BoundsMode,
}

impl Default for ContentConfig {
    fn default() -> Self {
        ContentConfig {
            b1: 20,
            b2: 20,
            bandwidth: 0.8,
            bounds: BoundsMode::PerPair,
        }
    }
}

/// Where document positions come from.
#[derive(Debug, Clone, Copy)]
pub enum PointSource<'a> {
    Embeddings(&'a EmbeddingTable),
    Coordinates(&'a BTreeMap<String, (f64, f64)>),
}

impl PointSource<'_> {
    pub fn mode(&self) -> ProjectionMode {
        match self {
            PointSource::Embeddings(_) => ProjectionMode::Pca,
            PointSource::Coordinates(_) => ProjectionMode::Imported,
        }
    }

    fn has(&self, id: &str) -> bool {
        match self {
            PointSource::Embeddings(t) => t.contains(id),
            PointSource::Coordinates(c) => c.contains_key(id),
        }
    }
}

/// Square year-pair similarity matrix Δ; rows are science years, columns
/// industry years.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    pub subject: Subject,
    pub metric: Metric,
    pub projection: ProjectionMode,
    pub size: usize,
    pub values: Vec<f64>,
    pub mask: Vec<bool>,
}

impl SimilarityMatrix {
    pub fn empty(subject: Subject, metric: Metric, projection: ProjectionMode, size: usize) -> Self {
        SimilarityMatrix {
            subject,
            metric,
            projection,
            size,
            values: vec![0.0; size * size],
            mask: vec![false; size * size],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let ix = i * self.size + j;
        self.mask[ix].then(|| self.values[ix])
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let ix = i * self.size + j;
        self.values[ix] = v;
        self.mask[ix] = true;
    }

    pub fn present_cells(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// The trailing `k x k` block (most recent years on both axes).
    pub fn bottom_right(&self, k: usize) -> Result<SimilarityMatrix> {
        if k == 0 || k > self.size {
            return Err(Error::WindowTooLarge {
                window: self.size.saturating_sub(k),
                len: self.size,
            });
        }
        let off = self.size - k;
        let mut out = SimilarityMatrix::empty(self.subject.clone(), self.metric, self.projection, k);
        for i in 0..k {
            for j in 0..k {
                if let Some(v) = self.get(off + i, off + j) {
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    /// Values as CSV rows; masked cells are left empty.
    pub fn write_values_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for i in 0..self.size {
            let row: Vec<String> = (0..self.size)
                .map(|j| self.get(i, j).map(|v| v.to_string()).unwrap_or_default())
                .collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn write_mask_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for i in 0..self.size {
            let row: Vec<&str> = (0..self.size)
                .map(|j| if self.mask[i * self.size + j] { "1" } else { "0" })
                .collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrResult {
    pub subject: Subject,
    pub metric: Metric,
    pub tr: f64,
}

/// `(1 + sum of present strict-upper cells) / (1 + sum of present cells on
/// or below the diagonal)`.
pub fn triangular_ratio(delta: &SimilarityMatrix) -> TrResult {
    let mut upper = 0.0;
    let mut lower = 0.0;
    for i in 0..delta.size {
        for j in 0..delta.size {
            if let Some(v) = delta.get(i, j) {
                if i < j {
                    upper += v;
                } else {
                    lower += v;
                }
            }
        }
    }
    TrResult {
        subject: delta.subject.clone(),
        metric: delta.metric,
        tr: (1.0 + upper) / (1.0 + lower),
    }
}

/// Outcome of the content pipeline for one subject.
#[derive(Debug, Clone)]
pub struct ContentOutcome {
    /// One matrix per requested metric, in request order.
    pub matrices: Vec<SimilarityMatrix>,
    pub used_documents: usize,
    /// Matching documents skipped for lack of an embedding or coordinate.
    pub missing_position: usize,
}

struct Located {
    corpus: Corpus,
    year_offset: usize,
    point: (f64, f64),
    weight: f64,
}

fn locate(
    labeled: &LabeledCorpus<'_>,
    basis: &ImpactBasis,
    source: PointSource<'_>,
    matches: &SubjectMatches,
) -> Result<(Vec<Located>, usize)> {
    let store = labeled.store;
    let years = store.years();
    let mut docs = Vec::new();
    let mut missing = 0;
    for corpus in Corpus::ALL {
        for t in 0..years.len() {
            for &d in matches.in_year(corpus, t) {
                if source.has(&store.documents()[d].id) {
                    docs.push(d);
                } else {
                    missing += 1;
                }
            }
        }
    }
    if docs.is_empty() {
        return Err(Error::Empty("no matching documents with a position".into()));
    }
    let points: Vec<(f64, f64)> = match source {
        PointSource::Coordinates(coords) => docs
            .iter()
            .map(|&d| coords[&store.documents()[d].id])
            .collect(),
        PointSource::Embeddings(table) => {
            let rows: Vec<Vec<f64>> = docs
                .iter()
                .map(|&d| {
                    table
                        .get(&store.documents()[d].id)
                        .expect("filtered above")
                        .iter()
                        .map(|&v| f64::from(v))
                        .collect()
                })
                .collect();
            let projection = fit_projection(&rows)?;
            rows.iter().map(|r| projection.project(r)).collect()
        }
    };
    let located = docs
        .iter()
        .zip(points)
        .map(|(&d, point)| {
            let doc = &store.documents()[d];
            Located {
                corpus: doc.corpus,
                year_offset: years.offset(doc.year).expect("store documents are in range"),
                point,
                weight: f64::from(basis.quartile_of(d)),
            }
        })
        .collect();
    Ok((located, missing))
}

fn smoothed(points: &[&Located], bounds: Bounds, config: &ContentConfig) -> Result<DensityGrid> {
    let pts: Vec<(f64, f64)> = points.iter().map(|l| l.point).collect();
    let ws: Vec<f64> = points.iter().map(|l| l.weight).collect();
    let raw = grid_density(&pts, &ws, bounds, config.b1, config.b2)?;
    smooth_and_normalize(&raw, config.bandwidth)
}

/// Builds Δ for each metric in `metrics` from one shared set of grids.
pub fn similarity_matrices(
    labeled: &LabeledCorpus<'_>,
    basis: &ImpactBasis,
    source: PointSource<'_>,
    subject: &Subject,
    matches: &SubjectMatches,
    metrics: &[Metric],
    config: &ContentConfig,
) -> Result<ContentOutcome> {
    let size = labeled.store.years().len();
    let (located, missing) = locate(labeled, basis, source, matches)?;

    let mut by_year: [Vec<Vec<&Located>>; 2] = [vec![Vec::new(); size], vec![Vec::new(); size]];
    for l in &located {
        let slot = usize::from(l.corpus == Corpus::Industry);
        by_year[slot][l.year_offset].push(l);
    }
    let global = Bounds::of_points(located.iter().map(|l| l.point))
        .expect("located is non-empty")
        .padded();

    // with subject-wide bounds each (corpus, year) grid is reused across pairs
    let mut cache: [Vec<Option<DensityGrid>>; 2] = [vec![None; size], vec![None; size]];
    if config.bounds == BoundsMode::Subject {
        for slot in 0..2 {
            for t in 0..size {
                if !by_year[slot][t].is_empty() {
                    cache[slot][t] = Some(smoothed(&by_year[slot][t], global, config)?);
                }
            }
        }
    }

    let mode = source.mode();
    let mut matrices: Vec<SimilarityMatrix> = metrics
        .iter()
        .map(|&m| SimilarityMatrix::empty(subject.clone(), m, mode, size))
        .collect();
    for i in 0..size {
        let sci = &by_year[0][i];
        if sci.is_empty() {
            continue;
        }
        for j in 0..size {
            let ind = &by_year[1][j];
            if ind.is_empty() {
                continue;
            }
            let (p, q) = match config.bounds {
                BoundsMode::Subject => (
                    cache[0][i].clone().expect("cached above"),
                    cache[1][j].clone().expect("cached above"),
                ),
                BoundsMode::PerPair => {
                    let bounds = Bounds::of_points(sci.iter().chain(ind.iter()).map(|l| l.point))
                        .expect("both sides non-empty")
                        .padded();
                    (smoothed(sci, bounds, config)?, smoothed(ind, bounds, config)?)
                }
            };
            for m in matrices.iter_mut() {
                let d = m.metric.distance(&p.cells, &q.cells)?;
                m.set(i, j, 1.0 - d);
            }
        }
    }
    Ok(ContentOutcome {
        matrices,
        used_documents: located.len(),
        missing_position: missing,
    })
}

/// Single-metric convenience over [`similarity_matrices`].
pub fn similarity_matrix(
    labeled: &LabeledCorpus<'_>,
    basis: &ImpactBasis,
    source: PointSource<'_>,
    subject: &Subject,
    metric: Metric,
    config: &ContentConfig,
) -> Result<SimilarityMatrix> {
    let matches = SubjectMatches::collect(labeled, &labeled.matcher(subject)?);
    let mut out = similarity_matrices(labeled, basis, source, subject, &matches, &[metric], config)?;
    Ok(out.matrices.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn filled(size: usize, v: f64) -> SimilarityMatrix {
        let mut m = SimilarityMatrix::empty(Subject::Topic("t".into()), Metric::Tvd, ProjectionMode::Pca, size);
        for i in 0..size {
            for j in 0..size {
                m.set(i, j, v);
            }
        }
        m
    }

    #[test]
    fn tr_examples() {
        let masked = SimilarityMatrix::empty(Subject::Topic("t".into()), Metric::Tvd, ProjectionMode::Pca, 12);
        assert_eq!(triangular_ratio(&masked).tr, 1.0);
        assert_eq!(triangular_ratio(&filled(12, 0.0)).tr, 1.0);
        let mut one = masked.clone();
        one.set(0, 11, 1.0);
        assert_eq!(triangular_ratio(&one).tr, 2.0);
        assert_eq!(triangular_ratio(&filled(12, 1.0)).tr, 67.0 / 79.0);
    }

    #[test]
    fn bottom_right_block() {
        let mut m = filled(12, 0.5);
        m.set(11, 11, 0.9);
        let b = m.bottom_right(1).unwrap();
        assert_eq!(b.size, 1);
        assert_eq!(b.get(0, 0), Some(0.9));
        assert_eq!(m.bottom_right(12).unwrap(), m);
        assert!(m.bottom_right(0).is_err());
        assert!(m.bottom_right(13).is_err());
    }

    #[test]
    fn csv_marks_masked_cells_empty() {
        let mut m = SimilarityMatrix::empty(Subject::Topic("t".into()), Metric::Tvd, ProjectionMode::Pca, 2);
        m.set(0, 1, 0.25);
        let mut vals = Vec::new();
        m.write_values_csv(&mut vals).unwrap();
        assert_eq!(String::from_utf8(vals).unwrap(), ",0.25\n,\n");
        let mut mask = Vec::new();
        m.write_mask_csv(&mut mask).unwrap();
        assert_eq!(String::from_utf8(mask).unwrap(), "0,1\n0,0\n");
    }
}
