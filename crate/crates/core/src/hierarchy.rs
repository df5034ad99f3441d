//! Depth- and window-swept summaries over per-topic results, and per-root
//! lag summaries.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::analysis::{AnalysisConfig, SubjectRecord};
use crate::content::Metric;
use crate::error::Result;
use crate::signals::{Representation, Subject};
use crate::taxonomy::{Taxonomy, MAX_DEPTH};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SummaryMetric {
    CcaucGt1Fraction,
    GrangerSigFraction,
    TrGt1Fraction,
}

impl SummaryMetric {
    pub fn as_str(self) -> &'static str {
        match self {
            SummaryMetric::CcaucGt1Fraction => "ccauc_gt1_fraction",
            SummaryMetric::GrangerSigFraction => "granger_sig_fraction",
            SummaryMetric::TrGt1Fraction => "tr_gt1_fraction",
        }
    }
}

impl fmt::Display for SummaryMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which representation (trend metrics) or distance (content metric) a
/// summary row is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variant {
    Representation(Representation),
    Distance(Metric),
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Representation(r) => r.fmt(f),
            Variant::Distance(m) => m.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DepthSummary {
    pub depth: usize,
    pub metric: SummaryMetric,
    pub variant: Variant,
    /// Full-range fraction; `None` when no analyzable topic has a value.
    pub mean: Option<f64>,
    /// Population standard deviation of the per-window fractions; `None`
    /// without a window sweep.
    pub std: Option<f64>,
    pub topic_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopLevelLagSummary {
    pub root: String,
    pub mean_mcc_lag: Option<f64>,
    pub ccauc_gt1_fraction: Option<f64>,
    pub topic_count: usize,
}

/// Fraction of `Some(true)` among the defined values.
fn fraction(flags: impl Iterator<Item = Option<bool>>) -> Option<f64> {
    let (mut hits, mut n) = (0usize, 0usize);
    for f in flags.flatten() {
        n += 1;
        hits += usize::from(f);
    }
    (n > 0).then(|| hits as f64 / n as f64)
}

fn population_std(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    Some((values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt())
}

fn predicate(record: &SubjectRecord, metric: SummaryMetric, variant: Variant, alpha: f64) -> Option<bool> {
    match (metric, variant) {
        (SummaryMetric::CcaucGt1Fraction, Variant::Representation(r)) => {
            record.trend_for(r).map(|t| t.ccauc.ratio > 1.0)
        }
        (SummaryMetric::GrangerSigFraction, Variant::Representation(r)) => {
            record.trend_for(r).map(|t| t.summary.significant(alpha))
        }
        (SummaryMetric::TrGt1Fraction, Variant::Distance(m)) => record.tr_for(m).map(|tr| tr > 1.0),
        _ => None,
    }
}

fn window_predicate(
    record: &SubjectRecord,
    window: usize,
    metric: SummaryMetric,
    variant: Variant,
    alpha: f64,
) -> Option<bool> {
    let w = record.windows.iter().find(|w| w.window == window)?;
    match (metric, variant) {
        (SummaryMetric::CcaucGt1Fraction, Variant::Representation(r)) => w
            .trend
            .iter()
            .find(|t| t.representation == r)
            .map(|t| t.ccauc.ratio > 1.0),
        (SummaryMetric::GrangerSigFraction, Variant::Representation(r)) => w
            .trend
            .iter()
            .find(|t| t.representation == r)
            .map(|t| t.granger.significant(alpha)),
        (SummaryMetric::TrGt1Fraction, Variant::Distance(m)) => {
            w.tr.iter().find(|(mm, _)| *mm == m).map(|&(_, tr)| tr > 1.0)
        }
        _ => None,
    }
}

/// The (metric, variant) combinations a configuration produces.
pub fn summary_keys(config: &AnalysisConfig) -> Vec<(SummaryMetric, Variant)> {
    let mut keys = Vec::new();
    for metric in [SummaryMetric::CcaucGt1Fraction, SummaryMetric::GrangerSigFraction] {
        for &r in &config.representations {
            keys.push((metric, Variant::Representation(r)));
        }
    }
    for &m in &config.metrics {
        keys.push((SummaryMetric::TrGt1Fraction, Variant::Distance(m)));
    }
    keys
}

/// Cumulative depth sweep: level `d` covers every analyzable topic whose
/// depth is at most `d + depth_origin - 1`. Levels run from 1 to the
/// deepest level the taxonomy reaches.
pub fn depth_sweep(records: &[SubjectRecord], taxonomy: &Taxonomy, config: &AnalysisConfig) -> Result<Vec<DepthSummary>> {
    let by_topic: BTreeMap<&str, &SubjectRecord> = records
        .iter()
        .filter(|r| r.analyzable())
        .filter_map(|r| match &r.subject {
            Subject::Topic(t) => Some((t.as_str(), r)),
            Subject::Pair(..) => None,
        })
        .collect();
    let top = taxonomy.max_depth().min(MAX_DEPTH);
    let keys = summary_keys(config);
    let mut out = Vec::new();
    for level in 1.. {
        let depth = level + config.depth_origin - 1;
        if depth > top {
            break;
        }
        let members: Vec<&SubjectRecord> = taxonomy
            .topics_at_depth(depth)?
            .iter()
            .filter_map(|id| by_topic.get(id.as_str()).copied())
            .collect();
        for &(metric, variant) in &keys {
            let mean = fraction(members.iter().map(|r| predicate(r, metric, variant, config.alpha)));
            let std = if config.window_sweep && !members.is_empty() {
                let per_window: Vec<f64> = config
                    .windows
                    .iter()
                    .filter_map(|&w| {
                        fraction(
                            members
                                .iter()
                                .map(|r| window_predicate(r, w, metric, variant, config.alpha)),
                        )
                    })
                    .collect();
                population_std(&per_window)
            } else {
                None
            };
            out.push(DepthSummary {
                depth: level,
                metric,
                variant,
                mean,
                std,
                topic_count: members.len(),
            });
        }
    }
    Ok(out)
}

/// Per root topic: mean MCC lag and share of CCAUC ratios above 1 over
/// the root and all its analyzable descendants.
pub fn top_level_lag_summary(
    records: &[SubjectRecord],
    taxonomy: &Taxonomy,
    representation: Representation,
) -> Vec<TopLevelLagSummary> {
    let by_topic: BTreeMap<&str, &SubjectRecord> = records
        .iter()
        .filter(|r| r.analyzable())
        .filter_map(|r| match &r.subject {
            Subject::Topic(t) => Some((t.as_str(), r)),
            Subject::Pair(..) => None,
        })
        .collect();
    taxonomy
        .root_ixs()
        .iter()
        .map(|&root| {
            let results: Vec<_> = taxonomy
                .descendant_ixs(root)
                .into_iter()
                .filter_map(|ix| by_topic.get(taxonomy.id(ix)))
                .filter_map(|r| r.trend_for(representation))
                .map(|t| t.ccauc)
                .collect();
            let n = results.len();
            TopLevelLagSummary {
                root: taxonomy.id(root).to_string(),
                mean_mcc_lag: (n > 0).then(|| results.iter().map(|c| f64::from(c.mcc_lag)).sum::<f64>() / n as f64),
                ccauc_gt1_fraction: fraction(results.iter().map(|c| Some(c.ratio > 1.0))),
                topic_count: n,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fraction_counts_defined_values() {
        let f = fraction([Some(true), Some(true), Some(false), Some(true), None].into_iter());
        assert_eq!(f, Some(0.75));
        assert_eq!(fraction(std::iter::empty()), None);
    }

    #[test]
    fn population_std_examples() {
        assert_eq!(population_std(&[0.5, 0.5]), Some(0.0));
        assert_eq!(population_std(&[0.0, 1.0]), Some(0.5));
        assert_eq!(population_std(&[]), None);
    }
}
