//! Per-subject analysis: signals, trend association, Granger causality,
//! content association and optional sliding-window recomputations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::content::{
    similarity_matrices, triangular_ratio, ContentConfig, Metric, PointSource, SimilarityMatrix, TrResult,
};
use crate::corpus::{Corpus, YearRange};
use crate::error::{Error, Result};
use crate::signals::{
    minmax, signal_from, slice_years, ImpactBasis, LabeledCorpus, Representation, Subject, SubjectMatches,
    TopicSignal,
};
use crate::taxonomy::{pareto_pairs, TopicPair};
use crate::trend::{ccauc, cross_correlate, granger_signals, CcaucResult, GrangerResult, GrangerSummary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    pub years: YearRange,
    pub representations: Vec<Representation>,
    pub metrics: Vec<Metric>,
    pub max_lag: usize,
    pub content: ContentConfig,
    pub pareto_fraction: f64,
    pub windows: Vec<usize>,
    pub window_sweep: bool,
    pub alpha: f64,
    /// Taxonomy depth reported as level 1 in depth sweeps.
    pub depth_origin: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            years: YearRange::DEFAULT,
            representations: Representation::ALL.to_vec(),
            metrics: Metric::ALL.to_vec(),
            max_lag: 11,
            content: ContentConfig::default(),
            pareto_fraction: 0.2,
            windows: (1..=11).collect(),
            window_sweep: false,
            alpha: 0.05,
            depth_origin: 1,
        }
    }
}

impl AnalysisConfig {
    pub fn check(&self) -> Result<()> {
        let len = self.years.len();
        if let Some(&w) = self.windows.iter().find(|&&w| w == 0 || w >= len) {
            return Err(Error::WindowTooLarge { window: w, len });
        }
        if self.content.b1 == 0 || self.content.b2 == 0 {
            return Err(Error::Config("bins must be positive".into()));
        }
        if !(self.content.bandwidth > 0.0 && self.content.bandwidth.is_finite()) {
            return Err(Error::Config(format!("bandwidth {} must be positive", self.content.bandwidth)));
        }
        if !(self.pareto_fraction > 0.0 && self.pareto_fraction <= 1.0) {
            return Err(Error::Config(format!("pareto fraction {} outside (0, 1]", self.pareto_fraction)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        if self.depth_origin == 0 {
            return Err(Error::Config("depth origin starts at 1".into()));
        }
        Ok(())
    }
}

/// Raw science and industry signals of one representation.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSet {
    pub representation: Representation,
    pub science: TopicSignal,
    pub industry: TopicSignal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrendOutcome {
    pub representation: Representation,
    pub ccauc: CcaucResult,
    pub granger: Vec<GrangerResult>,
    pub summary: GrangerSummary,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ContentStatus {
    NotRequested,
    Skipped(String),
    Done {
        matrices: Vec<SimilarityMatrix>,
        tr: Vec<TrResult>,
        used_documents: usize,
        missing_position: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowTrend {
    pub representation: Representation,
    pub ccauc: CcaucResult,
    pub granger: GrangerSummary,
}

/// Outcomes recomputed on the last `window + 1` years.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowOutcome {
    pub window: usize,
    pub trend: Vec<WindowTrend>,
    pub tr: Vec<(Metric, f64)>,
}

/// Everything computed for one topic or pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectRecord {
    pub subject: Subject,
    pub science_documents: usize,
    pub industry_documents: usize,
    pub signals: Vec<SignalSet>,
    pub trend: Vec<TrendOutcome>,
    pub content: ContentStatus,
    pub windows: Vec<WindowOutcome>,
}

impl SubjectRecord {
    /// Subjects never seen in the industry corpus are left out of every
    /// summary.
    pub fn analyzable(&self) -> bool {
        self.industry_documents > 0
    }

    pub fn trend_for(&self, representation: Representation) -> Option<&TrendOutcome> {
        self.trend.iter().find(|t| t.representation == representation)
    }

    pub fn tr_for(&self, metric: Metric) -> Option<f64> {
        match &self.content {
            ContentStatus::Done { tr, .. } => tr.iter().find(|r| r.metric == metric).map(|r| r.tr),
            _ => None,
        }
    }
}

/// Shared read-only inputs of an analysis run.
#[derive(Clone, Copy)]
pub struct AnalysisInputs<'a> {
    pub labeled: &'a LabeledCorpus<'a>,
    pub basis: &'a ImpactBasis,
    pub points: Option<PointSource<'a>>,
}

/// Restricts a signal to its last `window + 1` years and min-max rescales
/// it on that support.
pub fn window_signal(signal: &TopicSignal, window: usize) -> Result<TopicSignal> {
    if window == 0 || window >= signal.values.len() {
        return Err(Error::WindowTooLarge {
            window,
            len: signal.values.len(),
        });
    }
    Ok(minmax(&slice_years(signal, signal.years.suffix(window + 1))?))
}

/// Restricts Δ to its bottom-right `(size - window) x (size - window)`
/// block.
pub fn window_matrix(delta: &SimilarityMatrix, window: usize) -> Result<SimilarityMatrix> {
    if window >= delta.size {
        return Err(Error::WindowTooLarge {
            window,
            len: delta.size,
        });
    }
    delta.bottom_right(delta.size - window)
}

fn trend_of(sci: &TopicSignal, ind: &TopicSignal, max_lag: usize) -> Result<(CcaucResult, Vec<GrangerResult>)> {
    let (s, i) = (minmax(sci), minmax(ind));
    let cc = ccauc(&cross_correlate(&s, &i, max_lag)?);
    let granger = match granger_signals(&s, &i, max_lag) {
        Err(Error::SeriesTooShort(_)) => Vec::new(),
        other => other?,
    };
    Ok((cc, granger))
}

fn granger_or_none(sci: &TopicSignal, ind: &TopicSignal, max_lag: usize) -> Result<GrangerSummary> {
    match granger_signals(sci, ind, max_lag) {
        Ok(results) => Ok(GrangerSummary::from_results(&results)),
        Err(Error::SeriesTooShort(_)) => Ok(GrangerSummary::none()),
        Err(e) => Err(e),
    }
}

/// Runs every requested analysis for one subject.
pub fn analyze_subject(inputs: AnalysisInputs<'_>, subject: &Subject, config: &AnalysisConfig) -> Result<SubjectRecord> {
    let labeled = inputs.labeled;
    let store = labeled.store;
    let matches = SubjectMatches::collect(labeled, &labeled.matcher(subject)?);
    let signals: Vec<SignalSet> = config
        .representations
        .iter()
        .map(|&representation| SignalSet {
            representation,
            science: signal_from(store, &matches, subject, Corpus::Science, representation, inputs.basis),
            industry: signal_from(store, &matches, subject, Corpus::Industry, representation, inputs.basis),
        })
        .collect();
    let mut record = SubjectRecord {
        subject: subject.clone(),
        science_documents: matches.count(Corpus::Science),
        industry_documents: matches.count(Corpus::Industry),
        signals,
        trend: Vec::new(),
        content: ContentStatus::NotRequested,
        windows: Vec::new(),
    };
    if !record.analyzable() {
        return Ok(record);
    }

    for set in &record.signals {
        let (cc, granger) = trend_of(&set.science, &set.industry, config.max_lag)?;
        record.trend.push(TrendOutcome {
            representation: set.representation,
            ccauc: cc,
            summary: GrangerSummary::from_results(&granger),
            granger,
        });
    }

    if let (Some(points), false) = (inputs.points, config.metrics.is_empty()) {
        record.content = match similarity_matrices(
            labeled,
            inputs.basis,
            points,
            subject,
            &matches,
            &config.metrics,
            &config.content,
        ) {
            Ok(outcome) => ContentStatus::Done {
                tr: outcome.matrices.iter().map(triangular_ratio).collect(),
                matrices: outcome.matrices,
                used_documents: outcome.used_documents,
                missing_position: outcome.missing_position,
            },
            Err(e @ (Error::Empty(_) | Error::Degenerate(_))) => ContentStatus::Skipped(e.to_string()),
            Err(e) => return Err(e),
        };
    }

    if config.window_sweep {
        for &window in &config.windows {
            let mut outcome = WindowOutcome {
                window,
                trend: Vec::new(),
                tr: Vec::new(),
            };
            for set in &record.signals {
                let sci = window_signal(&set.science, window)?;
                let ind = window_signal(&set.industry, window)?;
                outcome.trend.push(WindowTrend {
                    representation: set.representation,
                    ccauc: ccauc(&cross_correlate(&sci, &ind, config.max_lag)?),
                    granger: granger_or_none(&sci, &ind, config.max_lag)?,
                });
            }
            if let ContentStatus::Done { matrices, .. } = &record.content {
                for m in matrices {
                    outcome.tr.push((m.metric, triangular_ratio(&window_matrix(m, window)?).tr));
                }
            }
            record.windows.push(outcome);
        }
    }
    Ok(record)
}

/// Analyzes `subjects` in parallel; the result keeps the input order.
pub fn analyze_subjects(
    inputs: AnalysisInputs<'_>,
    subjects: &[Subject],
    config: &AnalysisConfig,
) -> Result<Vec<SubjectRecord>> {
    config.check()?;
    if inputs.labeled.store.years() != config.years {
        return Err(Error::RangeMismatch(format!(
            "store covers {} but the analysis is configured for {}",
            inputs.labeled.store.years(),
            config.years
        )));
    }
    subjects
        .par_iter()
        .map(|s| analyze_subject(inputs, s, config))
        .collect()
}

/// Every taxonomy topic, in id order.
pub fn analyze_topics(inputs: AnalysisInputs<'_>, config: &AnalysisConfig) -> Result<Vec<SubjectRecord>> {
    let subjects: Vec<Subject> = inputs
        .labeled
        .taxonomy
        .nodes()
        .iter()
        .map(|n| Subject::Topic(n.id.clone()))
        .collect();
    analyze_subjects(inputs, &subjects, config)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairSkip {
    pub pair: TopicPair,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct PairAnalysis {
    pub pairs: Vec<TopicPair>,
    pub records: Vec<SubjectRecord>,
    pub skipped: Vec<PairSkip>,
}

/// The most frequent co-occurring topic pairs, each analyzed as a
/// pseudo-topic that requires both members. Pairs absent from either
/// corpus, or naming topics outside the taxonomy, are skipped.
pub fn pair_pipeline(inputs: AnalysisInputs<'_>, config: &AnalysisConfig) -> Result<PairAnalysis> {
    let taxonomy = inputs.labeled.taxonomy;
    let mut kept = Vec::new();
    let mut skipped = Vec::new();
    for pair in pareto_pairs(inputs.labeled.store, config.pareto_fraction)? {
        if !taxonomy.contains(&pair.a) || !taxonomy.contains(&pair.b) {
            skipped.push(PairSkip {
                reason: "topic not in taxonomy".into(),
                pair,
            });
        } else {
            kept.push(pair);
        }
    }
    let subjects: Vec<Subject> = kept.iter().map(Subject::pair).collect();
    let analyzed = analyze_subjects(inputs, &subjects, config)?;
    let mut pairs = Vec::new();
    let mut records = Vec::new();
    for (pair, record) in kept.into_iter().zip(analyzed) {
        let missing = match (record.science_documents, record.industry_documents) {
            (0, 0) => Some("no matching documents in either corpus"),
            (0, _) => Some("no matching science documents"),
            (_, 0) => Some("no matching industry documents"),
            _ => None,
        };
        match missing {
            Some(reason) => skipped.push(PairSkip {
                pair,
                reason: reason.into(),
            }),
            None => {
                pairs.push(pair);
                records.push(record);
            }
        }
    }
    Ok(PairAnalysis {
        pairs,
        records,
        skipped,
    })
}
