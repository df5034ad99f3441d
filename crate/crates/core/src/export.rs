//! CSV writers for every tabular output.
//!
//! Floats use Rust's shortest round-trip formatting, so values read back
//! bit-identical; undefined values are written as empty fields.

use std::io::Write;

use crate::analysis::{ContentStatus, PairAnalysis, PairSkip, SubjectRecord};
use crate::error::Result;
use crate::hierarchy::{DepthSummary, TopLevelLagSummary};
use crate::signals::Subject;

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

fn num(v: f64) -> String {
    v.to_string()
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn subject_fields(subject: &Subject) -> Vec<String> {
    match subject {
        Subject::Topic(t) => vec![t.clone()],
        Subject::Pair(a, b) => vec![a.clone(), b.clone()],
    }
}

fn subject_header(pairs: bool) -> Vec<&'static str> {
    if pairs {
        vec!["topic_a", "topic_b"]
    } else {
        vec!["topic"]
    }
}

/// `topic,corpus,representation,year,raw,scaled` for every subject.
pub fn write_signals<W: Write>(records: &[SubjectRecord], pairs: bool, out: W) -> Result<()> {
    let mut w = writer(out);
    let mut header = subject_header(pairs);
    header.extend(["corpus", "representation", "year", "raw", "scaled"]);
    w.write_record(&header)?;
    for r in records {
        for set in &r.signals {
            for signal in [&set.science, &set.industry] {
                let scaled = signal.scaled();
                for ((year, raw), s) in signal.years.years().zip(&signal.values).zip(&scaled.values) {
                    let mut row = subject_fields(&r.subject);
                    row.extend([
                        signal.corpus.to_string(),
                        signal.representation.to_string(),
                        year.to_string(),
                        num(*raw),
                        num(*s),
                    ]);
                    w.write_record(&row)?;
                }
            }
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// One row per analyzable subject and representation.
pub fn write_trend<W: Write>(records: &[SubjectRecord], pairs: bool, out: W) -> Result<()> {
    let mut w = writer(out);
    let mut header = subject_header(pairs);
    header.extend([
        "representation",
        "ccauc_ratio",
        "mcc_lag",
        "granger_best_lag",
        "granger_min_p",
        "granger_feasible_lags",
    ]);
    w.write_record(&header)?;
    for r in records.iter().filter(|r| r.analyzable()) {
        for t in &r.trend {
            let mut row = subject_fields(&r.subject);
            row.extend([
                t.representation.to_string(),
                num(t.ccauc.ratio),
                t.ccauc.mcc_lag.to_string(),
                opt(t.summary.best_lag),
                opt(t.summary.min_p),
                t.summary.feasible_lags.to_string(),
            ]);
            w.write_record(&row)?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Every tested lag order, feasible or not.
pub fn write_granger<W: Write>(records: &[SubjectRecord], pairs: bool, out: W) -> Result<()> {
    let mut w = writer(out);
    let mut header = subject_header(pairs);
    header.extend(["representation", "lag_order", "statistic", "p_value", "feasible"]);
    w.write_record(&header)?;
    for r in records.iter().filter(|r| r.analyzable()) {
        for t in &r.trend {
            for g in &t.granger {
                let mut row = subject_fields(&r.subject);
                row.extend([
                    t.representation.to_string(),
                    g.lag_order.to_string(),
                    if g.feasible { num(g.statistic) } else { String::new() },
                    if g.feasible { num(g.p_value) } else { String::new() },
                    g.feasible.to_string(),
                ]);
                w.write_record(&row)?;
            }
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Triangular ratios; subjects whose content analysis was skipped get a
/// row per metric with an empty `tr` and the reason.
pub fn write_content<W: Write>(records: &[SubjectRecord], pairs: bool, metrics: &[crate::content::Metric], out: W) -> Result<()> {
    let mut w = writer(out);
    let mut header = subject_header(pairs);
    header.extend([
        "metric",
        "projection",
        "tr",
        "present_cells",
        "used_documents",
        "missing_positions",
        "note",
    ]);
    w.write_record(&header)?;
    for r in records.iter().filter(|r| r.analyzable()) {
        match &r.content {
            ContentStatus::NotRequested => {}
            ContentStatus::Skipped(reason) => {
                for m in metrics {
                    let mut row = subject_fields(&r.subject);
                    row.extend([m.to_string(), String::new(), String::new(), "0".into(), "0".into(), String::new(), reason.clone()]);
                    w.write_record(&row)?;
                }
            }
            ContentStatus::Done {
                matrices,
                tr,
                used_documents,
                missing_position,
            } => {
                for (m, t) in matrices.iter().zip(tr) {
                    let mut row = subject_fields(&r.subject);
                    row.extend([
                        m.metric.to_string(),
                        m.projection.to_string(),
                        num(t.tr),
                        m.present_cells().to_string(),
                        used_documents.to_string(),
                        missing_position.to_string(),
                        String::new(),
                    ]);
                    w.write_record(&row)?;
                }
            }
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `depth,metric,representation,mean,std,topic_count`.
pub fn write_depth_summary<W: Write>(rows: &[DepthSummary], out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["depth", "metric", "representation", "mean", "std", "topic_count"])?;
    for s in rows {
        w.write_record([
            s.depth.to_string(),
            s.metric.to_string(),
            s.variant.to_string(),
            opt(s.mean),
            opt(s.std),
            s.topic_count.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `root_topic,mean_mcc_lag,ccauc_gt1_fraction`.
pub fn write_top_level<W: Write>(rows: &[TopLevelLagSummary], out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["root_topic", "mean_mcc_lag", "ccauc_gt1_fraction"])?;
    for s in rows {
        w.write_record([
            s.root.clone(),
            opt(s.mean_mcc_lag),
            opt(s.ccauc_gt1_fraction),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Selected pairs with their co-occurrence counts and status.
pub fn write_pair_selection<W: Write>(analysis: &PairAnalysis, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["topic_a", "topic_b", "count", "status"])?;
    for p in &analysis.pairs {
        w.write_record([p.a.clone(), p.b.clone(), p.count.to_string(), "analyzed".into()])?;
    }
    for PairSkip { pair, reason } in &analysis.skipped {
        w.write_record([pair.a.clone(), pair.b.clone(), pair.count.to_string(), format!("skipped: {reason}")])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
