//! Lead-lag association (cross-correlation, CCAUC, MCC lag) and Granger
//! causality between paired science and industry signals.

mod granger;
mod xcorr;

pub use granger::{best_lag, chi2_sf, granger, max_feasible_lag, GrangerResult};
pub use xcorr::{ccauc, cross_correlate, cross_correlation, CcaucResult, CrossCorrelation};

use crate::error::{Error, Result};
use crate::signals::TopicSignal;

/// Granger test on two scaled signals: does science predict industry?
pub fn granger_signals(sci: &TopicSignal, ind: &TopicSignal, max_lag: usize) -> Result<Vec<GrangerResult>> {
    if sci.years != ind.years {
        return Err(Error::RangeMismatch(format!("{} vs {}", sci.years, ind.years)));
    }
    granger(&sci.values, &ind.values, max_lag)
}

/// Compact per-subject Granger outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrangerSummary {
    pub best_lag: Option<usize>,
    pub min_p: Option<f64>,
    pub feasible_lags: usize,
}

impl GrangerSummary {
    pub fn from_results(results: &[GrangerResult]) -> Self {
        let best = best_lag(results);
        GrangerSummary {
            best_lag: best.map(|r| r.lag_order),
            min_p: best.map(|r| r.p_value),
            feasible_lags: results.iter().filter(|r| r.feasible).count(),
        }
    }

    pub fn none() -> Self {
        GrangerSummary {
            best_lag: None,
            min_p: None,
            feasible_lags: 0,
        }
    }

    /// Significant at `alpha`; subjects without a feasible order are not.
    pub fn significant(&self, alpha: f64) -> bool {
        self.min_p.is_some_and(|p| p < alpha)
    }
}
