use serde::Serialize;

use crate::error::{Error, Result};
use crate::signals::TopicSignal;

/// Zero-padded cross-correlation over lags `-max_lag..=max_lag`.
///
/// `CC(tau) = sum_t sci(t) * ind(t + tau)`: a positive lag pairs science at
/// year t with industry `tau` years later, so mass at positive lags means
/// industry follows science.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossCorrelation {
    pub max_lag: usize,
    values: Vec<f64>,
}

impl CrossCorrelation {
    pub fn at(&self, lag: i32) -> f64 {
        let l = self.max_lag as i32;
        assert!((-l..=l).contains(&lag), "lag {lag} outside ±{l}");
        self.values[(lag + l) as usize]
    }

    pub fn lags(&self) -> impl Iterator<Item = i32> {
        let l = self.max_lag as i32;
        -l..=l
    }

    /// Values ordered from lag `-max_lag` to `+max_lag`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CcaucResult {
    pub ratio: f64,
    pub mcc_lag: i32,
}

/// Cross-correlation of two equal-length series, lags capped at
/// `min(max_lag, len - 1)`.
pub fn cross_correlation(sci: &[f64], ind: &[f64], max_lag: usize) -> Result<CrossCorrelation> {
    if sci.len() != ind.len() {
        return Err(Error::ShapeMismatch(format!(
            "series lengths {} and {}",
            sci.len(),
            ind.len()
        )));
    }
    if sci.len() < 2 {
        return Err(Error::SeriesTooShort(format!("length {}", sci.len())));
    }
    let n = sci.len() as i32;
    let l = max_lag.min(sci.len() - 1) as i32;
    let values = (-l..=l)
        .map(|tau| {
            let lo = 0.max(-tau);
            let hi = n.min(n - tau);
            (lo..hi)
                .map(|t| sci[t as usize] * ind[(t + tau) as usize])
                .sum()
        })
        .collect();
    Ok(CrossCorrelation {
        max_lag: l as usize,
        values,
    })
}

/// Cross-correlation of two signals covering the same years.
pub fn cross_correlate(sci: &TopicSignal, ind: &TopicSignal, max_lag: usize) -> Result<CrossCorrelation> {
    if sci.years != ind.years {
        return Err(Error::RangeMismatch(format!("{} vs {}", sci.years, ind.years)));
    }
    cross_correlation(&sci.values, &ind.values, max_lag)
}

/// CCAUC ratio `(1 + sum_{tau>=0} CC) / (1 + sum_{tau<=0} CC)` and the lag
/// of maximum cross-correlation.
pub fn ccauc(cc: &CrossCorrelation) -> CcaucResult {
    let l = cc.max_lag as i32;
    // both sums run outward from tau = 0 so that a symmetric CC gives
    // bit-identical numerator and denominator
    let forward: f64 = (0..=l).map(|tau| cc.at(tau)).sum();
    let backward: f64 = (0..=l).map(|tau| cc.at(-tau)).sum();
    let ratio = (1.0 + forward) / (1.0 + backward);

    // visit 0, 1, -1, 2, -2, ...; only a strictly larger value displaces
    let mut best_lag = 0;
    let mut best = cc.at(0);
    for k in 1..=l {
        for lag in [k, -k] {
            if cc.at(lag) > best {
                best = cc.at(lag);
                best_lag = lag;
            }
        }
    }
    CcaucResult {
        ratio,
        mcc_lag: best_lag,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn impulse(n: usize, at: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[at] = 1.0;
        v
    }

    #[test]
    fn impulse_pair() {
        let cc = cross_correlation(&impulse(12, 2), &impulse(12, 5), 11).unwrap();
        for lag in cc.lags() {
            assert_eq!(cc.at(lag), if lag == 3 { 1.0 } else { 0.0 });
        }
        let r = ccauc(&cc);
        assert_eq!(r.ratio, 2.0);
        assert_eq!(r.mcc_lag, 3);
    }

    #[test]
    fn identical_signals_ratio_one() {
        let s = [0.0, 0.3, 1.0, 0.7, 0.2, 0.9, 0.1, 0.4, 0.55, 0.8, 0.05, 0.6];
        let cc = cross_correlation(&s, &s, 11).unwrap();
        for lag in 0..=11 {
            assert_eq!(cc.at(lag), cc.at(-lag));
        }
        let r = ccauc(&cc);
        assert_eq!(r.ratio, 1.0);
        assert_eq!(r.mcc_lag, 0);
    }

    #[test]
    fn zero_industry() {
        let s: Vec<f64> = (0..12).map(|i| i as f64 / 11.0).collect();
        let r = ccauc(&cross_correlation(&s, &[0.0; 12], 11).unwrap());
        assert_eq!(r.ratio, 1.0);
        assert_eq!(r.mcc_lag, 0);
    }

    #[test]
    fn tie_break_prefers_positive() {
        // CC(1) == CC(-1), both above CC(0)
        let sci = [0.0, 1.0, 0.0];
        let ind = [1.0, 0.0, 1.0];
        let cc = cross_correlation(&sci, &ind, 2).unwrap();
        assert_eq!(cc.at(1), cc.at(-1));
        assert_eq!(ccauc(&cc).mcc_lag, 1);
    }

    #[test]
    fn lag_cap() {
        let cc = cross_correlation(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], 11).unwrap();
        assert_eq!(cc.max_lag, 2);
        assert_eq!(cc.values().len(), 5);
        let capped = cross_correlation(&[1.0; 12], &[1.0; 12], 4).unwrap();
        assert_eq!(capped.values().len(), 9);
    }

    #[test]
    fn length_errors() {
        assert!(cross_correlation(&[1.0, 2.0], &[1.0], 1).is_err());
        assert!(cross_correlation(&[1.0], &[1.0], 1).is_err());
    }
}
