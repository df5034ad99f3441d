use serde::Serialize;
use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};
use crate::linalg::least_squares;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrangerResult {
    pub lag_order: usize,
    pub statistic: f64,
    pub p_value: f64,
    pub feasible: bool,
}

impl GrangerResult {
    fn infeasible(lag_order: usize) -> Self {
        GrangerResult {
            lag_order,
            statistic: f64::NAN,
            p_value: f64::NAN,
            feasible: false,
        }
    }
}

/// Upper tail of the chi-squared distribution, `Q(df/2, x/2)`.
pub fn chi2_sf(x: f64, df: usize) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    gamma_ur(df as f64 / 2.0, x / 2.0).clamp(0.0, 1.0)
}

/// Largest lag order `p` with `T - p >= 2p + 2`.
pub fn max_feasible_lag(len: usize) -> usize {
    (1..len).take_while(|&p| len - p >= 2 * p + 2).last().unwrap_or(0)
}

fn design(cause: Option<&[f64]>, effect: &[f64], p: usize) -> (Vec<f64>, usize) {
    let n = effect.len() - p;
    let k = 1 + p + if cause.is_some() { p } else { 0 };
    let mut x = Vec::with_capacity(n * k);
    for t in p..effect.len() {
        x.push(1.0);
        x.extend((1..=p).map(|l| effect[t - l]));
        if let Some(c) = cause {
            x.extend((1..=p).map(|l| c[t - l]));
        }
    }
    (x, k)
}

/// Chi-squared Granger test of whether lags of `cause` help predict
/// `effect`, for each order `1..=max_lag`.
///
/// Restricted model: `effect(t) ~ 1 + effect(t-1..t-p)`; unrestricted adds
/// `cause(t-1..t-p)`. Statistic `(T - p)(RSS_r - RSS_u) / RSS_u`, referred
/// to chi-squared with `p` degrees of freedom. Orders beyond
/// [`max_feasible_lag`], rank-deficient designs, and exact fits come back
/// with `feasible = false`.
pub fn granger(cause: &[f64], effect: &[f64], max_lag: usize) -> Result<Vec<GrangerResult>> {
    if cause.len() != effect.len() {
        return Err(Error::ShapeMismatch(format!(
            "series lengths {} and {}",
            cause.len(),
            effect.len()
        )));
    }
    let len = effect.len();
    if len < 4 {
        return Err(Error::SeriesTooShort(format!("Granger test needs T >= 4, got {len}")));
    }
    let cap = max_feasible_lag(len);
    Ok((1..=max_lag)
        .map(|p| {
            if p > cap {
                return GrangerResult::infeasible(p);
            }
            let n = len - p;
            let y = &effect[p..];
            let (xr, kr) = design(None, effect, p);
            let (xu, ku) = design(Some(cause), effect, p);
            let (Some(r), Some(u)) = (
                least_squares(&xr, n, kr, y),
                least_squares(&xu, n, ku, y),
            ) else {
                return GrangerResult::infeasible(p);
            };
            let tss: f64 = {
                let mean = y.iter().sum::<f64>() / n as f64;
                y.iter().map(|v| (v - mean).powi(2)).sum()
            };
            if u.rss <= 1e-12 * tss {
                return GrangerResult::infeasible(p);
            }
            let statistic = (n as f64 * (r.rss - u.rss) / u.rss).max(0.0);
            GrangerResult {
                lag_order: p,
                statistic,
                p_value: chi2_sf(statistic, p),
                feasible: true,
            }
        })
        .collect())
}

/// Best (minimum p-value) feasible order, if any.
pub fn best_lag(results: &[GrangerResult]) -> Option<&GrangerResult> {
    results
        .iter()
        .filter(|r| r.feasible)
        .min_by(|a, b| a.p_value.total_cmp(&b.p_value).then(a.lag_order.cmp(&b.lag_order)))
}
