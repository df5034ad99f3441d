use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Tvd,
    Hellinger,
}

impl Metric {
    pub const ALL: [Metric; 2] = [Metric::Tvd, Metric::Hellinger];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Tvd => "tvd",
            Metric::Hellinger => "hellinger",
        }
    }

    pub fn distance(self, p: &[f64], q: &[f64]) -> Result<f64> {
        match self {
            Metric::Tvd => tvd(p, q),
            Metric::Hellinger => hellinger(p, q),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn same_shape(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::ShapeMismatch(format!("{} vs {} cells", p.len(), q.len())));
    }
    Ok(())
}

/// Total variation distance `1/2 sum |p - q|`.
pub fn tvd(p: &[f64], q: &[f64]) -> Result<f64> {
    same_shape(p, q)?;
    let d = 0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>();
    Ok(d.clamp(0.0, 1.0))
}

/// Hellinger distance of two unit-mass distributions.
///
/// Evaluated as `sqrt(1/2 sum (sqrt p - sqrt q)^2)`, which equals
/// `sqrt(1 - sum sqrt(p q))` for normalized inputs but stays exactly zero
/// for identical inputs instead of picking up `sqrt(eps)`.
pub fn hellinger(p: &[f64], q: &[f64]) -> Result<f64> {
    same_shape(p, q)?;
    let s: f64 = p
        .iter()
        .zip(q)
        .map(|(a, b)| {
            let d = a.max(0.0).sqrt() - b.max(0.0).sqrt();
            d * d
        })
        .sum();
    Ok((0.5 * s).sqrt().clamp(0.0, 1.0))
}
