use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigen, top_eigen};

/// Two-axis principal-component projection.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub mean: Vec<f64>,
    pub axes: [Vec<f64>; 2],
    pub explained_variance: [f64; 2],
    pub total_variance: f64,
}

impl Projection {
    pub fn project(&self, v: &[f64]) -> (f64, f64) {
        let dot = |axis: &[f64]| -> f64 {
            v.iter()
                .zip(&self.mean)
                .zip(axis)
                .map(|((x, m), a)| (x - m) * a)
                .sum()
        };
        (dot(&self.axes[0]), dot(&self.axes[1]))
    }

    pub fn project_f32(&self, v: &[f32]) -> (f64, f64) {
        let dot = |axis: &[f64]| -> f64 {
            v.iter()
                .zip(&self.mean)
                .zip(axis)
                .map(|((&x, m), a)| (f64::from(x) - m) * a)
                .sum()
        };
        (dot(&self.axes[0]), dot(&self.axes[1]))
    }

    /// Share of total variance captured by the two axes.
    pub fn explained_ratio(&self) -> f64 {
        (self.explained_variance[0] + self.explained_variance[1]) / self.total_variance
    }
}

/// Flips `axis` so that its largest-magnitude coordinate (first on ties) is
/// positive.
pub fn orient(axis: &mut [f64]) {
    let mut pivot = 0;
    for (i, v) in axis.iter().enumerate() {
        if v.abs() > axis[pivot].abs() {
            pivot = i;
        }
    }
    if axis[pivot] < 0.0 {
        axis.iter_mut().for_each(|v| *v = -*v);
    }
}

/// Fits the top two principal axes of `rows` (each of dimension D >= 2,
/// at least three rows).
pub fn fit_projection<R: AsRef<[f64]>>(rows: &[R]) -> Result<Projection> {
    let n = rows.len();
    if n < 3 {
        return Err(Error::Degenerate(format!("projection needs at least 3 vectors, got {n}")));
    }
    let d = rows[0].as_ref().len();
    if d < 2 {
        return Err(Error::Degenerate(format!("projection needs dimension >= 2, got {d}")));
    }
    if let Some(bad) = rows.iter().position(|r| r.as_ref().len() != d) {
        return Err(Error::ShapeMismatch(format!(
            "row {bad} has {} entries, expected {d}",
            rows[bad].as_ref().len()
        )));
    }

    let mut mean = vec![0.0; d];
    for r in rows {
        for (m, x) in mean.iter_mut().zip(r.as_ref()) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let centered: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.as_ref().iter().zip(&mean).map(|(x, m)| x - m).collect())
        .collect();
    let total_variance: f64 =
        centered.iter().flatten().map(|x| x * x).sum::<f64>() / (n - 1) as f64;
    let scale: f64 = rows
        .iter()
        .flat_map(|r| r.as_ref().iter())
        .fold(0.0f64, |a, x| a.max(x.abs()));
    if total_variance <= (1e-13 * scale.max(1.0)).powi(2) {
        return Err(Error::Degenerate("all vectors are identical".into()));
    }

    let (values, mut axes) = if n < d {
        // Gram route: eigenvectors of X X^T map to those of X^T X
        let mut gram = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let g: f64 = centered[i].iter().zip(&centered[j]).map(|(a, b)| a * b).sum();
                gram[i * n + j] = g / (n - 1) as f64;
                gram[j * n + i] = g / (n - 1) as f64;
            }
        }
        let (vals, cols) = top_eigen(&gram, n, 2);
        let axes: Vec<Vec<f64>> = cols
            .iter()
            .map(|u| {
                let mut v = vec![0.0; d];
                for (ui, row) in u.iter().zip(&centered) {
                    for (vj, x) in v.iter_mut().zip(row) {
                        *vj += ui * x;
                    }
                }
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 0.0 {
                    v.iter_mut().for_each(|x| *x /= norm);
                }
                v
            })
            .collect();
        (vals, axes)
    } else {
        let mut cov = vec![0.0; d * d];
        for row in &centered {
            for i in 0..d {
                let xi = row[i];
                if xi == 0.0 {
                    continue;
                }
                for j in i..d {
                    cov[i * d + j] += xi * row[j];
                }
            }
        }
        for i in 0..d {
            for j in i..d {
                let v = cov[i * d + j] / (n - 1) as f64;
                cov[i * d + j] = v;
                cov[j * d + i] = v;
            }
        }
        top_eigen(&cov, d, 2)
    };

    // second axis may be numerically zero for rank-1 data; complete the basis
    if axes[1].iter().all(|x| *x == 0.0) {
        let (_, full) = jacobi_eigen(&identity_minus(&axes[0]), d);
        axes[1] = (0..d).map(|r| full[r * d]).collect();
    }
    for axis in axes.iter_mut() {
        orient(axis);
    }
    let mut it = axes.into_iter();
    Ok(Projection {
        mean,
        axes: [it.next().unwrap(), it.next().unwrap()],
        explained_variance: [values[0].max(0.0), values[1].max(0.0)],
        total_variance,
    })
}

fn identity_minus(u: &[f64]) -> Vec<f64> {
    let d = u.len();
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            m[i * d + j] = f64::from(u8::from(i == j)) - u[i] * u[j];
        }
    }
    m
}

#[derive(Debug, Serialize, Deserialize)]
struct CoordRow {
    id: String,
    #[serde(deserialize_with = "lenient_f64")]
    x: f64,
    #[serde(deserialize_with = "lenient_f64")]
    y: f64,
}

/// Accepts a JSON number or a string such as `"NaN"`.
fn lenient_f64<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Num {
        N(f64),
        S(String),
    }
    match Num::deserialize(de)? {
        Num::N(v) => Ok(v),
        Num::S(s) => s.trim().parse::<f64>().map_err(serde::de::Error::custom),
    }
}

/// Quotes bare `NaN` / `Infinity` tokens, as written by some JSON encoders.
fn quote_specials(line: &str) -> String {
    let mut out = line.to_string();
    for token in ["-Infinity", "Infinity", "NaN"] {
        let mut result = String::with_capacity(out.len());
        let mut rest = out.as_str();
        while let Some(pos) = rest.find(token) {
            let before = rest[..pos].chars().last();
            let quoted = before == Some('"') || (token == "Infinity" && before == Some('-'));
            result.push_str(&rest[..pos]);
            if quoted {
                result.push_str(token);
            } else {
                result.push('"');
                result.push_str(token);
                result.push('"');
            }
            rest = &rest[pos + token.len()..];
        }
        result.push_str(rest);
        out = result;
    }
    out
}

/// Reads externally computed 2-D coordinates, one `{"id","x","y"}` record
/// per line.
pub fn import_projection(path: impl AsRef<Path>) -> Result<BTreeMap<String, (f64, f64)>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut table = BTreeMap::new();
    for (ix, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let row: CoordRow = serde_json::from_str(&line)
            .or_else(|_| serde_json::from_str(&quote_specials(&line)))
            .map_err(|e| Error::Parse {
                path: path.to_owned(),
                line: ix + 1,
                message: e.to_string(),
            })?;
        if !row.x.is_finite() || !row.y.is_finite() {
            return Err(Error::NonFinite(row.id));
        }
        if table.insert(row.id.clone(), (row.x, row.y)).is_some() {
            return Err(Error::DuplicateId(row.id));
        }
    }
    Ok(table)
}

pub fn export_projection<W: Write>(coords: &BTreeMap<String, (f64, f64)>, mut out: W) -> std::io::Result<()> {
    for (id, &(x, y)) in coords {
        serde_json::to_writer(&mut out, &CoordRow { id: id.clone(), x, y })?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
