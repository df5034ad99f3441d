use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Bounds {
    /// Tight bounds of a point set. Returns `None` for an empty set.
    pub fn of_points(points: impl IntoIterator<Item = (f64, f64)>) -> Option<Bounds> {
        let mut it = points.into_iter();
        let (x0, y0) = it.next()?;
        let mut b = Bounds {
            xmin: x0,
            xmax: x0,
            ymin: y0,
            ymax: y0,
        };
        for (x, y) in it {
            b.xmin = b.xmin.min(x);
            b.xmax = b.xmax.max(x);
            b.ymin = b.ymin.min(y);
            b.ymax = b.ymax.max(y);
        }
        Some(b)
    }

    /// Widens any zero-width axis to `±0.5` around its value.
    pub fn padded(mut self) -> Bounds {
        if self.xmax <= self.xmin {
            self.xmin -= 0.5;
            self.xmax += 0.5;
        }
        if self.ymax <= self.ymin {
            self.ymin -= 0.5;
            self.ymax += 0.5;
        }
        self
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.xmax > self.xmin && self.ymax > self.ymin)
            || ![self.xmin, self.xmax, self.ymin, self.ymax].iter().all(|v| v.is_finite())
    }
}

/// `b1 x b2` grid, row-major with the x bin as the row.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub b1: usize,
    pub b2: usize,
    pub cells: Vec<f64>,
    pub bounds: Bounds,
    pub normalized: bool,
}

impl DensityGrid {
    pub fn zeros(b1: usize, b2: usize, bounds: Bounds) -> Self {
        DensityGrid {
            b1,
            b2,
            cells: vec![0.0; b1 * b2],
            bounds,
            normalized: false,
        }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.cells[i * self.b2 + j]
    }

    pub fn total(&self) -> f64 {
        self.cells.iter().sum()
    }
}

fn bin_index(v: f64, lo: f64, hi: f64, bins: usize) -> Option<usize> {
    if !(lo..=hi).contains(&v) {
        return None;
    }
    let ix = ((v - lo) / (hi - lo) * bins as f64).floor() as usize;
    Some(ix.min(bins - 1))
}

/// Bin of a point: right-open intervals, with the maximum coordinate
/// landing in the last bin.
pub fn bin_of(point: (f64, f64), bounds: &Bounds, b1: usize, b2: usize) -> Option<(usize, usize)> {
    let i = bin_index(point.0, bounds.xmin, bounds.xmax, b1)?;
    let j = bin_index(point.1, bounds.ymin, bounds.ymax, b2)?;
    Some((i, j))
}

/// Sums the weights of the points falling in each bin.
pub fn grid_density(
    points: &[(f64, f64)],
    weights: &[f64],
    bounds: Bounds,
    b1: usize,
    b2: usize,
) -> Result<DensityGrid> {
    if points.len() != weights.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} points but {} weights",
            points.len(),
            weights.len()
        )));
    }
    if b1 == 0 || b2 == 0 {
        return Err(Error::Config("grid needs at least one bin per axis".into()));
    }
    if bounds.is_degenerate() {
        return Err(Error::Degenerate(format!("grid bounds {bounds:?}")));
    }
    let mut grid = DensityGrid::zeros(b1, b2, bounds);
    for (&p, &w) in points.iter().zip(weights) {
        let (i, j) = bin_of(p, &bounds, b1, b2).ok_or(Error::OutOfBounds { x: p.0, y: p.1 })?;
        grid.cells[i * b2 + j] += w;
    }
    Ok(grid)
}

/// Sampled Gaussian weights for offsets `-r..=r`, `r = ceil(4 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let r = (4.0 * sigma).ceil() as i64;
    (-r..=r)
        .map(|k| (-(k * k) as f64 / (2.0 * sigma * sigma)).exp())
        .collect()
}

fn blur_axis(src: &[f64], dst: &mut [f64], len: usize, stride: usize, lines: usize, line_stride: usize, kernel: &[f64]) {
    let r = (kernel.len() / 2) as i64;
    for line in 0..lines {
        let base = line * line_stride;
        for i in 0..len as i64 {
            let mut acc = 0.0;
            let mut wsum = 0.0;
            for k in -r..=r {
                let j = i + k;
                if j < 0 || j >= len as i64 {
                    continue;
                }
                let w = kernel[(k + r) as usize];
                acc += w * src[base + j as usize * stride];
                wsum += w;
            }
            dst[base + i as usize * stride] = acc / wsum;
        }
    }
}

/// Gaussian smoothing with `sigma = bandwidth` bins, followed by
/// normalization to unit mass.
///
/// The kernel is truncated at `ceil(4 sigma)` and renormalized over the
/// cells it actually covers, so border cells are averaged only over
/// in-grid neighbours. An all-zero grid becomes the uniform distribution.
pub fn smooth_and_normalize(grid: &DensityGrid, bandwidth: f64) -> Result<DensityGrid> {
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::Config(format!("bandwidth {bandwidth} must be positive")));
    }
    let (b1, b2) = (grid.b1, grid.b2);
    let kernel = gaussian_kernel(bandwidth);
    // separable: along y (contiguous), then along x
    let mut tmp = vec![0.0; b1 * b2];
    blur_axis(&grid.cells, &mut tmp, b2, 1, b1, b2, &kernel);
    let mut out = vec![0.0; b1 * b2];
    blur_axis(&tmp, &mut out, b1, b2, b2, 1, &kernel);

    let total: f64 = out.iter().sum();
    if total > 0.0 && total.is_finite() {
        out.iter_mut().for_each(|v| *v /= total);
    } else {
        let u = 1.0 / (b1 * b2) as f64;
        out.iter_mut().for_each(|v| *v = u);
    }
    Ok(DensityGrid {
        b1,
        b2,
        cells: out,
        bounds: grid.bounds,
        normalized: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Bounds {
        Bounds {
            xmin: 0.0,
            xmax: 1.0,
            ymin: 0.0,
            ymax: 1.0,
        }
    }

    #[test]
    fn two_points_one_bin() {
        let g = grid_density(&[(0.01, 0.01), (0.02, 0.03)], &[4.0, 2.0], unit(), 20, 20).unwrap();
        assert_eq!(g.at(0, 0), 6.0);
        assert_eq!(g.total(), 6.0);
    }

    #[test]
    fn max_corner_closes_last_bin() {
        let g = grid_density(&[(1.0, 1.0)], &[1.0], unit(), 20, 20).unwrap();
        assert_eq!(g.at(19, 19), 1.0);
    }

    #[test]
    fn outside_point_errors() {
        assert!(matches!(
            grid_density(&[(1.5, 0.0)], &[1.0], unit(), 20, 20),
            Err(Error::OutOfBounds { .. })
        ));
        let flat = Bounds { xmax: 0.0, ..unit() };
        assert!(grid_density(&[(0.0, 0.0)], &[1.0], flat, 20, 20).is_err());
    }

    #[test]
    fn kernel_radius() {
        assert_eq!(gaussian_kernel(0.8).len(), 9);
        assert_eq!(gaussian_kernel(1.0).len(), 9);
        assert_eq!(gaussian_kernel(1.1).len(), 11);
    }

    #[test]
    fn interior_peak() {
        let mut g = DensityGrid::zeros(20, 20, unit());
        g.cells[7 * 20 + 11] = 1.0;
        let s = smooth_and_normalize(&g, 0.8).unwrap();
        assert!((s.total() - 1.0).abs() < 1e-12);
        let argmax = (0..400).max_by(|&a, &b| s.cells[a].total_cmp(&s.cells[b])).unwrap();
        assert_eq!(argmax, 7 * 20 + 11);
    }

    #[test]
    fn uniform_is_fixed_point() {
        let mut g = DensityGrid::zeros(20, 20, unit());
        g.cells.iter_mut().for_each(|v| *v = 3.0);
        let s = smooth_and_normalize(&g, 0.8).unwrap();
        for v in &s.cells {
            assert!((v - 1.0 / 400.0).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_grid_maps_to_uniform() {
        let g = DensityGrid::zeros(4, 5, unit());
        let s = smooth_and_normalize(&g, 0.8).unwrap();
        assert!(s.cells.iter().all(|&v| v == 1.0 / 20.0));
        assert!(smooth_and_normalize(&g, 0.0).is_err());
    }
}
