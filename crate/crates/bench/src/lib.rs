//! Shared fixtures for the criterion benchmarks.

use leadlag_core::content::DensityGrid;
use leadlag_core::content::Bounds;

/// Deterministic pseudo-random values in [0, 1) (xorshift64*).
pub fn series(len: usize, seed: u64) -> Vec<f64> {
    let mut s = seed.max(1);
    (0..len)
        .map(|_| {
            s ^= s >> 12;
            s ^= s << 25;
            s ^= s >> 27;
            (s.wrapping_mul(0x2545_F491_4F6C_DD1D) >> 11) as f64 / (1u64 << 53) as f64
        })
        .collect()
}

pub fn grid(b: usize, seed: u64) -> DensityGrid {
    let bounds = Bounds {
        xmin: 0.0,
        xmax: 1.0,
        ymin: 0.0,
        ymax: 1.0,
    };
    let mut g = DensityGrid::zeros(b, b, bounds);
    g.cells = series(b * b, seed);
    g
}

/// `n` rows of dimension `d`.
pub fn rows(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
    series(n * d, seed).chunks(d).map(<[f64]>::to_vec).collect()
}
