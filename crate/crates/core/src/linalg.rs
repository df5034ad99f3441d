//! Small dense kernels: least squares by Householder QR and symmetric
//! eigendecomposition. Matrices are row-major `Vec<f64>`.

/// Result of an ordinary least-squares fit.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub coefficients: Vec<f64>,
    pub rss: f64,
}

/// Solves `min ||X b - y||` for an `n x k` design `x`. Returns `None` when
/// the design is rank deficient (a column is, to working precision, a
/// combination of the others) or `n < k`.
pub fn least_squares(x: &[f64], n: usize, k: usize, y: &[f64]) -> Option<LeastSquares> {
    assert_eq!(x.len(), n * k);
    assert_eq!(y.len(), n);
    if n < k || k == 0 {
        return None;
    }
    let mut a = x.to_vec();
    let mut b = y.to_vec();
    let col_norm = |a: &[f64], j: usize, from: usize| -> f64 {
        (from..n).map(|i| a[i * k + j] * a[i * k + j]).sum::<f64>().sqrt()
    };
    let scale: Vec<f64> = (0..k).map(|j| col_norm(&a, j, 0)).collect();
    let mut diag = vec![0.0; k];

    for j in 0..k {
        let norm = col_norm(&a, j, j);
        // relative rank test against the column's original size
        if scale[j] == 0.0 || norm <= 1e-10 * scale[j] {
            return None;
        }
        let alpha = if a[j * k + j] > 0.0 { -norm } else { norm };
        // v = a[j..,j] - alpha e1, stored in place
        a[j * k + j] -= alpha;
        let vnorm2: f64 = (j..n).map(|i| a[i * k + j] * a[i * k + j]).sum();
        diag[j] = alpha;
        if vnorm2 == 0.0 {
            continue;
        }
        for c in j + 1..k {
            let dot: f64 = (j..n).map(|i| a[i * k + j] * a[i * k + c]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in j..n {
                a[i * k + c] -= f * a[i * k + j];
            }
        }
        let dot: f64 = (j..n).map(|i| a[i * k + j] * b[i]).sum();
        let f = 2.0 * dot / vnorm2;
        for i in j..n {
            b[i] -= f * a[i * k + j];
        }
    }

    let mut coef = vec![0.0; k];
    for j in (0..k).rev() {
        let mut s = b[j];
        for c in j + 1..k {
            s -= a[j * k + c] * coef[c];
        }
        coef[j] = s / diag[j];
    }
    let rss = b[k..].iter().map(|v| v * v).sum();
    Some(LeastSquares {
        coefficients: coef,
        rss,
    })
}

/// Eigen-decomposition of a symmetric `n x n` matrix by cyclic Jacobi
/// rotations. Returns eigenvalues in descending order with eigenvectors as
/// the matching columns of a row-major `n x n` matrix.
pub fn jacobi_eigen(matrix: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(matrix.len(), n * n);
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let frob: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * frob.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..n {
                    let arp = a[r * n + p];
                    let arq = a[r * n + q];
                    a[r * n + p] = c * arp - s * arq;
                    a[r * n + q] = s * arp + c * arq;
                }
                for r in 0..n {
                    let apr = a[p * n + r];
                    let aqr = a[q * n + r];
                    a[p * n + r] = c * apr - s * aqr;
                    a[q * n + r] = s * apr + c * aqr;
                }
                for r in 0..n {
                    let vrp = v[r * n + p];
                    let vrq = v[r * n + q];
                    v[r * n + p] = c * vrp - s * vrq;
                    v[r * n + q] = s * vrp + c * vrq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (dst, &src) in order.iter().enumerate() {
        for r in 0..n {
            vectors[r * n + dst] = v[r * n + src];
        }
    }
    (values, vectors)
}

fn orthonormalize(cols: &mut [Vec<f64>]) {
    for i in 0..cols.len() {
        for _ in 0..2 {
            for j in 0..i {
                let dot: f64 = cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum();
                let (head, tail) = cols.split_at_mut(i);
                for (x, y) in tail[0].iter_mut().zip(&head[j]) {
                    *x -= dot * y;
                }
            }
        }
        let norm = cols[i].iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            cols[i].iter_mut().for_each(|x| *x /= norm);
        }
    }
}

/// Leading `k` eigenpairs of a symmetric positive semi-definite `n x n`
/// matrix by block subspace iteration with Rayleigh-Ritz extraction.
pub fn top_eigen(matrix: &[f64], n: usize, k: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    assert_eq!(matrix.len(), n * n);
    let k = k.min(n);
    if n <= 96 {
        let (vals, vecs) = jacobi_eigen(matrix, n);
        let cols = (0..k)
            .map(|c| (0..n).map(|r| vecs[r * n + c]).collect())
            .collect();
        return (vals[..k].to_vec(), cols);
    }

    let block = (k + 8).min(n);
    // deterministic start: a fixed pseudo-random basis
    let mut state = 0x9E37_79B9_7F4A_7C15u64;
    let mut basis: Vec<Vec<f64>> = (0..block)
        .map(|_| {
            (0..n)
                .map(|_| {
                    state ^= state << 13;
                    state ^= state >> 7;
                    state ^= state << 17;
                    (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
                })
                .collect()
        })
        .collect();
    orthonormalize(&mut basis);

    let apply = |v: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|r| matrix[r * n..(r + 1) * n].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    };

    let mut prev = vec![f64::INFINITY; k];
    let mut ritz_vals = vec![0.0; k];
    let mut ritz_vecs: Vec<Vec<f64>> = Vec::new();
    for iter in 0..2000 {
        let mut next: Vec<Vec<f64>> = basis.iter().map(|v| apply(v)).collect();
        orthonormalize(&mut next);
        basis = next;
        if iter % 5 != 4 {
            continue;
        }
        let images: Vec<Vec<f64>> = basis.iter().map(|v| apply(v)).collect();
        let mut small = vec![0.0; block * block];
        for i in 0..block {
            for j in 0..block {
                small[i * block + j] = basis[i].iter().zip(&images[j]).map(|(a, b)| a * b).sum();
            }
        }
        for i in 0..block {
            for j in i + 1..block {
                let m = 0.5 * (small[i * block + j] + small[j * block + i]);
                small[i * block + j] = m;
                small[j * block + i] = m;
            }
        }
        let (vals, vecs) = jacobi_eigen(&small, block);
        ritz_vecs = (0..block)
            .map(|c| {
                let mut out = vec![0.0; n];
                for (i, b) in basis.iter().enumerate() {
                    let w = vecs[i * block + c];
                    for (o, x) in out.iter_mut().zip(b) {
                        *o += w * x;
                    }
                }
                out
            })
            .collect();
        ritz_vals.copy_from_slice(&vals[..k]);
        basis = ritz_vecs.clone();
        let scale = vals[0].abs().max(f64::MIN_POSITIVE);
        let converged = ritz_vals
            .iter()
            .zip(&prev)
            .all(|(a, b)| (a - b).abs() <= 1e-15 * scale);
        let residual_ok = (0..k).all(|c| {
            let av = apply(&ritz_vecs[c]);
            let r: f64 = av
                .iter()
                .zip(&ritz_vecs[c])
                .map(|(a, v)| (a - ritz_vals[c] * v).powi(2))
                .sum::<f64>()
                .sqrt();
            r <= 1e-12 * scale
        });
        if converged && residual_ok {
            break;
        }
        prev.copy_from_slice(&ritz_vals);
    }
    ritz_vecs.truncate(k);
    (ritz_vals, ritz_vecs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_fit() {
        // y = 2 + 3x
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let design: Vec<f64> = xs.iter().flat_map(|&x| [1.0, x]).collect();
        let y: Vec<f64> = xs.iter().map(|x| 2.0 + 3.0 * x).collect();
        let fit = least_squares(&design, 5, 2, &y).unwrap();
        assert!((fit.coefficients[0] - 2.0).abs() < 1e-12);
        assert!((fit.coefficients[1] - 3.0).abs() < 1e-12);
        assert!(fit.rss < 1e-20);
    }

    #[test]
    fn collinear_design_is_rejected() {
        let design = vec![1.0, 2.0, 1.0, 2.0, 1.0, 2.0];
        assert!(least_squares(&design, 3, 2, &[1.0, 2.0, 3.0]).is_none());
        let zero_col = vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0];
        assert!(least_squares(&zero_col, 3, 2, &[1.0, 2.0, 3.0]).is_none());
    }

    #[test]
    fn residual_of_mean_model() {
        let design = vec![1.0; 4];
        let fit = least_squares(&design, 4, 1, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((fit.coefficients[0] - 2.5).abs() < 1e-12);
        assert!((fit.rss - 5.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_diagonalizes() {
        let m = vec![4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0];
        let (vals, vecs) = jacobi_eigen(&m, 3);
        assert!(vals[0] >= vals[1] && vals[1] >= vals[2]);
        for c in 0..3 {
            for r in 0..3 {
                let av: f64 = (0..3).map(|j| m[r * 3 + j] * vecs[j * 3 + c]).sum();
                assert!((av - vals[c] * vecs[r * 3 + c]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn subspace_iteration_matches_jacobi() {
        let n = 120;
        // diagonal-dominant SPD matrix with a known spectrum
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            m[i * n + i] = (n - i) as f64;
            if i + 1 < n {
                m[i * n + i + 1] = 0.25;
                m[(i + 1) * n + i] = 0.25;
            }
        }
        let (fast, fast_vecs) = top_eigen(&m, n, 2);
        let (exact, _) = jacobi_eigen(&m, n);
        assert!((fast[0] - exact[0]).abs() < 1e-9);
        assert!((fast[1] - exact[1]).abs() < 1e-9);
        let norm: f64 = fast_vecs[0].iter().map(|x| x * x).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }
}
