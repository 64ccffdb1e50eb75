//! One-sided Jacobi SVD on columns. Chosen as the measurement oracle for
//! condition numbers because it preserves small singular values where a
//! Gram-eigenvalue approach would square the condition number and destroy
//! them.

use crate::error::{Error, Result};
use crate::mat::{dot, DenseMatrix};

/// Off-diagonal Gram cosine below which a column pair counts as orthogonal.
const ORTH_TOL: f64 = 1e-14;
const MAX_SWEEPS: usize = 30;

#[derive(Debug, Clone)]
pub struct SvdResult {
    /// Singular values in descending order, all nonnegative.
    pub singular_values: Vec<f64>,
    /// Left singular vectors (m-by-n), when requested.
    pub left: Option<DenseMatrix>,
    /// Right singular vectors (n-by-n), when requested.
    pub right: Option<DenseMatrix>,
    /// False when the sweep cap was reached before all column pairs met the
    /// orthogonality tolerance; the values are then best-so-far.
    pub converged: bool,
    pub sweeps: usize,
}

/// Singular values only.
pub fn jacobi_svd(x: &DenseMatrix) -> SvdResult {
    jacobi_impl(x, false)
}

/// Singular values plus both factors.
pub fn jacobi_svd_with_vectors(x: &DenseMatrix) -> SvdResult {
    jacobi_impl(x, true)
}

fn jacobi_impl(x: &DenseMatrix, with_vectors: bool) -> SvdResult {
    let (m, n) = (x.rows(), x.cols());
    assert!(m >= n, "jacobi_svd needs m >= n");
    assert!(n <= 2048, "jacobi_svd is limited to n <= 2048");

    let mut w = x.data().to_vec();
    let mut v = if with_vectors {
        let mut v = vec![0.0; n * n];
        for j in 0..n {
            v[j * n + j] = 1.0;
        }
        Some(v)
    } else {
        None
    };

    let mut converged = false;
    let mut sweeps = 0;
    // cyclic by columns, sequential by construction
    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut off_max = 0.0f64;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let (app, aqq, apq) = {
                    let wp = &w[p * m..(p + 1) * m];
                    let wq = &w[q * m..(q + 1) * m];
                    (dot(wp, wp), dot(wq, wq), dot(wp, wq))
                };
                let denom = (app * aqq).sqrt();
                if denom == 0.0 {
                    continue;
                }
                let cosine = apq.abs() / denom;
                if cosine > off_max {
                    off_max = cosine;
                }
                if cosine <= ORTH_TOL {
                    continue;
                }
                let zeta = (aqq - app) / (2.0 * apq);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut w, m, p, q, c, s);
                if let Some(vm) = v.as_mut() {
                    rotate_pair(vm, n, p, q, c, s);
                }
            }
        }
        if off_max <= ORTH_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("jacobi_svd did not converge within {MAX_SWEEPS} sweeps; returning best-so-far");
    }

    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n).map(|j| safe_norm(&w[j * m..(j + 1) * m])).collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap());
    let singular_values: Vec<f64> = order.iter().map(|&j| norms[j]).collect();

    let (left, right) = if with_vectors {
        let mut u = vec![0.0; m * n];
        for (dst, &src) in order.iter().enumerate() {
            let sv = norms[src];
            if sv > 0.0 {
                for i in 0..m {
                    u[dst * m + i] = w[src * m + i] / sv;
                }
            }
        }
        let vm = v.unwrap();
        let mut vp = vec![0.0; n * n];
        for (dst, &src) in order.iter().enumerate() {
            vp[dst * n..(dst + 1) * n].copy_from_slice(&vm[src * n..(src + 1) * n]);
        }
        (
            Some(DenseMatrix::from_raw(m, n, u)),
            Some(DenseMatrix::from_raw(n, n, vp)),
        )
    } else {
        (None, None)
    };

    SvdResult {
        singular_values,
        left,
        right,
        converged,
        sweeps,
    }
}

fn rotate_pair(data: &mut [f64], len: usize, p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = if p < q { (p, q) } else { (q, p) };
    let (head, tail) = data.split_at_mut(hi * len);
    let cp = &mut head[lo * len..(lo + 1) * len];
    let cq = &mut tail[..len];
    for (a, b) in cp.iter_mut().zip(cq.iter_mut()) {
        let wp = *a;
        let wq = *b;
        *a = c * wp - s * wq;
        *b = s * wp + c * wq;
    }
}

fn safe_norm(v: &[f64]) -> f64 {
    let mut maxabs = 0.0f64;
    for &x in v {
        let a = x.abs();
        if a > maxabs {
            maxabs = a;
        }
    }
    if maxabs == 0.0 {
        return 0.0;
    }
    let mut sum = 0.0;
    for &x in v {
        let r = x / maxabs;
        sum += r * r;
    }
    maxabs * sum.sqrt()
}

/// kappa_2 = sigma_1 / sigma_n from the Jacobi SVD.
pub fn condition_number(x: &DenseMatrix) -> Result<f64> {
    let svd = jacobi_svd(x);
    let smax = svd.singular_values[0];
    let smin = *svd.singular_values.last().unwrap();
    if smin == 0.0 {
        return Err(Error::SingularMatrix);
    }
    Ok(smax / smin)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_embedded() {
        let x = DenseMatrix::from_rows(&[
            &[3.0, 0.0],
            &[0.0, 1.0],
            &[0.0, 0.0],
            &[0.0, 0.0],
        ])
        .unwrap();
        let svd = jacobi_svd(&x);
        assert_eq!(svd.singular_values, vec![3.0, 1.0]);
        assert!(svd.converged);
    }

    #[test]
    fn identity_all_ones() {
        let svd = jacobi_svd(&DenseMatrix::identity(6));
        assert_eq!(svd.singular_values, vec![1.0; 6]);
    }

    #[test]
    fn orthogonal_columns_give_column_norms() {
        let x = DenseMatrix::from_rows(&[&[3.0, 0.0], &[4.0, 0.0], &[0.0, 2.0]]).unwrap();
        let svd = jacobi_svd(&x);
        assert_eq!(svd.singular_values, vec![5.0, 2.0]);
    }

    #[test]
    fn vectors_reconstruct() {
        let x = DenseMatrix::from_fn(7, 3, |i, j| ((i * 3 + j * 5) as f64 * 0.33).sin()).unwrap();
        let svd = jacobi_svd_with_vectors(&x);
        let u = svd.left.unwrap();
        let v = svd.right.unwrap();
        // X ~= U diag(s) V^T
        let mut us = u.clone();
        let mut data: Vec<f64> = us.data().to_vec();
        for j in 0..3 {
            for i in 0..7 {
                data[j * 7 + i] *= svd.singular_values[j];
            }
        }
        us = DenseMatrix::from_col_major(7, 3, data).unwrap();
        let xr = us.matmul(&v.transpose()).unwrap();
        for k in 0..21 {
            assert!((xr.data()[k] - x.data()[k]).abs() <= 1e-13);
        }
    }

    #[test]
    fn condition_number_examples() {
        assert_eq!(condition_number(&DenseMatrix::identity(4)).unwrap(), 1.0);
        let x = DenseMatrix::from_rows(&[&[1.0, 0.0], &[0.0, 1e-6], &[0.0, 0.0]]).unwrap();
        let kappa = condition_number(&x).unwrap();
        assert!((kappa - 1e6).abs() <= 1e-9 * 1e6);
    }

    #[test]
    fn singular_matrix_detected() {
        let x = DenseMatrix::from_rows(&[&[1.0, 1.0], &[1.0, 1.0]]).unwrap();
        assert!(matches!(condition_number(&x), Err(Error::SingularMatrix)));
    }
}
