//! Low-level factorizations: Cholesky with breakdown detection, the
//! row-wise right triangular solve, a HouseholderQR baseline, and a
//! one-sided Jacobi SVD for accurate singular-value measurement.

mod jacobi;

pub use jacobi::{condition_number, jacobi_svd, jacobi_svd_with_vectors, SvdResult};

use rayon::prelude::*;

use crate::algos::QrResult;
use crate::error::{Error, Result};
use crate::mat::{dot, DenseMatrix};

/// Upper-triangular n-by-n factor, column-major with exact structural zeros
/// below the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct UpperTriangular {
    n: usize,
    data: Vec<f64>,
}

impl UpperTriangular {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.n + i]
    }

    pub fn diag(&self, j: usize) -> f64 {
        self.data[j * self.n + j]
    }

    /// Takes the upper triangle of a square dense matrix, dropping anything
    /// below the diagonal.
    pub fn from_dense_upper(x: &DenseMatrix) -> Result<Self> {
        if x.rows() != x.cols() {
            return Err(Error::DimensionMismatch(format!(
                "triangular factor must be square, got {}x{}",
                x.rows(),
                x.cols()
            )));
        }
        let n = x.rows();
        let mut data = vec![0.0; n * n];
        for j in 0..n {
            for i in 0..=j {
                data[j * n + i] = x.get(i, j);
            }
        }
        Ok(Self { n, data })
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_raw(self.n, self.n, self.data.clone())
    }

    /// Triangular-times-triangular product; structural zeros are never
    /// touched, so the result is exactly upper triangular.
    pub fn tri_mul(&self, other: &UpperTriangular) -> Result<UpperTriangular> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!(
                "triangular product needs equal sizes, got {} and {}",
                self.n, other.n
            )));
        }
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for j in 0..n {
            for i in 0..=j {
                let mut s = 0.0;
                for k in i..=j {
                    s += self.data[k * n + i] * other.data[j * n + k];
                }
                out[j * n + i] = s;
            }
        }
        Ok(Self { n, data: out })
    }

    pub(crate) fn from_raw(n: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), n * n);
        Self { n, data }
    }
}

/// Dense-times-upper-triangular product `X * R` using only the stored
/// triangle.
pub fn dense_times_upper(x: &DenseMatrix, r: &UpperTriangular) -> Result<DenseMatrix> {
    if x.cols() != r.n() {
        return Err(Error::DimensionMismatch(format!(
            "cannot multiply {}x{} by triangular {}",
            x.rows(),
            x.cols(),
            r.n()
        )));
    }
    let (m, n) = (x.rows(), x.cols());
    let mut out = vec![0.0; m * n];
    for (j, cj) in out.chunks_mut(m).enumerate() {
        for k in 0..=j {
            let rkj = r.get(k, j);
            for (c, &xv) in cj.iter_mut().zip(x.col(k)) {
                *c = xv.mul_add(rkj, *c);
            }
        }
    }
    Ok(DenseMatrix::from_raw(m, n, out))
}

/// Which Cholesky invocation of a CholeskyQR-family run failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BreakdownStage {
    FirstCholesky,
    SecondCholesky,
    ThirdCholesky,
}

impl BreakdownStage {
    /// 1-based stage number.
    pub fn number(self) -> u8 {
        match self {
            BreakdownStage::FirstCholesky => 1,
            BreakdownStage::SecondCholesky => 2,
            BreakdownStage::ThirdCholesky => 3,
        }
    }
}

impl std::fmt::Display for BreakdownStage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BreakdownStage::FirstCholesky => write!(f, "first Cholesky"),
            BreakdownStage::SecondCholesky => write!(f, "second Cholesky"),
            BreakdownStage::ThirdCholesky => write!(f, "third Cholesky"),
        }
    }
}

/// A nonpositive or non-finite pivot encountered inside `cholesky`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PivotFailure {
    pub pivot_index: usize,
    pub pivot_value: f64,
}

impl PivotFailure {
    pub fn at_stage(self, stage: BreakdownStage) -> BreakdownError {
        BreakdownError {
            stage,
            pivot_index: self.pivot_index,
            pivot_value: self.pivot_value,
        }
    }
}

/// Structured Cholesky failure: the stage, the pivot index and the offending
/// pivot value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BreakdownError {
    pub stage: BreakdownStage,
    pub pivot_index: usize,
    pub pivot_value: f64,
}

impl std::fmt::Display for BreakdownError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} broke down at pivot {} (value {:e})",
            self.stage, self.pivot_index, self.pivot_value
        )
    }
}

impl std::error::Error for BreakdownError {}

/// Cholesky factorization `R^T R = B` of a symmetric matrix, left-looking
/// column order so the failing pivot index is deterministic.
///
/// The pivot test is exact: any pivot `<= 0` or non-finite stops the
/// factorization. No epsilon cushion is applied, since the breakdown
/// behavior itself is the quantity under study.
pub fn cholesky(b: &DenseMatrix) -> std::result::Result<UpperTriangular, PivotFailure> {
    assert_eq!(b.rows(), b.cols(), "cholesky needs a square matrix");
    let n = b.rows();
    let mut r = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..j {
            // R[i,j] = (B[i,j] - sum_{k<i} R[k,i] R[k,j]) / R[i,i]
            let s = dot(&r[i * n..i * n + i], &r[j * n..j * n + i]);
            r[j * n + i] = (b.get(i, j) - s) / r[i * n + i];
        }
        let s = dot(&r[j * n..j * n + j], &r[j * n..j * n + j]);
        let pivot = b.get(j, j) - s;
        if pivot <= 0.0 || !pivot.is_finite() {
            return Err(PivotFailure {
                pivot_index: j,
                pivot_value: pivot,
            });
        }
        r[j * n + j] = pivot.sqrt();
    }
    Ok(UpperTriangular::from_raw(n, r))
}

/// Solves `Q R = X` for Q by row-wise back substitution against the stored
/// triangle; `R^{-1}` is never formed. Rows are independent, so the solve
/// runs in parallel without changing any result bit.
pub fn right_tri_solve(x: &DenseMatrix, r: &UpperTriangular) -> Result<DenseMatrix> {
    let (m, n) = (x.rows(), x.cols());
    if r.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "solve needs a {}-dim triangle, got {}",
            n,
            r.n()
        )));
    }
    for j in 0..n {
        let d = r.diag(j);
        if d == 0.0 || d.abs() < 1e-300 {
            return Err(Error::SingularTriangular { index: j });
        }
    }
    // Column-oriented substitution on independent row bands. Each entry is
    // Q[r,j] = (X[r,j] - sum_{i<j} R[i,j] Q[r,i]) / R[j,j] with a fixed
    // ascending-i order, so the result does not depend on the band split.
    let solve_band = |lo: usize, hi: usize| -> Vec<f64> {
        let rows = hi - lo;
        let mut band = vec![0.0; rows * n];
        for j in 0..n {
            let (done, rest) = band.split_at_mut(j * rows);
            let qj = &mut rest[..rows];
            qj.copy_from_slice(&x.col(j)[lo..hi]);
            for i in 0..j {
                let nrij = -r.get(i, j);
                let qi = &done[i * rows..(i + 1) * rows];
                for (acc, &qv) in qj.iter_mut().zip(qi) {
                    *acc = nrij.mul_add(qv, *acc);
                }
            }
            let d = r.diag(j);
            for acc in qj.iter_mut() {
                *acc /= d;
            }
        }
        band
    };
    let mut q = vec![0.0; m * n];
    if m * n >= 32 * 1024 {
        let threads = rayon::current_num_threads().max(1);
        let block = m.div_ceil(4 * threads).max(64);
        let bands: Vec<(usize, usize)> = (0..m)
            .step_by(block)
            .map(|lo| (lo, (lo + block).min(m)))
            .collect();
        let solved: Vec<(usize, usize, Vec<f64>)> = bands
            .par_iter()
            .map(|&(lo, hi)| (lo, hi, solve_band(lo, hi)))
            .collect();
        for (lo, hi, band) in solved {
            let rows = hi - lo;
            for j in 0..n {
                q[j * m + lo..j * m + hi].copy_from_slice(&band[j * rows..(j + 1) * rows]);
            }
        }
    } else {
        let band = solve_band(0, m);
        q.copy_from_slice(&band);
    }
    Ok(DenseMatrix::from_raw(m, n, q))
}

/// HouseholderQR with explicit thin Q (m-by-n) and the sign convention that
/// the diagonal of R is nonnegative. Rank-deficient columns yield zero rows
/// in R rather than an error.
pub fn householder_qr(x: &DenseMatrix) -> QrResult {
    let (m, n) = (x.rows(), x.cols());
    assert!(m >= n, "householder_qr needs m >= n");
    let mut a = x.data().to_vec();
    let mut tau = vec![0.0; n];

    for k in 0..n {
        let (head, rest) = a.split_at_mut((k + 1) * m);
        let colk = &mut head[k * m + k..];
        let norm = two_norm(colk);
        if norm == 0.0 {
            tau[k] = 0.0;
            continue;
        }
        let x0 = colk[0];
        let sigma = if x0 >= 0.0 { norm } else { -norm };
        let v0 = x0 + sigma;
        for e in colk[1..].iter_mut() {
            *e /= v0;
        }
        colk[0] = -sigma; // R[k,k] before the sign fix
        tau[k] = v0 / sigma;
        let t = tau[k];
        // apply H_k = I - t v v^T (v = [1; stored tail]) to the trailing columns
        let v = &colk[1..];
        for cj in rest.chunks_mut(m) {
            let (cu, cl) = cj.split_at_mut(k + 1);
            let mut w = cu[k];
            for (&vi, &ci) in v.iter().zip(cl.iter()) {
                w += vi * ci;
            }
            let tw = t * w;
            cu[k] -= tw;
            for (&vi, ci) in v.iter().zip(cl.iter_mut()) {
                *ci -= tw * vi;
            }
        }
    }

    // thin Q by backward accumulation
    let mut q = vec![0.0; m * n];
    for j in 0..n {
        q[j * m + j] = 1.0;
    }
    for k in (0..n).rev() {
        if tau[k] == 0.0 {
            continue;
        }
        let t = tau[k];
        let v = &a[k * m + k + 1..(k + 1) * m];
        for cj in q[k * m..].chunks_mut(m) {
            let (cu, cl) = cj.split_at_mut(k + 1);
            let mut w = cu[k];
            for (&vi, &ci) in v.iter().zip(cl.iter()) {
                w += vi * ci;
            }
            let tw = t * w;
            cu[k] -= tw;
            for (&vi, ci) in v.iter().zip(cl.iter_mut()) {
                *ci -= tw * vi;
            }
        }
    }

    // R = upper n-by-n block of the reduced A, diagonal made nonnegative by
    // flipping the sign of R row j together with Q column j.
    let mut r = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..=j {
            r[j * n + i] = a[j * m + i];
        }
    }
    for j in 0..n {
        if r[j * n + j] < 0.0 {
            for jj in j..n {
                r[jj * n + j] = -r[jj * n + j];
            }
            for e in q[j * m..(j + 1) * m].iter_mut() {
                *e = -*e;
            }
        }
    }

    QrResult {
        q: DenseMatrix::from_raw(m, n, q),
        r: UpperTriangular::from_raw(n, r),
        shift_info: None,
        stages_completed: 1,
    }
}

fn two_norm(v: &[f64]) -> f64 {
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::MACHINE_UNIT;

    #[test]
    fn cholesky_hand_check() {
        let b = DenseMatrix::from_rows(&[&[4.0, 2.0], &[2.0, 5.0]]).unwrap();
        let r = cholesky(&b).unwrap();
        assert_eq!(r.get(0, 0), 2.0);
        assert_eq!(r.get(0, 1), 1.0);
        assert_eq!(r.get(1, 1), 2.0);
        assert_eq!(r.get(1, 0), 0.0);
    }

    #[test]
    fn cholesky_identity() {
        let r = cholesky(&DenseMatrix::identity(5)).unwrap();
        assert_eq!(r.to_dense(), DenseMatrix::identity(5));
    }

    #[test]
    fn cholesky_breakdown_reports_pivot() {
        let b = DenseMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]).unwrap();
        let failure = cholesky(&b).unwrap_err();
        assert_eq!(failure.pivot_index, 1);
        assert_eq!(failure.pivot_value, -3.0);
    }

    #[test]
    fn cholesky_reconstruction_bound() {
        // ||R^T R - B||_F <= 2 gamma_{n+1} ||R||_F^2
        let n = 12;
        let x = crate::test_util::lcg_matrix(40, n, 7);
        let b = x.gram();
        let r = cholesky(&b).unwrap();
        let rd = r.to_dense();
        let rr = rd.transpose().matmul(&rd).unwrap();
        let mut diff2 = 0.0;
        for k in 0..n * n {
            let d = rr.data()[k] - b.data()[k];
            diff2 += d * d;
        }
        let nu = (n + 1) as f64 * MACHINE_UNIT;
        let gamma = nu / (1.0 - nu);
        let rf = rd.frobenius_norm();
        assert!(diff2.sqrt() <= 2.0 * gamma * rf * rf);
    }

    #[test]
    fn tri_solve_recovers_identity() {
        let x = crate::test_util::lcg_matrix(6, 6, 3);
        let b = x.gram();
        let r = cholesky(&b).unwrap();
        let q = right_tri_solve(&r.to_dense(), &r).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((q.get(i, j) - e).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn tri_solve_diag_example() {
        let x = DenseMatrix::from_rows(&[&[3.0, 0.0], &[4.0, 0.0], &[0.0, 2.0]]).unwrap();
        let mut r = vec![0.0; 4];
        r[0] = 5.0;
        r[3] = 2.0;
        let r = UpperTriangular::from_raw(2, r);
        let q = right_tri_solve(&x, &r).unwrap();
        let expect = DenseMatrix::from_rows(&[&[0.6, 0.0], &[0.8, 0.0], &[0.0, 1.0]]).unwrap();
        assert_eq!(q, expect);
    }

    #[test]
    fn tri_solve_singular_diag() {
        let r = UpperTriangular::from_raw(2, vec![1.0, 0.0, 3.0, 0.0]);
        let err = right_tri_solve(&DenseMatrix::identity(2), &r).unwrap_err();
        assert!(matches!(err, Error::SingularTriangular { index: 1 }));
    }

    #[test]
    fn tri_solve_residual_bound() {
        // ||Q R - X||_F <= 10 gamma_n ||R||_F sqrt(m) on a well-conditioned input
        let (m, n) = (20, 5);
        let x = DenseMatrix::from_fn(m, n, |i, j| {
            if i == j {
                2.0
            } else {
                (((i * 5 + j * 3) % 11) as f64 - 5.0) / 11.0
            }
        })
        .unwrap();
        let b = x.gram();
        let r = cholesky(&b).unwrap();
        let q = right_tri_solve(&x, &r).unwrap();
        let qr = dense_times_upper(&q, &r).unwrap();
        let mut diff2 = 0.0;
        for k in 0..m * n {
            let d = qr.data()[k] - x.data()[k];
            diff2 += d * d;
        }
        let nu = n as f64 * MACHINE_UNIT;
        let gamma_n = nu / (1.0 - nu);
        let bound = 10.0 * gamma_n * r.to_dense().frobenius_norm() * (m as f64).sqrt();
        assert!(diff2.sqrt() <= bound);
    }

    #[test]
    fn tri_solve_does_not_modify_inputs() {
        let x = DenseMatrix::from_rows(&[&[3.0, 1.0], &[0.0, 2.0]]).unwrap();
        let r = UpperTriangular::from_dense_upper(&x).unwrap();
        let x0 = x.clone();
        let r0 = r.clone();
        let _ = right_tri_solve(&x, &r).unwrap();
        assert_eq!(x, x0);
        assert_eq!(r, r0);
    }

    #[test]
    fn tri_mul_keeps_structure() {
        let a = UpperTriangular::from_dense_upper(
            &DenseMatrix::from_rows(&[&[1.0, 2.0, 3.0], &[0.0, 4.0, 5.0], &[0.0, 0.0, 6.0]]).unwrap(),
        )
        .unwrap();
        let p = a.tri_mul(&a).unwrap();
        assert_eq!(p.get(1, 0), 0.0);
        assert_eq!(p.get(2, 0), 0.0);
        assert_eq!(p.get(2, 1), 0.0);
        assert_eq!(p.get(0, 0), 1.0);
        assert_eq!(p.get(0, 1), 10.0);
        assert_eq!(p.get(1, 1), 16.0);
        assert_eq!(p.get(2, 2), 36.0);
        assert_eq!(p.get(0, 2), 31.0);
        assert_eq!(p.get(1, 2), 50.0);
    }

    #[test]
    fn householder_identity() {
        let res = householder_qr(&DenseMatrix::identity(4));
        assert_eq!(res.q, DenseMatrix::identity(4));
        assert_eq!(res.r.to_dense(), DenseMatrix::identity(4));
    }

    #[test]
    fn householder_orthonormal_input() {
        // X already orthonormal: R must be I and Q must equal X, both to 1e-14
        let base = DenseMatrix::from_fn(10, 4, |i, j| ((i * 7 + j) as f64 * 0.41).sin()).unwrap();
        let qx = householder_qr(&base).q;
        let res = householder_qr(&qx);
        for j in 0..4 {
            for i in 0..4 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((res.r.get(i, j) - e).abs() <= 1e-14);
            }
            for i in 0..10 {
                assert!((res.q.get(i, j) - qx.get(i, j)).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn householder_orthogonality_bound() {
        let x = DenseMatrix::from_fn(100, 10, |i, j| (((i * 31 + j * 17) % 23) as f64 - 11.0))
            .unwrap();
        let res = householder_qr(&x);
        let g = res.q.gram();
        let mut diff2 = 0.0;
        for i in 0..10 {
            for j in 0..10 {
                let e = if i == j { 1.0 } else { 0.0 };
                let d = g.get(i, j) - e;
                diff2 += d * d;
            }
        }
        assert!(diff2.sqrt() <= 1e-14);
    }

    #[test]
    fn householder_rank_deficient_gives_zero_row() {
        // second column is a multiple of the first
        let x = DenseMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0], &[3.0, 6.0]]).unwrap();
        let res = householder_qr(&x);
        assert!(res.r.diag(1).abs() <= 1e-14);
    }
}
