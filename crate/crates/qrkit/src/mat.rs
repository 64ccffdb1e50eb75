//! Dense column-major matrix storage and the elementary operations the
//! CholeskyQR family is built from: column norms, the column measure
//! `[X]_g` (maximum Euclidean column norm), Frobenius norm, a power-iteration
//! spectral-norm estimate, Gram products and plain dense products.
//!
//! All norms use a scaling-safe two-pass accumulation so that columns mixing
//! magnitudes like 1e-16 and 30, or entries up to 1e150, neither overflow nor
//! lose their small contributions to premature underflow.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// The double-precision rounding unit, u = 2^-53.
pub const MACHINE_UNIT: f64 = f64::EPSILON * 0.5;

/// Element count above which element-wise kernels switch to rayon.
const PAR_THRESHOLD: usize = 32 * 1024;

/// Dense real matrix, column-major. Immutable after construction; entries are
/// guaranteed finite when built through the checked constructors.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from column-major data, rejecting non-finite entries.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix needs {} entries, got {}",
                rows,
                cols,
                rows * cols,
                data.len()
            )));
        }
        for (k, &v) in data.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    row: k % rows,
                    col: k / rows,
                });
            }
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from row slices (convenience for small literals).
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let m = rows.len();
        let n = if m == 0 { 0 } else { rows[0].len() };
        let mut data = vec![0.0; m * n];
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "row {} has {} entries, expected {}",
                    i,
                    r.len(),
                    n
                )));
            }
            for (j, &v) in r.iter().enumerate() {
                data[j * m + i] = v;
            }
        }
        Self::from_col_major(m, n, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = vec![0.0; rows * cols];
        for j in 0..cols {
            for i in 0..rows {
                data[j * rows + i] = f(i, j);
            }
        }
        Self::from_col_major(rows, cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for j in 0..n {
            m.data[j * n + j] = 1.0;
        }
        m
    }

    /// Internal constructor for values produced by our own kernels.
    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Column-major backing slice.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Column `j` as a contiguous slice.
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    pub(crate) fn add_to_diagonal(&mut self, s: f64) {
        let n = self.rows.min(self.cols);
        for j in 0..n {
            self.data[j * self.rows + j] += s;
        }
    }

    pub fn transpose(&self) -> DenseMatrix {
        let (m, n) = (self.rows, self.cols);
        let mut out = vec![0.0; m * n];
        for j in 0..n {
            for i in 0..m {
                out[i * n + j] = self.data[j * m + i];
            }
        }
        DenseMatrix::from_raw(n, m, out)
    }

    /// Scales every entry by `c`. For `c` an exact power of two the result is
    /// bitwise `c * x` in every entry.
    pub fn scale(&self, c: f64) -> DenseMatrix {
        DenseMatrix::from_raw(self.rows, self.cols, self.data.iter().map(|&x| c * x).collect())
    }

    /// Dense product `self * other`; inner dimensions must agree.
    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let (m, k, n) = (self.rows, self.cols, other.cols);
        let mut out = vec![0.0; m * n];
        let fill = |j: usize, cj: &mut [f64]| {
            for l in 0..k {
                let blj = other.data[j * k + l];
                let acol = &self.data[l * m..(l + 1) * m];
                for (c, &a) in cj.iter_mut().zip(acol) {
                    *c = a.mul_add(blj, *c);
                }
            }
        };
        if m * n * k >= PAR_THRESHOLD {
            out.par_chunks_mut(m).enumerate().for_each(|(j, cj)| fill(j, cj));
        } else {
            for (j, cj) in out.chunks_mut(m).enumerate() {
                fill(j, cj);
            }
        }
        Ok(DenseMatrix::from_raw(m, n, out))
    }

    /// Gram matrix `B = X^T X`, n-by-n. The upper triangle is computed
    /// with the fixed blocked dot kernel and mirrored, so the result is
    /// exactly symmetric.
    pub fn gram(&self) -> DenseMatrix {
        let (m, n) = (self.rows, self.cols);
        let mut b = vec![0.0; n * n];
        let fill = |j: usize, bj: &mut [f64]| {
            let xj = &self.data[j * m..(j + 1) * m];
            for i in 0..=j {
                let xi = &self.data[i * m..(i + 1) * m];
                bj[i] = dot(xi, xj);
            }
        };
        if m * n >= PAR_THRESHOLD {
            b.par_chunks_mut(n).enumerate().for_each(|(j, bj)| fill(j, bj));
        } else {
            for (j, bj) in b.chunks_mut(n).enumerate() {
                fill(j, bj);
            }
        }
        for j in 0..n {
            for i in (j + 1)..n {
                b[j * n + i] = b[i * n + j];
            }
        }
        DenseMatrix::from_raw(n, n, b)
    }

    /// Euclidean norm of each column, scaling-safe.
    pub fn column_norms(&self) -> Vec<f64> {
        (0..self.cols).map(|j| norm2_scaled(self.col(j))).collect()
    }

    /// The column measure: maximum Euclidean column norm, with the index of
    /// the column attaining it (lowest index on ties).
    pub fn g_measure(&self) -> GMeasure {
        let norms = self.column_norms();
        let mut value = 0.0;
        let mut argmax_col = 0;
        for (j, &nj) in norms.iter().enumerate() {
            if nj > value {
                value = nj;
                argmax_col = j;
            }
        }
        GMeasure { value, argmax_col }
    }

    /// Frobenius norm, scaling-safe.
    pub fn frobenius_norm(&self) -> f64 {
        norm2_scaled(&self.data)
    }
}

/// Maximum Euclidean column norm of a matrix and where it is attained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GMeasure {
    pub value: f64,
    pub argmax_col: usize,
}

/// Ratio of the column measure to the spectral norm, always in
/// `[1/sqrt(n), 1]` when `sigma1` is the exact spectral norm.
#[derive(Debug, Clone, Copy)]
pub struct PValue {
    pub value: f64,
    /// Set when the ratio falls outside `[1/sqrt(n) - 1e-12, 1 + 1e-12]`,
    /// which indicates `sigma1` was an estimate rather than the exact norm.
    pub out_of_range: bool,
}

/// p = [X]_g / sigma1 where the caller supplies sigma1 (exact or estimated).
pub fn p_value(x: &DenseMatrix, sigma1: f64) -> Result<PValue> {
    if !(sigma1 > 0.0) {
        return Err(Error::Domain(format!("sigma1 must be positive, got {sigma1}")));
    }
    let g = x.g_measure().value;
    if g == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let value = g / sigma1;
    let lower = 1.0 / (x.cols() as f64).sqrt();
    let out_of_range = value > 1.0 + 1e-12 || value < lower - 1e-12;
    Ok(PValue { value, out_of_range })
}

/// Power-iteration estimate of the spectral norm with the default
/// tolerance 1e-6 and iteration cap 200.
pub fn spectral_norm_estimate(x: &DenseMatrix) -> Result<f64> {
    spectral_norm_estimate_with(x, 1e-6, 200)
}

/// Power iteration on `v -> X^T (X v)`, started from the coordinate vector of
/// the maximal-norm column so the estimate is a deterministic function of X.
/// Stops when successive estimates differ relatively by less than `rel_tol`.
/// The returned value is `||X v||` for a unit `v`, hence never exceeds
/// `||X||_2`.
pub fn spectral_norm_estimate_with(x: &DenseMatrix, rel_tol: f64, max_iters: usize) -> Result<f64> {
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::Domain(format!("rel_tol must be in (0,1), got {rel_tol}")));
    }
    let (m, n) = (x.rows(), x.cols());
    let start = x.g_measure();
    if start.value == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let mut v = vec![0.0; n];
    v[start.argmax_col] = 1.0;
    let mut w = vec![0.0; m];
    let mut z = vec![0.0; n];
    let mut prev = 0.0;
    for _ in 0..max_iters {
        // w = X v
        w.iter_mut().for_each(|e| *e = 0.0);
        for (j, &vj) in v.iter().enumerate() {
            if vj != 0.0 {
                for (wi, &xij) in w.iter_mut().zip(x.col(j)) {
                    *wi += xij * vj;
                }
            }
        }
        let sigma = norm2_scaled(&w);
        if sigma == 0.0 {
            return Err(Error::ZeroMatrix);
        }
        if (sigma - prev).abs() < rel_tol * sigma {
            return Ok(sigma);
        }
        prev = sigma;
        // z = X^T w, then v = z / ||z||
        for j in 0..n {
            z[j] = dot(x.col(j), &w);
        }
        let zn = norm2_scaled(&z);
        if zn == 0.0 {
            return Ok(sigma);
        }
        for (vj, &zj) in v.iter_mut().zip(&z) {
            *vj = zj / zn;
        }
    }
    Err(Error::NonConvergence { iters: max_iters })
}

/// Dot product with a fixed two-level blocked summation: four independent
/// accumulator lanes inside 128-element blocks, block partials added
/// sequentially. This is the crate's canonical summation order,
/// deterministic across runs and thread counts, with a much smaller
/// accumulated-rounding constant than a single sequential chain.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    const BLOCK: usize = 128;
    let mut total = 0.0;
    let mut offset = 0;
    while offset < a.len() {
        let end = (offset + BLOCK).min(a.len());
        total += dot_block(&a[offset..end], &b[offset..end]);
        offset = end;
    }
    total
}

#[inline]
fn dot_block(a: &[f64], b: &[f64]) -> f64 {
    let quads = a.len() / 4 * 4;
    let (a4, at) = a.split_at(quads);
    let (b4, bt) = b.split_at(quads);
    let mut acc = [0.0f64; 4];
    for (ca, cb) in a4.chunks_exact(4).zip(b4.chunks_exact(4)) {
        acc[0] = ca[0].mul_add(cb[0], acc[0]);
        acc[1] = ca[1].mul_add(cb[1], acc[1]);
        acc[2] = ca[2].mul_add(cb[2], acc[2]);
        acc[3] = ca[3].mul_add(cb[3], acc[3]);
    }
    let mut tail = 0.0;
    for (xa, xb) in at.iter().zip(bt) {
        tail = xa.mul_add(*xb, tail);
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Scaling-safe Euclidean norm. Magnitudes in the wide safe band accumulate
/// raw squares (a single blocked pass); extreme magnitudes take the two-pass
/// rescaled route so neither overflow nor underflow loses the result.
fn norm2_scaled(v: &[f64]) -> f64 {
    let maxabs = max_abs(v);
    if maxabs == 0.0 {
        return 0.0;
    }
    if (1e-140..=1e150).contains(&maxabs) {
        return dot(v, v).sqrt();
    }
    let mut sum = 0.0;
    for &x in v {
        let r = x / maxabs;
        sum += r * r;
    }
    maxabs * sum.sqrt()
}

fn max_abs(v: &[f64]) -> f64 {
    let lanes = v.len() / 4 * 4;
    let (v4, tail) = v.split_at(lanes);
    let mut m = [0.0f64; 4];
    for c in v4.chunks_exact(4) {
        m[0] = m[0].max(c[0].abs());
        m[1] = m[1].max(c[1].abs());
        m[2] = m[2].max(c[2].abs());
        m[3] = m[3].max(c[3].abs());
    }
    let mut out = m[0].max(m[1]).max(m[2]).max(m[3]);
    for &x in tail {
        out = out.max(x.abs());
    }
    out
}
