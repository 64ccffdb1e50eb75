//! Reproducible generators for the benchmark matrix families: the
//! SVD-conditioned family with a planted geometric spectrum, the Hilbert
//! matrix, the arrowhead matrix, and a seeded random-orthogonal factory.
//!
//! Randomness is pinned down to the bit: a ChaCha20 keystream seeded through
//! the standard 64-bit seed expansion, mapped to uniforms in (0, 1] by
//! `((x >> 11) + 1) * 2^-53`. None of these pieces is allowed to change, so
//! identical (dims, seed) inputs produce bitwise-identical matrices across
//! releases.

use std::path::PathBuf;

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::kernels::householder_qr;
use crate::mat::DenseMatrix;

/// A description of a benchmark matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixSpec {
    SvdConditioned { m: usize, n: usize, kappa: f64, seed: u64 },
    Hilbert { n: usize },
    Arrowhead { n: usize },
    File { path: PathBuf },
}

/// What is known analytically about a realized matrix.
#[derive(Debug, Clone, Default)]
pub struct MatrixMeta {
    pub planted_kappa: Option<f64>,
    pub planted_sigma1: Option<f64>,
    pub description: String,
}

struct UniformStream {
    rng: ChaCha20Rng,
}

impl UniformStream {
    fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    /// Uniform in (0, 1], from the top 53 bits of the keystream.
    fn uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 1.0) * (f64::EPSILON * 0.5)
    }
}

/// Column-major m-by-n matrix of uniform (0, 1] variates from the seeded
/// stream. Orthogonalizing such a positive-entry matrix (rather than a
/// Gaussian one) spreads the leading singular direction across all rows,
/// which is what keeps the column measure of the SVD-conditioned family
/// well below the spectral norm.
fn uniform_matrix(m: usize, n: usize, seed: u64) -> DenseMatrix {
    let mut g = UniformStream::new(seed);
    let data: Vec<f64> = (0..m * n).map(|_| g.uniform()).collect();
    DenseMatrix::from_raw(m, n, data)
}

/// The leading `n` columns of the random orthogonal matrix drawn for `seed`:
/// the thin Q factor of a seeded Gaussian panel, sign-fixed so the R diagonal
/// is nonnegative. Because reflector k depends only on columns 0..=k and Q
/// column j only on reflectors 0..=j, this equals the first n columns of
/// `random_orthogonal(m, seed)` bit for bit.
fn orthonormal_panel(m: usize, n: usize, seed: u64) -> DenseMatrix {
    householder_qr(&uniform_matrix(m, n, seed)).q
}

/// Seeded random orthogonal matrix: deterministic function of (dim, seed),
/// with ||Q^T Q - I||_F at the HouseholderQR rounding level.
pub fn random_orthogonal(dim: usize, seed: u64) -> DenseMatrix {
    assert!(dim >= 1, "random_orthogonal needs dim >= 1");
    orthonormal_panel(dim, dim, seed)
}

/// X = U diag(1, sigma^{1/(n-1)}, ..., sigma) V^T with sigma = 1/kappa, so
/// the planted spectrum is geometric with sigma_1 = ||X||_2 = 1 and
/// kappa_2(X) = kappa. U uses `seed`, V uses `seed + 1`.
pub fn svd_conditioned(m: usize, n: usize, kappa: f64, seed: u64) -> Result<DenseMatrix> {
    if !(kappa >= 1.0) {
        return Err(Error::Domain(format!("kappa must be >= 1, got {kappa}")));
    }
    if n < 2 || m < n {
        return Err(Error::DimensionMismatch(format!(
            "svd_conditioned needs m >= n >= 2, got {m}x{n}"
        )));
    }
    let sigma = 1.0 / kappa;
    let u = orthonormal_panel(m, n, seed);
    let v = orthonormal_panel(n, n, seed.wrapping_add(1));
    // scale column k of U by sigma^{k/(n-1)}
    let mut w = u.data().to_vec();
    for k in 0..n {
        let sk = sigma.powf(k as f64 / (n - 1) as f64);
        for e in w[k * m..(k + 1) * m].iter_mut() {
            *e *= sk;
        }
    }
    let w = DenseMatrix::from_raw(m, n, w);
    w.matmul(&v.transpose())
}

/// Planted singular values of `svd_conditioned(m, n, kappa, _)`.
pub fn planted_spectrum(n: usize, kappa: f64) -> Vec<f64> {
    let sigma = 1.0 / kappa;
    (0..n)
        .map(|k| sigma.powf(k as f64 / (n - 1) as f64))
        .collect()
}

/// Hilbert matrix: X[i][j] = 1/(i + j + 1) with 0-based indices.
pub fn hilbert(n: usize) -> DenseMatrix {
    assert!(n >= 1);
    DenseMatrix::from_fn(n, n, |i, j| 1.0 / ((i + j + 1) as f64)).expect("finite by construction")
}

/// Arrowhead matrix: first row all 30, interior diagonal 10, last diagonal
/// entry 1e-16, everything else zero. (A textbook arrowhead also fills the
/// first column; this family is defined by the displayed pattern above.)
pub fn arrowhead(n: usize) -> Result<DenseMatrix> {
    if n < 3 {
        return Err(Error::DimensionMismatch(format!(
            "arrowhead needs n >= 3, got {n}"
        )));
    }
    let mut x = vec![0.0; n * n];
    for j in 0..n {
        x[j * n] = 30.0;
    }
    for i in 1..n - 1 {
        x[i * n + i] = 10.0;
    }
    x[(n - 1) * n + (n - 1)] = 1e-16;
    Ok(DenseMatrix::from_raw(n, n, x))
}

/// Realizes a matrix spec, attaching whatever is known analytically.
pub fn realize(spec: &MatrixSpec) -> Result<(DenseMatrix, MatrixMeta)> {
    match spec {
        MatrixSpec::SvdConditioned { m, n, kappa, seed } => {
            let x = svd_conditioned(*m, *n, *kappa, *seed)?;
            Ok((
                x,
                MatrixMeta {
                    planted_kappa: Some(*kappa),
                    planted_sigma1: Some(1.0),
                    description: format!("svd m={m} n={n} kappa={kappa:e} seed={seed}"),
                },
            ))
        }
        MatrixSpec::Hilbert { n } => {
            if *n < 2 {
                return Err(Error::DimensionMismatch(format!(
                    "hilbert spec needs n >= 2, got {n}"
                )));
            }
            Ok((
                hilbert(*n),
                MatrixMeta {
                    description: format!("hilbert n={n}"),
                    ..Default::default()
                },
            ))
        }
        MatrixSpec::Arrowhead { n } => Ok((
            arrowhead(*n)?,
            MatrixMeta {
                description: format!("arrowhead n={n}"),
                ..Default::default()
            },
        )),
        MatrixSpec::File { path } => {
            let x = crate::mm::read_matrix_market(path)?;
            Ok((
                x,
                MatrixMeta {
                    description: format!("file {}", path.display()),
                    ..Default::default()
                },
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::jacobi_svd;

    #[test]
    fn random_orthogonal_dim1() {
        let q = random_orthogonal(1, 7);
        let v = q.get(0, 0);
        assert!(v == 1.0 || v == -1.0);
        assert_eq!(q.data(), random_orthogonal(1, 7).data());
    }

    #[test]
    fn random_orthogonal_is_orthogonal() {
        let dim = 64;
        let q = random_orthogonal(dim, 3);
        let g = q.gram();
        let mut diff2 = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                let e = if i == j { 1.0 } else { 0.0 };
                let d = g.get(i, j) - e;
                diff2 += d * d;
            }
        }
        assert!(diff2.sqrt() <= 1e-13 * dim as f64);
    }

    #[test]
    fn random_orthogonal_deterministic() {
        let a = random_orthogonal(16, 42);
        let b = random_orthogonal(16, 42);
        for (x, y) in a.data().iter().zip(b.data()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        // different seed, different matrix
        assert_ne!(a.data(), random_orthogonal(16, 43).data());
    }

    #[test]
    fn panel_matches_leading_columns_of_square_factor() {
        let full = random_orthogonal(10, 5);
        let panel = orthonormal_panel(10, 4, 5);
        for j in 0..4 {
            for i in 0..10 {
                assert_eq!(panel.get(i, j).to_bits(), full.get(i, j).to_bits());
            }
        }
    }

    #[test]
    fn svd_conditioned_kappa_one_is_orthonormal() {
        let x = svd_conditioned(20, 4, 1.0, 9).unwrap();
        let g = x.gram();
        for i in 0..4 {
            for j in 0..4 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((g.get(i, j) - e).abs() <= 1e-13);
            }
        }
    }

    #[test]
    fn svd_conditioned_plants_spectrum() {
        let (m, n, kappa) = (200, 16, 1e8);
        let x = svd_conditioned(m, n, kappa, 11).unwrap();
        let svd = jacobi_svd(&x);
        let planted = planted_spectrum(n, kappa);
        for (got, want) in svd.singular_values.iter().zip(&planted) {
            assert!(
                (got - want).abs() <= 1e-8 * want,
                "planted {want:e}, measured {got:e}"
            );
        }
        // consecutive ratio is constant (geometric spectrum)
        let r0 = planted[1] / planted[0];
        for w in planted.windows(2) {
            assert!((w[1] / w[0] - r0).abs() <= 1e-12);
        }
    }

    #[test]
    fn svd_conditioned_bitwise_deterministic() {
        let a = svd_conditioned(32, 6, 1e6, 123).unwrap();
        let b = svd_conditioned(32, 6, 1e6, 123).unwrap();
        for (x, y) in a.data().iter().zip(b.data()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn svd_conditioned_validates() {
        assert!(svd_conditioned(4, 8, 10.0, 0).is_err());
        assert!(svd_conditioned(8, 4, 0.5, 0).is_err());
        assert!(svd_conditioned(8, 1, 10.0, 0).is_err());
    }

    #[test]
    fn hilbert_small() {
        let h = hilbert(3);
        let expect = DenseMatrix::from_rows(&[
            &[1.0, 0.5, 1.0 / 3.0],
            &[0.5, 1.0 / 3.0, 0.25],
            &[1.0 / 3.0, 0.25, 0.2],
        ])
        .unwrap();
        assert_eq!(h, expect);
        // exactly symmetric
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(h.get(i, j), h.get(j, i));
            }
        }
    }

    #[test]
    fn arrowhead_pattern() {
        let x = arrowhead(3).unwrap();
        let expect = DenseMatrix::from_rows(&[
            &[30.0, 30.0, 30.0],
            &[0.0, 10.0, 0.0],
            &[0.0, 0.0, 1e-16],
        ])
        .unwrap();
        assert_eq!(x, expect);
        assert!(arrowhead(2).is_err());
    }

    #[test]
    fn arrowhead_g_measure() {
        for n in [3usize, 8, 64] {
            let x = arrowhead(n).unwrap();
            let g = x.g_measure().value;
            assert!((g - 1000f64.sqrt()).abs() <= 1e-12);
        }
    }

    #[test]
    fn realize_dispatches() {
        let (x, meta) = realize(&MatrixSpec::Hilbert { n: 3 }).unwrap();
        assert_eq!(x, hilbert(3));
        assert!(meta.planted_kappa.is_none());
        let (_, meta) = realize(&MatrixSpec::SvdConditioned {
            m: 8,
            n: 2,
            kappa: 100.0,
            seed: 0,
        })
        .unwrap();
        assert_eq!(meta.planted_kappa, Some(100.0));
        assert_eq!(meta.planted_sigma1, Some(1.0));
    }
}
