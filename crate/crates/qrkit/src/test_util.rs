//! Deterministic pseudo-random matrices for unit tests. A plain LCG keeps
//! the fixtures independent of the crate's own generators.

use crate::mat::DenseMatrix;

pub(crate) fn lcg_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut state = seed.wrapping_mul(2862933555777941757).wrapping_add(3037000493);
    let mut next = || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((state >> 11) as f64) * (1.0 / (1u64 << 52) as f64) - 1.0
    };
    let data: Vec<f64> = (0..rows * cols).map(|_| next()).collect();
    DenseMatrix::from_raw(rows, cols, data)
}
