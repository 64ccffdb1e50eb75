//! qrkit: QR factorization of dense tall-skinny matrices via the CholeskyQR
//! family, with a column-norm-based shift parameter, accuracy/bound
//! reporting, and reproducible ill-conditioned test-matrix generators.

pub mod algos;
pub mod error;
pub mod kernels;
pub mod mat;
pub mod metrics;
pub mod mm;
pub mod testmat;

#[cfg(test)]
pub(crate) mod test_util;

pub use algos::{
    algo_dispatch, check_size_conditions, cholesky_qr, cholesky_qr2, shift_improved,
    shift_original, shifted_cholesky_qr, shifted_cholesky_qr3, AlgoFailure, QrResult, ShiftInfo,
    ShiftStrategy, ALGO_NAMES,
};
pub use error::{Error, Result};
pub use kernels::{
    cholesky, condition_number, dense_times_upper, householder_qr, jacobi_svd,
    jacobi_svd_with_vectors, right_tri_solve, BreakdownError, BreakdownStage, SvdResult,
    UpperTriangular,
};
pub use mat::{p_value, spectral_norm_estimate, DenseMatrix, GMeasure, PValue, MACHINE_UNIT};
pub use metrics::{accuracy, bounds, check_against_bounds, AccuracyReport, BoundCheck, BoundReport};
pub use testmat::{arrowhead, hilbert, random_orthogonal, realize, svd_conditioned, MatrixMeta, MatrixSpec};
