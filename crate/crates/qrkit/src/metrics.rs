//! Accuracy metrics for a factorization (orthogonality, residual, condition
//! number of Q) and evaluation of the closed-form accuracy bounds for
//! measured-vs-bound verification.

use crate::algos::QrResult;
use crate::error::{Error, Result};
use crate::kernels::{condition_number, dense_times_upper, jacobi_svd};
use crate::mat::{DenseMatrix, MACHINE_UNIT};

/// Measured accuracy of a factorization of X.
#[derive(Debug, Clone, Copy)]
pub struct AccuracyReport {
    /// ||Q^T Q - I||_F
    pub orth_fro: f64,
    /// ||Q^T Q - I||_2, via the Jacobi SVD of the n-by-n defect.
    pub orth_two: f64,
    /// ||Q R - X||_F
    pub resid_fro: f64,
    /// resid_fro / ||X||_F
    pub resid_rel: f64,
    /// kappa_2(Q), measured.
    pub kappa_q: f64,
}

/// Computes all five accuracy metrics for `result` against the input `x`.
pub fn accuracy(x: &DenseMatrix, result: &QrResult) -> AccuracyReport {
    let n = result.q.cols();
    let g = result.q.gram();
    let mut defect = g.data().to_vec();
    for j in 0..n {
        defect[j * n + j] -= 1.0;
    }
    let defect = DenseMatrix::from_raw(n, n, defect);
    let orth_fro = defect.frobenius_norm();
    let orth_two = jacobi_svd(&defect).singular_values[0];

    let qr = dense_times_upper(&result.q, &result.r).expect("factor dimensions match");
    let mut diff = qr.data().to_vec();
    for (d, &xv) in diff.iter_mut().zip(x.data()) {
        *d -= xv;
    }
    let resid_fro = DenseMatrix::from_raw(x.rows(), x.cols(), diff).frobenius_norm();
    let xf = x.frobenius_norm();
    let resid_rel = if xf > 0.0 { resid_fro / xf } else { resid_fro };

    let kappa_q = condition_number(&result.q).unwrap_or(f64::INFINITY);

    AccuracyReport {
        orth_fro,
        orth_two,
        resid_fro,
        resid_rel,
        kappa_q,
    }
}

/// Every closed-form bound evaluated for one (m, n, kappa, p, t, sigma1)
/// configuration. Constants are transcribed as exact decimal literals.
///
/// `resid_bound_scqr` uses the theorem constant 1.67; a published summary
/// table lists 1.6 n^2 u [X]_g for the same quantity, a constant-level
/// discrepancy we do not attempt to resolve here.
#[derive(Debug, Clone, Copy)]
pub struct BoundReport {
    /// gamma_k = k u / (1 - k u) for k = n, m, n+1.
    pub gamma_n: f64,
    pub gamma_m: f64,
    pub gamma_n1: f64,
    /// delta = 8 kappa sqrt(mnu + n(n+1)u)
    pub delta: f64,
    /// ||E_A||_2 <= 1.1 m n u [X]_g^2 with [X]_g = p sigma1
    pub e_a_bound: f64,
    /// ||E_B||_2 <= 1.1 n (n+1) u [X]_g^2
    pub e_b_bound: f64,
    /// Single-stage shifted orthogonality: the constant 1.6.
    pub orth_bound_scqr: f64,
    /// Single-stage shifted residual: 1.67 p n^2 u sigma1.
    pub resid_bound_scqr: f64,
    /// Three-stage orthogonality: 6 (mnu + n(n+1)u).
    pub orth_bound_scqr3: f64,
    /// Three-stage residual: (6.57 p + 4.87) n^2 u sigma1.
    pub resid_bound_scqr3: f64,
    /// kappa_2(Q) of the first-stage output: 3.24 sqrt(1 + t kappa^2).
    pub kappa_q_bound: f64,
    /// Largest kappa_2(X) the column-measure shift provably handles:
    /// 1 / (86 p (mnu + (n+1)nu)).
    pub kappa_sufficient: f64,
}

/// Evaluates every bound formula; all inputs must be positive and n u < 1.
pub fn bounds(m: usize, n: usize, kappa: f64, p: f64, t: f64, sigma1: f64) -> Result<BoundReport> {
    if !(kappa > 0.0 && p > 0.0 && t > 0.0 && sigma1 > 0.0) {
        return Err(Error::Domain(
            "bounds needs positive kappa, p, t and sigma1".into(),
        ));
    }
    let u = MACHINE_UNIT;
    let gamma = |k: f64| -> Result<f64> {
        let ku = k * u;
        if ku >= 1.0 {
            return Err(Error::Domain(format!("gamma_k undefined: k*u = {ku} >= 1")));
        }
        Ok(ku / (1.0 - ku))
    };
    let gamma_n = gamma(n as f64)?;
    let gamma_m = gamma(m as f64)?;
    let gamma_n1 = gamma(n as f64 + 1.0)?;

    let mn_u = (m as f64) * (n as f64) * u;
    let n_n1_u = (n as f64) * ((n as f64) + 1.0) * u;
    let g2 = (p * sigma1) * (p * sigma1);
    let n2u = (n as f64) * (n as f64) * u;

    Ok(BoundReport {
        gamma_n,
        gamma_m,
        gamma_n1,
        delta: 8.0 * kappa * (mn_u + n_n1_u).sqrt(),
        e_a_bound: 1.1 * mn_u * g2,
        e_b_bound: 1.1 * n_n1_u * g2,
        orth_bound_scqr: 1.6,
        resid_bound_scqr: 1.67 * p * n2u * sigma1,
        orth_bound_scqr3: 6.0 * (mn_u + n_n1_u),
        resid_bound_scqr3: (6.57 * p + 4.87) * n2u * sigma1,
        kappa_q_bound: 3.24 * (1.0 + t * kappa * kappa).sqrt(),
        kappa_sufficient: 1.0 / (86.0 * p * (mn_u + n_n1_u)),
    })
}

/// One measured-vs-bound comparison.
#[derive(Debug, Clone, Copy)]
pub struct BoundCheck {
    pub name: &'static str,
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Compares a measured report against the bound report, one verdict per
/// (measured, bound) pair.
pub fn check_against_bounds(report: &AccuracyReport, bounds: &BoundReport) -> Vec<BoundCheck> {
    let pair = |name, measured: f64, bound: f64| BoundCheck {
        name,
        measured,
        bound,
        pass: measured <= bound,
    };
    vec![
        pair("orth_two <= orth_bound_scqr", report.orth_two, bounds.orth_bound_scqr),
        pair("orth_fro <= orth_bound_scqr3", report.orth_fro, bounds.orth_bound_scqr3),
        pair(
            "resid_fro <= resid_bound_scqr3",
            report.resid_fro,
            bounds.resid_bound_scqr3,
        ),
        pair("kappa_q <= kappa_q_bound", report.kappa_q, bounds.kappa_q_bound),
    ]
}
