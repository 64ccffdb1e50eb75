//! The CholeskyQR family. Plain CholeskyQR and CholeskyQR2 for
//! well-conditioned inputs, the shifted single-stage variant for
//! ill-conditioned ones, and the three-stage shifted pipeline in both
//! flavors: the spectral-norm shift and the smaller column-measure shift.
//!
//! Shift formulas are evaluated in one fixed order (the two size terms
//! separately, summed, times 11, times the squared norm basis) so a given
//! input yields the same shift on every platform.

use crate::error::{Error, Result};
use crate::kernels::{
    cholesky, right_tri_solve, BreakdownError, BreakdownStage, UpperTriangular,
};
use crate::mat::{p_value, spectral_norm_estimate, DenseMatrix, MACHINE_UNIT};

/// How the diagonal shift for the first Cholesky stage is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShiftStrategy {
    /// No shift: plain CholeskyQR first stage.
    NoShift,
    /// s = 11(mnu + n(n+1)u) * sigma1^2 with sigma1 from the power-iteration
    /// spectral-norm estimate.
    OriginalSpectral,
    /// s = 11(mnu + n(n+1)u) * [X]_g^2 with the maximum column norm.
    ImprovedColumn,
    /// Caller-supplied positive shift.
    FixedValue(f64),
}

/// The shift actually used plus the quantities that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftInfo {
    pub strategy: ShiftStrategy,
    pub s: f64,
    /// The norm the formula was based on: the spectral estimate or the
    /// column measure. None for fixed or zero shifts.
    pub basis: Option<f64>,
    /// s / basis^2; equals s/||X||_2^2 when the basis is the spectral norm.
    pub t: Option<f64>,
    /// Column-measure-to-spectral-norm ratio, when a spectral estimate was
    /// available at shift time.
    pub p: Option<f64>,
    pub machine_unit: f64,
    /// (m*n*u, n*(n+1)*u) as evaluated.
    pub size_terms: (f64, f64),
    /// Set when the spectral estimate failed to converge and the Frobenius
    /// norm was used as a conservative upper bound instead.
    pub frobenius_fallback: bool,
}

/// Size-condition report: both products must stay below 1/64.
#[derive(Debug, Clone, Copy)]
pub struct SizeCheck {
    pub ok: bool,
    pub mn_u: f64,
    pub n_n1_u: f64,
}

/// Checks m*n*u <= 1/64 and n*(n+1)*u <= 1/64.
pub fn check_size_conditions(m: usize, n: usize) -> SizeCheck {
    let (mn_u, n_n1_u) = size_terms(m, n);
    SizeCheck {
        ok: mn_u <= 1.0 / 64.0 && n_n1_u <= 1.0 / 64.0,
        mn_u,
        n_n1_u,
    }
}

fn size_terms(m: usize, n: usize) -> (f64, f64) {
    let mn_u = (m as f64) * (n as f64) * MACHINE_UNIT;
    let n_n1_u = (n as f64) * ((n as f64) + 1.0) * MACHINE_UNIT;
    (mn_u, n_n1_u)
}

fn shift_from_basis(m: usize, n: usize, basis: f64) -> (f64, (f64, f64)) {
    let (mn_u, n_n1_u) = size_terms(m, n);
    let s = 11.0 * (mn_u + n_n1_u) * (basis * basis);
    (s, (mn_u, n_n1_u))
}

/// Shift from the spectral-norm estimate. Falls back to the Frobenius norm
/// (an upper bound, hence a larger, still-safe shift) if the power iteration
/// does not converge; the fallback is flagged.
pub fn shift_original(x: &DenseMatrix) -> Result<ShiftInfo> {
    let (sigma, fallback) = match spectral_norm_estimate(x) {
        Ok(s) => (s, false),
        Err(Error::NonConvergence { .. }) => (x.frobenius_norm(), true),
        Err(e) => return Err(e),
    };
    let (s, size_terms) = shift_from_basis(x.rows(), x.cols(), sigma);
    let p = p_value(x, sigma).ok().map(|p| p.value);
    Ok(ShiftInfo {
        strategy: ShiftStrategy::OriginalSpectral,
        s,
        basis: Some(sigma),
        t: Some(s / (sigma * sigma)),
        p,
        machine_unit: MACHINE_UNIT,
        size_terms,
        frobenius_fallback: fallback,
    })
}

/// Shift from the column measure; no spectral norm is ever computed.
pub fn shift_improved(x: &DenseMatrix) -> Result<ShiftInfo> {
    let g = x.g_measure().value;
    if g == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let (s, size_terms) = shift_from_basis(x.rows(), x.cols(), g);
    Ok(ShiftInfo {
        strategy: ShiftStrategy::ImprovedColumn,
        s,
        basis: Some(g),
        t: Some(s / (g * g)),
        p: None,
        machine_unit: MACHINE_UNIT,
        size_terms,
        frobenius_fallback: false,
    })
}

fn resolve_shift(x: &DenseMatrix, strategy: ShiftStrategy) -> Result<ShiftInfo> {
    match strategy {
        ShiftStrategy::NoShift => Ok(ShiftInfo {
            strategy,
            s: 0.0,
            basis: None,
            t: None,
            p: None,
            machine_unit: MACHINE_UNIT,
            size_terms: size_terms(x.rows(), x.cols()),
            frobenius_fallback: false,
        }),
        ShiftStrategy::OriginalSpectral => shift_original(x),
        ShiftStrategy::ImprovedColumn => shift_improved(x),
        ShiftStrategy::FixedValue(s) => {
            if !(s > 0.0) {
                return Err(Error::Domain(format!("fixed shift must be positive, got {s}")));
            }
            Ok(ShiftInfo {
                strategy,
                s,
                basis: None,
                t: None,
                p: None,
                machine_unit: MACHINE_UNIT,
                size_terms: size_terms(x.rows(), x.cols()),
                frobenius_fallback: false,
            })
        }
    }
}

/// A factorization result: Q (m-by-n), upper-triangular R, the shift used if
/// any, and how many Cholesky stages ran.
#[derive(Debug, Clone)]
pub struct QrResult {
    pub q: DenseMatrix,
    pub r: UpperTriangular,
    pub shift_info: Option<ShiftInfo>,
    pub stages_completed: u8,
}

/// A Cholesky breakdown inside one of the algorithms, with enough context to
/// tell a first-stage failure (shift too small) from a later-stage one
/// (condition number of the intermediate Q too large).
#[derive(Debug, Clone)]
pub struct AlgoFailure {
    pub breakdown: BreakdownError,
    pub shift_info: Option<ShiftInfo>,
    /// Stages fully completed before the failing one.
    pub stages_completed: u8,
}

impl std::fmt::Display for AlgoFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} after {} completed stage(s)", self.breakdown, self.stages_completed)?;
        if let Some(info) = &self.shift_info {
            write!(f, " (shift s = {:e})", info.s)?;
        }
        Ok(())
    }
}

impl std::error::Error for AlgoFailure {}

fn require_tall(x: &DenseMatrix) -> Result<()> {
    if x.rows() < x.cols() {
        return Err(Error::DimensionMismatch(format!(
            "CholeskyQR-family algorithms need m >= n, got {}x{}",
            x.rows(),
            x.cols()
        )));
    }
    Ok(())
}

fn warn_size(x: &DenseMatrix) {
    let check = check_size_conditions(x.rows(), x.cols());
    if !check.ok {
        log::warn!(
            "size conditions violated: mnu = {:e}, n(n+1)u = {:e} exceed 1/64; error bounds may not hold",
            check.mn_u,
            check.n_n1_u
        );
    }
}

/// One CholeskyQR stage without any shift; reports the failing stage.
fn cholqr_stage(
    x: &DenseMatrix,
    stage: BreakdownStage,
    shift_info: Option<ShiftInfo>,
    stages_completed: u8,
) -> Result<(DenseMatrix, UpperTriangular)> {
    let b = x.gram();
    let r = cholesky(&b).map_err(|pf| {
        Error::Breakdown(AlgoFailure {
            breakdown: pf.at_stage(stage),
            shift_info,
            stages_completed,
        })
    })?;
    let q = right_tri_solve(x, &r)?;
    Ok((q, r))
}

/// Plain CholeskyQR: Gram, Cholesky, triangular solve.
pub fn cholesky_qr(x: &DenseMatrix) -> Result<QrResult> {
    require_tall(x)?;
    warn_size(x);
    let (q, r) = cholqr_stage(x, BreakdownStage::FirstCholesky, None, 0)?;
    Ok(QrResult {
        q,
        r,
        shift_info: None,
        stages_completed: 1,
    })
}

/// CholeskyQR applied twice; R is the product of the stage factors.
pub fn cholesky_qr2(x: &DenseMatrix) -> Result<QrResult> {
    require_tall(x)?;
    warn_size(x);
    let (q, r) = cholqr_stage(x, BreakdownStage::FirstCholesky, None, 0)?;
    let (q1, r1) = cholqr_stage(&q, BreakdownStage::SecondCholesky, None, 1)?;
    let r2 = r1.tri_mul(&r)?;
    Ok(QrResult {
        q: q1,
        r: r2,
        shift_info: None,
        stages_completed: 2,
    })
}

/// Single-stage shifted CholeskyQR: Cholesky of B + sI, where s is added to
/// the diagonal in place.
pub fn shifted_cholesky_qr(x: &DenseMatrix, strategy: ShiftStrategy) -> Result<QrResult> {
    require_tall(x)?;
    warn_size(x);
    let info = resolve_shift(x, strategy)?;
    let mut b = x.gram();
    b.add_to_diagonal(info.s);
    let r = cholesky(&b).map_err(|pf| {
        Error::Breakdown(AlgoFailure {
            breakdown: pf.at_stage(BreakdownStage::FirstCholesky),
            shift_info: Some(info),
            stages_completed: 0,
        })
    })?;
    let q = right_tri_solve(x, &r)?;
    Ok(QrResult {
        q,
        r,
        shift_info: Some(info),
        stages_completed: 1,
    })
}

/// Three-stage shifted CholeskyQR: the shifted stage followed by two plain
/// CholeskyQR refinements. R is the accumulated triangular product
/// R4 = R3 (R1 R).
pub fn shifted_cholesky_qr3(x: &DenseMatrix, strategy: ShiftStrategy) -> Result<QrResult> {
    let first = shifted_cholesky_qr(x, strategy)?;
    let info = first.shift_info;
    let (q1, r1) = cholqr_stage(&first.q, BreakdownStage::SecondCholesky, info, 1)?;
    let r2 = r1.tri_mul(&first.r)?;
    let (q2, r3) = cholqr_stage(&q1, BreakdownStage::ThirdCholesky, info, 2)?;
    let r4 = r3.tri_mul(&r2)?;
    Ok(QrResult {
        q: q2,
        r: r4,
        shift_info: info,
        stages_completed: 3,
    })
}

/// Algorithm names accepted by the dispatcher (and the CLI).
pub const ALGO_NAMES: [&str; 5] = ["cholqr", "cholqr2", "scqr3", "iscqr3", "hhqr"];

/// Runs an algorithm by name. `scqr3` takes an optional strategy override;
/// `iscqr3` is by definition the column-measure shift and ignores overrides.
pub fn algo_dispatch(
    name: &str,
    x: &DenseMatrix,
    strategy: Option<ShiftStrategy>,
) -> Result<QrResult> {
    match name {
        "cholqr" => cholesky_qr(x),
        "cholqr2" => cholesky_qr2(x),
        "scqr3" => shifted_cholesky_qr3(x, strategy.unwrap_or(ShiftStrategy::OriginalSpectral)),
        "iscqr3" => shifted_cholesky_qr3(x, ShiftStrategy::ImprovedColumn),
        "hhqr" => {
            require_tall(x)?;
            Ok(crate::kernels::householder_qr(x))
        }
        other => Err(Error::UnknownAlgorithm(other.to_string())),
    }
}
