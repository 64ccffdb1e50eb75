//! Experiment records and their CSV / JSON-lines serialization.

use std::io::Write;
use std::path::Path;

use qrkit::{accuracy, algo_dispatch, jacobi_svd, p_value, DenseMatrix, Error, ShiftStrategy};
use serde::Serialize;

/// Outcome of one algorithm run. Breakdown is data, not failure: the whole
/// point of the sweep tables is where breakdown happens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RunStatus {
    #[serde(rename = "ok")]
    Ok,
    #[serde(rename = "breakdown_stage1")]
    BreakdownStage1,
    #[serde(rename = "breakdown_stage2")]
    BreakdownStage2,
    #[serde(rename = "breakdown_stage3")]
    BreakdownStage3,
    #[serde(rename = "error")]
    Error,
}

impl RunStatus {
    fn from_stage(stage: u8) -> Self {
        match stage {
            1 => RunStatus::BreakdownStage1,
            2 => RunStatus::BreakdownStage2,
            _ => RunStatus::BreakdownStage3,
        }
    }
}

/// One benchmark row. Field order defines the CSV schema:
/// `algorithm,m,n,kappa_target,seed,shift_s,p,orth_fro,resid_fro,kappa_q,time_ms,status,trial_index`
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentRecord {
    pub algorithm: String,
    pub m: usize,
    pub n: usize,
    pub kappa_target: Option<f64>,
    pub seed: Option<u64>,
    pub shift_s: Option<f64>,
    pub p: Option<f64>,
    pub orth_fro: Option<f64>,
    pub resid_fro: Option<f64>,
    pub kappa_q: Option<f64>,
    pub time_ms: f64,
    pub status: RunStatus,
    pub trial_index: usize,
}

pub const CSV_HEADER: &str =
    "algorithm,m,n,kappa_target,seed,shift_s,p,orth_fro,resid_fro,kappa_q,time_ms,status,trial_index";

/// Matrix-level facts shared by every record of one trial matrix.
pub struct MatrixFacts {
    pub p: Option<f64>,
}

/// Measures sigma1 (Jacobi SVD) and p once per matrix; every algorithm row
/// for that matrix reuses them.
pub fn matrix_facts(x: &DenseMatrix) -> MatrixFacts {
    let svd = jacobi_svd(x);
    let p = p_value(x, svd.singular_values[0]).ok().map(|p| p.value);
    MatrixFacts { p }
}

/// Runs one algorithm and builds its record; `time_ms` is filled separately
/// by the timing pass.
pub fn run_record(
    algo: &str,
    x: &DenseMatrix,
    strategy: Option<ShiftStrategy>,
    facts: &MatrixFacts,
    kappa_target: Option<f64>,
    seed: Option<u64>,
    trial_index: usize,
) -> ExperimentRecord {
    let (status, shift_s, orth, resid, kq) = match algo_dispatch(algo, x, strategy) {
        Ok(res) => {
            let rep = accuracy(x, &res);
            (
                RunStatus::Ok,
                res.shift_info.map(|i| i.s),
                Some(rep.orth_fro),
                Some(rep.resid_fro),
                Some(rep.kappa_q),
            )
        }
        Err(Error::Breakdown(f)) => (
            RunStatus::from_stage(f.breakdown.stage.number()),
            f.shift_info.map(|i| i.s),
            None,
            None,
            None,
        ),
        Err(_) => (RunStatus::Error, None, None, None, None),
    };
    ExperimentRecord {
        algorithm: algo.to_string(),
        m: x.rows(),
        n: x.cols(),
        kappa_target,
        seed,
        shift_s,
        p: facts.p,
        orth_fro: orth,
        resid_fro: resid,
        kappa_q: kq,
        time_ms: 0.0,
        status,
        trial_index,
    }
}

/// Appends records to `out` (or stdout) as CSV rows or JSON lines. The CSV
/// header is written only when the file is new or empty.
pub fn write_records(
    out: Option<&Path>,
    json: bool,
    records: &[ExperimentRecord],
) -> std::io::Result<()> {
    let mut sink: Box<dyn Write> = match out {
        Some(path) => {
            let existed = path.exists() && std::fs::metadata(path)?.len() > 0;
            let file = std::fs::OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)?;
            let mut w = std::io::BufWriter::new(file);
            if !json && !existed {
                writeln!(w, "{CSV_HEADER}")?;
            }
            Box::new(w)
        }
        None => {
            let mut w = std::io::BufWriter::new(std::io::stdout());
            if !json {
                writeln!(w, "{CSV_HEADER}")?;
            }
            Box::new(w)
        }
    };
    for rec in records {
        if json {
            writeln!(sink, "{}", serde_json::to_string(rec).expect("record serializes"))?;
        } else {
            let mut csv = csv::WriterBuilder::new()
                .has_headers(false)
                .from_writer(Vec::new());
            csv.serialize(rec).expect("record serializes");
            let row = csv.into_inner().expect("csv buffer");
            sink.write_all(&row)?;
        }
    }
    sink.flush()
}
