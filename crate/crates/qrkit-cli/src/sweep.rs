//! Parameter sweeps: one record per (value, algorithm, trial). Correctness
//! runs execute concurrently (each trial owns its matrix); timing runs
//! execute serially afterwards so contention never skews them. Output rows
//! are sorted by (value, algorithm, trial) regardless of completion order.

use std::path::Path;

use qrkit::{realize, DenseMatrix, MatrixSpec, ShiftStrategy};
use rayon::prelude::*;

use crate::record::{matrix_facts, run_record, write_records, ExperimentRecord, RunStatus};
use crate::timing::{median_sorted, time_algorithm};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vary {
    Kappa,
    M,
    N,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenKind {
    Svd,
    Hilbert,
    Arrowhead,
}

pub struct SweepConfig {
    pub vary: Vary,
    pub values: Vec<f64>,
    pub m: usize,
    pub n: usize,
    pub kappa: f64,
    pub algos: Vec<String>,
    pub trials: usize,
    pub base_seed: u64,
    pub kind: GenKind,
    pub repeats: usize,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.values.is_empty() {
            return Err("values list must not be empty".into());
        }
        if self.values.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err("all sweep values must be positive and finite".into());
        }
        if self.trials < 1 {
            return Err("trials must be >= 1".into());
        }
        if self.algos.is_empty() {
            return Err("algos list must not be empty".into());
        }
        if matches!(self.vary, Vary::M | Vary::N) {
            for &v in &self.values {
                if v.fract() != 0.0 {
                    return Err(format!("size sweep values must be integers, got {v}"));
                }
            }
        }
        if self.kind != GenKind::Svd && self.vary != Vary::N {
            return Err("hilbert/arrowhead sweeps can only vary n".into());
        }
        if self.repeats < 3 {
            return Err(format!("repeats must be >= 3, got {}", self.repeats));
        }
        Ok(())
    }

    fn spec_for(&self, value: f64, seed: u64) -> MatrixSpec {
        let (mut m, mut n, mut kappa) = (self.m, self.n, self.kappa);
        match self.vary {
            Vary::Kappa => kappa = value,
            Vary::M => m = value as usize,
            Vary::N => n = value as usize,
        }
        match self.kind {
            GenKind::Svd => MatrixSpec::SvdConditioned { m, n, kappa, seed },
            GenKind::Hilbert => MatrixSpec::Hilbert { n },
            GenKind::Arrowhead => MatrixSpec::Arrowhead { n },
        }
    }
}

pub fn run_sweep(
    cfg: &SweepConfig,
    out: Option<&Path>,
    json: bool,
    strategy: Option<ShiftStrategy>,
) -> Result<Vec<ExperimentRecord>, String> {
    cfg.validate()?;

    // Correctness phase: concurrent over (value, trial) cells.
    struct Cell {
        value_idx: usize,
        trial: usize,
        matrix: DenseMatrix,
        records: Vec<ExperimentRecord>,
    }
    let cells: Vec<(usize, usize)> = (0..cfg.values.len())
        .flat_map(|vi| (0..cfg.trials).map(move |t| (vi, t)))
        .collect();
    let mut solved: Vec<Cell> = cells
        .par_iter()
        .map(|&(vi, trial)| {
            let seed = cfg.base_seed + trial as u64;
            let spec = cfg.spec_for(cfg.values[vi], seed);
            let (x, meta) = realize(&spec).expect("sweep spec realizes");
            let facts = matrix_facts(&x);
            let seed_field = match cfg.kind {
                GenKind::Svd => Some(seed),
                _ => None,
            };
            let records = cfg
                .algos
                .iter()
                .map(|algo| {
                    run_record(algo, &x, strategy, &facts, meta.planted_kappa, seed_field, trial)
                })
                .collect();
            Cell {
                value_idx: vi,
                trial,
                matrix: x,
                records,
            }
        })
        .collect();

    // Timing phase: strictly serial.
    for cell in &mut solved {
        for (ai, algo) in cfg.algos.iter().enumerate() {
            cell.records[ai].time_ms = time_algorithm(algo, &cell.matrix, strategy, cfg.repeats)?;
        }
    }

    // Flatten sorted by (value, algo, trial).
    let mut records = Vec::with_capacity(cfg.values.len() * cfg.algos.len() * cfg.trials);
    for vi in 0..cfg.values.len() {
        for ai in 0..cfg.algos.len() {
            for cell in solved.iter().filter(|c| c.value_idx == vi) {
                let mut rec = cell.records[ai].clone();
                rec.trial_index = cell.trial;
                records.push(rec);
            }
        }
    }

    write_records(out, json, &records).map_err(|e| format!("write failed: {e}"))?;
    print_summary(cfg, &records);
    Ok(records)
}

/// Median-per-cell summary, printed to stderr so it never mixes with
/// record output on stdout.
fn print_summary(cfg: &SweepConfig, records: &[ExperimentRecord]) {
    eprintln!(
        "{:>12} {:>8} {:>3} {:>3} {:>3} {:>3} {:>3} {:>12} {:>12} {:>12} {:>9}",
        "value", "algo", "ok", "b1", "b2", "b3", "err", "med_orth", "med_resid", "med_kappa_q", "med_ms"
    );
    for (vi, &value) in cfg.values.iter().enumerate() {
        for algo in &cfg.algos {
            let cell: Vec<&ExperimentRecord> = records
                .iter()
                .filter(|r| r.algorithm == *algo && record_value(cfg, r) == vi)
                .collect();
            let count = |s: RunStatus| cell.iter().filter(|r| r.status == s).count();
            let med = |f: &dyn Fn(&ExperimentRecord) -> Option<f64>| -> String {
                let mut vals: Vec<f64> = cell.iter().filter_map(|r| f(r)).collect();
                if vals.is_empty() {
                    return "-".into();
                }
                vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
                format!("{:.3e}", median_sorted(&vals))
            };
            eprintln!(
                "{:>12} {:>8} {:>3} {:>3} {:>3} {:>3} {:>3} {:>12} {:>12} {:>12} {:>9}",
                format!("{value:e}"),
                algo,
                count(RunStatus::Ok),
                count(RunStatus::BreakdownStage1),
                count(RunStatus::BreakdownStage2),
                count(RunStatus::BreakdownStage3),
                count(RunStatus::Error),
                med(&|r| r.orth_fro),
                med(&|r| r.resid_fro),
                med(&|r| r.kappa_q),
                med(&|r| Some(r.time_ms)),
            );
        }
    }
}

fn record_value(cfg: &SweepConfig, r: &ExperimentRecord) -> usize {
    cfg.values
        .iter()
        .position(|&v| match cfg.vary {
            Vary::Kappa => r.kappa_target == Some(v),
            Vary::M => r.m == v as usize,
            Vary::N => r.n == v as usize,
        })
        .unwrap_or(usize::MAX)
}
