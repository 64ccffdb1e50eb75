//! Wall-clock timing: one warm-up run, then the median of `repeats` timed
//! runs. Timing always executes serially; callers must not overlap timed
//! runs with other work.

use std::time::Instant;

use qrkit::{algo_dispatch, DenseMatrix, ShiftStrategy};

pub fn time_algorithm(
    algo: &str,
    x: &DenseMatrix,
    strategy: Option<ShiftStrategy>,
    repeats: usize,
) -> Result<f64, String> {
    if repeats < 3 {
        return Err(format!("repeats must be >= 3, got {repeats}"));
    }
    let _ = algo_dispatch(algo, x, strategy); // warm-up
    let mut times = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let t0 = Instant::now();
        let _ = algo_dispatch(algo, x, strategy);
        times.push(t0.elapsed().as_secs_f64() * 1e3);
    }
    times.sort_by(|a, b| a.partial_cmp(b).expect("finite timings"));
    Ok(median_sorted(&times))
}

pub fn median_sorted(sorted: &[f64]) -> f64 {
    let k = sorted.len();
    if k % 2 == 1 {
        sorted[k / 2]
    } else {
        0.5 * (sorted[k / 2 - 1] + sorted[k / 2])
    }
}
