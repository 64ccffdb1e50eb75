//! qrkit: generate ill-conditioned test matrices, run CholeskyQR-family
//! factorizations, sweep parameters, and emit experiment tables.

mod record;
mod sweep;
mod timing;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qrkit::{
    bounds, jacobi_svd, p_value, realize, MatrixMeta, MatrixSpec, ShiftStrategy, ALGO_NAMES,
    MACHINE_UNIT,
};

use record::{matrix_facts, run_record, write_records};
use sweep::{GenKind, SweepConfig, Vary};
use timing::time_algorithm;

const EXIT_USAGE_IO: u8 = 2;
const EXIT_UNKNOWN_ALGO: u8 = 3;

#[derive(Parser)]
#[command(name = "qrkit", version, about = "CholeskyQR-family QR factorization bench harness")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a test matrix and write it in Matrix Market array format
    Gen(GenArgs),
    /// Run one algorithm on one matrix and append an experiment record
    Run(RunArgs),
    /// Sweep kappa, m or n across values x algorithms x trials
    Sweep(SweepArgs),
    /// Print the column measure, spectral norm and p of a matrix
    Pvalue(SourceArgs),
    /// Evaluate every closed-form accuracy bound for a configuration
    Bounds(BoundsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Svd,
    Hilbert,
    Arrowhead,
    File,
}

#[derive(Args)]
struct SourceArgs {
    /// Matrix family
    #[arg(long, value_enum)]
    kind: Kind,
    /// Rows (svd only)
    #[arg(long)]
    m: Option<usize>,
    /// Columns (svd), or the square dimension (hilbert/arrowhead)
    #[arg(long)]
    n: Option<usize>,
    /// Target condition number (svd only)
    #[arg(long)]
    kappa: Option<f64>,
    /// Generator seed (svd only)
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Input path (file kind only), Matrix Market array or coordinate
    #[arg(long = "in")]
    input: Option<PathBuf>,
}

impl SourceArgs {
    fn to_spec(&self) -> Result<MatrixSpec, String> {
        match self.kind {
            Kind::Svd => {
                let m = self.m.ok_or("--m is required for --kind svd")?;
                let n = self.n.ok_or("--n is required for --kind svd")?;
                let kappa = self.kappa.ok_or("--kappa is required for --kind svd")?;
                if m < n {
                    return Err("m must be >= n".into());
                }
                Ok(MatrixSpec::SvdConditioned { m, n, kappa, seed: self.seed })
            }
            Kind::Hilbert => Ok(MatrixSpec::Hilbert {
                n: self.n.ok_or("--n is required for --kind hilbert")?,
            }),
            Kind::Arrowhead => Ok(MatrixSpec::Arrowhead {
                n: self.n.ok_or("--n is required for --kind arrowhead")?,
            }),
            Kind::File => Ok(MatrixSpec::File {
                path: self.input.clone().ok_or("--in is required for --kind file")?,
            }),
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    src: SourceArgs,
    /// Output path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    src: SourceArgs,
    /// Algorithm: cholqr | cholqr2 | scqr3 | iscqr3 | hhqr
    #[arg(long)]
    algo: String,
    /// Shift rule override: original | improved | none | fixed:<v>
    #[arg(long)]
    shift: Option<String>,
    /// Append the record here (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit JSON lines instead of CSV
    #[arg(long)]
    json: bool,
    /// Timed repeats for the time_ms field
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    /// Trial index recorded in the row
    #[arg(long, default_value_t = 0)]
    trial_index: usize,
}

#[derive(Args)]
struct SweepArgs {
    /// Which parameter the values apply to
    #[arg(long, value_enum)]
    vary: VaryArg,
    /// Comma-separated sweep values
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    #[arg(long, default_value_t = 2048)]
    m: usize,
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, default_value_t = 1e12)]
    kappa: f64,
    /// Comma-separated algorithm names
    #[arg(long, value_delimiter = ',', required = true)]
    algos: Vec<String>,
    #[arg(long, default_value_t = 5)]
    trials: usize,
    /// Trial i uses seed base_seed + i
    #[arg(long, default_value_t = 1)]
    base_seed: u64,
    /// Generator family (hilbert/arrowhead only with --vary n)
    #[arg(long, value_enum, default_value_t = KindArg::Svd)]
    kind: KindArg,
    /// Shift rule override applied to scqr3
    #[arg(long)]
    shift: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VaryArg {
    Kappa,
    M,
    N,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Svd,
    Hilbert,
    Arrowhead,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    kappa: f64,
    #[arg(long)]
    p: f64,
    /// Shift-to-norm ratio t = s/sigma1^2; defaults to the column-measure
    /// shift value 11 p^2 (mnu + n(n+1)u)
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    sigma1: f64,
}

fn parse_shift(s: &str) -> Result<ShiftStrategy, String> {
    match s {
        "original" => Ok(ShiftStrategy::OriginalSpectral),
        "improved" => Ok(ShiftStrategy::ImprovedColumn),
        "none" => Ok(ShiftStrategy::NoShift),
        other => match other.strip_prefix("fixed:") {
            Some(v) => {
                let s: f64 = v.parse().map_err(|_| format!("bad fixed shift '{v}'"))?;
                if !(s > 0.0) {
                    return Err(format!("fixed shift must be positive, got {s}"));
                }
                Ok(ShiftStrategy::FixedValue(s))
            }
            None => Err(format!(
                "unknown shift '{other}' (original | improved | none | fixed:<v>)"
            )),
        },
    }
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

/// Prints to stdout, ignoring EPIPE so `qrkit ... | head` exits cleanly.
fn emit(text: &str) {
    use std::io::Write;
    let _ = std::io::stdout().write_all(text.as_bytes());
}

fn realize_or_exit(spec: &MatrixSpec) -> Result<(qrkit::DenseMatrix, MatrixMeta), ExitCode> {
    realize(spec).map_err(|e| fail(EXIT_USAGE_IO, e))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Ok(threads) = std::env::var("QRKIT_THREADS") {
        match threads.parse::<usize>() {
            Ok(t) if t >= 1 => {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build_global()
                    .ok();
            }
            _ => return fail(EXIT_USAGE_IO, format!("bad QRKIT_THREADS value '{threads}'")),
        }
    }
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Gen(args) => cmd_gen(args),
        Cmd::Run(args) => cmd_run(args),
        Cmd::Sweep(args) => cmd_sweep(args),
        Cmd::Pvalue(args) => cmd_pvalue(args),
        Cmd::Bounds(args) => cmd_bounds(args),
    }
}

fn cmd_gen(args: GenArgs) -> ExitCode {
    if args.src.kind == Kind::File {
        return fail(EXIT_USAGE_IO, "gen cannot take --kind file");
    }
    let spec = match args.src.to_spec() {
        Ok(s) => s,
        Err(e) => return fail(EXIT_USAGE_IO, e),
    };
    let (x, meta) = match realize_or_exit(&spec) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let comment = format!("qrkit gen {}", meta.description);
    match qrkit::mm::write_matrix_market_array(&args.out, &x, &[comment]) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(EXIT_USAGE_IO, e),
    }
}

fn cmd_run(args: RunArgs) -> ExitCode {
    if !ALGO_NAMES.contains(&args.algo.as_str()) {
        return fail(EXIT_UNKNOWN_ALGO, format!("unknown algorithm '{}'", args.algo));
    }
    let strategy = match args.shift.as_deref().map(parse_shift).transpose() {
        Ok(s) => s,
        Err(e) => return fail(EXIT_USAGE_IO, e),
    };
    let spec = match args.src.to_spec() {
        Ok(s) => s,
        Err(e) => return fail(EXIT_USAGE_IO, e),
    };
    let (x, meta) = match realize_or_exit(&spec) {
        Ok(v) => v,
        Err(code) => return code,
    };
    if x.rows() < x.cols() {
        return fail(EXIT_USAGE_IO, "m must be >= n");
    }
    let facts = matrix_facts(&x);
    let seed = match spec {
        MatrixSpec::SvdConditioned { seed, .. } => Some(seed),
        _ => None,
    };
    let mut rec = run_record(
        &args.algo,
        &x,
        strategy,
        &facts,
        meta.planted_kappa,
        seed,
        args.trial_index,
    );
    rec.time_ms = match time_algorithm(&args.algo, &x, strategy, args.repeats) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_USAGE_IO, e),
    };
    match write_records(args.out.as_deref(), args.json, &[rec]) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(EXIT_USAGE_IO, e),
    }
}

fn cmd_sweep(args: SweepArgs) -> ExitCode {
    for algo in &args.algos {
        if !ALGO_NAMES.contains(&algo.as_str()) {
            return fail(EXIT_UNKNOWN_ALGO, format!("unknown algorithm '{algo}'"));
        }
    }
    let strategy = match args.shift.as_deref().map(parse_shift).transpose() {
        Ok(s) => s,
        Err(e) => return fail(EXIT_USAGE_IO, e),
    };
    let cfg = SweepConfig {
        vary: match args.vary {
            VaryArg::Kappa => Vary::Kappa,
            VaryArg::M => Vary::M,
            VaryArg::N => Vary::N,
        },
        values: args.values,
        m: args.m,
        n: args.n,
        kappa: args.kappa,
        algos: args.algos,
        trials: args.trials,
        base_seed: args.base_seed,
        kind: match args.kind {
            KindArg::Svd => GenKind::Svd,
            KindArg::Hilbert => GenKind::Hilbert,
            KindArg::Arrowhead => GenKind::Arrowhead,
        },
        repeats: args.repeats,
    };
    match sweep::run_sweep(&cfg, args.out.as_deref(), args.json, strategy) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => fail(EXIT_USAGE_IO, e),
    }
}

fn cmd_pvalue(args: SourceArgs) -> ExitCode {
    let spec = match args.to_spec() {
        Ok(s) => s,
        Err(e) => return fail(EXIT_USAGE_IO, e),
    };
    let (x, _) = match realize_or_exit(&spec) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let work = if x.rows() >= x.cols() { x.clone() } else { x.transpose() };
    let g = x.g_measure();
    let svd = jacobi_svd(&work);
    let sigma1 = svd.singular_values[0];
    match p_value(&x, sigma1) {
        Ok(p) => {
            let lower = 1.0 / (x.cols() as f64).sqrt();
            let mut text = format!("[X]_g   = {:e}  (column {})\n", g.value, g.argmax_col);
            text += &format!("sigma1  = {sigma1:e}  (jacobi_svd)\n");
            text += &format!("p       = {:.6}\n", p.value);
            text += &format!("range   = [1/sqrt(n), 1] = [{lower:.6}, 1]\n");
            if p.out_of_range {
                text += "note    = p outside its exact range; sigma1 looks like an estimate\n";
            }
            emit(&text);
            ExitCode::SUCCESS
        }
        Err(e) => fail(EXIT_USAGE_IO, e),
    }
}

fn cmd_bounds(args: BoundsArgs) -> ExitCode {
    let u = MACHINE_UNIT;
    let mn_u = args.m as f64 * args.n as f64 * u;
    let n_n1_u = args.n as f64 * (args.n as f64 + 1.0) * u;
    let t = args
        .t
        .unwrap_or(11.0 * (mn_u + n_n1_u) * args.p * args.p);
    match bounds(args.m, args.n, args.kappa, args.p, t, args.sigma1) {
        Ok(b) => {
            let rows = [
                ("gamma_n", b.gamma_n),
                ("gamma_m", b.gamma_m),
                ("gamma_n1", b.gamma_n1),
                ("delta", b.delta),
                ("e_a_bound", b.e_a_bound),
                ("e_b_bound", b.e_b_bound),
                ("orth_bound_scqr", b.orth_bound_scqr),
                ("resid_bound_scqr", b.resid_bound_scqr),
                ("orth_bound_scqr3", b.orth_bound_scqr3),
                ("resid_bound_scqr3", b.resid_bound_scqr3),
                ("kappa_q_bound", b.kappa_q_bound),
                ("kappa_sufficient", b.kappa_sufficient),
            ];
            let text: String = rows
                .iter()
                .map(|(name, v)| format!("{name:<18} = {v:e}\n"))
                .collect();
            emit(&text);
            ExitCode::SUCCESS
        }
        Err(e) => fail(EXIT_USAGE_IO, e),
    }
}
