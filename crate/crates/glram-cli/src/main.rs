//! `glram` — generation, selection, regression, oracle checks, and the
//! full benchmark experiment from one executable.
//!
//! Exit codes: 0 success, 2 argument/input error, 3 capability or
//! enumeration-budget error, 4 numerical failure. Logging goes to stderr
//! and is controlled by the GLRAM_LOG environment variable
//! (error | info | debug).

mod commands;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MatrixFormat {
    Csv,
    Bin,
}

impl MatrixFormat {
    pub fn is_binary(self) -> bool {
        matches!(self, MatrixFormat::Bin)
    }
}

#[derive(Parser, Debug)]
#[command(name = "glram", version, about = "Column subset selection for entrywise low-rank approximation under general loss functions")]
struct Cli {
    /// Base seed for every randomized stage.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads for per-column solves (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// File format for matrix outputs (inputs are sniffed).
    #[arg(long, global = true, value_enum, default_value_t = MatrixFormat::Csv)]
    format: MatrixFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic or adversarial matrix.
    Gen {
        /// exp3block | huber_hard | reverse_huber | identity_jl | planted
        #[arg(long)]
        kind: String,
        #[arg(long)]
        n: usize,
        /// Distinct-column count for exp3block (defaults per size table).
        #[arg(long)]
        kprime: Option<usize>,
        /// Rank / group parameter where the kind takes one.
        #[arg(long)]
        k: Option<usize>,
        /// Target entrywise deviation for identity_jl.
        #[arg(long)]
        eps: Option<f64>,
        /// Noise model for planted, e.g. "mixed:sigma=0.05,density=0.05,magnitude=5".
        #[arg(long)]
        noise_model: Option<String>,
        #[arg(long)]
        out: PathBuf,
        /// Optional output for the planted low-rank part.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Optional output for the residual part.
        #[arg(long)]
        noise: Option<PathBuf>,
    },
    /// Select columns of a matrix and report the fitted cost.
    Select {
        #[arg(long)]
        loss: String,
        #[arg(long)]
        k: usize,
        /// theory | experiment
        #[arg(long, default_value = "experiment")]
        preset: String,
        #[arg(long)]
        matrix: PathBuf,
        /// Trace JSON output path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Multiple-response regression of B's columns against A.
    Regress {
        #[arg(long)]
        loss: String,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Coefficient matrix output.
        #[arg(long)]
        out: PathBuf,
        /// Per-column estimated costs output (one value per line).
        #[arg(long)]
        costs: PathBuf,
    },
    /// Structural spot checks on random instances.
    Oracle {
        /// lemma21 | cramer | ati
        #[arg(long)]
        check: String,
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 2000)]
        trials: usize,
        /// Term count for the ati check.
        #[arg(long, default_value_t = 3)]
        t: usize,
        #[arg(long, default_value = "huber:tau=1")]
        loss: String,
        /// Report JSON path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the three-block benchmark against SVD and l1 baselines.
    Experiment {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value = "experiment")]
        preset: String,
        /// Alternations for the l1 baseline.
        #[arg(long, default_value_t = 50)]
        alternations: usize,
        #[arg(long)]
        out_dir: PathBuf,
        /// Echo the configuration without computing anything.
        #[arg(long, default_value_t = false)]
        dry_run: bool,
    },
    /// Measure subset-vs-witness cost ratios on hard instances.
    Hardness {
        /// huber | reverse_huber
        #[arg(long)]
        kind: String,
        /// Comma-separated sizes, e.g. "64,256,1024" (may be empty).
        #[arg(long, default_value = "")]
        sizes: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(
        env_logger::Env::new().filter_or("GLRAM_LOG", "error"),
    )
    .format_timestamp(None)
    .init();

    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("glram: could not configure {} threads: {e}", cli.threads);
            return ExitCode::from(2);
        }
    }

    let result = match &cli.command {
        Command::Gen { kind, n, kprime, k, eps, noise_model, out, truth, noise } => commands::gen(
            kind,
            *n,
            *kprime,
            *k,
            *eps,
            noise_model.as_deref(),
            out,
            truth.as_deref(),
            noise.as_deref(),
            cli.seed,
            cli.format,
        ),
        Command::Select { loss, k, preset, matrix, out } => {
            commands::select(loss, *k, preset, matrix, out, cli.seed)
        }
        Command::Regress { loss, a, b, out, costs } => {
            commands::regress(loss, a, b, out, costs, cli.format)
        }
        Command::Oracle { check, n, k, trials, t, loss, out } => {
            commands::oracle(check, *n, *k, *trials, *t, loss, out.as_deref(), cli.seed)
        }
        Command::Experiment { n, k, preset, alternations, out_dir, dry_run } => {
            commands::experiment(*n, *k, preset, *alternations, out_dir, *dry_run, cli.seed, cli.format)
        }
        Command::Hardness { kind, sizes, out } => commands::hardness(kind, sizes, out, cli.seed),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("glram: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
