//! `batchprop` command-line front end.
//!
//! Subcommands: `train`, `eval`, `gradcheck`, `batch-sweep`. CSV data goes to
//! files or standard output; diagnostics go to standard error. Exit codes are
//! 0 on success, 1 on runtime failure and 2 on usage errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use batchprop::Topology;
use clap::{Args, Parser, Subcommand};

mod commands;
pub mod config;
pub mod metrics;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or configuration; exit 2.
    Usage(String),
    /// Anything that went wrong while running; exit 1.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_FAILURE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<batchprop::Error> for CliError {
    fn from(e: batchprop::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "batchprop",
    version,
    about = "Train and check dense sigmoid networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a network on a CSV dataset.
    Train(TrainArgs),
    /// Report the error of a checkpoint on a dataset.
    Eval(EvalArgs),
    /// Compare backprop gradients with central finite differences.
    Gradcheck(GradcheckArgs),
    /// Train once per batch size and report the final error of each.
    BatchSweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Dataset CSV (`x1..xn,t1..tm` header).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Layer widths, input first, e.g. `2,2,1`.
    #[arg(long)]
    pub topology: Option<Topology>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Micro-batches per batch, computed in parallel.
    #[arg(long)]
    pub shards: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Checkpoint to write after training.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-epoch metrics CSV to write.
    #[arg(long)]
    pub metrics: Option<PathBuf>,
    /// `key=value` file; its entries override the flags above.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Record measured wall time instead of 0 in the `wall_ms` column.
    #[arg(long)]
    pub wall_time: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub checkpoint: PathBuf,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    #[arg(long, default_value = "2,2,2")]
    pub topology: Topology,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Rows in the random batch.
    #[arg(long, default_value_t = 2)]
    pub batch: usize,
    #[arg(long, default_value_t = batchprop::gradcheck::DEFAULT_EPSILON)]
    pub epsilon: f64,
    #[arg(long, default_value_t = batchprop::gradcheck::DEFAULT_RTOL)]
    pub rtol: f64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub topology: Option<Topology>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Batch sizes to try, e.g. `1,2,4,8`.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub wall_time: bool,
}

/// Parses `args` and runs the chosen subcommand, writing data to `out` and
/// diagnostics to `err`. Returns the process exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            // Help and version are requested output, not diagnostics.
            if code == 0 {
                let _ = out.write_all(rendered.as_bytes());
            } else {
                let _ = err.write_all(rendered.as_bytes());
            }
            return u8::try_from(code).unwrap_or(EXIT_USAGE);
        }
    };
    let result = match cli.command {
        Command::Train(a) => commands::train::run(a, err),
        Command::Eval(a) => commands::eval::run(a, out),
        Command::Gradcheck(a) => commands::gradcheck::run(a, out),
        Command::BatchSweep(a) => commands::sweep::run(a, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.exit_code()
        }
    }
}

pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let code = run_with(args, &mut stdout.lock(), &mut stderr.lock());
    let _ = std::io::stdout().flush();
    code
}
