//! `metacode` command-line front end.
//!
//! Settings are layered: built-in defaults, then `--config FILE`, then
//! per-command flags. Every artifact lands under `--out` (default `out/`)
//! next to a `.manifest.json` sidecar, and existing files are never
//! replaced.

mod commands;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::arraysim::SteerTarget;
use crate::inverse::Anchor;
use crate::pattern::Genome;
use crate::Result;

#[derive(Debug, Parser)]
#[command(name = "metacode", version, about = "Inverse design of 1-bit coding metasurfaces")]
pub struct Cli {
    /// JSON run configuration; missing fields take their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `out_dir` in the config).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads. Results do not depend on this.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the ideal-coding S22 over a band and save the target.
    Target(TargetArgs),
    /// Generate an oracle dataset.
    Gen(GenArgs),
    /// Train the surrogate on a dataset.
    Train(TrainArgs),
    /// Run the genetic search against a target.
    Design(DesignArgs),
    /// Validate a genome with both switch states loaded.
    Validate(ValidateArgs),
    /// Synthesise a coding matrix and compute far-field patterns.
    Array(ArrayArgs),
}

fn parse_band(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or("band must be f_lo:f_hi in Hz")?;
    let lo: f64 = a.trim().parse().map_err(|_| format!("bad frequency {a:?}"))?;
    let hi: f64 = b.trim().parse().map_err(|_| format!("bad frequency {b:?}"))?;
    Ok((lo, hi))
}

#[derive(Debug, Args)]
pub struct TargetArgs {
    /// Band `f_lo:f_hi` in Hz.
    #[arg(long, value_parser = parse_band, conflicts_with = "freq")]
    pub band: Option<(f64, f64)>,
    /// Single frequency in Hz.
    #[arg(long)]
    pub freq: Option<f64>,
    /// Out-of-band requirement `f:re:im` (repeatable).
    #[arg(long = "anchor")]
    pub anchors: Vec<Anchor>,
    /// Anchor weight.
    #[arg(long)]
    pub w_out: Option<f64>,
    #[arg(long, default_value = "target.json")]
    pub name: String,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "dataset.bin")]
    pub name: String,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Dataset file; relative paths are also looked up under the output directory.
    #[arg(long, default_value = "dataset.bin")]
    pub dataset: PathBuf,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub init_seed: Option<u64>,
    #[arg(long, default_value = "surrogate.bin")]
    pub name: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Evaluator {
    Oracle,
    Surrogate,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[arg(long)]
    pub target: PathBuf,
    #[arg(long, value_enum, default_value = "surrogate")]
    pub evaluator: Evaluator,
    /// Surrogate checkpoint, used with `--evaluator surrogate`.
    #[arg(long, default_value = "surrogate.bin")]
    pub model: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub population: Option<usize>,
    #[arg(long)]
    pub generations: Option<usize>,
    /// Prefix of the written files.
    #[arg(long, default_value = "design")]
    pub name: String,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// 16 hex digits.
    #[arg(long)]
    pub genome: Genome,
    #[arg(long)]
    pub target: Option<PathBuf>,
    /// Surrogate checkpoint whose prediction is compared with the oracle.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value = "validate")]
    pub name: String,
}

#[derive(Debug, Args)]
pub struct ArrayArgs {
    /// Beam direction `theta:phi` in degrees.
    #[arg(long, default_value = "0:0")]
    pub steer: SteerTarget,
    /// Frequency in Hz (defaults to the design frequency).
    #[arg(long)]
    pub freq: Option<f64>,
    /// Design report whose state reflections load the array; ideal ±1 otherwise.
    #[arg(long)]
    pub design: Option<PathBuf>,
    /// Reference phase in radians.
    #[arg(long)]
    pub ref_phase: Option<f64>,
    /// Use unquantised phases.
    #[arg(long)]
    pub continuous: bool,
    /// Also write a 1-degree hemisphere PGM.
    #[arg(long)]
    pub hemisphere: bool,
    /// Angular step of the principal cuts, degrees.
    #[arg(long, default_value_t = 0.25)]
    pub step: f64,
    #[arg(long, default_value = "array")]
    pub name: String,
}

/// Runs a parsed command line. `args` are recorded in manifests.
pub fn execute(cli: &Cli, args: &[String], out: &mut (dyn Write + Send)) -> Result<()> {
    let ctx = commands::Context::new(cli, args)?;
    let jobs = cli.jobs;
    crate::with_jobs(jobs, || ctx.dispatch(&cli.command, out))?
}

/// Process entry point: usage errors exit with 2, runtime errors with 1.
pub fn main_entry() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match execute(&cli, &args[1..], &mut std::io::stdout()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
