//! Command-line driver: argument parsing, input resolution and output
//! formatting around `spa_core`.

mod commands;
pub mod reproduce;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use spa_core::channels::ChannelRep;
use spa_core::optics::Polarization;
use spa_core::qmath::{ComplexMatrix, DensityMatrix};
use spa_core::shots::{named_channel, SourceModel, SpaScheme};

pub use reproduce::{reproduce, Check, ReproduceConfig, ReproductionReport, Summary};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Validation(#[from] spa_core::Error),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "spa",
    version,
    about = "Simulate and characterize the SPA transpose of a polarization qubit"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Master seed for every random draw.
    #[arg(long, global = true, default_value_t = 2024)]
    pub seed: u64,
    /// Coincidence rate in counts per second.
    #[arg(long, global = true, default_value_t = 4000.0)]
    pub rate: f64,
    /// Measurement time per setting and repetition, in seconds.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub duration: f64,
    /// Repetitions per setting.
    #[arg(long, global = true, default_value_t = 3)]
    pub reps: u32,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

impl GlobalArgs {
    pub fn source(&self) -> CliResult<SourceModel> {
        Ok(SourceModel::new(self.rate, self.duration, self.reps)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Qst,
    Qpt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FidelityArg {
    Uhlmann,
    Overlap,
    Process,
    Average,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Smallest admixture p making the SPA transpose completely positive.
    MinimalP {
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..=4))]
        dim: u64,
    },
    /// Choi and χ matrices of a channel.
    Choi {
        /// Named channel (identity, sigma-x, spa-mp, spa-u) or JSON file.
        #[arg(long, default_value = "spa-mp")]
        channel: String,
    },
    /// Simulate a tomography dataset.
    Simulate {
        /// Named state (H, V, D, A, R, L, eq4, mixed) or JSON file.
        #[arg(long, default_value = "eq4")]
        input_state: String,
        /// none, spa-mp or spa-u.
        #[arg(long, default_value = "none")]
        channel: String,
        #[arg(long, value_enum, default_value_t = KindArg::Qst)]
        kind: KindArg,
    },
    /// Maximum-likelihood state tomography.
    Qst {
        /// Count records in CSV form; simulated when omitted.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value = "eq4")]
        input_state: String,
        /// none, spa-mp or spa-u (any named channel with --noiseless).
        #[arg(long, default_value = "none")]
        channel: String,
        /// Use expected counts instead of Poisson draws.
        #[arg(long)]
        noiseless: bool,
        /// Include the per-iteration log-likelihood.
        #[arg(long)]
        trace: bool,
    },
    /// Maximum-likelihood process tomography.
    Qpt {
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value = "spa-mp")]
        channel: String,
        #[arg(long)]
        noiseless: bool,
        #[arg(long)]
        trace: bool,
    },
    /// Fidelity between two states or two channels.
    Fidelity {
        #[arg(long, value_enum, default_value_t = FidelityArg::Uhlmann)]
        kind: FidelityArg,
        /// Haar samples for a Monte Carlo average fidelity.
        #[arg(long)]
        samples: Option<usize>,
        a: String,
        b: String,
    },
    /// Run every check and seeded reconstruction and write a report.
    ReproducePaper {
        /// Shot-noise state-tomography trials per configuration.
        #[arg(long, default_value_t = 100)]
        qst_trials: usize,
        /// Shot-noise process-tomography trials per scheme.
        #[arg(long, default_value_t = 5)]
        qpt_trials: usize,
        /// Haar samples per Monte Carlo average fidelity.
        #[arg(long, default_value_t = 20_000)]
        mc_samples: usize,
    },
}

/// Published reconstruction of the example input state.
pub fn example_input_state() -> DensityMatrix {
    let c = Complex64::new;
    let m = ComplexMatrix::from_rows(&[
        [c(0.322, 0.0), c(0.352, -0.307)],
        [c(0.352, 0.307), c(0.678, 0.0)],
    ])
    .expect("2x2");
    DensityMatrix::new(m).expect("positive unit-trace matrix")
}

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = read_file(path)?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::Validation(spa_core::Error::Serialization(format!(
            "{}: {e}",
            path.display()
        )))
    })
}

pub fn resolve_state(name: &str) -> CliResult<DensityMatrix> {
    if name == "eq4" {
        return Ok(example_input_state());
    }
    if name == "mixed" {
        return Ok(DensityMatrix::maximally_mixed(2));
    }
    if let Some(p) = Polarization::from_label(name) {
        return Ok(DensityMatrix::pure(&p.ket()));
    }
    parse_json(Path::new(name))
}

pub fn resolve_channel(name: &str) -> CliResult<ChannelRep> {
    match named_channel(name) {
        Some(c) => Ok(c),
        None => parse_json(Path::new(name)),
    }
}

pub fn resolve_scheme(name: &str) -> CliResult<Option<SpaScheme>> {
    match name {
        "none" => Ok(None),
        "spa-mp" => Ok(Some(SpaScheme::MeasurePrepare)),
        "spa-u" => Ok(Some(SpaScheme::Unitary)),
        other => Err(CliError::Usage(format!(
            "channel '{other}' cannot be simulated photon by photon; use none, spa-mp or spa-u"
        ))),
    }
}

/// Write to `--out` or stdout.
pub fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn to_json<T: serde::Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(spa_core::Error::from)?;
    s.push('\n');
    Ok(s)
}

/// Parse and run; returns the process exit code.
pub fn run_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> CliResult<i32> {
    match cli.global.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?
            .install(|| commands::dispatch(cli)),
        None => commands::dispatch(cli),
    }
}
