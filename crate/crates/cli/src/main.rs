// SPDX-License-Identifier: Apache-2.0

//! `tnslab` command-line front end.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 validation failure, 3 capacity
//! exceeded, 64 usage error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use tnslab::TnsError;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Invalid(String),
    Io(String),
    Tns(TnsError),
}

impl From<TnsError> for CliError {
    fn from(e: TnsError) -> Self {
        CliError::Tns(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 64,
            CliError::Io(_) => 1,
            CliError::Invalid(_) => 2,
            CliError::Tns(e) if e.is_capacity() => 3,
            CliError::Tns(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(s) | CliError::Invalid(s) | CliError::Io(s) => f.write_str(s),
            CliError::Tns(e) => write!(f, "{}", e),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "tnslab", version, about = "Construct, certify and probe tensor network states")]
struct Cli {
    /// JSON file with defaults for the subcommand's options.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a state or network and write it as JSON.
    Construct(ConstructArgs),
    /// Run structural checks on a JSON artifact.
    Certify(CertifyArgs),
    /// Schmidt coefficients of a state across its chain cuts.
    Schmidt(SchmidtArgs),
    /// Injectivity length of a translation-invariant tensor.
    Injectivity(InjectivityArgs),
    /// Measured versus predicted stabilizer and tangent dimensions.
    Geometry(GeometryArgs),
    /// Regularized overlap or energy optimization with a CSV trace.
    Optimize(OptimizeArgs),
    /// Closed-form curves along a family on an eps grid.
    Sweep(SweepArgs),
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructArgs {
    /// w, psi_w, w_obc, psi_w_timps, psi_tau, tau, mu, aklt, random_obc, ttns, mera, peps_loop
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Grid rows and columns for peps_loop.
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long)]
    pub cols: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Comma-separated: finite, norm, canonical, schmidt_ranks, isometry,
    /// orthonormal, injectivity. Defaults to every check that applies.
    #[arg(long, value_delimiter = ',')]
    pub checks: Option<Vec<String>>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchmidtArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Single cut (1-based); all cuts when omitted.
    #[arg(long)]
    pub cut: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InjectivityArgs {
    /// Translation-invariant periodic chain in JSON.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Built-in tensor instead of a file: aklt or psi_w.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Largest block length tried; defaults to the Wielandt bound.
    #[arg(long)]
    pub ell_max: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryArgs {
    /// mu, tau, generic or pmps.
    #[arg(long)]
    pub state: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeArgs {
    /// distance or energy.
    #[arg(long)]
    pub objective: Option<String>,
    /// Target for distance runs: w or random.
    #[arg(long)]
    pub target: Option<String>,
    /// obc, pbc or ti.
    #[arg(long)]
    pub set: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// none, tensor_norm or transfer_product.
    #[arg(long)]
    pub regularization: Option<String>,
    /// Coupling angle of the bilinear-biquadratic chain for energy runs.
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub divergence_threshold: Option<f64>,
    /// Start translation-invariant runs from the W-family tensor at this eps.
    #[arg(long)]
    pub init_eps: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepArgs {
    /// psi_w or psi_tau.
    #[arg(long)]
    pub family: Option<String>,
    /// One or more chain lengths, comma-separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(default, deserialize_with = "one_or_many")]
    pub n: Option<Vec<usize>>,
    #[arg(long)]
    pub m: Option<usize>,
    /// Decade range `1e-1..1e-4` or a comma-separated list.
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Accepts `5` as well as `[3, 5, 7]`.
fn one_or_many<'de, D: serde::Deserializer<'de>>(de: D) -> Result<Option<Vec<usize>>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Form {
        One(usize),
        Many(Vec<usize>),
    }
    Ok(Option::<Form>::deserialize(de)?.map(|f| match f {
        Form::One(x) => vec![x],
        Form::Many(v) => v,
    }))
}

fn run(argv: Vec<String>) -> Result<(), CliError> {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{}", e);
                    Ok(())
                }
                _ => Err(CliError::Usage(e.to_string())),
            };
        }
    };
    let cfg = cli.config.as_deref();
    match cli.command {
        Command::Construct(a) => commands::construct(config::merge(&a, cfg)?),
        Command::Certify(a) => commands::certify(config::merge(&a, cfg)?),
        Command::Schmidt(a) => commands::schmidt(config::merge(&a, cfg)?),
        Command::Injectivity(a) => commands::injectivity(config::merge(&a, cfg)?),
        Command::Geometry(a) => commands::geometry(config::merge(&a, cfg)?),
        Command::Optimize(a) => commands::optimize(config::merge(&a, cfg)?),
        Command::Sweep(a) => commands::sweep(config::merge(&a, cfg)?),
    }
}

fn main() -> ExitCode {
    match run(std::env::args().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(s) => eprint!("{}", s),
                other => eprintln!("tnslab: {}", other),
            }
            ExitCode::from(e.exit_code())
        }
    }
}
