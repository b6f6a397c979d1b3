//! The `kbp` command-line tool: argument model, dispatch and exit codes.
//!
//! Exit codes: `0` success, `1` negative outcome (a claim fails or no
//! certificate exists up to the maximum degree), `2` invalid parameters,
//! `3` numerical accuracy or internal consistency failure.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use kbp_core::certify::{body_profile_for, certify_with_doubling, DEFAULT_DEGREE, MAX_DEGREE};
use kbp_core::construct::{
    build_g, verify_claims, BumpVariant, ConstructionParams, DEFAULT_EPS, DEFAULT_GRID, DEFAULT_S0,
};
use kbp_core::output::{to_stable_json, write_profile_csv};
use kbp_core::{selftest, ConstantsTable, DimPair, Error, RadialProfile, Transition};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_PARAMETER: i32 = 2;
pub const EXIT_ACCURACY: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Normalization constants for (n, k).
    Constants,
    /// Build the bump profile and report the quantities behind it.
    Construct,
    /// Build the profile and check both transform inequalities on a grid.
    Verify,
    /// Find a non-negative Bernstein witness pairing negatively with the profile.
    Certify,
    /// Write the meridian profile of the body as CSV.
    Profile,
    /// Run the seeded invariant suite.
    Selftest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Variant {
    #[default]
    Parabola,
    Glued,
}

impl From<Variant> for BumpVariant {
    fn from(v: Variant) -> Self {
        match v {
            Variant::Parabola => BumpVariant::Parabola,
            Variant::Glued => BumpVariant::Glued(Transition::default()),
        }
    }
}

/// Parsed command line.
#[derive(Debug, Clone, PartialEq, Parser)]
#[command(
    name = "kbp",
    version,
    about = "Bodies of revolution separating k-intersection and k-Busemann-Petty bodies"
)]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: Command,
    /// Ambient dimension (at least 4).
    #[arg(long)]
    pub n: Option<u32>,
    /// Class index, 2 <= k <= n - 2.
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long, default_value_t = DEFAULT_S0)]
    pub s0: f64,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    pub eps: f64,
    #[arg(long, value_enum, default_value_t = Variant::Parabola)]
    pub variant: Variant,
    /// Grid size for verification, the witness floor and the profile CSV.
    #[arg(long, default_value_t = DEFAULT_GRID)]
    pub grid: usize,
    /// Starting Bernstein degree; doubled on failure up to the maximum.
    #[arg(long, default_value_t = DEFAULT_DEGREE)]
    pub degree: usize,
    /// Include every Bernstein moment in the certificate bundle.
    #[arg(long)]
    pub emit_moments: bool,
    /// Output file; JSON goes to stdout when absent. Required by `profile`.
    #[arg(long = "out")]
    pub output_path: Option<PathBuf>,
    #[arg(long, default_value_t = selftest::DEFAULT_SEED)]
    pub seed: u64,
    /// Replaces the constructed profile in `verify`, `certify` and `profile`.
    #[arg(skip)]
    pub g_override: Option<RadialProfile>,
}

impl RunConfig {
    /// A configuration with every default filled in.
    pub fn new(command: Command, n: u32, k: u32) -> Self {
        Self {
            command,
            n: Some(n),
            k: Some(k),
            s0: DEFAULT_S0,
            eps: DEFAULT_EPS,
            variant: Variant::Parabola,
            grid: DEFAULT_GRID,
            degree: DEFAULT_DEGREE,
            emit_moments: false,
            output_path: None,
            seed: selftest::DEFAULT_SEED,
            g_override: None,
        }
    }

    fn dims(&self) -> Result<DimPair, Error> {
        match (self.n, self.k) {
            (Some(n), Some(k)) => DimPair::new(n, k),
            _ => Err(Error::Parameter("--n and --k are required for this command".into())),
        }
    }

    fn params(&self) -> Result<ConstructionParams, Error> {
        ConstructionParams::new(self.dims()?, self.s0, self.eps, self.variant.into())
    }
}

/// Exit status for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Domain(_) | Error::Unsupported(_) | Error::Parameter(_) | Error::GammaNotBelowOne(_) => EXIT_PARAMETER,
        Error::Accuracy { .. } | Error::Inconsistent(_) => EXIT_ACCURACY,
        Error::CertificateNotFound { .. } => EXIT_NEGATIVE,
    }
}

enum Failure {
    Lib(Error),
    Io(io::Error),
    Negative(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

/// Execute `config`, writing documents to `stdout` (or `--out`) and
/// diagnostics to `stderr`; returns the process exit code.
pub fn run(config: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match dispatch(config, stdout) {
        Ok(()) => EXIT_OK,
        Err(failure) => {
            let (code, message) = match failure {
                Failure::Lib(e) => (exit_code(&e), e.to_string()),
                Failure::Io(e) => (EXIT_PARAMETER, format!("output: {e}")),
                Failure::Negative(m) => (EXIT_NEGATIVE, m),
            };
            let _ = writeln!(stderr, "kbp: {message}");
            code
        }
    }
}

fn dispatch(config: &RunConfig, stdout: &mut dyn Write) -> Result<(), Failure> {
    if config.grid < 2 {
        return Err(Error::Parameter(format!("--grid must be at least 2, got {}", config.grid)).into());
    }
    if config.degree < 1 || config.degree > MAX_DEGREE {
        return Err(Error::Parameter(format!("--degree must lie in 1..={MAX_DEGREE}, got {}", config.degree)).into());
    }
    match config.command {
        Command::Constants => {
            let table = ConstantsTable::new(config.dims()?)?;
            emit_json(config, stdout, &table)
        }
        Command::Construct => {
            let built = build_g(&config.params()?)?;
            emit_json(config, stdout, &built)
        }
        Command::Verify => {
            let checked = checked_construction(config)?;
            emit_json(config, stdout, &checked)?;
            if checked.passed() {
                Ok(())
            } else {
                Err(Failure::Negative(
                    "a transform claim fails on the grid (margin minus slack < 0)".into(),
                ))
            }
        }
        Command::Certify => {
            let checked = checked_construction(config)?;
            if !checked.passed() {
                emit_json(config, stdout, &checked)?;
                return Err(Failure::Negative(
                    "construction does not pass verification; nothing to certify".into(),
                ));
            }
            let cert = certify_with_doubling(&checked.params, &checked.g, config.degree, MAX_DEGREE)?;
            emit_json(config, stdout, &cert.to_bundle(config.emit_moments))
        }
        Command::Profile => {
            let Some(path) = &config.output_path else {
                return Err(Error::Parameter("profile writes CSV and needs --out PATH".into()).into());
            };
            let params = config.params()?;
            let g = match &config.g_override {
                Some(g) => g.clone(),
                None => build_g(&params)?.g,
            };
            let rows = body_profile_for(params.dims, &g, config.grid)?;
            write_profile_csv(BufWriter::new(File::create(path)?), &rows)?;
            Ok(())
        }
        Command::Selftest => {
            let report = selftest::run(config.seed);
            emit_json(config, stdout, &report)?;
            if report.all_passed() {
                Ok(())
            } else {
                Err(Failure::Negative(format!(
                    "{} of {} self-checks failed",
                    report.failed,
                    report.checks.len()
                )))
            }
        }
    }
}

/// Build (or take the override of) the profile and attach the grid check.
fn checked_construction(config: &RunConfig) -> Result<kbp_core::ConstructionResult, Failure> {
    let params = config.params()?;
    let mut built = build_g(&params)?;
    if let Some(g) = &config.g_override {
        built.value_at_s0 = g.evaluate(params.s0)?;
        built.g = g.clone();
    }
    Ok(verify_claims(&built, params.dims, config.grid)?)
}

fn emit_json<T: serde::Serialize>(config: &RunConfig, stdout: &mut dyn Write, value: &T) -> Result<(), Failure> {
    let text = to_stable_json(value)?;
    match &config.output_path {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            writeln!(file, "{text}")?;
            file.flush()?;
        }
        None => writeln!(stdout, "{text}")?,
    }
    Ok(())
}
