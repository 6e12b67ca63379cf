//! The `msrg` command line: `simulate`, `rg`, `mc`, `phase`, `verify`.
//!
//! Exit codes: 0 success, 1 a verified property failed, 2 configuration
//! error, 3 runtime error.

mod commands;
pub mod config;
pub mod io;
pub mod verify;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{parse_levels, parse_literals, parse_reg, Literal, ModelChoice, RunConfig, OUT_DIR_ENV};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

/// Outcome of a successful command run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    PropertyFailed,
}

#[derive(Debug, Parser)]
#[command(name = "msrg", version, about = "Multi-scale lattice dynamics and renormalization-group flow maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one problem per level; write lattice CSV, raster and blowup report.
    Simulate(Overrides),
    /// Export flow-map tables in Cantor coordinates per level.
    Rg(Overrides),
    /// Monte Carlo expectations and convergence fits.
    Mc(Overrides),
    /// Circle-model coefficients and limit-kernel report.
    Phase(Overrides),
    /// Run the property suites; exit 1 on any failure.
    Verify(Overrides),
}

/// Command-line overrides of [`RunConfig`] fields.
#[derive(Debug, Args)]
struct Overrides {
    /// TOML run configuration.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// `a`, `b` or `phase`.
    #[arg(long)]
    model: Option<String>,
    /// Initial values, comma separated (`0,1` or `1/4,3/8`).
    #[arg(long)]
    initial: Option<String>,
    /// Boundary values `b_0,b_1,...`.
    #[arg(long)]
    boundary: Option<String>,
    /// Levels: `8`, `6..20` or `1,2,4`.
    #[arg(short = 'N', long)]
    levels: Option<String>,
    /// `cutoff`, `unit` or `const:<value>`.
    #[arg(long, value_parser = parse_reg)]
    reg: Option<crate::solver::RegSpec>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Dyadic time such as `1.5` or `3/2`.
    #[arg(long)]
    horizon: Option<String>,
    /// Bernoulli noise probability as `num/den`.
    #[arg(long)]
    bernoulli: Option<String>,
    /// Output directory (default: the config value, then `$MSRG_OUT_DIR`, then `msrg-out`).
    #[arg(short, long, env = OUT_DIR_ENV)]
    out: Option<PathBuf>,
    /// Map-table depth for `rg`.
    #[arg(long)]
    depth: Option<usize>,
    /// Stochastic mode for `rg`.
    #[arg(long)]
    stochastic: bool,
    /// Strong-solution analysis for `simulate`.
    #[arg(long)]
    strong: bool,
    /// Skip rasters.
    #[arg(long)]
    no_raster: bool,
    /// Fault injection for `verify`: flip `f(u, v)` in the simulated model.
    #[arg(long, value_name = "U,V")]
    fault_flip: Option<String>,
}

impl Overrides {
    fn apply(&self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(m) = &self.model {
            c.model = ModelChoice::Named(m.clone());
        }
        if let Some(s) = &self.initial {
            c.initial = parse_literals(s);
        }
        if let Some(s) = &self.boundary {
            c.boundary = parse_literals(s);
        }
        if let Some(l) = &self.levels {
            c.levels = parse_levels(l).map_err(CliError::Config)?;
        }
        if let Some(r) = &self.reg {
            c.reg = r.clone();
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(s) = self.samples {
            c.samples = s;
        }
        if let Some(h) = &self.horizon {
            c.horizon = h.clone();
        }
        if let Some(b) = &self.bernoulli {
            let (num, den) = b
                .split_once('/')
                .and_then(|(n, d)| Some((n.trim().parse().ok()?, d.trim().parse().ok()?)))
                .ok_or_else(|| CliError::Config(format!("bad Bernoulli probability {b:?} (expected num/den)")))?;
            c.noise = Some(crate::stochastic::NoiseSpec::Bernoulli { num, den });
        }
        if let Some(o) = &self.out {
            c.out_dir = Some(o.clone());
        }
        if let Some(d) = self.depth {
            c.rg.depth = d;
        }
        c.rg.stochastic |= self.stochastic;
        c.strong |= self.strong;
        if self.no_raster {
            c.raster = false;
        }
        if let Some(f) = &self.fault_flip {
            let parts: Vec<u8> = f.split(',').filter_map(|x| x.trim().parse().ok()).collect();
            match parts[..] {
                [u, v] if u <= 1 && v <= 1 => c.verify.fault = Some(config::Fault { f_flip: [u, v] }),
                _ => return Err(CliError::Config(format!("bad fault {f:?} (expected U,V in 0/1)"))),
            }
        }
        Ok(c)
    }
}

type Runner = fn(&RunConfig) -> Result<Status, CliError>;

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (overrides, cmd): (&Overrides, Runner) = match &cli.command {
        Command::Simulate(o) => (o, commands::simulate),
        Command::Rg(o) => (o, commands::rg),
        Command::Mc(o) => (o, commands::mc),
        Command::Phase(o) => (o, commands::phase),
        Command::Verify(o) => (o, commands::verify),
    };
    let result = overrides.apply().and_then(|cfg| cmd(&cfg));
    match result {
        Ok(Status::Ok) => 0,
        Ok(Status::PropertyFailed) => 1,
        Err(e) => {
            eprintln!("msrg: {e}");
            e.exit_code()
        }
    }
}
