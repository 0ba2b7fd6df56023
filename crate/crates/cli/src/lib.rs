//! Command line front end: configuration, dispatch and run artifacts.

pub mod config;
pub mod output;

mod commands;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use salt_core::sde::Monitor;

pub use config::RunConfig;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "salt", version, about = "Stochastic Navier-Stokes Galerkin simulator and audits")]
struct Cli {
    /// Flat TOML configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Output directory (default `out/<subcommand>`).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Blow-up functional driving the stopping time.
    #[arg(long, global = true, value_enum)]
    monitor: Option<MonitorArg>,
    /// Skip echoing the summary to stdout.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MonitorArg {
    #[value(name = "H")]
    H,
    #[value(name = "V")]
    V,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Integrate one trajectory and write norms, snapshots and the stop event.
    Simulate,
    /// Coupled-level Cauchy, uniform-bound and small-time experiments.
    Cauchy,
    /// Audit the operator inequalities.
    Assumptions,
    /// Exact-solution regression on the Taylor-Green vortex.
    TaylorGreen,
    /// Describe the grid, spectrum and noise ensemble.
    Info,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Cauchy => "cauchy",
            Command::Assumptions => "assumptions",
            Command::TaylorGreen => "taylor-green",
            Command::Info => "info",
        }
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// exit code: 0 pass, 1 failed audit or run, 2 usage or configuration error.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(err) => {
            let code = if err.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = err.print();
            return code;
        }
    };
    let mut cfg = match &cli.config {
        Some(path) => match RunConfig::load(path) {
            Ok(c) => c,
            Err(err) => {
                eprintln!("error: {err:#}");
                return EXIT_USAGE;
            }
        },
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    if let Some(m) = cli.monitor {
        cfg.monitor = match m {
            MonitorArg::H => Monitor::H,
            MonitorArg::V => Monitor::V,
        };
    }
    if let Err(err) = cfg.validate().and_then(|_| cfg.to_toml().map(|_| ())) {
        eprintln!("error: {err:#}");
        return EXIT_USAGE;
    }
    let inv = commands::Invocation {
        subcommand: cli.command.name(),
        out: cli.out.clone().unwrap_or_else(|| PathBuf::from("out").join(cli.command.name())),
        cfg,
        quiet: cli.quiet,
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(inv.cfg.threads).build() {
        Ok(p) => p,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_USAGE;
        }
    };
    let result = pool.install(|| match cli.command {
        Command::Simulate => commands::simulate_cmd(&inv),
        Command::Cauchy => commands::cauchy_cmd(&inv),
        Command::Assumptions => commands::assumptions_cmd(&inv),
        Command::TaylorGreen => commands::taylor_green_cmd(&inv),
        Command::Info => commands::info_cmd(&inv),
    });
    match result {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(err) => {
            eprintln!("error: {err:#}");
            if is_usage(&err) {
                EXIT_USAGE
            } else {
                EXIT_FAIL
            }
        }
    }
}

/// Parameter errors surfaced while building the run count as usage errors.
fn is_usage(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        matches!(
            e.downcast_ref::<salt_core::Error>(),
            Some(salt_core::Error::InvalidParameter { .. } | salt_core::Error::LevelOutOfRange { .. } | salt_core::Error::InvalidGrid(_))
        )
    })
}
