use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use desing_cli::{commands, exit_code, parse_scene, trace::Format, Scene};
use desing_core::resolve::{Driver, DEFAULT_BUDGET};
use desing_core::{Error, InvariantValue, Result};

#[derive(Parser)]
#[command(name = "desing", version, about = "Invariants, blow-ups and minimal singularities of hypersurfaces")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum DriverName {
    Paper,
    Clean,
    Min3,
    Ncp,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatName {
    Md,
    Tsv,
}

#[derive(clap::Args)]
struct DriverArgs {
    #[arg(long, value_enum, default_value = "paper")]
    driver: DriverName,
    /// Stop where the value drops to at most this (paper driver).
    #[arg(long)]
    until: Option<String>,
    /// Clean once this value is reached (clean driver); at once if absent.
    #[arg(long)]
    at: Option<String>,
    /// Level to clean (clean driver).
    #[arg(long, default_value_t = 1)]
    level: usize,
    /// Maximum number of blow-ups.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    /// Worker threads for sibling charts.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

impl DriverArgs {
    fn driver(&self) -> Result<Driver> {
        let value = |s: &Option<String>| s.as_deref().map(str::parse::<InvariantValue>).transpose();
        Ok(match self.driver {
            DriverName::Paper => Driver::Paper {
                until: value(&self.until)?,
            },
            DriverName::Clean => Driver::Clean {
                at: value(&self.at)?,
                level: self.level,
            },
            DriverName::Min3 => Driver::Min3,
            DriverName::Ncp => Driver::Ncp,
        })
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the invariant at the origin and at the scene's points.
    Inv {
        scene: PathBuf,
        /// Compare against this many random linear coordinate changes.
        #[arg(long)]
        check: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Blow up a coordinate subspace and print the charts.
    Blowup {
        scene: PathBuf,
        /// Center variables, e.g. `z,y`; the origin when absent.
        #[arg(long, value_delimiter = ',')]
        center: Vec<String>,
        #[arg(long, default_value_t = 1)]
        marking: u32,
    },
    /// Clean the monomial part at a level of the invariant.
    Clean {
        scene: PathBuf,
        #[arg(long, default_value_t = 1)]
        level: usize,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
    /// Run a resolution driver and summarize the history.
    Resolve {
        scene: PathBuf,
        #[command(flatten)]
        args: DriverArgs,
    },
    /// Classify the singularity at the origin.
    Classify { scene: PathBuf },
    /// Run a driver and print the per-year tables.
    Trace {
        scene: PathBuf,
        #[command(flatten)]
        args: DriverArgs,
        #[arg(long, value_enum, default_value = "md")]
        format: FormatName,
    },
}

fn load(path: &PathBuf) -> Result<Scene> {
    let mut src = String::new();
    let read = if path.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut src).map(|_| ())
    } else {
        std::fs::read_to_string(path).map(|s| src = s)
    };
    read.map_err(|e| Error::Precondition(format!("{}: {e}", path.display())))?;
    parse_scene(&src)
}

fn execute(cmd: Cmd) -> Result<String> {
    match cmd {
        Cmd::Inv { scene, check, seed } => commands::inv(&load(&scene)?, check.map(|n| (n, seed))),
        Cmd::Blowup { scene, center, marking } => commands::blowup(&load(&scene)?, &center, marking),
        Cmd::Clean { scene, level, budget } => commands::clean(&load(&scene)?, level, budget),
        Cmd::Resolve { scene, args } => commands::resolve(&load(&scene)?, &args.driver()?, args.budget, args.jobs),
        Cmd::Classify { scene } => commands::classify(&load(&scene)?),
        Cmd::Trace { scene, args, format } => {
            let format = match format {
                FormatName::Md => Format::Md,
                FormatName::Tsv => Format::Tsv,
            };
            commands::trace(&load(&scene)?, &args.driver()?, args.budget, args.jobs, format)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.cmd) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("desing: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
