//! `aniso-tv`: perimeters, measures, isoperimetric checks, solvers and the
//! worked-example gallery from the command line.
//!
//! Exit codes: 0 all checks pass, 1 checks failed, 2 usage or config
//! error, 3 solver non-convergence.

mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use aniso_tv::icheck::Direction;
use aniso_tv::solve::{Functional, Method};

#[derive(Parser, Debug)]
#[command(name = "aniso-tv", version, about = "Anisotropic total variation with signed measure data")]
pub struct Cli {
    /// Progress messages on standard error (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Anisotropic perimeter of an exact shape.
    Perimeter(PerimeterArgs),
    /// Mass of curve measures on the closure or interior of a shape.
    Measure(MeasureArgs),
    /// Isoperimetric condition of a grid scenario.
    IcCheck(IcCheckArgs),
    /// Check one of the built-in divergence certificates.
    Certificate(CertificateArgs),
    /// Minimize a discrete functional on a grid scenario.
    Solve(SolveArgs),
    /// Worked-example catalog.
    #[command(subcommand)]
    Gallery(GalleryCommand),
    /// Compare the coarea and edge forms of the discrete TV on random data.
    CoareaTest(CoareaArgs),
}

#[derive(Args, Debug)]
pub struct IntegrandArgs {
    /// isotropic, quadrant or weighted-l1.
    #[arg(long, default_value = "isotropic")]
    pub integrand: String,
    /// Comma-separated coefficients (weighted-l1).
    #[arg(long, value_delimiter = ',')]
    pub coefficients: Option<Vec<f64>>,
    /// Use phi(x, -xi).
    #[arg(long)]
    pub mirrored: bool,
}

#[derive(Args, Debug)]
pub struct PerimeterArgs {
    /// Shape as inline JSON or a file path.
    #[arg(long)]
    pub shape: String,
    #[command(flatten)]
    pub integrand: IntegrandArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SideArg {
    Closure,
    Interior,
}

#[derive(Args, Debug)]
pub struct MeasureArgs {
    /// A curve measure or a list of them, inline JSON or a file path.
    #[arg(long)]
    pub curve: String,
    /// Shape as inline JSON or a file path.
    #[arg(long)]
    pub shape: String,
    #[arg(long, value_enum, default_value = "closure")]
    pub side: SideArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum IcMode {
    Exhaustive,
    Anneal,
    Dual,
    Certificate,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum DirectionArg {
    Forward,
    Mirrored,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::Forward => Direction::Forward,
            DirectionArg::Mirrored => Direction::Mirrored,
        }
    }
}

#[derive(Args, Debug)]
pub struct IcCheckArgs {
    /// Scenario file.
    pub scenario: PathBuf,
    #[arg(long, value_enum, default_value = "dual")]
    pub mode: IcMode,
    #[arg(long, default_value_t = 1.0)]
    pub constant: f64,
    #[arg(long, value_enum, default_value = "forward")]
    pub direction: DirectionArg,
    /// `eps,delta`: only sets of volume below delta count, and scores up to
    /// eps are tolerated.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub small_volume: Option<Vec<f64>>,
    /// Override the scenario cell size.
    #[arg(long)]
    pub h: Option<f64>,
    /// Random test functions for the certificate cross-check.
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FieldArg {
    /// Zero inside radius 1, `-theta x/|x|^2` up to 2, `2 x/|x|^2` beyond.
    TwoCircles,
    /// Alternating radial field with remainder coefficients.
    Alternating,
    /// Fractal field at `--level`.
    Fractal,
}

#[derive(Args, Debug)]
pub struct CertificateArgs {
    #[arg(long, value_enum)]
    pub field: FieldArg,
    #[arg(long, default_value_t = 1.0)]
    pub theta: f64,
    #[arg(long, default_value_t = 1)]
    pub level: u32,
    /// Replace the built-in shape battery (JSON list of shapes).
    #[arg(long)]
    pub shapes: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FunctionalArg {
    Phi,
    PhiHat,
}

impl From<FunctionalArg> for Functional {
    fn from(f: FunctionalArg) -> Self {
        match f {
            FunctionalArg::Phi => Functional::Phi,
            FunctionalArg::PhiHat => Functional::PhiHat,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MethodArg {
    Pdhg,
    LevelCut,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Pdhg => Method::Pdhg,
            MethodArg::LevelCut => Method::LevelCut,
        }
    }
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(long, value_enum)]
    pub functional: FunctionalArg,
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Keep solver iterates every this many iterations.
    #[arg(long)]
    pub snapshot_stride: Option<usize>,
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Minimizer as CSV: cell, x, y, value.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum GalleryCommand {
    /// Scenario names, titles and default parameters.
    List {
        #[arg(long)]
        json: bool,
    },
    /// Run one scenario, or all of them.
    Run(GalleryRunArgs),
}

#[derive(Args, Debug)]
pub struct GalleryRunArgs {
    #[arg(required_unless_present = "all", conflicts_with = "all")]
    pub name: Option<String>,
    #[arg(long)]
    pub all: bool,
    /// Worker threads for `--all`.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Parameter overrides as JSON; with `--all`, keyed by scenario name.
    #[arg(long)]
    pub config: Option<String>,
    /// Single overrides `key=value`, value parsed as JSON when possible.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CoareaArgs {
    #[arg(long, default_value_t = 1000)]
    pub cases: usize,
    #[arg(long, default_value_t = 6)]
    pub max_side: usize,
    #[command(flatten)]
    pub integrand: IntegrandArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { io::EXIT_USAGE } else { io::EXIT_PASS };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("aniso-tv: {e}");
            ExitCode::from(e.code())
        }
    }
}
