//! `qwalk2d`: simulate the alternate-coin walk, tabulate its limit density,
//! and run the verification suite.
//!
//! Exit codes: 0 success, 1 verification or numerical failure, 2 config
//! error, 3 I/O error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("verification failed: {}", .0.join(", "))]
    Verification(Vec<String>),
    #[error("numerical failure: {0}")]
    Numeric(String),
}

impl From<qwalk2d::Error> for CliError {
    fn from(e: qwalk2d::Error) -> Self {
        use qwalk2d::Error as E;
        match e {
            E::ParameterDomain(_) | E::NonUnitSpinor { .. } => CliError::Config(e.to_string()),
            E::Io(_) => CliError::Io(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Verification(_) | CliError::Numeric(_) => 1,
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

const AFTER_HELP: &str = "\
Every option can also be set in the --config file as `key = value`, one per
line, using the option name without dashes. `#` starts a comment. Flags
override the file. Unknown keys are errors.

Exit codes: 0 success, 1 verification failure, 2 config error, 3 I/O error.";

#[derive(Parser, Debug)]
#[command(name = "qwalk2d", version, about, after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Overrides,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Position distributions at each time in `steps`, plus moments.csv.
    Simulate,
    /// Limit density on a grid×grid midpoint grid, plus the support boundary.
    Density,
    /// Bounding ellipses, support boundary and derived constants.
    Support,
    /// Run the verification suite and write reports.jsonl.
    Verify,
    /// Characteristic functions of X_t/t and of the limit law.
    Chars,
}

#[derive(Args, Debug)]
struct Overrides {
    /// Flat key = value config file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// |a₁|², strictly inside (0, 1) [default 0.9].
    #[arg(long = "a1_sq", global = true, value_name = "X")]
    a1_sq: Option<String>,
    /// |a₂|², strictly inside (0, 1) [default 0.1].
    #[arg(long = "a2_sq", global = true, value_name = "X")]
    a2_sq: Option<String>,
    /// Phase of a₁ in radians [default 0].
    #[arg(long, global = true, value_name = "RAD", allow_hyphen_values = true)]
    alpha1: Option<String>,
    /// Phase of a₂ in radians [default 0].
    #[arg(long, global = true, value_name = "RAD", allow_hyphen_values = true)]
    alpha2: Option<String>,
    /// Phase of b₁ in radians [default 0].
    #[arg(long, global = true, value_name = "RAD", allow_hyphen_values = true)]
    beta1: Option<String>,
    /// Phase of b₂ in radians [default 0].
    #[arg(long, global = true, value_name = "RAD", allow_hyphen_values = true)]
    beta2: Option<String>,
    /// Determinant phase of coin 1 [default 0].
    #[arg(long, global = true, value_name = "RAD", allow_hyphen_values = true)]
    delta1: Option<String>,
    /// Determinant phase of coin 2 [default 0].
    #[arg(long, global = true, value_name = "RAD", allow_hyphen_values = true)]
    delta2: Option<String>,
    /// Initial spinor, Re of component 1 [default 1].
    #[arg(long = "psi1_re", global = true, value_name = "X", allow_hyphen_values = true)]
    psi1_re: Option<String>,
    /// Initial spinor, Im of component 1 [default 0].
    #[arg(long = "psi1_im", global = true, value_name = "X", allow_hyphen_values = true)]
    psi1_im: Option<String>,
    /// Initial spinor, Re of component 2 [default 0].
    #[arg(long = "psi2_re", global = true, value_name = "X", allow_hyphen_values = true)]
    psi2_re: Option<String>,
    /// Initial spinor, Im of component 2 [default 0].
    #[arg(long = "psi2_im", global = true, value_name = "X", allow_hyphen_values = true)]
    psi2_im: Option<String>,
    /// Comma-separated ascending times [default 100].
    #[arg(long, global = true, value_name = "T[,T...]")]
    steps: Option<String>,
    /// Points per axis of the density grid [default 200].
    #[arg(long, global = true, value_name = "N")]
    grid: Option<String>,
    /// Bins per axis for weak-limit comparisons [default 50].
    #[arg(long, global = true, value_name = "N")]
    bins: Option<String>,
    /// Output directory, which must exist [default .].
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<String>,
    /// Seed of the verification samplers [default 1].
    #[arg(long, global = true, value_name = "N")]
    seed: Option<String>,
    /// Comma-separated subset of verify checks [default all].
    #[arg(long, global = true, value_name = "NAME[,NAME...]")]
    checks: Option<String>,
    /// Tolerance overrides by report name.
    #[arg(long, global = true, value_name = "NAME=VALUE[,...]")]
    tolerance: Option<String>,
    /// Characteristic-function arguments [default 1:0,0:1,1:1].
    #[arg(long, global = true, value_name = "X1:X2[,...]", allow_hyphen_values = true)]
    xi: Option<String>,
}

impl Overrides {
    fn pairs(&self) -> Vec<(String, String)> {
        let all = [
            ("a1_sq", &self.a1_sq),
            ("a2_sq", &self.a2_sq),
            ("alpha1", &self.alpha1),
            ("alpha2", &self.alpha2),
            ("beta1", &self.beta1),
            ("beta2", &self.beta2),
            ("delta1", &self.delta1),
            ("delta2", &self.delta2),
            ("psi1_re", &self.psi1_re),
            ("psi1_im", &self.psi1_im),
            ("psi2_re", &self.psi2_re),
            ("psi2_im", &self.psi2_im),
            ("steps", &self.steps),
            ("grid", &self.grid),
            ("bins", &self.bins),
            ("out", &self.out),
            ("seed", &self.seed),
            ("checks", &self.checks),
            ("tolerance", &self.tolerance),
            ("xi", &self.xi),
        ];
        debug_assert_eq!(all.len(), config::KEYS.len());
        all.into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_owned(), v.clone())))
            .collect()
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let mut cfg = RunConfig::default();
    let mut steps_given = false;
    if let Some(path) = &cli.opts.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let pairs = config::parse_file(&text, path)?;
        steps_given |= pairs.iter().any(|(k, _)| k == "steps");
        cfg.apply(&pairs)?;
    }
    let flags = cli.opts.pairs();
    steps_given |= flags.iter().any(|(k, _)| k == "steps");
    cfg.apply(&flags)?;
    // Validate the model and spinor before any work or output.
    cfg.model()?;
    cfg.initial_state()?;
    if !cfg.out.is_dir() {
        return Err(CliError::Io(format!(
            "output directory {} does not exist",
            cfg.out.display()
        )));
    }
    match cli.command {
        Command::Simulate => commands::simulate(&cfg),
        Command::Density => commands::density_grid(&cfg),
        Command::Support => commands::support(&cfg),
        Command::Verify => commands::verify(&cfg, steps_given),
        Command::Chars => commands::chars(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qwalk2d: {e}");
            ExitCode::from(e.code())
        }
    }
}
