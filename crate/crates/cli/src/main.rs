use std::ffi::OsString;
use std::process::ExitCode;

use clap::Parser;

use symbell::bell_operator::BellError;
use symbell::eigen::EigenError;
use symbell::inequalities::InequalityError;
use symbell::oracle::OracleError;
use symbell::robustness::RobustnessError;
use symbell::states::StateError;

mod args;
mod commands;
mod config;
mod output;

use args::{Cli, Command};
use output::Provenance;

/// Exit codes: 0 success (a non-violation is a result), 2 usage error, 3 numerical failure.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<InequalityError> for CliError {
    fn from(e: InequalityError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<BellError> for CliError {
    fn from(e: BellError) -> Self {
        match e {
            BellError::Eigen(EigenError::ConvergenceFailure { .. }) => CliError::Numerical(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<StateError> for CliError {
    fn from(e: StateError) -> Self {
        match e {
            StateError::Bell(b) => b.into(),
            StateError::OutOfRange { .. } | StateError::DimensionMismatch { .. } => CliError::Usage(e.to_string()),
            StateError::OutOfRegime { .. } | StateError::DivisionByZero => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<RobustnessError> for CliError {
    fn from(e: RobustnessError) -> Self {
        match e {
            RobustnessError::State(s) => s.into(),
            RobustnessError::Inequality(i) => i.into(),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Bell(b) => b.into(),
            OracleError::TooLarge { .. } => CliError::Usage(e.to_string()),
        }
    }
}

fn parameters(cli: &Cli) -> serde_json::Value {
    let args = match &cli.command {
        Command::Vertices(a) => serde_json::to_value(a),
        Command::Bound(a) => serde_json::to_value(a),
        Command::Violate(a) => serde_json::to_value(a),
        Command::Scan(a) => serde_json::to_value(a),
        Command::Robust(a) => serde_json::to_value(a),
        Command::Oracle(a) => serde_json::to_value(a),
    }
    .expect("arguments serialise");
    let mut v = serde_json::json!({ "format": cli.global.format });
    if let serde_json::Value::Object(map) = args {
        v.as_object_mut().expect("object").extend(map);
    }
    v
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let (report, pass) = match &cli.command {
        Command::Vertices(a) => (commands::vertices(a)?, true),
        Command::Bound(a) => (commands::bound(a)?, true),
        Command::Violate(a) => (commands::violate(a)?, true),
        Command::Scan(a) => (commands::scan(a)?, true),
        Command::Robust(a) => (commands::robust(a)?, true),
        Command::Oracle(a) => {
            let o = commands::oracle_check(a)?;
            (o.report, o.pass)
        }
    };
    let prov = Provenance {
        tool: "symbell",
        version: env!("CARGO_PKG_VERSION"),
        command: cli.command.name(),
        deterministic: cli.global.deterministic,
        parameters: parameters(cli),
    };
    output::emit(&report.render(cli.global.format, &prov)?, &cli.global.out)?;
    Ok(pass)
}

fn main() -> ExitCode {
    let argv: Vec<OsString> = std::env::args_os().collect();
    let argv = match config::merge(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.code());
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("oracle check failed");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
