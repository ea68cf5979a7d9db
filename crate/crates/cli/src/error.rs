use std::fmt;

use qnetkit::capbounds::BoundError;
use qnetkit::chain::ChainError;
use qnetkit::des::DesError;
use qnetkit::formulas::FormulaError;
use qnetkit::netmodel::NetError;

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_SOLVER: u8 = 3;
pub const EXIT_USAGE: u8 = 64;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Input(String),
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Input(_) => EXIT_INPUT,
            CliError::Solver(_) => EXIT_SOLVER,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Solver(m) => write!(f, "engine error: {m}"),
        }
    }
}

impl From<ChainError> for CliError {
    fn from(e: ChainError) -> Self {
        match e {
            ChainError::Domain(_) | ChainError::Unsupported(_) => CliError::Input(e.to_string()),
            ChainError::Horizon { .. } | ChainError::StateLimit { .. } | ChainError::Singular(_) => {
                CliError::Solver(e.to_string())
            }
        }
    }
}

impl From<FormulaError> for CliError {
    fn from(e: FormulaError) -> Self {
        match e {
            FormulaError::Chain(c) => c.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<DesError> for CliError {
    fn from(e: DesError) -> Self {
        match e {
            DesError::Chain(c) => c.into(),
            other => CliError::Solver(other.to_string()),
        }
    }
}

impl From<NetError> for CliError {
    fn from(e: NetError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<BoundError> for CliError {
    fn from(e: BoundError) -> Self {
        match e {
            BoundError::Net(n) => n.into(),
            BoundError::Invalid(m) => CliError::Input(m),
            BoundError::Flow(f) => CliError::Solver(f.to_string()),
        }
    }
}
