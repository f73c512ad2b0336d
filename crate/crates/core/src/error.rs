use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid circuit classes: {0}")]
    InvalidClasses(String),

    #[error("invalid packet size distribution: {0}")]
    InvalidPacketSizes(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("circuit class {class} ({rate} bit/s) can never be admitted under a circuit limit of {limit} bit/s")]
    ClassExceedsLimit { class: usize, rate: f64, limit: f64 },

    #[error("circuit rate {rate} bit/s is not an integral multiple of the {unit} bit/s quantum")]
    NonIntegralRate { rate: f64, unit: f64 },

    /// The packet partition cannot even carry the mandatory reports.
    #[error("infeasible cycle: packet window {available:.3e} s is below the {required:.3e} s needed for reports")]
    InfeasibleCycle { available: f64, required: f64 },

    #[error("at least {required} replications are needed, got {got}")]
    InsufficientReplications { required: usize, got: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
