use thiserror::Error;

/// Errors produced by the analysis pipeline, the simulator and the I/O layer.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates its contract. `field` names the
    /// offending entry in config-file notation (e.g. `traffic.f_uplink_air`).
    #[error("config error: {field}: {message}")]
    Config { field: String, message: String },

    /// A numerical routine failed to reach its tolerance or produced a
    /// non-finite value.
    #[error("numerical error in {context}: {details}")]
    Numerical { context: String, details: String },

    /// A delay evaluation hit a non-positive waiting-time denominator; the
    /// queue at this UAV is saturated and the mean delay is undefined.
    #[error("uav {uav}: {context} is saturated, delay undefined")]
    Unstable { uav: u32, context: String },

    /// Caller misuse that is not a config-file problem (e.g. comparing
    /// artifacts produced from different configurations).
    #[error("usage error: {0}")]
    Usage(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn numerical(context: impl Into<String>, details: impl Into<String>) -> Self {
        Error::Numerical {
            context: context.into(),
            details: details.into(),
        }
    }

    /// Process exit status associated with this error kind. Documented in the
    /// CLI help: 2 config, 3 numerical, 4 usage, 5 i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 2,
            Error::Numerical { .. } | Error::Unstable { .. } => 3,
            Error::Usage(_) => 4,
            Error::Io(_) => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
