use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration or shape constraint was violated.
    #[error("configuration error ({bound}): {detail}")]
    Config { bound: &'static str, detail: String },

    /// An unmasked microphone mode sits on a spherical Bessel zero.
    #[error("Bessel zero: j_{order}(kr) = {value:e} at {frequency} Hz")]
    BesselZero {
        order: usize,
        frequency: f64,
        value: f64,
    },

    /// A numerical step failed; `context` locates it in the pipeline.
    #[error("numerical failure at {context}: {detail}")]
    Numerical { context: String, detail: String },

    /// Malformed or mismatched artifact file.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(bound: &'static str, detail: impl Into<String>) -> Self {
        Error::Config {
            bound,
            detail: detail.into(),
        }
    }

    /// Prefix the location of numerical failures with `place`.
    pub fn at(self, place: impl std::fmt::Display) -> Self {
        match self {
            Error::Numerical { context, detail } => Error::Numerical {
                context: format!("{place}, {context}"),
                detail,
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
