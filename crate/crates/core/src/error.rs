use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside the domain of its family.
    #[error("{family}: {name} = {value} is outside the domain ({bound})")]
    Domain {
        family: String,
        name: &'static str,
        value: f64,
        bound: &'static str,
    },
    /// A value lies outside the range of `C`, so `C^{-1}` is undefined.
    #[error("{family}: y = {value} is outside the range of C ({bound})")]
    Range {
        family: String,
        value: f64,
        bound: &'static str,
    },
    #[error("invalid argument: {0}")]
    Argument(String),
    /// An integral does not converge (e.g. an MGF beyond its abscissa).
    #[error("divergent integral: {0}")]
    Divergent(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
