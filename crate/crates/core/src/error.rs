use thiserror::Error;

/// Errors shared by every module. Each variant has a stable machine
/// name (see [`Error::name`]) used by the CLI on exit code 2.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("probability mass sums to {sum}, more than {tol} away from 1")]
    SumNotOne { sum: f64, tol: f64 },

    #[error("law is degenerate (zero variance)")]
    DegenerateLaw,

    #[error("span is not maximal: gcd of support gaps is {gcd}")]
    NonMaximalSpan { gcd: i64 },

    #[error("reachable support needs {required} entries, cap is {cap}")]
    SupportTooLarge { required: u128, cap: usize },

    #[error("need 1 <= m < n, got m = {m}, n = {n}")]
    BadOrder { m: u64, n: u64 },

    #[error("{what} = {value} outside {range}")]
    DomainError {
        what: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("law has no Bernoulli part: no two adjacent lattice atoms both carry mass")]
    NoBernoulliPart,

    #[error("tau sequence is inadmissible: {reason}")]
    InadmissibleTau { reason: String },

    #[error("scan grid is empty")]
    EmptyGrid,
}

impl Error {
    pub fn name(&self) -> &'static str {
        match self {
            Error::SumNotOne { .. } => "SumNotOne",
            Error::DegenerateLaw => "DegenerateLaw",
            Error::NonMaximalSpan { .. } => "NonMaximalSpan",
            Error::SupportTooLarge { .. } => "SupportTooLarge",
            Error::BadOrder { .. } => "BadOrder",
            Error::DomainError { .. } => "DomainError",
            Error::NoBernoulliPart => "NoBernoulliPart",
            Error::InadmissibleTau { .. } => "InadmissibleTau",
            Error::EmptyGrid => "EmptyGrid",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
