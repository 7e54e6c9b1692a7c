use thiserror::Error;

/// Errors raised across the crate.
///
/// The variants are grouped so a caller can map them onto coarse exit
/// classes: [`Error::is_capacity`] for guard violations and
/// [`Error::is_numerical`] for constraint or optimizer failures; everything
/// else is an argument/configuration problem.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("state space of {required} entries exceeds the guard of {guard} ({what})")]
    Capacity {
        what: String,
        required: u128,
        guard: u128,
    },

    #[error("support mismatch: {0}")]
    SupportMismatch(String),

    #[error("information quantity {value} is negative beyond round-off ({what})")]
    NegativeInformation { what: String, value: f64 },

    #[error("constraint violated: {constraint} deviates by {deviation:e} (tolerance {tolerance:e})")]
    Constraint {
        constraint: String,
        deviation: f64,
        tolerance: f64,
    },

    #[error("likelihood encoder posterior is degenerate: {0}")]
    DegeneratePosterior(String),

    #[error("search failed to reach tolerance {tolerance:e}; best constraint deviation {best_deviation:e}")]
    SearchFailure {
        best_deviation: f64,
        tolerance: f64,
    },
}

impl Error {
    pub fn is_capacity(&self) -> bool {
        matches!(self, Error::Capacity { .. })
    }

    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NegativeInformation { .. }
                | Error::Constraint { .. }
                | Error::DegeneratePosterior(_)
                | Error::SearchFailure { .. }
        )
    }

    pub(crate) fn capacity(what: impl Into<String>, required: u128, guard: u128) -> Self {
        Error::Capacity {
            what: what.into(),
            required,
            guard,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
