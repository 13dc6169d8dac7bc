use std::path::PathBuf;

use crate::Year;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:{line}: {reason}")]
    Parse {
        file: PathBuf,
        line: u64,
        reason: String,
    },
    #[error("{file}: unknown column `{column}`")]
    UnknownColumn { file: PathBuf, column: String },
    #[error("{file}: missing column `{column}`")]
    MissingColumn { file: PathBuf, column: String },
    #[error("{file}:{line}: negative value {value}")]
    NegativeValue {
        file: PathBuf,
        line: u64,
        value: f64,
    },
    #[error("{file}:{line}: duplicate key {key}")]
    DuplicateKey {
        file: PathBuf,
        line: u64,
        key: String,
    },
    #[error("{file}:{line}: reporter equals partner ({code})")]
    ReporterEqualsPartner {
        file: PathBuf,
        line: u64,
        code: String,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("invalid country code `{0}`")]
    InvalidCountryCode(String),
    #[error("unknown country `{0}`")]
    UnknownCountry(String),
    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("year {0} is not covered by the panel")]
    MissingYear(Year),
    #[error("{country} has flows in {year} but no positive size")]
    MissingSize { country: String, year: Year },
    #[error("no wealth observation for {country} in {year}")]
    MissingWealth { country: String, year: Year },

    #[error("no episodes")]
    NoEpisodes,
    #[error("insufficient peacetime observations for {0}")]
    InsufficientPeacetime(String),
    #[error("no military expenditure for {country} in war year {year}")]
    MissingMilex { country: String, year: Year },
    #[error("expenditure is zero for {country} in war year {year}")]
    ZeroExpenditure { country: String, year: Year },
    #[error("expected wealth {expected} is not positive for {country} in {year}")]
    NonPositiveExpected {
        country: String,
        year: Year,
        expected: f64,
    },
    #[error("degenerate design: all regressor values are equal")]
    DegenerateDesign,
    #[error("need at least {needed} observations, found {found}")]
    TooFewObservations { needed: usize, found: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("no pair of consecutive years with wealth data")]
    NoYearOverlap,

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("coalitions overlap on {0}")]
    OverlappingCoalitions(String),
}

impl Error {
    /// True for failures reading or parsing input files, as opposed to
    /// domain errors raised on well-formed input.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Parse { .. }
                | Error::UnknownColumn { .. }
                | Error::MissingColumn { .. }
                | Error::NegativeValue { .. }
                | Error::DuplicateKey { .. }
                | Error::ReporterEqualsPartner { .. }
                | Error::Json { .. }
        )
    }
}
