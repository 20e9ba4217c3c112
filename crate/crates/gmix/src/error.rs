use chrono::NaiveDate;
use thiserror::Error;

/// Errors raised by model construction, data ingestion, fitting, and the
/// goodness-of-fit routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("standard deviation must be strictly positive and finite, got {0}")]
    NonPositiveStd(f64),

    #[error("component weight must lie in [0, 1], got {0}")]
    WeightOutOfRange(f64),

    #[error("component mean must be finite, got {0}")]
    NonFiniteMean(f64),

    #[error("mixture must contain at least one component")]
    NoComponents,

    #[error(
        "component weights sum to {sum}; a sum farther than {tolerance} from 1 is rejected \
         rather than renormalized"
    )]
    WeightSumOutOfRange { sum: f64, tolerance: f64 },

    #[error("responsibility matrix of {len} entries does not match {n} rows x {k} columns")]
    ResponsibilityShape { len: usize, n: usize, k: usize },

    #[error("responsibility entry ({row}, {col}) is {value}, outside [0, 1]")]
    ResponsibilityOutOfRange { row: usize, col: usize, value: f64 },

    #[error("responsibility row {row} sums to {sum}, not 1")]
    ResponsibilityRowSum { row: usize, sum: f64 },

    #[error("responsibility matrix is {n} rows but the sample has {sample_len} observations")]
    ResponsibilitySampleMismatch { n: usize, sample_len: usize },

    #[error("return sample must contain at least one observation")]
    EmptySample,

    #[error("return sample value at index {index} is not finite ({value})")]
    NonFiniteReturn { index: usize, value: f64 },

    #[error("sample of {n} observations cannot support {k} components")]
    SampleSmallerThanK { n: usize, k: usize },

    #[error("all observations are identical; a Gaussian mixture cannot be initialized")]
    DegenerateSample,

    #[error("invalid fit configuration: {0}")]
    InvalidConfig(&'static str),

    #[error("component {component} collapsed: its responsibility column sums to zero")]
    ComponentCollapse { component: usize },

    #[error("every restart collapsed; no mixture could be fitted")]
    AllRestartsCollapsed,

    #[error("KS statistic must lie in [0, 1], got {0}")]
    StatisticOutOfRange(f64),

    #[error("KS p-value requires a sample size of at least 1")]
    ZeroSampleSize,

    #[error("CSV row at line {line}: {message}")]
    CsvRow { line: u64, message: String },

    #[error("CSV header must contain \"date\" and \"close\" columns, missing \"{0}\"")]
    MissingColumn(&'static str),

    #[error("non-positive price {value} at line {line}")]
    NonPositivePrice { line: u64, value: f64 },

    #[error("non-positive price {value} on {date}")]
    InvalidPrice { date: NaiveDate, value: f64 },

    #[error("duplicate date {0} in price series")]
    DuplicateDate(NaiveDate),

    #[error("price series contains no observations")]
    EmptyPrices,

    #[error("price observations must be strictly increasing in date")]
    UnsortedPrices,

    #[error("period start {start} is after period end {end}")]
    InvalidPeriod { start: NaiveDate, end: NaiveDate },

    #[error("need at least {need} price observations, found {have}")]
    InsufficientObservations { have: usize, need: usize },

    #[error("model JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
