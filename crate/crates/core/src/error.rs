use std::fmt;

/// Errors produced while building, fitting or analysing rational models.
#[derive(Debug, Clone, PartialEq)]
#[non_exhaustive]
pub enum Error {
    /// The denominator vanished (or is below the evaluation tolerance) at `x`.
    DenominatorZero { x: f64 },
    /// Taylor expansion and rational arithmetic need `q == 1`.
    UnsupportedSubstitution { q: f64 },
    /// Rational arithmetic produced a denominator with zero constant term.
    NormalizationImpossible,
    /// Fewer data points than free coefficients.
    InsufficientData { points: usize, unknowns: usize },
    /// A pivot collapsed during elimination.
    SingularSystem { column: usize, pivot: f64 },
    /// A regularization weight was negative.
    NegativeWeight { value: f64 },
    /// Reference point count does not match the free coefficient count.
    CountMismatch { points: usize, unknowns: usize },
    /// Two reference points share an abscissa.
    DuplicateAbscissa { x: f64 },
    /// A non-integer power substitution was requested on negative abscissae.
    NegativeAbscissa { x: f64 },
    /// No candidate in a model search could be fitted.
    NoFeasibleModel,
    /// A lambda sweep had no rows.
    EmptySweep,
    /// Two slices that must be paired have different lengths.
    LengthMismatch { left: usize, right: usize },
    /// An operation needed at least one value.
    EmptyInput,
    /// All abscissae are identical, so no slope can be estimated.
    DegenerateAbscissae,
    /// The Weibull likelihood equation has no sign change in its bracket.
    NoBracket,
    /// `1 - R(x)` did not decay below threshold before the integration cap.
    NonconvergentTail { cap: f64 },
    /// A rational CDF has a real pole inside the integration range.
    PoleOnRange { x: f64 },
    /// A configuration or model violated one of its invariants.
    InvalidConfig(String),
    /// Malformed input data.
    Parse(String),
    /// Filesystem failure.
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DenominatorZero { x } => write!(f, "denominator vanishes at x = {x}"),
            Error::UnsupportedSubstitution { q } => {
                write!(f, "operation requires q = 1, model has q = {q}")
            }
            Error::NormalizationImpossible => {
                write!(f, "combined denominator has zero constant term")
            }
            Error::InsufficientData { points, unknowns } => write!(
                f,
                "insufficient data: {points} points for {unknowns} free coefficients"
            ),
            Error::SingularSystem { column, pivot } => {
                write!(f, "singular system: pivot {pivot:e} in column {column}")
            }
            Error::NegativeWeight { value } => {
                write!(f, "regularization weight must be non-negative, got {value}")
            }
            Error::CountMismatch { points, unknowns } => write!(
                f,
                "CountMismatch: {points} reference points for {unknowns} free coefficients"
            ),
            Error::DuplicateAbscissa { x } => write!(f, "duplicate reference abscissa x = {x}"),
            Error::NegativeAbscissa { x } => write!(
                f,
                "non-integer power substitution needs x >= 0, found x = {x}"
            ),
            Error::NoFeasibleModel => write!(f, "no candidate model could be fitted"),
            Error::EmptySweep => write!(f, "lambda sweep is empty"),
            Error::LengthMismatch { left, right } => {
                write!(f, "length mismatch: {left} vs {right}")
            }
            Error::EmptyInput => write!(f, "empty input"),
            Error::DegenerateAbscissae => write!(f, "all abscissae are equal"),
            Error::NoBracket => write!(f, "likelihood equation has no root in the shape bracket"),
            Error::NonconvergentTail { cap } => {
                write!(
                    f,
                    "1 - R(x) does not decay below threshold before x = {cap}"
                )
            }
            Error::PoleOnRange { x } => write!(f, "denominator changes sign near x = {x}"),
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
            Error::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
