use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Errors raised by the model operations.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A weight was zero, negative or not finite.
    NonPositiveWeight { index: usize, value: f64 },
    /// A polynomial order or selection size exceeds the number of weights.
    OrderOutOfRange { order: usize, len: usize },
    /// A node or weight index is outside the valid range.
    IndexOutOfRange { index: usize, len: usize },
    /// A real parameter is outside its admissible domain.
    InvalidParameter { name: &'static str, value: f64 },
    /// The degree cutoff does not leave room for distinct contacts.
    DegreeCutoff { kmax: usize, n: usize },
    /// Not enough points (or distinct abscissae) for a fit.
    TooFewPoints { got: usize, need: usize },
    /// The data carry no information for the requested fit.
    FitDegenerate(&'static str),
    /// The closed form is not defined for this parameter regime.
    Unsupported(&'static str),
    /// Deployment constants produce an unusable grid.
    Configuration(&'static str),
    /// The exhaustive search would exceed its size budget.
    BudgetExceeded { n: usize, limit: usize },
    /// The source has no contact of the requested kind.
    NoDestination { source: usize },
    /// No node has an eligible destination under the requested rule.
    NoEligibleSource,
    /// Every sampled pair was disconnected.
    AllDisconnected,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonPositiveWeight { index, value } => {
                write!(f, "weight {index} must be positive and finite, got {value}")
            }
            Error::OrderOutOfRange { order, len } => {
                write!(f, "order {order} exceeds the number of weights {len}")
            }
            Error::IndexOutOfRange { index, len } => {
                write!(f, "index {index} out of range for length {len}")
            }
            Error::InvalidParameter { name, value } => {
                write!(f, "parameter {name} = {value} is outside its domain")
            }
            Error::DegreeCutoff { kmax, n } => {
                write!(f, "degree cutoff {kmax} must be below the node count {n}")
            }
            Error::TooFewPoints { got, need } => {
                write!(f, "fit needs at least {need} usable points, got {got}")
            }
            Error::FitDegenerate(why) => write!(f, "degenerate fit: {why}"),
            Error::Unsupported(why) => write!(f, "unsupported regime: {why}"),
            Error::Configuration(why) => write!(f, "invalid configuration: {why}"),
            Error::BudgetExceeded { n, limit } => {
                write!(f, "exhaustive search limited to {limit} nodes, got {n}")
            }
            Error::NoDestination { source } => {
                write!(f, "node {source} has no eligible destination")
            }
            Error::NoEligibleSource => f.write_str("no source has an eligible destination"),
            Error::AllDisconnected => f.write_str("no connected pair could be drawn"),
        }
    }
}

impl core::error::Error for Error {}
