use core::fmt;

/// Convenience alias used throughout the crate.
pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors produced by the solvers and validators.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside its admissible range.
    InvalidParameter {
        /// Parameter name as it appears in configs.
        name: &'static str,
        /// Offending value.
        value: f64,
        /// Human-readable constraint that was violated.
        constraint: &'static str,
    },
    /// A modelling assumption required by the solver does not hold.
    AssumptionViolated {
        /// Which assumption failed.
        assumption: &'static str,
        /// The evaluated quantity that has the wrong sign.
        value: f64,
    },
    /// The function does not change sign on the bracket.
    BracketSign {
        /// Lower end of the bracket.
        lo: f64,
        /// Upper end of the bracket.
        hi: f64,
        /// Function value at `lo`.
        f_lo: f64,
        /// Function value at `hi`.
        f_hi: f64,
    },
    /// An iterative routine hit its iteration cap.
    NoConvergence {
        /// Routine that failed.
        routine: &'static str,
        /// Iterations performed.
        iterations: usize,
    },
    /// Conditioning on an event of probability zero.
    DegenerateDistribution,
    /// Two distributions were compared over different supports.
    LengthMismatch {
        /// Length of the first argument.
        left: usize,
        /// Length of the second argument.
        right: usize,
    },
    /// A sweep was requested over no points.
    EmptyGrid,
    /// Two independent computations of the same quantity disagree.
    OracleDisagreement {
        /// Quantity being cross-checked.
        quantity: &'static str,
        /// Absolute difference observed.
        difference: f64,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, value: f64, constraint: &'static str) -> Self {
        Error::InvalidParameter { name, value, constraint }
    }

    /// True for errors caused by a failed modelling assumption rather than bad input.
    pub fn is_assumption_failure(&self) -> bool {
        matches!(self, Error::AssumptionViolated { .. } | Error::BracketSign { .. })
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, value, constraint } => {
                write!(f, "invalid parameter {name} = {value}: requires {constraint}")
            }
            Error::AssumptionViolated { assumption, value } => {
                write!(f, "assumption violated: {assumption} (evaluated to {value})")
            }
            Error::BracketSign { lo, hi, f_lo, f_hi } => write!(
                f,
                "no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}"
            ),
            Error::NoConvergence { routine, iterations } => {
                write!(f, "{routine} did not converge after {iterations} iterations")
            }
            Error::DegenerateDistribution => {
                f.write_str("conditioning event has zero probability")
            }
            Error::LengthMismatch { left, right } => {
                write!(f, "distribution supports differ: {left} vs {right}")
            }
            Error::EmptyGrid => f.write_str("sweep grid is empty"),
            Error::OracleDisagreement { quantity, difference } => {
                write!(f, "independent computations of {quantity} differ by {difference}")
            }
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn check_probability(name: &'static str, p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, p, "0 < value < 1"))
    }
}

pub(crate) fn check_dispersion(d: f64) -> Result<()> {
    if (0.0..=1.0).contains(&d) {
        Ok(())
    } else {
        Err(Error::invalid("d", d, "0 <= d <= 1"))
    }
}
