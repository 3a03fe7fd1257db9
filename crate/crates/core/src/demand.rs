//! Inverse demand `P(Q)` and consumer utility `U(Q) = ∫₀^Q P(q) dq`.

use crate::error::{Error, Result};

/// A concave, strictly decreasing inverse demand curve.
///
/// Prices are returned unclamped; negative values are the caller's concern.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)
)]
pub enum DemandSpec {
    /// `P(Q) = s - Q`.
    Linear {
        /// Price intercept.
        s: f64,
    },
    /// `P(Q) = s - aQ - bQ²`.
    Quadratic {
        /// Price intercept.
        s: f64,
        /// Linear slope coefficient, `a >= 0`.
        a: f64,
        /// Curvature coefficient, `b >= 0`.
        b: f64,
    },
}

/// Where and how a demand curve fails to be concave and downward sloping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConcavityViolation {
    /// `P'(q) >= 0` at `at`.
    NonDecreasing {
        /// Quantity where the slope is non-negative.
        at: f64,
        /// The slope there.
        slope: f64,
    },
    /// `P''(q) > 0` at `at`.
    Convex {
        /// Quantity where the curvature is positive.
        at: f64,
        /// The curvature there.
        curvature: f64,
    },
    /// A coefficient is NaN or infinite.
    NonFinite,
}

/// Result of [`DemandSpec::validate_concavity`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcavityReport {
    /// Upper end of the checked domain.
    pub q_max: f64,
    /// First violation found, if any.
    pub violation: Option<ConcavityViolation>,
}

impl ConcavityReport {
    /// True when `P' < 0` and `P'' <= 0` on `[0, q_max]`.
    pub fn is_valid(&self) -> bool {
        self.violation.is_none()
    }
}

impl DemandSpec {
    /// Linear demand with unit slope.
    pub const fn linear(s: f64) -> Self {
        DemandSpec::Linear { s }
    }

    /// Concave quadratic demand.
    pub const fn quadratic(s: f64, a: f64, b: f64) -> Self {
        DemandSpec::Quadratic { s, a, b }
    }

    /// Price intercept `P(0)`.
    pub fn intercept(&self) -> f64 {
        match *self {
            DemandSpec::Linear { s } | DemandSpec::Quadratic { s, .. } => s,
        }
    }

    /// True for the linear family.
    pub fn is_linear(&self) -> bool {
        matches!(self, DemandSpec::Linear { .. })
    }

    /// `P(q)`.
    pub fn price(&self, q: f64) -> f64 {
        match *self {
            DemandSpec::Linear { s } => s - q,
            DemandSpec::Quadratic { s, a, b } => s - a * q - b * q * q,
        }
    }

    /// `P'(q)`.
    pub fn price_deriv(&self, q: f64) -> f64 {
        match *self {
            DemandSpec::Linear { .. } => -1.0,
            DemandSpec::Quadratic { a, b, .. } => -a - 2.0 * b * q,
        }
    }

    /// `P''(q)`.
    pub fn price_second_deriv(&self, _q: f64) -> f64 {
        match *self {
            DemandSpec::Linear { .. } => 0.0,
            DemandSpec::Quadratic { b, .. } => -2.0 * b,
        }
    }

    /// `U(q) = ∫₀^q P`.
    pub fn utility(&self, q: f64) -> f64 {
        match *self {
            DemandSpec::Linear { s } => s * q - 0.5 * q * q,
            DemandSpec::Quadratic { s, a, b } => s * q - 0.5 * a * q * q - b * q * q * q / 3.0,
        }
    }

    /// Marginal revenue of a producer selling `own` when the market total is `total`:
    /// `P(total) + own·P'(total)`.
    pub fn marginal_revenue(&self, total: f64, own: f64) -> f64 {
        self.price(total) + own * self.price_deriv(total)
    }

    /// Decides analytically whether `P' < 0` and `P'' <= 0` on `[0, q_max]`.
    ///
    /// For both families the slope is monotone in `q`, so checking the
    /// endpoints is exact.
    pub fn validate_concavity(&self, q_max: f64) -> Result<ConcavityReport> {
        if !(q_max > 0.0 && q_max.is_finite()) {
            return Err(Error::invalid("q_max", q_max, "finite q_max > 0"));
        }
        let violation = match *self {
            DemandSpec::Linear { s } if !s.is_finite() => Some(ConcavityViolation::NonFinite),
            DemandSpec::Linear { .. } => None,
            DemandSpec::Quadratic { s, a, b } => {
                if !(s.is_finite() && a.is_finite() && b.is_finite()) {
                    Some(ConcavityViolation::NonFinite)
                } else if b < 0.0 {
                    Some(ConcavityViolation::Convex { at: 0.0, curvature: -2.0 * b })
                } else {
                    // b >= 0 makes P' decreasing, so its maximum is at q = 0.
                    let slope = self.price_deriv(0.0);
                    (slope >= 0.0).then_some(ConcavityViolation::NonDecreasing { at: 0.0, slope })
                }
            }
        };
        Ok(ConcavityReport { q_max, violation })
    }

    pub(crate) fn require_valid(&self, q_max: f64) -> Result<()> {
        let report = self.validate_concavity(q_max)?;
        match report.violation {
            None => Ok(()),
            Some(ConcavityViolation::NonDecreasing { slope, .. }) => Err(Error::AssumptionViolated {
                assumption: "P' < 0 on the demand domain",
                value: slope,
            }),
            Some(ConcavityViolation::Convex { curvature, .. }) => Err(Error::AssumptionViolated {
                assumption: "P'' <= 0 on the demand domain",
                value: curvature,
            }),
            Some(ConcavityViolation::NonFinite) => {
                Err(Error::invalid("demand", self.intercept(), "finite coefficients"))
            }
        }
    }
}
