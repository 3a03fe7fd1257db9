//! Bracketing root finder shared by the equilibrium solvers.

use crate::error::{Error, Result};

/// Stopping rule for [`bisect`]: whichever of the residual or width test
/// fires first ends the search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectionTolerance {
    /// Stop when `|f(mid)| <= residual`.
    pub residual: f64,
    /// Stop when the bracket is narrower than `width`.
    pub width: f64,
    /// Hard cap on halvings.
    pub max_iter: usize,
}

impl Default for BisectionTolerance {
    fn default() -> Self {
        BisectionTolerance { residual: 1e-12, width: 1e-13, max_iter: 200 }
    }
}

/// Outcome of a successful bisection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bisection {
    /// Approximate root.
    pub root: f64,
    /// `f(root)`.
    pub residual: f64,
    /// Halvings performed.
    pub iterations: usize,
}

/// Finds a root of `f` on `[lo, hi]`.
///
/// `f(lo)` and `f(hi)` must have strictly opposite signs; an exact zero at
/// either end is returned immediately.
pub fn bisect<F>(f: F, lo: f64, hi: f64, tol: BisectionTolerance) -> Result<Bisection>
where
    F: Fn(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(Bisection { root: a, residual: 0.0, iterations: 0 });
    }
    if fb == 0.0 {
        return Ok(Bisection { root: b, residual: 0.0, iterations: 0 });
    }
    if !(fa.is_finite() && fb.is_finite()) || (fa > 0.0) == (fb > 0.0) {
        return Err(Error::BracketSign { lo, hi, f_lo: fa, f_hi: fb });
    }
    let a_positive = fa > 0.0;
    for iter in 1..=tol.max_iter {
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if fm.abs() <= tol.residual || (b - a).abs() <= tol.width {
            return Ok(Bisection { root: mid, residual: fm, iterations: iter });
        }
        if (fm > 0.0) == a_positive {
            a = mid;
        } else {
            b = mid;
        }
    }
    Err(Error::NoConvergence { routine: "bisection", iterations: tol.max_iter })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_square_root() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, BisectionTolerance::default()).unwrap();
        assert!((r.root - core::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn decreasing_function() {
        let r = bisect(|x| 3.0 - 2.0 * x, 0.0, 5.0, BisectionTolerance::default()).unwrap();
        assert!((r.root - 1.5).abs() < 1e-12);
    }

    #[test]
    fn same_sign_is_rejected() {
        let err = bisect(|x| x * x + 1.0, -1.0, 1.0, BisectionTolerance::default()).unwrap_err();
        assert!(matches!(err, Error::BracketSign { .. }));
    }

    #[test]
    fn iteration_cap() {
        let tol = BisectionTolerance { residual: 0.0, width: 0.0, max_iter: 5 };
        let err = bisect(|x| x - 0.3, 0.0, 1.0, tol).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { .. }));
    }
}
