//! Brute-force checks that share nothing with the analytic solvers: grid
//! best responses built from raw expected profit, best-response iteration,
//! central differences and a linear scan of the collusion constraints.

use crate::equilibrium::DuopolyParams;
use crate::error::{Error, Result};
use crate::stochastic::State;
use crate::strategic_conduct::CollusionParams;

/// Smallest grid accepted by the best-response search.
pub const MIN_GRID: usize = 100;

/// `(Pr{opponent high | own}, Pr{opponent low | own})` from the prior and
/// dispersion directly.
fn opponent_law(params: &DuopolyParams, own: State) -> (f64, f64) {
    let b = params.beta;
    let denom = b + params.d * (1.0 - b);
    let high = match own {
        State::High => b / denom,
        State::Low => params.d * b / denom,
    };
    (high, 1.0 - high)
}

/// Expected profit of selling `q` in state `own` against an opponent who
/// produces `min(w_j, opponent_phi)`.
pub fn expected_profit(params: &DuopolyParams, own: State, q: f64, opponent_phi: f64) -> f64 {
    let (p_high, p_low) = opponent_law(params, own);
    let vs_high = opponent_phi.min(params.high);
    let vs_low = opponent_phi.min(params.low);
    p_high * q * params.demand.price(q + vs_high) + p_low * q * params.demand.price(q + vs_low)
}

/// Best grid action and its expected profit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptimum {
    /// Maximising action.
    pub action: f64,
    /// Expected profit there.
    pub profit: f64,
    /// Grid spacing.
    pub step: f64,
}

/// Exhaustive argmax of expected profit over `grid_n + 1` evenly spaced
/// actions on `[lo, hi]`. Ties go to the smaller action.
pub fn best_response_on(
    params: &DuopolyParams,
    own: State,
    opponent_phi: f64,
    lo: f64,
    hi: f64,
    grid_n: usize,
) -> Result<GridOptimum> {
    if grid_n < MIN_GRID {
        return Err(Error::invalid("grid_n", grid_n as f64, "grid_n >= 100"));
    }
    if !(lo <= hi && lo.is_finite() && hi.is_finite()) {
        return Err(Error::invalid("interval", hi - lo, "finite lo <= hi"));
    }
    let step = (hi - lo) / grid_n as f64;
    let mut best = GridOptimum { action: lo, profit: f64::NEG_INFINITY, step };
    for k in 0..=grid_n {
        let q = if k == grid_n { hi } else { lo + k as f64 * step };
        let v = expected_profit(params, own, q, opponent_phi);
        if v > best.profit {
            best.action = q;
            best.profit = v;
        }
    }
    Ok(best)
}

/// High-state best reply on the grid `{L + k(H-L)/grid_n}`.
pub fn best_response_grid(params: &DuopolyParams, opponent_phi: f64, grid_n: usize) -> Result<f64> {
    best_response_on(params, State::High, opponent_phi, params.low, params.high, grid_n).map(|g| g.action)
}

/// Outcome of best-response iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GridEquilibrium {
    /// Fixed point, or the midpoint of a detected 2-cycle.
    pub phi_hat: f64,
    /// `(H - L)/grid_n`.
    pub grid_step: f64,
    /// Best-response evaluations performed.
    pub iterations: usize,
    /// False when iteration ended in a 2-cycle.
    pub converged: bool,
    /// Distance between the two points of the cycle, zero when converged.
    pub cycle_width: f64,
}

impl GridEquilibrium {
    /// Converged, or cycling between neighbouring grid points, which is as
    /// close as the grid can get to a fixed point lying between them.
    pub fn settled(&self) -> bool {
        self.converged || self.cycle_width <= self.grid_step * (1.0 + 1e-9)
    }
}

/// Iterates `φ ← best_response_grid(φ)` from `φ = H`.
pub fn fixed_point_equilibrium(params: &DuopolyParams, grid_n: usize, max_iter: usize) -> Result<GridEquilibrium> {
    let grid_step = (params.high - params.low) / grid_n as f64;
    let mut before = f64::NAN;
    let mut current = params.high;
    for i in 1..=max_iter {
        let next = best_response_grid(params, current, grid_n)?;
        if next == current {
            return Ok(GridEquilibrium { phi_hat: next, grid_step, iterations: i, converged: true, cycle_width: 0.0 });
        }
        if next == before {
            return Ok(GridEquilibrium {
                phi_hat: 0.5 * (next + current),
                grid_step,
                iterations: i,
                converged: false,
                cycle_width: (next - current).abs(),
            });
        }
        before = current;
        current = next;
    }
    Err(Error::NoConvergence { routine: "fixed_point_equilibrium", iterations: max_iter })
}

/// Grid fixed point compared with an analytic high-state output.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct FixedPointCheck {
    /// The grid equilibrium.
    pub grid: GridEquilibrium,
    /// Analytic value it was compared against.
    pub analytic_phi: f64,
    /// `|phi_hat - analytic_phi|`.
    pub difference: f64,
}

/// Runs [`fixed_point_equilibrium`] and fails unless it settled (see
/// [`GridEquilibrium::settled`]) within one grid step of `analytic_phi`.
pub fn check_fixed_point(params: &DuopolyParams, analytic_phi: f64, grid_n: usize) -> Result<FixedPointCheck> {
    let grid = fixed_point_equilibrium(params, grid_n, 10_000)?;
    let difference = (grid.phi_hat - analytic_phi).abs();
    if !grid.settled() || difference > grid.grid_step * (1.0 + 1e-9) {
        return Err(Error::OracleDisagreement { quantity: "phi", difference: grid.phi_hat - analytic_phi });
    }
    Ok(FixedPointCheck { grid, analytic_phi, difference })
}

/// Largest gain any grid action offers over the candidate strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DeviationReport {
    /// Best low-state action on `[0, L]`.
    pub low_best: f64,
    /// Its gain over producing `L`.
    pub low_gain: f64,
    /// Best high-state action on `[0, H]`.
    pub high_best: f64,
    /// Its gain over producing `φ`.
    pub high_gain: f64,
    /// Gains up to this are attributed to grid resolution.
    pub tolerance: f64,
}

impl DeviationReport {
    /// No gain above the tolerance in either state.
    pub fn passes(&self) -> bool {
        self.low_gain <= self.tolerance && self.high_gain <= self.tolerance
    }
}

/// Searches `[0, w]` in each own state for a deviation from the strategy
/// `q(L) = L`, `q(H) = phi`. The tolerance is `step·max|P'|·H` with
/// `step = H/grid_n`.
pub fn no_profitable_deviation(params: &DuopolyParams, phi: f64, grid_n: usize) -> Result<DeviationReport> {
    let low = best_response_on(params, State::Low, phi, 0.0, params.low, grid_n)?;
    let high = best_response_on(params, State::High, phi, 0.0, params.high, grid_n)?;
    let at_low = expected_profit(params, State::Low, params.low, phi);
    let at_high = expected_profit(params, State::High, phi, phi);
    let slope = params.demand.price_deriv(0.0).abs().max(params.demand.price_deriv(2.0 * params.high).abs());
    let step = params.high / grid_n as f64;
    Ok(DeviationReport {
        low_best: low.action,
        low_gain: low.profit - at_low,
        high_best: high.action,
        high_gain: high.profit - at_high,
        tolerance: step * slope * params.high,
    })
}

/// `(f(x+h) - f(x-h)) / 2h`.
pub fn central_difference<F>(mut f: F, x: f64, h: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid("h", h, "finite h > 0"));
    }
    Ok((f(x + h) - f(x - h)) / (2.0 * h))
}

/// Transfers found feasible by scanning.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TransferScan {
    /// Smallest and largest feasible `t` seen, if any.
    pub interval: Option<(f64, f64)>,
    /// Number of feasible grid points.
    pub feasible_points: usize,
    /// Scan spacing.
    pub step: f64,
}

/// Scans `t ∈ [-1, 2]` in steps of `1e-5`, testing the truthful-reporting
/// and both participation inequalities in their unrearranged form.
pub fn collusion_feasibility_scan(params: &CollusionParams, phi: f64) -> Result<TransferScan> {
    params.validate()?;
    let CollusionParams { s, beta, d, low, gamma } = *params;
    let denom = beta + d * (1.0 - beta);
    let hh = beta / denom;
    let lh = 1.0 - hh;
    let hl = d * beta / denom;
    let ll = 1.0 - hl;
    let pi_m = s * s / 4.0;
    let pi_l = (s - 2.0 * low) * low;

    const STEPS: usize = 300_000;
    let step = 3.0 / STEPS as f64;
    let mut interval: Option<(f64, f64)> = None;
    let mut feasible_points = 0;
    for k in 0..=STEPS {
        let t = -1.0 + k as f64 * step;
        let truthful = hh * pi_m / 2.0 + lh * (pi_m - t * pi_m);
        let ic = truthful >= hh * t * pi_m + lh * pi_l;
        let irh = truthful - gamma >= hh * phi * (s - 2.0 * phi) + lh * phi * (s - low - phi);
        let irl = hl * t * pi_m + ll * pi_l - gamma >= hl * low * (s - phi - low) + ll * pi_l;
        if ic && irh && irl {
            feasible_points += 1;
            interval = Some(match interval {
                None => (t, t),
                Some((lo, _)) => (lo, t),
            });
        }
    }
    Ok(TransferScan { interval, feasible_points, step })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demand::DemandSpec;

    fn fig4(d: f64) -> DuopolyParams {
        DuopolyParams::new(DemandSpec::linear(3.0), 0.5, d, 0.6, 2.0).unwrap()
    }

    #[test]
    fn best_reply_at_fixed_point() {
        let p = fig4(1.0);
        let step = 1.4 / 4000.0;
        assert!((best_response_grid(&p, 1.08, 4000).unwrap() - 1.08).abs() <= step);
    }

    #[test]
    fn best_reply_to_low_opponent() {
        let p = fig4(1.0);
        let step = 1.4 / 4000.0;
        assert!((best_response_grid(&p, 0.6, 4000).unwrap() - 1.2).abs() <= step);
    }

    #[test]
    fn best_reply_full_correlation() {
        let p = fig4(0.0);
        assert!((best_response_grid(&p, 1.0, 4000).unwrap() - 1.0).abs() <= 1.4 / 4000.0);
    }

    #[test]
    fn small_grid_rejected() {
        assert!(best_response_grid(&fig4(0.5), 1.0, 99).is_err());
    }

    #[test]
    fn fixed_point_examples() {
        let g = fixed_point_equilibrium(&fig4(1.0), 2000, 1000).unwrap();
        assert!(g.settled());
        assert!((g.phi_hat - 1.08).abs() <= 7e-4);
        let g = fixed_point_equilibrium(&fig4(0.0), 2000, 1000).unwrap();
        assert!((g.phi_hat - 1.0).abs() <= g.grid_step);
    }

    #[test]
    fn low_state_produces_capacity() {
        let r = no_profitable_deviation(&fig4(0.5), 1.05, 4000).unwrap();
        assert_eq!(r.low_best, 0.6);
    }

    #[test]
    fn central_difference_exact_on_lines() {
        for h in [1e-3, 0.5, 7.0] {
            let v = central_difference(|x| 4.0 * x - 2.0, 0.3, h).unwrap();
            assert!((v - 4.0).abs() < 1e-12);
        }
        assert!(central_difference(|x| x, 0.0, 0.0).is_err());
    }

    #[test]
    fn scan_recovers_worked_interval() {
        let p = CollusionParams::new(1.0, 0.5, 0.5, 0.1, 0.0).unwrap();
        let scan = collusion_feasibility_scan(&p, 0.3625).unwrap();
        let (lo, hi) = scan.interval.unwrap();
        assert!((lo - 0.215).abs() <= scan.step);
        assert!((hi - 0.423125).abs() <= scan.step);
        let scan = collusion_feasibility_scan(&p.with_gamma(0.01), 0.3625).unwrap();
        assert!(scan.interval.is_none());
    }
}
