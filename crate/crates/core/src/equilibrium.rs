//! Symmetric Bayesian Nash equilibria.
//!
//! In equilibrium every producer sells its full availability in the low state
//! and curtails to a common level `φ` in the high state, so the strategy is
//! `q(w) = min(w, φ)`. For the duopoly `φ` is the root on `(L, H)` of
//!
//! ```text
//! f(x) = Pr{L|H}[P(L+x) + xP'(L+x)] + Pr{H|H}[P(2x) + xP'(2x)]
//! ```
//!
//! which is strictly decreasing with `f(L) > 0 > f(H)` whenever
//! `P(2L) + LP'(2L) > 0` and `P(H) + HP'(H) < 0`. The `N+1`-producer
//! condition replaces the two-point conditional law with the law of the
//! number of other high-state producers.

use crate::demand::DemandSpec;
use crate::error::{check_dispersion, check_probability, Error, Result};
use crate::roots::{bisect, BisectionTolerance};
use crate::stochastic::{DuopolyCorrelation, JointAvailability, State};

/// Maximum `|FOC|` accepted in a returned equilibrium.
pub const FOC_TOLERANCE: f64 = 1e-10;

/// Two-producer market.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DuopolyParams {
    /// Inverse demand.
    pub demand: DemandSpec,
    /// Prior probability of the high state.
    pub beta: f64,
    /// Dispersion.
    pub d: f64,
    /// Low-state availability `L`.
    pub low: f64,
    /// High-state availability `H`.
    pub high: f64,
}

impl DuopolyParams {
    /// Validates ranges (`0 < L < H`, `0 < β < 1`, `0 <= d <= 1`) and demand
    /// concavity on `[0, 2H]`. The interior-equilibrium condition is checked separately.
    pub fn new(demand: DemandSpec, beta: f64, d: f64, low: f64, high: f64) -> Result<Self> {
        let p = DuopolyParams { demand, beta, d, low, high };
        p.validate()?;
        Ok(p)
    }

    /// Range and concavity validation.
    pub fn validate(&self) -> Result<()> {
        check_probability("beta", self.beta)?;
        check_dispersion(self.d)?;
        check_capacities(self.low, self.high)?;
        self.demand.require_valid(2.0 * self.high)
    }

    /// The correlation structure `(β, d)`.
    pub fn correlation(&self) -> DuopolyCorrelation {
        DuopolyCorrelation::new(self.beta, self.d).expect("validated parameters")
    }

    /// Copy with a different dispersion.
    pub fn with_d(&self, d: f64) -> Self {
        DuopolyParams { d, ..*self }
    }
}

pub(crate) fn check_capacities(low: f64, high: f64) -> Result<()> {
    if !(low > 0.0 && low.is_finite()) {
        return Err(Error::invalid("L", low, "0 < L"));
    }
    if !(high > low && high.is_finite()) {
        return Err(Error::invalid("H", high, "L < H"));
    }
    Ok(())
}

/// Outcome of [`check_assumption1`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Assumption1Report {
    /// `P(2L) + LP'(2L) > 0`: no curtailment in the low state.
    pub low_ok: bool,
    /// `P(H) + HP'(H) < 0`: a lone high-state producer would curtail.
    pub high_ok: bool,
    /// `P(2L) + LP'(2L)`.
    pub low_value: f64,
    /// `P(H) + HP'(H)`.
    pub high_value: f64,
}

impl Assumption1Report {
    /// Both conditions hold.
    pub fn holds(&self) -> bool {
        self.low_ok && self.high_ok
    }

    /// Turns a failing report into the matching error.
    pub fn require(&self) -> Result<()> {
        if !self.low_ok {
            return Err(Error::AssumptionViolated {
                assumption: "P(2L) + L P'(2L) > 0",
                value: self.low_value,
            });
        }
        if !self.high_ok {
            return Err(Error::AssumptionViolated {
                assumption: "P(H) + H P'(H) < 0",
                value: self.high_value,
            });
        }
        Ok(())
    }
}

/// Evaluates both halves of the interior-equilibrium assumption.
/// Equality counts as a failure.
pub fn check_assumption1(params: &DuopolyParams) -> Assumption1Report {
    let DuopolyParams { demand, low, high, .. } = *params;
    let low_value = demand.marginal_revenue(2.0 * low, low);
    let high_value = demand.marginal_revenue(high, high);
    Assumption1Report { low_ok: low_value > 0.0, high_ok: high_value < 0.0, low_value, high_value }
}

/// How an equilibrium was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    /// Exact formula for linear demand.
    ClosedForm,
    /// Bisection on the first-order condition.
    Bisection,
}

/// Which kind of symmetric equilibrium was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// High-state producers curtail to `L < φ < H`.
    Interior,
    /// The first-order condition stays positive up to `H`: everyone sells
    /// full availability and `φ = H`.
    NoCurtailment,
}

/// A symmetric equilibrium `q(w) = min(w, φ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumResult {
    /// High-state output.
    pub phi: f64,
    /// Low-state availability (and output).
    pub low: f64,
    /// High-state availability.
    pub high: f64,
    /// First-order condition evaluated at `phi`.
    pub foc_residual: f64,
    /// Closed form or bisection.
    pub method: SolveMethod,
    /// Interior or boundary equilibrium.
    pub regime: Regime,
    /// Bisection steps (zero for closed forms).
    pub iterations: usize,
}

impl EquilibriumResult {
    /// Output in a given state.
    pub fn output(&self, state: State) -> f64 {
        match state {
            State::Low => strategy_output(self.phi, self.low),
            State::High => strategy_output(self.phi, self.high),
        }
    }
}

/// `min(w, φ)`.
pub fn strategy_output(phi: f64, w: f64) -> f64 {
    w.min(phi)
}

/// Left side of the duopoly first-order condition at high-state output `x`.
pub fn duopoly_foc(params: &DuopolyParams, x: f64) -> f64 {
    let corr = params.correlation();
    let p_low = corr.conditional(State::High, State::Low);
    let p_high = corr.conditional(State::High, State::High);
    let demand = &params.demand;
    p_low * demand.marginal_revenue(params.low + x, x)
        + p_high * demand.marginal_revenue(2.0 * x, x)
}

/// Solves the duopoly first-order condition by bisection on `[L, H]`.
pub fn solve_phi_duopoly(params: &DuopolyParams) -> Result<EquilibriumResult> {
    params.validate()?;
    check_assumption1(params).require()?;
    let sol = bisect(
        |x| duopoly_foc(params, x),
        params.low,
        params.high,
        BisectionTolerance::default(),
    )?;
    finish(params.low, params.high, sol.root, sol.residual, SolveMethod::Bisection, sol.iterations)
}

fn finish(
    low: f64,
    high: f64,
    phi: f64,
    residual: f64,
    method: SolveMethod,
    iterations: usize,
) -> Result<EquilibriumResult> {
    if !(phi > low && phi < high) {
        return Err(Error::AssumptionViolated { assumption: "L < phi < H", value: phi });
    }
    if residual.abs() > FOC_TOLERANCE {
        return Err(Error::OracleDisagreement { quantity: "first-order residual", difference: residual });
    }
    Ok(EquilibriumResult {
        phi,
        low,
        high,
        foc_residual: residual,
        method,
        regime: Regime::Interior,
        iterations,
    })
}

/// High-state output for linear demand `P = s - Q`:
/// `φ = (sβ + (s-L)(1-β)d) / (3β + 2(1-β)d)`.
pub fn phi_closed_form_linear(s: f64, beta: f64, d: f64, low: f64) -> f64 {
    let e = (1.0 - beta) * d;
    (s * beta + (s - low) * e) / (3.0 * beta + 2.0 * e)
}

/// Solves the duopoly, using the closed form for linear demand and bisection
/// otherwise. The closed form is checked against the first-order condition.
pub fn solve_duopoly(params: &DuopolyParams) -> Result<EquilibriumResult> {
    match params.demand {
        DemandSpec::Linear { s } => {
            params.validate()?;
            check_assumption1(params).require()?;
            let phi = phi_closed_form_linear(s, params.beta, params.d, params.low);
            let residual = duopoly_foc(params, phi);
            finish(params.low, params.high, phi, residual, SolveMethod::ClosedForm, 0)
        }
        DemandSpec::Quadratic { .. } => solve_phi_duopoly(params),
    }
}

/// `∂φ/∂d` at an interior duopoly equilibrium by implicit differentiation
/// of the first-order condition.
pub fn dphi_dd_duopoly(params: &DuopolyParams, phi: f64) -> f64 {
    let corr = params.correlation();
    let demand = &params.demand;
    let l = params.low;
    let p_low = corr.conditional(State::High, State::Low);
    let p_high = corr.conditional(State::High, State::High);
    let mixed = l + phi;
    let both = 2.0 * phi;
    let dfoc_dphi = p_low
        * (2.0 * demand.price_deriv(mixed) + phi * demand.price_second_deriv(mixed))
        + p_high * (3.0 * demand.price_deriv(both) + 2.0 * phi * demand.price_second_deriv(both));
    let gap = demand.marginal_revenue(mixed, phi) - demand.marginal_revenue(both, phi);
    -corr.dlow_given_high_dd() * gap / dfoc_dphi
}

/// `∂φ/∂d` for linear demand, differentiating [`phi_closed_form_linear`].
pub fn dphi_dd_linear_duopoly(s: f64, beta: f64, d: f64, low: f64) -> f64 {
    let denom = 3.0 * beta + 2.0 * (1.0 - beta) * d;
    beta * (1.0 - beta) * (s - 3.0 * low) / (denom * denom)
}

/// Left side of the `N+1`-producer first-order condition at `phi`, given
/// `cond[j] = Pr{S_{-i} = j | w_i = H}`.
pub fn multi_foc(cond: &[f64], demand: &DemandSpec, low: f64, phi: f64) -> f64 {
    let n = cond.len() - 1;
    cond.iter()
        .enumerate()
        .map(|(j, p)| {
            let others = j as f64 * phi + (n - j) as f64 * low;
            p * demand.marginal_revenue(phi + others, phi)
        })
        .sum()
}

/// Solves the `N+1`-producer first-order condition on `[L, H]`.
///
/// Requires `P((N+1)L) + LP'((N+1)L) > 0`. If the condition is still
/// non-negative at `H`, nobody curtails and the result carries
/// [`Regime::NoCurtailment`] with `φ = H`.
pub fn solve_phi_multi(
    dist: &JointAvailability,
    demand: &DemandSpec,
    low: f64,
    high: f64,
) -> Result<EquilibriumResult> {
    check_capacities(low, high)?;
    let producers = dist.n_plus_1() as f64;
    demand.require_valid(producers * high)?;
    let low_value = demand.marginal_revenue(producers * low, low);
    if !(low_value > 0.0) {
        return Err(Error::AssumptionViolated {
            assumption: "P((N+1)L) + L P'((N+1)L) > 0",
            value: low_value,
        });
    }
    let cond = dist.conditional_given_high()?;
    let g = |phi: f64| multi_foc(&cond, demand, low, phi);
    let at_high = g(high);
    if at_high >= 0.0 {
        return Ok(EquilibriumResult {
            phi: high,
            low,
            high,
            foc_residual: at_high,
            method: SolveMethod::Bisection,
            regime: Regime::NoCurtailment,
            iterations: 0,
        });
    }
    let sol = bisect(g, low, high, BisectionTolerance::default())?;
    finish(low, high, sol.root, sol.residual, SolveMethod::Bisection, sol.iterations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::mixture_family;

    fn fig4(d: f64) -> DuopolyParams {
        DuopolyParams::new(DemandSpec::linear(3.0), 0.5, d, 0.6, 2.0).unwrap()
    }

    #[test]
    fn assumption1_examples() {
        let r = check_assumption1(&fig4(0.5));
        assert!(r.low_ok && r.high_ok);
        assert!((r.low_value - 1.2).abs() < 1e-15);
        assert!((r.high_value + 1.0).abs() < 1e-15);

        let boundary_low = DuopolyParams::new(DemandSpec::linear(3.0), 0.5, 0.5, 1.0, 2.0).unwrap();
        let r = check_assumption1(&boundary_low);
        assert!(!r.low_ok && r.high_ok);

        let boundary_high = DuopolyParams::new(DemandSpec::linear(3.0), 0.5, 0.5, 0.6, 1.5).unwrap();
        let r = check_assumption1(&boundary_high);
        assert!(r.low_ok && !r.high_ok);
        assert!(solve_phi_duopoly(&boundary_high).is_err());
    }

    #[test]
    fn solve_examples() {
        for (d, want) in [(0.0, 1.0), (1.0, 1.08), (0.5, 1.05)] {
            let eq = solve_phi_duopoly(&fig4(d)).unwrap();
            assert!((eq.phi - want).abs() < 1e-12, "d={d}: {}", eq.phi);
            assert!(eq.foc_residual.abs() <= FOC_TOLERANCE);
            assert_eq!(eq.method, SolveMethod::Bisection);
        }
    }

    #[test]
    fn closed_form_examples() {
        assert!((phi_closed_form_linear(3.0, 0.5, 1.0, 0.6) - 1.08).abs() < 1e-15);
        assert!((phi_closed_form_linear(3.0, 0.5, 0.5, 0.6) - 1.05).abs() < 1e-15);
        for l in [0.1, 0.5, 0.9] {
            assert!((phi_closed_form_linear(3.0, 0.3, 0.0, l) - 1.0).abs() < 1e-15);
        }
        let eq = solve_duopoly(&fig4(1.0)).unwrap();
        assert_eq!(eq.method, SolveMethod::ClosedForm);
        assert!((eq.phi - 1.08).abs() < 1e-15);
    }

    #[test]
    fn strategy_examples() {
        assert_eq!(strategy_output(1.08, 0.6), 0.6);
        assert_eq!(strategy_output(1.08, 2.0), 1.08);
        assert_eq!(strategy_output(1.08, 1.08), 1.08);
        let eq = solve_duopoly(&fig4(1.0)).unwrap();
        assert_eq!(eq.output(State::Low), 0.6);
        assert_eq!(eq.output(State::High), eq.phi);
    }

    #[test]
    fn implicit_derivative_matches_linear_formula() {
        let p = fig4(0.3);
        let eq = solve_duopoly(&p).unwrap();
        let a = dphi_dd_duopoly(&p, eq.phi);
        let b = dphi_dd_linear_duopoly(3.0, 0.5, 0.3, 0.6);
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn multi_examples() {
        let demand = DemandSpec::linear(3.0);
        let eq = solve_phi_multi(&mixture_family(3, 0.5, 1.0).unwrap(), &demand, 0.3, 2.0).unwrap();
        assert!((eq.phi - 0.9).abs() < 1e-12);

        let eq = solve_phi_multi(&mixture_family(3, 0.5, 0.0).unwrap(), &demand, 0.3, 2.0).unwrap();
        assert!((eq.phi - 0.75).abs() < 1e-12);

        let duo = DuopolyCorrelation::new(0.5, 0.5).unwrap().to_joint();
        let eq = solve_phi_multi(&duo, &demand, 0.6, 2.0).unwrap();
        assert!((eq.phi - 1.05).abs() < 1e-12);
    }

    #[test]
    fn multi_boundary_regime() {
        // H below the interior root: everybody sells full availability.
        let demand = DemandSpec::linear(3.0);
        let eq = solve_phi_multi(&mixture_family(3, 0.5, 1.0).unwrap(), &demand, 0.3, 0.8).unwrap();
        assert_eq!(eq.regime, Regime::NoCurtailment);
        assert_eq!(eq.phi, 0.8);
        // Low-state condition fails: 3 - 3.6 - 1.2 < 0.
        let err = solve_phi_multi(&mixture_family(3, 0.5, 1.0).unwrap(), &demand, 1.2, 2.0);
        assert!(matches!(err, Err(Error::AssumptionViolated { .. })));
    }
}
