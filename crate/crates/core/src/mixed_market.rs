//! Two wind producers competing with a traditional generator that has
//! constant marginal cost `c` and no capacity limit.
//!
//! The wind producers' high-state condition (A) and the generator's
//! condition (B) are
//!
//! ```text
//! (A) Pr{L|H}[P(L+φ+x) + φP'(L+φ+x)] + Pr{H|H}[P(2φ+x) + φP'(2φ+x)] = 0
//! (B) Pr{L,L}[P(2L+x) + xP'(2L+x)] + 2Pr{L,H}[P(L+φ+x) + xP'(L+φ+x)]
//!       + Pr{H,H}[P(2φ+x) + xP'(2φ+x)] - c = 0
//! ```

use crate::demand::DemandSpec;
use crate::equilibrium::{check_capacities, SolveMethod, FOC_TOLERANCE};
use crate::error::{check_dispersion, check_probability, Error, Result};
use crate::roots::{bisect, BisectionTolerance};
use crate::stochastic::{DuopolyCorrelation, State};

const OUTER_TOLERANCE: f64 = 1e-11;
const MAX_OUTER: usize = 10_000;

/// Market parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedMarketParams {
    /// Inverse demand.
    pub demand: DemandSpec,
    /// Prior probability of the high state.
    pub beta: f64,
    /// Dispersion.
    pub d: f64,
    /// Low-state availability.
    pub low: f64,
    /// High-state availability.
    pub high: f64,
    /// Marginal cost of the traditional generator.
    pub cost: f64,
}

impl MixedMarketParams {
    /// Validates parameter ranges and demand concavity.
    pub fn new(demand: DemandSpec, beta: f64, d: f64, low: f64, high: f64, cost: f64) -> Result<Self> {
        let p = MixedMarketParams { demand, beta, d, low, high, cost };
        p.validate()?;
        Ok(p)
    }

    /// Range and concavity validation.
    pub fn validate(&self) -> Result<()> {
        check_probability("beta", self.beta)?;
        check_dispersion(self.d)?;
        check_capacities(self.low, self.high)?;
        if !(self.cost >= 0.0 && self.cost.is_finite()) {
            return Err(Error::invalid("c", self.cost, "c >= 0"));
        }
        self.demand.require_valid(2.0 * self.high)
    }

    /// Copy with a different dispersion.
    pub fn with_d(&self, d: f64) -> Self {
        MixedMarketParams { d, ..*self }
    }

    fn correlation(&self) -> DuopolyCorrelation {
        DuopolyCorrelation::new(self.beta, self.d).expect("validated parameters")
    }
}

/// Left side of condition (A).
pub fn wind_foc(p: &MixedMarketParams, phi: f64, x: f64) -> f64 {
    let corr = p.correlation();
    corr.conditional(State::High, State::Low) * p.demand.marginal_revenue(p.low + phi + x, phi)
        + corr.conditional(State::High, State::High) * p.demand.marginal_revenue(2.0 * phi + x, phi)
}

/// Left side of condition (B).
pub fn traditional_foc(p: &MixedMarketParams, phi: f64, x: f64) -> f64 {
    let j = p.correlation().joint();
    let mr = |wind: f64| p.demand.marginal_revenue(wind + x, x);
    j.ll * mr(2.0 * p.low) + (j.lh + j.hl) * mr(p.low + phi) + j.hh * mr(2.0 * phi) - p.cost
}

/// Marginal profit of a low-state wind producer selling its full availability.
pub fn low_state_margin(p: &MixedMarketParams, phi: f64, x: f64) -> f64 {
    let corr = p.correlation();
    corr.conditional(State::Low, State::Low) * p.demand.marginal_revenue(2.0 * p.low + x, p.low)
        + corr.conditional(State::Low, State::High) * p.demand.marginal_revenue(p.low + phi + x, p.low)
}

/// Outcome of [`check_assumption4`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Assumption4Report {
    /// `c < P(2H)`.
    pub cost_ok: bool,
    /// `P(3L) + LP'(3L) > 0`.
    pub low_ok: bool,
    /// `P(H+L+x̲) + HP'(H+L+x̲) < 0`.
    pub high_ok: bool,
    /// Lower bound `x̲` on traditional output.
    pub x_floor: f64,
    /// `P(2H) - c`.
    pub cost_margin: f64,
    /// `P(3L) + LP'(3L)`.
    pub low_value: f64,
    /// `P(H+L+x̲) + HP'(H+L+x̲)`.
    pub high_value: f64,
}

impl Assumption4Report {
    /// All three conditions hold.
    pub fn holds(&self) -> bool {
        self.cost_ok && self.low_ok && self.high_ok
    }
}

/// Evaluates the three interior-equilibrium conditions. `x̲` solves
/// `E[P(w₁+w₂+x) + xP'(w₁+w₂+x)] = c` with both wind producers at full
/// availability, and is clamped to zero when that expectation is already
/// below `c` at `x = 0`.
pub fn check_assumption4(p: &MixedMarketParams) -> Result<Assumption4Report> {
    p.validate()?;
    let j = p.correlation().joint();
    let (l, hi) = (p.low, p.high);
    let h = |x: f64| {
        let mr = |wind: f64| p.demand.marginal_revenue(wind + x, x);
        j.ll * mr(2.0 * l) + (j.lh + j.hl) * mr(l + hi) + j.hh * mr(2.0 * hi) - p.cost
    };
    let x_floor = if h(0.0) <= 0.0 { 0.0 } else { bisect(h, 0.0, expand_upper(&h)?, BisectionTolerance::default())?.root };
    let cost_margin = p.demand.price(2.0 * hi) - p.cost;
    let low_value = p.demand.marginal_revenue(3.0 * l, l);
    let high_value = p.demand.marginal_revenue(hi + l + x_floor, hi);
    Ok(Assumption4Report {
        cost_ok: cost_margin > 0.0,
        low_ok: low_value > 0.0,
        high_ok: high_value < 0.0,
        x_floor,
        cost_margin,
        low_value,
        high_value,
    })
}

fn expand_upper(h: &impl Fn(f64) -> f64) -> Result<f64> {
    let mut upper = 1.0;
    for _ in 0..200 {
        if h(upper) < 0.0 {
            return Ok(upper);
        }
        upper *= 2.0;
    }
    Err(Error::NoConvergence { routine: "bracket expansion", iterations: 200 })
}

/// Equilibrium of the mixed market.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedEquilibrium {
    /// Wind high-state output.
    pub phi: f64,
    /// Traditional output.
    pub x: f64,
    /// Condition (A) at the solution.
    pub wind_residual: f64,
    /// Condition (B) at the solution; when `x_clamped` this is the
    /// (non-positive) complementarity residual at `x = 0`.
    pub trad_residual: f64,
    /// The generator sits at the `x = 0` boundary.
    pub x_clamped: bool,
    /// How the solution was obtained.
    pub method: SolveMethod,
    /// Outer Gauss-Seidel sweeps (zero for closed forms).
    pub iterations: usize,
    /// The sufficient interior conditions evaluated at these parameters. They
    /// are not necessary; the solution's own interior conditions are what is enforced.
    pub assumption4: Assumption4Report,
}

/// Closed-form `(φ, x)` for linear demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedClosedForm {
    /// Wind high-state output.
    pub phi: f64,
    /// Traditional output.
    pub x: f64,
}

fn mixed_denominator(beta: f64, d: f64) -> f64 {
    3.0 * beta + 2.0 * d * (1.0 - beta) - beta * beta - beta * d * (1.0 - beta)
}

/// Linear-demand equilibrium:
/// `φ = (½(s+c)(β+d(1-β)) + Lβ(1-β)(1-d)) / (3β + 2d(1-β) - β² - βd(1-β))`,
/// `x = ½(s-c) - φβ - L(1-β)`.
pub fn mixed_closed_form_linear(s: f64, c: f64, beta: f64, d: f64, low: f64) -> MixedClosedForm {
    let num = 0.5 * (s + c) * (beta + d * (1.0 - beta)) + low * beta * (1.0 - beta) * (1.0 - d);
    let phi = num / mixed_denominator(beta, d);
    let x = 0.5 * (s - c) - phi * beta - low * (1.0 - beta);
    MixedClosedForm { phi, x }
}

/// `∂φ/∂d` for linear demand.
pub fn dphi_dd_linear(s: f64, c: f64, beta: f64, d: f64, low: f64) -> f64 {
    let den = mixed_denominator(beta, d);
    (s + c - 4.0 * low) * beta * (1.0 - beta) / (2.0 * den * den)
}

/// `∂x/∂d = -β ∂φ/∂d` for linear demand.
pub fn dx_dd_linear(s: f64, c: f64, beta: f64, d: f64, low: f64) -> f64 {
    -beta * dphi_dd_linear(s, c, beta, d, low)
}

/// Solves conditions (A) and (B). Linear demand uses the closed form when
/// it yields `x >= 0`; everything else goes through [`solve_mixed_iterative`].
pub fn solve_mixed(p: &MixedMarketParams) -> Result<MixedEquilibrium> {
    let assumption4 = check_assumption4(p)?;
    if let DemandSpec::Linear { s } = p.demand {
        let cf = mixed_closed_form_linear(s, p.cost, p.beta, p.d, p.low);
        if cf.x >= 0.0 {
            let eq = MixedEquilibrium {
                phi: cf.phi,
                x: cf.x,
                wind_residual: wind_foc(p, cf.phi, cf.x),
                trad_residual: traditional_foc(p, cf.phi, cf.x),
                x_clamped: false,
                method: SolveMethod::ClosedForm,
                iterations: 0,
                assumption4,
            };
            return verify_interior(p, eq);
        }
    }
    solve_mixed_iterative(p)
}

/// Gauss-Seidel on the two conditions: bisection of (A) in `φ` for fixed
/// `x`, then bisection of (B) in `x` for fixed `φ`, until both move by less
/// than `1e-11`.
pub fn solve_mixed_iterative(p: &MixedMarketParams) -> Result<MixedEquilibrium> {
    let assumption4 = check_assumption4(p)?;
    let tol = BisectionTolerance { residual: 1e-14, ..BisectionTolerance::default() };
    let mut phi = p.low;
    let mut x = assumption4.x_floor;
    for iter in 1..=MAX_OUTER {
        let next_phi = {
            let a = |v: f64| wind_foc(p, v, x);
            if a(p.high) >= 0.0 {
                p.high
            } else {
                bisect(a, 0.0, p.high, tol)?.root
            }
        };
        let next_x = {
            let b = |v: f64| traditional_foc(p, next_phi, v);
            if b(0.0) <= 0.0 {
                0.0
            } else {
                bisect(b, 0.0, expand_upper(&b)?, tol)?.root
            }
        };
        let moved = (next_phi - phi).abs().max((next_x - x).abs());
        phi = next_phi;
        x = next_x;
        if moved < OUTER_TOLERANCE {
            let eq = MixedEquilibrium {
                phi,
                x,
                wind_residual: wind_foc(p, phi, x),
                trad_residual: traditional_foc(p, phi, x),
                x_clamped: x == 0.0,
                method: SolveMethod::Bisection,
                iterations: iter,
                assumption4,
            };
            return verify_interior(p, eq);
        }
    }
    Err(Error::NoConvergence { routine: "mixed-market Gauss-Seidel", iterations: MAX_OUTER })
}

fn verify_interior(p: &MixedMarketParams, eq: MixedEquilibrium) -> Result<MixedEquilibrium> {
    if !(eq.phi > p.low && eq.phi < p.high) {
        return Err(Error::AssumptionViolated { assumption: "L < phi < H (mixed market)", value: eq.phi });
    }
    let margin = low_state_margin(p, eq.phi, eq.x);
    if !(margin > 0.0) {
        return Err(Error::AssumptionViolated {
            assumption: "low-state wind producers sell full availability",
            value: margin,
        });
    }
    if eq.wind_residual.abs() > FOC_TOLERANCE {
        return Err(Error::OracleDisagreement { quantity: "wind first-order residual", difference: eq.wind_residual });
    }
    let trad_ok = if eq.x_clamped { eq.trad_residual <= FOC_TOLERANCE } else { eq.trad_residual.abs() <= FOC_TOLERANCE };
    if !trad_ok {
        return Err(Error::OracleDisagreement {
            quantity: "traditional first-order residual",
            difference: eq.trad_residual,
        });
    }
    Ok(eq)
}

/// Expectations over the four wind states at a mixed-market equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedExpectations {
    /// `E[P]`.
    pub e_price: f64,
    /// `E[U(Q)] - c·x`.
    pub e_welfare: f64,
    /// Expected profit of one wind producer.
    pub e_profit_wind: f64,
    /// Expected profit of the traditional generator, `x(E[P] - c)`.
    pub e_profit_trad: f64,
    /// `E[Q] = x + 2βφ + 2(1-β)L`.
    pub e_total_output: f64,
}

/// Enumerates the four wind states.
pub fn mixed_expectations(p: &MixedMarketParams, eq: &MixedEquilibrium) -> MixedExpectations {
    let j = p.correlation().joint();
    let (l, phi, x) = (p.low, eq.phi, eq.x);
    let states = [(j.ll, l, l), (j.lh, l, phi), (j.hl, phi, l), (j.hh, phi, phi)];
    let mut out = MixedExpectations {
        e_price: 0.0,
        e_welfare: 0.0,
        e_profit_wind: 0.0,
        e_profit_trad: 0.0,
        e_total_output: 0.0,
    };
    for (prob, q1, q2) in states {
        let total = q1 + q2 + x;
        let price = p.demand.price(total);
        out.e_price += prob * price;
        out.e_welfare += prob * (p.demand.utility(total) - p.cost * x);
        out.e_profit_wind += prob * q1 * price;
        out.e_profit_trad += prob * x * (price - p.cost);
        out.e_total_output += prob * total;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig5(d: f64) -> MixedMarketParams {
        MixedMarketParams::new(DemandSpec::linear(3.0), 0.5, d, 0.1, 2.0, 1.0).unwrap()
    }

    #[test]
    fn assumption4_examples() {
        let p = MixedMarketParams::new(DemandSpec::linear(3.0), 0.5, 0.5, 0.1, 1.8, 1.0).unwrap();
        let r = check_assumption4(&p).unwrap();
        assert!(!r.cost_ok);
        assert!((r.cost_margin - (-0.6 - 1.0)).abs() < 1e-12);
        assert!(r.low_ok);
        assert!((r.low_value - 2.6).abs() < 1e-12);

        let p = MixedMarketParams::new(DemandSpec::linear(3.0), 0.5, 0.5, 0.1, 1.8, 0.0).unwrap();
        let r = check_assumption4(&p).unwrap();
        let mean_wind = 2.0 * (0.5 * 1.8 + 0.5 * 0.1);
        assert!((r.x_floor - (3.0 - mean_wind) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn assumption4_can_hold() {
        // c below (s(1-β) + 2βL)/(3-β) = 0.64 leaves room for H.
        let p = MixedMarketParams::new(DemandSpec::linear(3.0), 0.5, 0.5, 0.1, 1.2, 0.5).unwrap();
        assert!(check_assumption4(&p).unwrap().holds());
    }

    #[test]
    fn closed_form_examples() {
        let a = mixed_closed_form_linear(3.0, 1.0, 0.5, 0.0, 0.1);
        assert!((a.phi - 0.82).abs() < 1e-12 && (a.x - 0.54).abs() < 1e-12);
        let b = mixed_closed_form_linear(3.0, 1.0, 0.5, 1.0, 0.1);
        assert!((b.phi - 1.0).abs() < 1e-12 && (b.x - 0.45).abs() < 1e-12);
        let c = mixed_closed_form_linear(3.0, 1.0, 0.5, 0.4, 0.1);
        assert!((c.phi - 1.415 / 1.55).abs() < 1e-12);
        assert!((c.x - (1.0 - 0.5 * 1.415 / 1.55 - 0.05)).abs() < 1e-12);
    }

    #[test]
    fn derivative_examples() {
        assert!((dphi_dd_linear(3.0, 1.0, 0.5, 0.0, 0.1) - 0.288).abs() < 1e-12);
        assert!((dx_dd_linear(3.0, 1.0, 0.5, 0.0, 0.1) + 0.144).abs() < 1e-12);
    }

    #[test]
    fn solver_matches_closed_form() {
        for d in [0.0, 0.4, 1.0] {
            let p = fig5(d);
            let cf = mixed_closed_form_linear(3.0, 1.0, 0.5, d, 0.1);
            let eq = solve_mixed_iterative(&p).unwrap();
            assert!((eq.phi - cf.phi).abs() < 1e-10, "d={d}");
            assert!((eq.x - cf.x).abs() < 1e-10, "d={d}");
            let eq = solve_mixed(&p).unwrap();
            assert_eq!(eq.method, SolveMethod::ClosedForm);
        }
    }

    #[test]
    fn traditional_output_falls_with_cost() {
        let mut last = f64::INFINITY;
        for c in [0.0, 0.5, 1.0, 1.5, 2.0] {
            let p = MixedMarketParams::new(DemandSpec::quadratic(3.0, 1.0, 0.1), 0.5, 0.5, 0.1, 2.0, c).unwrap();
            let eq = solve_mixed(&p).unwrap();
            assert!(eq.x < last);
            last = eq.x;
        }
    }

    #[test]
    fn generator_priced_out_is_clamped() {
        let p = MixedMarketParams::new(DemandSpec::linear(3.0), 0.5, 0.5, 0.1, 2.0, 2.9).unwrap();
        let eq = solve_mixed(&p).unwrap();
        assert!(eq.x_clamped);
        assert_eq!(eq.x, 0.0);
        assert!(eq.trad_residual <= 0.0);
    }
}
