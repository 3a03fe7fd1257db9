//! Expected welfare, price and profit by exact state enumeration, the
//! split of their dispersion derivatives into a diversification part and a
//! strategic-curtailment part, and parameter sweeps.

use alloc::vec::Vec;

use crate::demand::DemandSpec;
use crate::equilibrium::{
    dphi_dd_duopoly, dphi_dd_linear_duopoly, solve_duopoly, solve_phi_multi, DuopolyParams,
    EquilibriumResult,
};
use crate::error::{Error, Result};
use crate::mixed_market::{mixed_expectations, solve_mixed, MixedEquilibrium, MixedExpectations, MixedMarketParams};
use crate::stochastic::{mixture_family, JointAvailability, State};

/// `WD_f = f(x,y) + f(y,x) - f(x,x) - f(y,y)`.
pub fn wd_functional<F>(f: F, x: f64, y: f64) -> f64
where
    F: Fn(f64, f64) -> f64,
{
    f(x, y) + f(y, x) - f(x, x) - f(y, y)
}

/// Identifies a row of the per-state table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKey {
    /// Duopoly state `(w₁, w₂)`.
    Pair(State, State),
    /// `N+1` producers with this many in the high state.
    HighCount(usize),
}

/// One state's outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateOutcome {
    /// Which state.
    pub key: StateKey,
    /// Its probability.
    pub probability: f64,
    /// Number of producers in the high state.
    pub highs: usize,
    /// Total output `Q`.
    pub total_output: f64,
    /// `P(Q)`.
    pub price: f64,
    /// `U(Q)`.
    pub welfare: f64,
    /// Profit of each high-state producer (zero if none).
    pub profit_high: f64,
    /// Profit of each low-state producer (zero if none).
    pub profit_low: f64,
}

/// Expectations and the state table they were computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationReport {
    /// `E[U(Q)]`.
    pub e_welfare: f64,
    /// `E[P(Q)]`.
    pub e_price: f64,
    /// Ex-ante expected profit of one producer.
    pub e_profit_per_firm: f64,
    /// `E[Q]`.
    pub e_total_output: f64,
    /// Number of producers.
    pub producers: usize,
    /// Per-state outcomes.
    pub per_state: Vec<StateOutcome>,
}

impl ExpectationReport {
    fn from_states(producers: usize, per_state: Vec<StateOutcome>) -> Self {
        let n = producers as f64;
        let mut r = ExpectationReport {
            e_welfare: 0.0,
            e_price: 0.0,
            e_profit_per_firm: 0.0,
            e_total_output: 0.0,
            producers,
            per_state,
        };
        for s in &r.per_state {
            let highs = s.highs as f64;
            r.e_welfare += s.probability * s.welfare;
            r.e_price += s.probability * s.price;
            r.e_total_output += s.probability * s.total_output;
            r.e_profit_per_firm +=
                s.probability * (highs * s.profit_high + (n - highs) * s.profit_low) / n;
        }
        r
    }
}

fn outcome(demand: &DemandSpec, key: StateKey, probability: f64, highs: usize, lows: usize, phi: f64, low: f64) -> StateOutcome {
    let total = highs as f64 * phi + lows as f64 * low;
    let price = demand.price(total);
    StateOutcome {
        key,
        probability,
        highs,
        total_output: total,
        price,
        welfare: demand.utility(total),
        profit_high: if highs > 0 { phi * price } else { 0.0 },
        profit_low: if lows > 0 { low * price } else { 0.0 },
    }
}

/// Enumerates the four duopoly states.
pub fn expectations_duopoly(params: &DuopolyParams, eq: &EquilibriumResult) -> ExpectationReport {
    let j = params.correlation().joint();
    let phi = eq.phi.min(params.high);
    let rows = [State::Low, State::High]
        .into_iter()
        .flat_map(|a| [State::Low, State::High].into_iter().map(move |b| (a, b)))
        .map(|(a, b)| {
            let highs = (a == State::High) as usize + (b == State::High) as usize;
            outcome(&params.demand, StateKey::Pair(a, b), j.get(a, b), highs, 2 - highs, phi, params.low)
        })
        .collect();
    ExpectationReport::from_states(2, rows)
}

/// Enumerates `S = 0..=N+1` with `Q(S) = (φ - L)S + (N+1)L`.
pub fn expectations_multi(dist: &JointAvailability, demand: &DemandSpec, eq: &EquilibriumResult) -> ExpectationReport {
    let n = dist.n_plus_1();
    let rows = dist
        .count_probs()
        .iter()
        .enumerate()
        .map(|(k, &p)| outcome(demand, StateKey::HighCount(k), p, k, n - k, eq.phi, eq.low))
        .collect();
    ExpectationReport::from_states(n, rows)
}

/// A dispersion derivative split into its two channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompositionReport {
    /// Contribution of the shift in state probabilities (diversification).
    pub wd_term: f64,
    /// Contribution of the change in high-state output (strategic curtailment).
    pub sc_term: f64,
    /// `wd_term + sc_term`.
    pub total: f64,
}

impl DecompositionReport {
    fn new(wd_term: f64, sc_term: f64) -> Self {
        DecompositionReport { wd_term, sc_term, total: wd_term + sc_term }
    }
}

/// Equilibrium together with `∂φ/∂d` and `ζ`.
struct Sensitivity {
    phi: f64,
    dphi: f64,
    zeta: f64,
}

fn sensitivity(params: &DuopolyParams) -> Result<Sensitivity> {
    let eq = solve_duopoly(params)?;
    let dphi = match params.demand {
        DemandSpec::Linear { s } => dphi_dd_linear_duopoly(s, params.beta, params.d, params.low),
        DemandSpec::Quadratic { .. } => dphi_dd_duopoly(params, eq.phi),
    };
    Ok(Sensitivity { phi: eq.phi, dphi, zeta: params.correlation().zeta() })
}

/// `∂E[W]/∂d = ζ·WD_U + 2(∂φ/∂d)(Pr{L,H}P(L+φ) + Pr{H,H}P(2φ))`.
pub fn decompose_welfare_derivative(params: &DuopolyParams) -> Result<DecompositionReport> {
    let Sensitivity { phi, dphi, zeta } = sensitivity(params)?;
    let demand = &params.demand;
    let j = params.correlation().joint();
    let l = params.low;
    let wd = zeta * wd_functional(|x, y| demand.utility(x + y), l, phi);
    let sc = 2.0 * dphi * (j.lh * demand.price(l + phi) + j.hh * demand.price(2.0 * phi));
    Ok(DecompositionReport::new(wd, sc))
}

/// `WD_P` in closed form: zero for affine demand, `2b(x-y)²` for the quadratic.
fn price_wd(demand: &DemandSpec, x: f64, y: f64) -> f64 {
    match *demand {
        DemandSpec::Linear { .. } => 0.0,
        DemandSpec::Quadratic { b, .. } => 2.0 * b * (x - y) * (x - y),
    }
}

/// `∂E[P]/∂d = ζ·WD_P + 2(∂φ/∂d)(Pr{L,H}P'(L+φ) + Pr{H,H}P'(2φ))`.
pub fn decompose_price_derivative(params: &DuopolyParams) -> Result<DecompositionReport> {
    let Sensitivity { phi, dphi, zeta } = sensitivity(params)?;
    let demand = &params.demand;
    let j = params.correlation().joint();
    let l = params.low;
    let wd = zeta * price_wd(demand, l, phi);
    let sc = 2.0 * dphi * (j.lh * demand.price_deriv(l + phi) + j.hh * demand.price_deriv(2.0 * phi));
    Ok(DecompositionReport::new(wd, sc))
}

/// `∂E[π_i]/∂d = ζ·WD_π + (∂φ/∂d)(T₂ + T₃)` with `WD_π` the diversification
/// functional of own profit `xP(x+y)`.
pub fn decompose_profit_derivative(params: &DuopolyParams) -> Result<DecompositionReport> {
    let Sensitivity { phi, dphi, zeta } = sensitivity(params)?;
    let demand = &params.demand;
    let j = params.correlation().joint();
    let l = params.low;
    let wd = zeta * wd_functional(|x, y| x * demand.price(x + y), l, phi);
    let t2_t3 = j.hl * demand.marginal_revenue(l + phi, l + phi)
        + j.hh * demand.marginal_revenue(2.0 * phi, 2.0 * phi);
    Ok(DecompositionReport::new(wd, dphi * t2_t3))
}

/// Capacity thresholds for the sign of the linear-demand profit derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfitThresholds {
    /// Below `2s/9` profit rises with dispersion.
    pub l1: f64,
    /// Above `s/4` profit falls with dispersion.
    pub l2: f64,
}

/// `L₁ = 2s/9`, `L₂ = 2s/8`.
pub fn profit_thresholds(s: f64) -> ProfitThresholds {
    ProfitThresholds { l1: 2.0 * s / 9.0, l2: 2.0 * s / 8.0 }
}

/// Analytic `∂E[π_i]/∂d` for linear demand:
/// `β²(1-β)(s-3L)/(3β+2d(1-β))³ · (β(2s-9L) + d(1-β)(2s-8L))`.
pub fn profit_derivative_linear(s: f64, beta: f64, d: f64, low: f64) -> f64 {
    let e = 3.0 * beta + 2.0 * d * (1.0 - beta);
    beta * beta * (1.0 - beta) * (s - 3.0 * low) / (e * e * e)
        * (beta * (2.0 * s - 9.0 * low) + d * (1.0 - beta) * (2.0 * s - 8.0 * low))
}

/// Closed-form `E[π_i]` for linear demand with intercept `s`.
///
/// The form with a bare `β/4 + L(1-2β)` leading term is only correct at
/// `s = 1`; the general intercept scales those terms to `βs²/4 + Ls(1-2β)`.
pub fn expected_profit_closed_form_linear(s: f64, beta: f64, d: f64, low: f64) -> f64 {
    let e = 3.0 * beta + 2.0 * d * (1.0 - beta);
    let r = s - 3.0 * low;
    beta * s * s / 4.0 + low * s * (1.0 - 2.0 * beta) + low * low * (3.75 * beta - 2.0)
        - beta * beta * r * (s - 4.0 * low) / (2.0 * e)
        + beta * beta * beta * r * r / (4.0 * e * e)
}

/// Parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Dispersion `d`.
    D,
    /// Prior `β`.
    Beta,
    /// Low-state availability `L`.
    Low,
    /// High-state availability `H`.
    High,
    /// Traditional marginal cost `c` (mixed market only).
    Cost,
}

impl SweepAxis {
    /// Column name used in tables.
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::D => "d",
            SweepAxis::Beta => "beta",
            SweepAxis::Low => "L",
            SweepAxis::High => "H",
            SweepAxis::Cost => "c",
        }
    }
}

/// `steps` evenly spaced points on `[from, to]`, endpoints included exactly.
pub fn closed_grid(from: f64, to: f64, steps: usize) -> Result<Vec<f64>> {
    match steps {
        0 => Err(Error::EmptyGrid),
        1 => Ok(alloc::vec![from]),
        _ => {
            let last = steps - 1;
            Ok((0..steps)
                .map(|i| if i == last { to } else { from + (to - from) * i as f64 / last as f64 })
                .collect())
        }
    }
}

/// One grid point of a sweep. Failures are kept in place, never dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow<T> {
    /// Value of the swept parameter.
    pub value: f64,
    /// Computed point or the reason it could not be computed.
    pub outcome: Result<T>,
}

/// Everything computed at one duopoly grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct DuopolyPoint {
    /// Parameters at this point.
    pub params: DuopolyParams,
    /// Equilibrium.
    pub equilibrium: EquilibriumResult,
    /// Enumerated expectations.
    pub expectations: ExpectationReport,
    /// Welfare derivative split.
    pub welfare: DecompositionReport,
    /// Price derivative split.
    pub price: DecompositionReport,
    /// Profit derivative split.
    pub profit: DecompositionReport,
}

/// Solves and analyses a single duopoly point.
pub fn analyze_duopoly(params: &DuopolyParams) -> Result<DuopolyPoint> {
    let equilibrium = solve_duopoly(params)?;
    Ok(DuopolyPoint {
        params: *params,
        equilibrium,
        expectations: expectations_duopoly(params, &equilibrium),
        welfare: decompose_welfare_derivative(params)?,
        price: decompose_price_derivative(params)?,
        profit: decompose_profit_derivative(params)?,
    })
}

fn run_sweep<P, T>(grid: &[f64], build: impl Fn(f64) -> Result<P>, eval: impl Fn(&P) -> Result<T>) -> Result<Vec<SweepRow<T>>> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    Ok(grid
        .iter()
        .map(|&value| SweepRow { value, outcome: build(value).and_then(|p| eval(&p)) })
        .collect())
}

fn unsupported(axis: SweepAxis) -> Error {
    Error::invalid("over", f64::NAN, match axis {
        SweepAxis::Cost => "an axis other than c for this market",
        _ => "a supported axis",
    })
}

/// Sweeps a duopoly parameter.
pub fn sweep_duopoly(template: &DuopolyParams, axis: SweepAxis, grid: &[f64]) -> Result<Vec<SweepRow<DuopolyPoint>>> {
    if axis == SweepAxis::Cost {
        return Err(unsupported(axis));
    }
    run_sweep(
        grid,
        |v| {
            let mut p = *template;
            match axis {
                SweepAxis::D => p.d = v,
                SweepAxis::Beta => p.beta = v,
                SweepAxis::Low => p.low = v,
                SweepAxis::High => p.high = v,
                SweepAxis::Cost => unreachable!(),
            }
            p.validate().map(|_| p)
        },
        analyze_duopoly,
    )
}

/// `N+1` producers whose availability follows [`mixture_family`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiMarket {
    /// Inverse demand.
    pub demand: DemandSpec,
    /// Number of producers.
    pub n_plus_1: usize,
    /// Prior probability of the high state.
    pub beta: f64,
    /// Dispersion.
    pub d: f64,
    /// Low-state availability.
    pub low: f64,
    /// High-state availability.
    pub high: f64,
}

/// Everything computed at one multi-producer point.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiPoint {
    /// Availability law.
    pub distribution: JointAvailability,
    /// Equilibrium (possibly the no-curtailment boundary).
    pub equilibrium: EquilibriumResult,
    /// Enumerated expectations.
    pub expectations: ExpectationReport,
}

impl MultiMarket {
    /// The mixture-family availability law.
    pub fn distribution(&self) -> Result<JointAvailability> {
        mixture_family(self.n_plus_1, self.beta, self.d)
    }

    /// Solves and enumerates.
    pub fn analyze(&self) -> Result<MultiPoint> {
        let distribution = self.distribution()?;
        let equilibrium = solve_phi_multi(&distribution, &self.demand, self.low, self.high)?;
        let expectations = expectations_multi(&distribution, &self.demand, &equilibrium);
        Ok(MultiPoint { distribution, equilibrium, expectations })
    }
}

/// Sweeps a multi-producer parameter.
pub fn sweep_multi(template: &MultiMarket, axis: SweepAxis, grid: &[f64]) -> Result<Vec<SweepRow<MultiPoint>>> {
    if axis == SweepAxis::Cost {
        return Err(unsupported(axis));
    }
    run_sweep(
        grid,
        |v| {
            let mut m = *template;
            match axis {
                SweepAxis::D => m.d = v,
                SweepAxis::Beta => m.beta = v,
                SweepAxis::Low => m.low = v,
                SweepAxis::High => m.high = v,
                SweepAxis::Cost => unreachable!(),
            }
            Ok(m)
        },
        MultiMarket::analyze,
    )
}

/// Everything computed at one mixed-market point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedPoint {
    /// Parameters at this point.
    pub params: MixedMarketParams,
    /// Equilibrium.
    pub equilibrium: MixedEquilibrium,
    /// Enumerated expectations.
    pub expectations: MixedExpectations,
}

/// Sweeps a mixed-market parameter.
pub fn sweep_mixed(template: &MixedMarketParams, axis: SweepAxis, grid: &[f64]) -> Result<Vec<SweepRow<MixedPoint>>> {
    run_sweep(
        grid,
        |v| {
            let mut p = *template;
            match axis {
                SweepAxis::D => p.d = v,
                SweepAxis::Beta => p.beta = v,
                SweepAxis::Low => p.low = v,
                SweepAxis::High => p.high = v,
                SweepAxis::Cost => p.cost = v,
            }
            p.validate().map(|_| p)
        },
        |p| {
            let equilibrium = solve_mixed(p)?;
            Ok(MixedPoint { params: *p, equilibrium, expectations: mixed_expectations(p, &equilibrium) })
        },
    )
}
