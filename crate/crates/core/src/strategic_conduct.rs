//! Collusion between two producers under linear demand `P(Q) = s - Q`, and
//! the value of publicly sharing availability information.
//!
//! Colluders produce the monopoly quantity `s/2` whenever one of them is in
//! the high state. When exactly one is high, the pooled monopoly profit is
//! split with a fraction `t` going to the low-state producer.

use crate::equilibrium::phi_closed_form_linear;
use crate::error::{check_dispersion, check_probability, Error, Result};
use crate::roots::{bisect, BisectionTolerance};
use crate::stochastic::{DuopolyCorrelation, JointProbabilities, State};

/// Slack allowed when comparing the lower transfer bound to the upper ones.
pub const FEASIBILITY_SLACK: f64 = 1e-12;

/// Allowed gap between a closed form and its state enumeration.
pub const ENUMERATION_TOLERANCE: f64 = 1e-12;

/// Market and penalty parameters for collusion analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(deny_unknown_fields))]
pub struct CollusionParams {
    /// Linear demand intercept.
    pub s: f64,
    /// Prior probability of the high state.
    pub beta: f64,
    /// Dispersion.
    pub d: f64,
    /// Low-state availability.
    pub low: f64,
    /// Expected cost of colluding.
    #[cfg_attr(feature = "serde", serde(default))]
    pub gamma: f64,
}

impl CollusionParams {
    /// Validated constructor.
    pub fn new(s: f64, beta: f64, d: f64, low: f64, gamma: f64) -> Result<Self> {
        let p = CollusionParams { s, beta, d, low, gamma };
        p.validate()?;
        Ok(p)
    }

    /// Checks `s > 0`, `β ∈ (0,1)`, `d ∈ [0,1]`, `0 < L < s/3` and `γ >= 0`.
    pub fn validate(&self) -> Result<()> {
        if !(self.s > 0.0 && self.s.is_finite()) {
            return Err(Error::invalid("s", self.s, "finite s > 0"));
        }
        check_probability("beta", self.beta)?;
        check_dispersion(self.d)?;
        if !(self.low > 0.0) {
            return Err(Error::invalid("L", self.low, "L > 0"));
        }
        if !(self.low < self.s / 3.0) {
            return Err(Error::AssumptionViolated { assumption: "L < s/3", value: self.low });
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::invalid("gamma", self.gamma, "finite gamma >= 0"));
        }
        Ok(())
    }

    /// Same parameters with a different penalty.
    pub fn with_gamma(&self, gamma: f64) -> Self {
        CollusionParams { gamma, ..*self }
    }

    fn correlation(&self) -> DuopolyCorrelation {
        DuopolyCorrelation::new(self.beta, self.d).expect("validated")
    }

    /// Competitive high-state output.
    pub fn competitive_phi(&self) -> f64 {
        phi_closed_form_linear(self.s, self.beta, self.d, self.low)
    }
}

/// Joint monopoly profit `s²/4`.
pub fn monopoly_profit(s: f64) -> f64 {
    s * s / 4.0
}

/// Per-producer profit when both are low: `(s - 2L)L`.
pub fn low_profit(s: f64, low: f64) -> f64 {
    (s - 2.0 * low) * low
}

/// Bounds on the transfer fraction `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TransferBounds {
    /// Lower bound from low-state participation.
    pub lb_irl: f64,
    /// Upper bound from truthful reporting.
    pub ub_ic: f64,
    /// Upper bound from high-state participation.
    pub ub_irh: f64,
    /// Whether some `t` satisfies all three.
    pub feasible: bool,
    /// `[lb_irl, min(ub_ic, ub_irh)]` when feasible.
    pub interval: Option<(f64, f64)>,
    /// Competitive high-state output the bounds were computed from.
    pub phi: f64,
    /// Set at `d = 0`, where mixed states never occur and the participation
    /// constraints no longer involve `t`.
    pub degenerate_full_correlation: bool,
}

impl TransferBounds {
    /// `min(ub_ic, ub_irh)`.
    pub fn upper(&self) -> f64 {
        self.ub_ic.min(self.ub_irh)
    }
}

/// Evaluates the three bounds on `t`.
///
/// At `d = 0` the high-state participation constraint is `t`-free: the
/// bound is `+∞` if it holds and `-∞` otherwise. The low-state one is
/// `t`-free too and reduces to `γ <= 0`, so any positive penalty sends
/// `lb_irl` to `+∞`.
pub fn transfer_bounds(params: &CollusionParams) -> Result<TransferBounds> {
    params.validate()?;
    let CollusionParams { s, beta, d, low, gamma } = *params;
    let c = params.correlation();
    let phi = params.competitive_phi();
    let pi_m = monopoly_profit(s);
    let pi_l = low_profit(s, low);
    let p_hh = c.conditional(State::High, State::High);
    let p_lh = c.conditional(State::High, State::Low);
    let p_hl = c.conditional(State::Low, State::High);

    let ub_ic = 0.5 * p_hh + p_lh * (1.0 - pi_l / pi_m);
    let degenerate = d == 0.0;
    let (lb_irl, ub_irh) = if degenerate {
        let irh_holds = pi_m / 2.0 - gamma >= phi * (s - 2.0 * phi);
        let ub = if irh_holds { f64::INFINITY } else { f64::NEG_INFINITY };
        let lb = if gamma > 0.0 { f64::INFINITY } else { low * (s - phi - low) / pi_m };
        (lb, ub)
    } else {
        let r = beta / (d * (1.0 - beta));
        let ub = 1.0 + 0.5 * r - r * phi * (s - 2.0 * phi) / pi_m - phi * (s - phi - low) / pi_m
            - gamma / (p_lh * pi_m);
        let lb = low * (s - phi - low) / pi_m + gamma / (p_hl * pi_m);
        (lb, ub)
    };
    let upper = ub_ic.min(ub_irh);
    let feasible = lb_irl <= upper + FEASIBILITY_SLACK;
    Ok(TransferBounds {
        lb_irl,
        ub_ic,
        ub_irh,
        feasible,
        interval: feasible.then_some((lb_irl, upper)),
        phi,
        degenerate_full_correlation: degenerate,
    })
}

/// Which upper bound meets the lower bound at the deterrence threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize), serde(rename_all = "snake_case"))]
pub enum BindingBound {
    /// Truthful reporting.
    Ic,
    /// High-state participation.
    Irh,
}

/// Smallest penalty that leaves no feasible transfer.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GammaHat {
    /// Analytic value.
    pub value: f64,
    /// Value located by bisection on the feasibility margin.
    pub bisection: f64,
    /// Which upper bound binds.
    pub binding: BindingBound,
}

/// Minimal deterrence penalty. The `gamma` field of `params` is ignored.
///
/// `lb_irl` rises and `ub_irh` falls linearly in `γ` while `ub_ic` is
/// constant, so the threshold is the smaller of the two crossing points.
pub fn gamma_hat(params: &CollusionParams) -> Result<GammaHat> {
    let base = params.with_gamma(0.0);
    base.validate()?;
    if base.d == 0.0 {
        return Err(Error::invalid("d", 0.0, "d > 0 for a finite deterrence threshold"));
    }
    let b0 = transfer_bounds(&base)?;
    let c = base.correlation();
    let pi_m = monopoly_profit(base.s);
    let k_low = 1.0 / (c.conditional(State::Low, State::High) * pi_m);
    let k_high = 1.0 / (c.conditional(State::High, State::Low) * pi_m);
    let via_ic = (b0.ub_ic - b0.lb_irl) / k_low;
    let via_irh = (b0.ub_irh - b0.lb_irl) / (k_low + k_high);
    let (value, binding) = if via_ic <= via_irh {
        (via_ic, BindingBound::Ic)
    } else {
        (via_irh, BindingBound::Irh)
    };
    if !(value > 0.0) {
        return Err(Error::AssumptionViolated { assumption: "collusion feasible without a penalty", value });
    }

    let margin = |g: f64| -> f64 {
        let b = transfer_bounds(&base.with_gamma(g)).expect("validated");
        b.upper() - b.lb_irl
    };
    let tol = BisectionTolerance { residual: 0.0, width: 1e-15, max_iter: 400 };
    let root = bisect(margin, 0.0, 2.0 * value + 1.0, tol)?.root;
    if (root - value).abs() > 1e-10 {
        return Err(Error::OracleDisagreement { quantity: "gamma_hat", difference: root - value });
    }
    Ok(GammaHat { value, bisection: root, binding })
}

/// Outputs and profits in one state.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RegimeState {
    /// Probability of the state.
    pub probability: f64,
    /// Total output.
    pub total_output: f64,
    /// Sum of both producers' profits, before transfers.
    pub joint_profit: f64,
    /// `U(Q)`.
    pub welfare: f64,
}

/// The three distinct states (mixed states merged) under one regime.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RegimeOutcomes {
    /// Both low.
    pub low_low: RegimeState,
    /// One high, one low.
    pub mixed: RegimeState,
    /// Both high.
    pub high_high: RegimeState,
}

impl RegimeOutcomes {
    fn states(&self) -> [&RegimeState; 3] {
        [&self.low_low, &self.mixed, &self.high_high]
    }

    /// Expected joint profit.
    pub fn e_joint_profit(&self) -> f64 {
        self.states().iter().map(|r| r.probability * r.joint_profit).sum()
    }

    /// Expected `U(Q)`.
    pub fn e_welfare(&self) -> f64 {
        self.states().iter().map(|r| r.probability * r.welfare).sum()
    }
}

fn regime_state(s: f64, probability: f64, outputs: (f64, f64)) -> RegimeState {
    let q = outputs.0 + outputs.1;
    RegimeState {
        probability,
        total_output: q,
        joint_profit: q * (s - q),
        welfare: s * q - 0.5 * q * q,
    }
}

fn regime(s: f64, j: &JointProbabilities, hh: (f64, f64), mixed: (f64, f64), ll: (f64, f64)) -> RegimeOutcomes {
    RegimeOutcomes {
        low_low: regime_state(s, j.ll, ll),
        mixed: regime_state(s, j.lh + j.hl, mixed),
        high_high: regime_state(s, j.hh, hh),
    }
}

/// Collusive outcomes: `s/2` in total unless both are low.
pub fn collusion_outcomes(params: &CollusionParams) -> Result<RegimeOutcomes> {
    params.validate()?;
    let s = params.s;
    let q_m = s / 2.0;
    let l = params.low;
    let j = params.correlation().joint();
    Ok(regime(s, &j, (q_m / 2.0, q_m / 2.0), (q_m - l, l), (l, l)))
}

/// Competitive Bayesian equilibrium outcomes.
pub fn competitive_outcomes(params: &CollusionParams) -> Result<RegimeOutcomes> {
    params.validate()?;
    let phi = params.competitive_phi();
    let l = params.low;
    let j = params.correlation().joint();
    Ok(regime(params.s, &j, (phi, phi), (phi, l), (l, l)))
}

/// Expected joint profit gain from colluding. With `subtract_penalty` each
/// producer's `γ` is deducted.
pub fn collusion_value(params: &CollusionParams, subtract_penalty: bool) -> Result<f64> {
    let gain = collusion_outcomes(params)?.e_joint_profit() - competitive_outcomes(params)?.e_joint_profit();
    Ok(if subtract_penalty { gain - 2.0 * params.gamma } else { gain })
}

/// Expected loss of `U(Q)` caused by collusion.
pub fn collusion_welfare_cost(params: &CollusionParams) -> Result<f64> {
    Ok(competitive_outcomes(params)?.e_welfare() - collusion_outcomes(params)?.e_welfare())
}

/// A gain from information sharing, by enumeration and, at `s = 1`, by
/// closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SharingGain {
    /// State-enumeration value.
    pub enumeration: f64,
    /// Closed-form value, available only for unit intercept.
    pub closed_form: Option<f64>,
}

impl SharingGain {
    /// The enumerated value.
    pub fn value(&self) -> f64 {
        self.enumeration
    }
}

fn sharing_params(s: f64, beta: f64, d: f64, low: f64) -> Result<CollusionParams> {
    CollusionParams::new(s, beta, d, low, 0.0)
}

/// Regime with availability publicly known: full-information Cournot in each
/// state, capped at the low producer's capacity.
fn shared_outcomes(p: &CollusionParams) -> RegimeOutcomes {
    let s = p.s;
    let l = p.low;
    let j = p.correlation().joint();
    regime(s, &j, (s / 3.0, s / 3.0), ((s - l) / 2.0, l), (l, l))
}

fn denominators(beta: f64, d: f64) -> (f64, f64) {
    let spread = d * (1.0 - beta);
    (beta + spread, 3.0 * beta + 2.0 * spread)
}

fn welfare_gain_closed_form(beta: f64, d: f64, low: f64) -> f64 {
    let (den, e) = denominators(beta, d);
    let spread = d * (1.0 - beta);
    let common = beta * beta * d * (1.0 - 3.0 * low) * (1.0 - beta) / (36.0 * den * e * e);
    common * (39.0 * beta + 28.0 * spread - 60.0 * low * spread - 81.0 * beta * low)
}

/// Joint profit gain at unit intercept.
///
/// The bracketed form carries an overall factor `1/18`; without it the
/// expression is eighteen times the enumerated gain.
fn profit_gain_closed_form(beta: f64, d: f64, low: f64) -> f64 {
    let (den, e) = denominators(beta, d);
    let spread = d * (1.0 - beta);
    let common = beta * beta * d * (1.0 - 3.0 * low) * (1.0 - beta) / (e * e * den);
    common * (21.0 * beta + 16.0 * spread - low * (81.0 * beta + 60.0 * spread)) / 18.0
}

fn reconcile(quantity: &'static str, s: f64, enumeration: f64, closed: impl FnOnce() -> f64) -> Result<SharingGain> {
    let closed_form = (s == 1.0).then(closed);
    if let Some(c) = closed_form {
        let diff = c - enumeration;
        if !(diff.abs() <= ENUMERATION_TOLERANCE) {
            return Err(Error::OracleDisagreement { quantity, difference: diff });
        }
    }
    Ok(SharingGain { enumeration, closed_form })
}

/// `E[U]` with shared information minus `E[U]` without.
pub fn info_sharing_welfare_gain(s: f64, beta: f64, d: f64, low: f64) -> Result<SharingGain> {
    let p = sharing_params(s, beta, d, low)?;
    let e = shared_outcomes(&p).e_welfare() - competitive_outcomes(&p)?.e_welfare();
    reconcile("info_sharing_welfare_gain", s, e, || welfare_gain_closed_form(beta, d, low))
}

/// Expected joint profit with shared information minus without.
pub fn info_sharing_profit_gain(s: f64, beta: f64, d: f64, low: f64) -> Result<SharingGain> {
    let p = sharing_params(s, beta, d, low)?;
    let e = shared_outcomes(&p).e_joint_profit() - competitive_outcomes(&p)?.e_joint_profit();
    reconcile("info_sharing_profit_gain", s, e, || profit_gain_closed_form(beta, d, low))
}

/// Low-state capacity below which sharing raises profit (unit intercept):
/// `(21β + 16d(1-β)) / (81β + 60d(1-β))`.
pub fn l_star(beta: f64, d: f64) -> Result<f64> {
    check_probability("beta", beta)?;
    check_dispersion(d)?;
    let spread = d * (1.0 - beta);
    Ok((21.0 * beta + 16.0 * spread) / (81.0 * beta + 60.0 * spread))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn worked(gamma: f64) -> CollusionParams {
        CollusionParams::new(1.0, 0.5, 0.5, 0.1, gamma).unwrap()
    }

    #[test]
    fn profit_levels() {
        assert_eq!(monopoly_profit(1.0), 0.25);
        assert!((low_profit(1.0, 0.1) - 0.08).abs() < 1e-15);
        assert_eq!(low_profit(1.0, 0.25), 0.125);
    }

    #[test]
    fn worked_bounds() {
        let b = transfer_bounds(&worked(0.0)).unwrap();
        assert!((b.phi - 0.3625).abs() < 1e-15);
        assert!((b.lb_irl - 0.215).abs() < 1e-12);
        assert!((b.ub_ic - 0.56).abs() < 1e-12);
        assert!((b.ub_irh - 0.423125).abs() < 1e-12);
        assert!(b.feasible);
        let (lo, hi) = b.interval.unwrap();
        assert!((lo - 0.215).abs() < 1e-12 && (hi - 0.423125).abs() < 1e-12);

        let b = transfer_bounds(&worked(0.01)).unwrap();
        assert!((b.lb_irl - 0.335).abs() < 1e-12);
        assert!((b.ub_irh - 0.303125).abs() < 1e-12);
        assert!(!b.feasible && b.interval.is_none());
    }

    #[test]
    fn full_correlation_bounds() {
        let p = CollusionParams::new(1.0, 0.5, 0.0, 0.1, 0.0).unwrap();
        let b = transfer_bounds(&p).unwrap();
        assert!(b.degenerate_full_correlation);
        assert_eq!(b.ub_irh, f64::INFINITY);
        assert!(b.feasible);
        assert!(!transfer_bounds(&p.with_gamma(0.001)).unwrap().feasible);
        assert!(gamma_hat(&p).is_err());
    }

    #[test]
    fn worked_gamma_hat() {
        let g = gamma_hat(&worked(0.0)).unwrap();
        assert!((g.value - 0.208125 / 24.0).abs() < 1e-15);
        assert!((g.value - 0.00867188).abs() < 1e-8);
        assert!((g.bisection - g.value).abs() < 1e-10);
        assert_eq!(g.binding, BindingBound::Irh);
        assert!(transfer_bounds(&worked(g.value - 1e-9)).unwrap().feasible);
        assert!(!transfer_bounds(&worked(g.value + 1e-9)).unwrap().feasible);
    }

    #[test]
    fn collusion_outcome_examples() {
        let p = worked(0.0);
        let c = collusion_outcomes(&p).unwrap();
        assert_eq!(c.high_high.total_output, 0.5);
        assert_eq!(c.high_high.joint_profit / 2.0, 0.125);
        assert_eq!(c.mixed.total_output, 0.5);
        let k = competitive_outcomes(&p).unwrap();
        assert_eq!(c.low_low, k.low_low);
        assert!((k.mixed.total_output - 0.4625).abs() < 1e-15);
    }

    #[test]
    fn collusion_value_fixture() {
        let p = worked(0.0);
        let v = collusion_value(&p, false).unwrap();
        let w = collusion_welfare_cost(&p).unwrap();
        // Hand enumeration: Pr{H,H} = Pr{mixed} = 1/3, φ = 0.3625.
        let hh = 0.25 - 0.725 * 0.275;
        let mixed = 0.25 - 0.4625 * 0.5375;
        assert!((v - (hh + mixed) / 3.0).abs() < 1e-15);
        let u = |q: f64| q - 0.5 * q * q;
        let wc = (u(0.725) - u(0.5) + u(0.4625) - u(0.5)) / 3.0;
        assert!((w - wc).abs() < 1e-15);
        assert!(v > 0.0);
        assert!((collusion_value(&worked(0.01), true).unwrap() - (v - 0.02)).abs() < 1e-15);
    }

    #[test]
    fn sharing_examples() {
        let w = info_sharing_welfare_gain(1.0, 0.5, 0.5, 0.2).unwrap();
        assert!((w.value() - 0.025 / 108.0 * 15.4).abs() < 1e-12);
        assert!(w.closed_form.is_some());
        assert!(info_sharing_welfare_gain(1.0, 0.5, 0.0, 0.2).unwrap().value().abs() < 1e-15);
        assert!(info_sharing_welfare_gain(1.0, 0.5, 0.5, 1.0 / 3.0).is_err());

        let g = info_sharing_profit_gain(1.0, 0.5, 0.5, 0.2).unwrap();
        assert!((g.value() - 0.025 / 3.0 * 3.4 / 18.0).abs() < 1e-12);
        assert!(info_sharing_profit_gain(3.0, 0.5, 0.5, 0.6).unwrap().closed_form.is_none());
    }

    #[test]
    fn l_star_examples() {
        assert!((l_star(0.5, 0.5).unwrap() - 14.5 / 55.5).abs() < 1e-15);
        assert!((l_star(0.5, 1.0).unwrap() - 18.5 / 70.5).abs() < 1e-15);
        let ls = l_star(0.5, 0.5).unwrap();
        assert!(info_sharing_profit_gain(1.0, 0.5, 0.5, ls).unwrap().value().abs() < 1e-12);
    }
}
