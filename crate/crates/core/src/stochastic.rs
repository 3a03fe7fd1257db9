//! Correlated availability models.
//!
//! The duopoly family is parameterised by the prior `β = Pr{w = H}` and the
//! dispersion `d`:
//!
//! ```text
//! Pr{H | H} = β / (β + d(1-β))        Pr{H | L} = dβ / (β + d(1-β))
//! ```
//!
//! For `N+1` producers only the distribution of the number of high-state
//! producers matters, so [`JointAvailability`] stores count probabilities of
//! an exchangeable law. [`mixture_family`] is the built-in family: with
//! weight `1-d` everyone shares one Bernoulli(β) draw, with weight `d` draws
//! are independent. The duopoly family embeds into the count representation
//! with [`DuopolyCorrelation::to_joint`]; the two families coincide only at
//! `d = 0` and `d = 1`.

use alloc::vec::Vec;

use crate::error::{check_dispersion, check_probability, Error, Result};

/// Availability state of a single producer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum State {
    /// Low availability `L`.
    Low,
    /// High availability `H`.
    High,
}

/// Dominance checks tolerate this much rounding on cumulative sums.
pub const DOMINANCE_TOLERANCE: f64 = 1e-12;

/// `(β, d)` for the two-producer correlation family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DuopolyCorrelation {
    beta: f64,
    d: f64,
}

/// Joint state probabilities of a duopoly, indexed `(w₁, w₂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointProbabilities {
    /// `Pr{L, L}`.
    pub ll: f64,
    /// `Pr{L, H}`.
    pub lh: f64,
    /// `Pr{H, L}`.
    pub hl: f64,
    /// `Pr{H, H}`.
    pub hh: f64,
}

impl JointProbabilities {
    /// Sum of the four entries.
    pub fn total(&self) -> f64 {
        self.ll + self.lh + self.hl + self.hh
    }

    /// Probability of a state pair.
    pub fn get(&self, first: State, second: State) -> f64 {
        match (first, second) {
            (State::Low, State::Low) => self.ll,
            (State::Low, State::High) => self.lh,
            (State::High, State::Low) => self.hl,
            (State::High, State::High) => self.hh,
        }
    }
}

impl DuopolyCorrelation {
    /// Validates `0 < β < 1` and `0 <= d <= 1`.
    pub fn new(beta: f64, d: f64) -> Result<Self> {
        check_probability("beta", beta)?;
        check_dispersion(d)?;
        Ok(DuopolyCorrelation { beta, d })
    }

    /// Prior probability of the high state.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Dispersion.
    pub fn d(&self) -> f64 {
        self.d
    }

    fn norm(&self) -> f64 {
        self.beta + self.d * (1.0 - self.beta)
    }

    /// `Pr{w_j = other | w_i = own}`.
    pub fn conditional(&self, own: State, other: State) -> f64 {
        let high_given = match own {
            State::High => self.beta / self.norm(),
            State::Low => self.d * self.beta / self.norm(),
        };
        match other {
            State::High => high_given,
            State::Low => 1.0 - high_given,
        }
    }

    /// The four joint state probabilities.
    pub fn joint(&self) -> JointProbabilities {
        let (b, n) = (self.beta, self.norm());
        let mixed = (1.0 - b) * self.d * b / n;
        JointProbabilities {
            hh: b * b / n,
            lh: mixed,
            hl: mixed,
            ll: (1.0 - b) * (1.0 - self.d * b / n),
        }
    }

    /// `ζ = ∂Pr{L,H}/∂d = -∂Pr{L,L}/∂d = -∂Pr{H,H}/∂d`.
    pub fn zeta(&self) -> f64 {
        let n = self.norm();
        self.beta * self.beta * (1.0 - self.beta) / (n * n)
    }

    /// `∂Pr{L|H}/∂d = β(1-β)/(β + d(1-β))²`; `∂Pr{H|H}/∂d` is its negative.
    pub fn dlow_given_high_dd(&self) -> f64 {
        let n = self.norm();
        self.beta * (1.0 - self.beta) / (n * n)
    }

    /// Count-probability form (`N+1 = 2`).
    pub fn to_joint(&self) -> JointAvailability {
        let j = self.joint();
        JointAvailability { n_plus_1: 2, count_probs: alloc::vec![j.ll, j.lh + j.hl, j.hh] }
    }
}

/// Exchangeable law of `N+1` binary availability states, stored as the
/// distribution of the number `S` of high-state producers.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(try_from = "RawJoint", into = "RawJoint")
)]
pub struct JointAvailability {
    n_plus_1: usize,
    count_probs: Vec<f64>,
}

#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct RawJoint {
    n_plus_1: usize,
    count_probs: Vec<f64>,
}

#[cfg(feature = "serde")]
impl TryFrom<RawJoint> for JointAvailability {
    type Error = Error;
    fn try_from(raw: RawJoint) -> Result<Self> {
        JointAvailability::new(raw.n_plus_1, raw.count_probs)
    }
}

#[cfg(feature = "serde")]
impl From<JointAvailability> for RawJoint {
    fn from(j: JointAvailability) -> Self {
        RawJoint { n_plus_1: j.n_plus_1, count_probs: j.count_probs }
    }
}

impl JointAvailability {
    /// Validates the count distribution: `N+1 >= 2`, `N+2` non-negative
    /// entries summing to one within `1e-12`, and an implied marginal in `(0, 1)`.
    pub fn new(n_plus_1: usize, count_probs: Vec<f64>) -> Result<Self> {
        if n_plus_1 < 2 {
            return Err(Error::invalid("n_plus_1", n_plus_1 as f64, "at least 2 producers"));
        }
        if count_probs.len() != n_plus_1 + 1 {
            return Err(Error::LengthMismatch { left: count_probs.len(), right: n_plus_1 + 1 });
        }
        if let Some(&p) = count_probs.iter().find(|p| !(**p >= 0.0 && p.is_finite())) {
            return Err(Error::invalid("count_probs", p, "finite non-negative entries"));
        }
        let total: f64 = count_probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("count_probs", total, "entries summing to 1"));
        }
        let dist = JointAvailability { n_plus_1, count_probs };
        check_probability("beta", dist.beta())?;
        Ok(dist)
    }

    /// Number of producers `N+1`.
    pub fn n_plus_1(&self) -> usize {
        self.n_plus_1
    }

    /// `Pr{S = k}` for `k = 0..=N+1`.
    pub fn count_probs(&self) -> &[f64] {
        &self.count_probs
    }

    /// Implied marginal `Pr{w_i = H} = E[S]/(N+1)`.
    pub fn beta(&self) -> f64 {
        let mean: f64 = self.count_probs.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        mean / self.n_plus_1 as f64
    }

    /// `Pr{S_{-i} = j | w_i = H}` for `j = 0..=N`.
    ///
    /// A configuration with `k` highs has probability `Pr{S=k}/C(N+1,k)`, and
    /// `i` is high in `C(N,k-1)` of them, so the conditional mass on `j = k-1`
    /// is `Pr{S=k}·k/((N+1)β)`.
    pub fn conditional_given_high(&self) -> Result<Vec<f64>> {
        let beta = self.beta();
        if beta <= 0.0 {
            return Err(Error::DegenerateDistribution);
        }
        let scale = self.n_plus_1 as f64 * beta;
        Ok(self.count_probs[1..]
            .iter()
            .enumerate()
            .map(|(j, p)| p * (j + 1) as f64 / scale)
            .collect())
    }
}

/// Binomial(n, p) probability mass function, computed without `powi`.
pub(crate) fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    // Build by repeated convolution with Bernoulli(p); stable for any n.
    let mut pmf = alloc::vec![0.0; n + 1];
    pmf[0] = 1.0;
    for m in 1..=n {
        for k in (0..=m).rev() {
            let stay = if k < m { pmf[k] * (1.0 - p) } else { 0.0 };
            let step = if k > 0 { pmf[k - 1] * p } else { 0.0 };
            pmf[k] = stay + step;
        }
    }
    pmf
}

/// The common-shock mixture: weight `1-d` on a single shared Bernoulli(β)
/// draw and weight `d` on `N+1` independent draws.
pub fn mixture_family(n_plus_1: usize, beta: f64, d: f64) -> Result<JointAvailability> {
    if n_plus_1 < 2 {
        return Err(Error::invalid("n_plus_1", n_plus_1 as f64, "at least 2 producers"));
    }
    check_probability("beta", beta)?;
    check_dispersion(d)?;
    let mut probs = binomial_pmf(n_plus_1, beta);
    for p in probs.iter_mut() {
        *p *= d;
    }
    probs[0] += (1.0 - d) * (1.0 - beta);
    probs[n_plus_1] += (1.0 - d) * beta;
    JointAvailability::new(n_plus_1, probs)
}

fn tail_sums(dist: &[f64]) -> Vec<f64> {
    // tails[j] = Pr{X > j}
    let mut tails = alloc::vec![0.0; dist.len()];
    let mut acc = 0.0;
    for j in (0..dist.len()).rev() {
        tails[j] = acc;
        acc += dist[j];
    }
    tails
}

/// First-order dominance of the conditional law at the lower dispersion:
/// `Pr{S_{-i} > j; d} >= Pr{S_{-i} > j; d'}` for every `j`.
pub fn check_fosd(cond_low_d: &[f64], cond_high_d: &[f64]) -> Result<bool> {
    if cond_low_d.len() != cond_high_d.len() {
        return Err(Error::LengthMismatch { left: cond_low_d.len(), right: cond_high_d.len() });
    }
    let low = tail_sums(cond_low_d);
    let high = tail_sums(cond_high_d);
    Ok(low.iter().zip(&high).all(|(a, b)| a - b >= -DOMINANCE_TOLERANCE))
}

/// Second-order dominance of the count law at the higher dispersion:
/// `Σ_{j<=m} (Pr{S > j; d'} - Pr{S > j; d}) >= 0` for every `m`.
pub fn check_sosd(count_low_d: &[f64], count_high_d: &[f64]) -> Result<bool> {
    if count_low_d.len() != count_high_d.len() {
        return Err(Error::LengthMismatch { left: count_low_d.len(), right: count_high_d.len() });
    }
    let low = tail_sums(count_low_d);
    let high = tail_sums(count_high_d);
    let mut running = 0.0;
    for (a, b) in high.iter().zip(&low) {
        running += a - b;
        if running < -DOMINANCE_TOLERANCE {
            return Ok(false);
        }
    }
    Ok(true)
}
