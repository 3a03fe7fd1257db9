//! Bayesian Cournot equilibria for producers with stochastic, correlated
//! production constraints.
//!
//! Each producer's available output is either a low or a high level, and the
//! dependence between producers' availability is indexed by a dispersion
//! parameter `d` in `[0, 1]` (0 is perfectly correlated, 1 is independent).
//! The crate computes the unique symmetric Bayesian Nash equilibrium of the
//! resulting Cournot game and the welfare, price and profit consequences of
//! changing `d`:
//!
//! - [`demand`]: concave, downward-sloping inverse demand and consumer utility.
//! - [`stochastic`]: correlated availability models and dominance checks.
//! - [`equilibrium`]: the duopoly and `N+1`-producer equilibrium solvers.
//! - [`mixed_market`]: two wind producers against a constant-cost generator.
//! - [`analysis`]: state-enumerated expectations, derivative decompositions,
//!   and parameter sweeps.
//! - [`strategic_conduct`]: collusion feasibility and information sharing.
//! - [`oracle`]: brute-force best-response checks that share no code with the
//!   analytic solvers.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![deny(missing_docs)]
// Negated comparisons are deliberate: they reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analysis;
pub mod demand;
pub mod equilibrium;
mod error;
pub mod mixed_market;
pub mod oracle;
mod roots;
pub mod stochastic;
pub mod strategic_conduct;

pub use demand::DemandSpec;
pub use equilibrium::{DuopolyParams, EquilibriumResult};
pub use error::{Error, Result};
pub use roots::{bisect, Bisection, BisectionTolerance};
pub use stochastic::{DuopolyCorrelation, JointAvailability, State};
