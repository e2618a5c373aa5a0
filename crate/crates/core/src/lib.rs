//! Optimal proportional / excess-of-loss reinsurance and risky investment for
//! an insurer with SAHARA or exponential utility.
//!
//! The optimal controls are myopic: at each state `(t, x, y)` the retention
//! maximises `Ψ(u)` and the investment follows in closed form.

// `!(x > 0.0)` is used deliberately so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod claims;
pub mod config;
pub mod error;
pub mod market;
pub mod quad;
pub mod root;
pub mod simulate;
pub mod strategy;
pub mod utility;
pub mod verify;

pub use claims::{ClaimDistribution, TabulatedTail};
pub use config::{RunConfig, SweepConfig, SweepParameter};
pub use error::{Error, Result};
pub use market::{
    check_concavity, psi, psi_value, Coefficient, ConcavityReport, Custom, EnvParams,
    ExcessOfLoss, MarketParams, MarketPoint, Problem, Proportional, ReinsuranceModel,
    RetentionFamily, StatePoint,
};
pub use simulate::{
    compare_strategies, estimate_expected_utility, simulate_paths, Comparison, FeedbackStrategy,
    McEstimate, PathRecord, SimConfig, SimOutput,
};
pub use strategy::{optimal_strategy, Region, StrategyPoint};
pub use utility::{ExponentialParams, Sahara, SaharaParams, UtilityModel};
