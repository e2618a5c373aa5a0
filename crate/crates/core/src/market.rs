//! Model coefficients and the pointwise reinsurance criterion.
//!
//! After the investment amount has been optimised out of the HJB supremum,
//! the retention level maximises
//!
//! ```text
//! Ψ(u) = m(u) + [μ² − 2μσ(u)σ₁A − σ(u)²σ₂²A²] / (2(σ₁² + σ₂²)A)
//! ```
//!
//! where `A = A(x)` is the absolute risk aversion at the current wealth.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::claims::ClaimDistribution;
use crate::error::{Error, Result};
use crate::utility::UtilityModel;

/// A bounded, Lipschitz coefficient of the environment `y` (and time).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Coefficient {
    Constant {
        value: f64,
    },
    /// `clamp(intercept + slope * y, min, max)`.
    Affine {
        intercept: f64,
        slope: f64,
        min: f64,
        max: f64,
    },
    /// `low + (high - low) / (1 + exp(-(y - center) / width))`.
    Sigmoid {
        low: f64,
        high: f64,
        center: f64,
        width: f64,
    },
}

impl Coefficient {
    pub const fn constant(value: f64) -> Self {
        Coefficient::Constant { value }
    }

    pub fn eval(&self, _t: f64, y: f64) -> f64 {
        match *self {
            Coefficient::Constant { value } => value,
            Coefficient::Affine {
                intercept,
                slope,
                min,
                max,
            } => (intercept + slope * y).clamp(min, max),
            Coefficient::Sigmoid {
                low,
                high,
                center,
                width,
            } => low + (high - low) / (1.0 + (-(y - center) / width).exp()),
        }
    }

    /// Infimum and supremum over all `(t, y)`.
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            Coefficient::Constant { value } => (value, value),
            Coefficient::Affine { min, max, .. } => (min, max),
            Coefficient::Sigmoid { low, high, .. } => (low.min(high), low.max(high)),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Coefficient::Constant { .. })
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        let ok = match *self {
            Coefficient::Constant { value } => value.is_finite(),
            Coefficient::Affine {
                intercept,
                slope,
                min,
                max,
            } => intercept.is_finite() && slope.is_finite() && min.is_finite() && max.is_finite() && min <= max,
            Coefficient::Sigmoid {
                low,
                high,
                center,
                width,
            } => low.is_finite() && high.is_finite() && center.is_finite() && width > 0.0 && width.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::config(field, "coefficient parameters must be finite (affine: min <= max; sigmoid: width > 0)"))
        }
    }
}

impl From<f64> for Coefficient {
    fn from(value: f64) -> Self {
        Coefficient::Constant { value }
    }
}

/// Risky asset `dR = μR dt + σ₁R dW¹ + σ₂R dW²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketParams {
    pub mu: Coefficient,
    pub sigma1: Coefficient,
    pub sigma2: Coefficient,
}

/// Market coefficients frozen at one `(t, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketPoint {
    pub mu: f64,
    pub sigma1: f64,
    pub sigma2: f64,
}

impl MarketPoint {
    /// `σ₁² + σ₂²`.
    pub fn total_variance(&self) -> f64 {
        self.sigma1 * self.sigma1 + self.sigma2 * self.sigma2
    }
}

impl MarketParams {
    pub fn constant(mu: f64, sigma1: f64, sigma2: f64) -> Self {
        Self {
            mu: mu.into(),
            sigma1: sigma1.into(),
            sigma2: sigma2.into(),
        }
    }

    pub fn at(&self, t: f64, y: f64) -> MarketPoint {
        MarketPoint {
            mu: self.mu.eval(t, y),
            sigma1: self.sigma1.eval(t, y),
            sigma2: self.sigma2.eval(t, y),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.mu.is_constant() && self.sigma1.is_constant() && self.sigma2.is_constant()
    }

    pub fn validate(&self) -> Result<()> {
        self.mu.validate("market.mu")?;
        self.sigma1.validate("market.sigma1")?;
        self.sigma2.validate("market.sigma2")?;
        let (s1, _) = self.sigma1.bounds();
        let (s2, _) = self.sigma2.bounds();
        if s1 < 0.0 {
            return Err(Error::config("market.sigma1", "must be >= 0"));
        }
        if s2 < 0.0 {
            return Err(Error::config("market.sigma2", "must be >= 0"));
        }
        if !(s1 + s2 > 0.0) {
            return Err(Error::config(
                "market.sigma2",
                "sigma1 + sigma2 must be bounded away from zero",
            ));
        }
        Ok(())
    }
}

/// Environment `dY = μ_Y dt + σ_Y dW^Y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvParams {
    pub mu_y: Coefficient,
    pub sigma_y: Coefficient,
    pub y0: f64,
}

impl Default for EnvParams {
    fn default() -> Self {
        Self {
            mu_y: 0.0.into(),
            sigma_y: 0.0.into(),
            y0: 0.0,
        }
    }
}

impl EnvParams {
    pub fn validate(&self) -> Result<()> {
        self.mu_y.validate("environment.mu_y")?;
        self.sigma_y.validate("environment.sigma_y")?;
        if self.sigma_y.bounds().0 < 0.0 {
            return Err(Error::config("environment.sigma_y", "must be >= 0"));
        }
        if !self.y0.is_finite() {
            return Err(Error::config("environment.y0", "must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatePoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

impl StatePoint {
    pub fn new(t: f64, x: f64, y: f64) -> Self {
        Self { t, x, y }
    }
}

/// Proportional reinsurance: `m(u) = p − q + qu`, `σ(u) = σ₀u`, `u ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proportional {
    pub p: Coefficient,
    pub q: Coefficient,
    pub sigma0: Coefficient,
}

impl Proportional {
    pub fn constant(p: f64, q: f64, sigma0: f64) -> Result<Self> {
        let m = Self {
            p: p.into(),
            q: q.into(),
            sigma0: sigma0.into(),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        self.p.validate("reinsurance.p")?;
        self.q.validate("reinsurance.q")?;
        self.sigma0.validate("reinsurance.sigma0")?;
        if !(self.sigma0.bounds().0 > 0.0) {
            return Err(Error::config("reinsurance.sigma0", "must be > 0"));
        }
        // p < q pointwise; checked on the bounds, which is exact for constants
        if !(self.p.bounds().1 < self.q.bounds().0) {
            return Err(Error::config(
                "reinsurance.q",
                "reinsurance must be non-cheap: p < q",
            ));
        }
        Ok(())
    }
}

/// Excess-of-loss reinsurance with retention `u ∈ [0, ∞]`:
/// `m(u) = θ∫₀ᵘF̄ − (θ−η)E[Z]`, `σ(u) = sqrt(∫₀ᵘ2zF̄)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcessOfLoss {
    pub theta: f64,
    pub eta: f64,
    pub claims: ClaimDistribution,
}

impl ExcessOfLoss {
    pub fn new(theta: f64, eta: f64, claims: ClaimDistribution) -> Result<Self> {
        let m = Self { theta, eta, claims };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::config("reinsurance.eta", "must be finite and > 0"));
        }
        if !(self.theta >= self.eta && self.theta.is_finite()) {
            return Err(Error::config("reinsurance.theta", "must be finite and >= eta"));
        }
        self.claims.validate()
    }
}

/// User-supplied drift and volatility of the retained risk.
pub trait RetentionFamily: Send + Sync {
    fn drift(&self, t: f64, y: f64, u: f64) -> f64;
    fn vol(&self, t: f64, y: f64, u: f64) -> f64;
    /// `∂m/∂u`; `None` falls back to finite differences.
    fn drift_du(&self, _t: f64, _y: f64, _u: f64) -> Option<f64> {
        None
    }
    /// `∂σ/∂u`; `None` falls back to finite differences.
    fn vol_du(&self, _t: f64, _y: f64, _u: f64) -> Option<f64> {
        None
    }
}

struct FnFamily<M, S> {
    drift: M,
    vol: S,
}

impl<M, S> RetentionFamily for FnFamily<M, S>
where
    M: Fn(f64, f64, f64) -> f64 + Send + Sync,
    S: Fn(f64, f64, f64) -> f64 + Send + Sync,
{
    fn drift(&self, t: f64, y: f64, u: f64) -> f64 {
        (self.drift)(t, y, u)
    }
    fn vol(&self, t: f64, y: f64, u: f64) -> f64 {
        (self.vol)(t, y, u)
    }
}

#[derive(Clone)]
pub struct Custom {
    pub family: Arc<dyn RetentionFamily>,
    pub bound: f64,
    /// Caller asserts `m` concave in `u`.
    pub drift_concave: bool,
    /// Caller asserts `σ` convex in `u`.
    pub vol_convex: bool,
}

impl fmt::Debug for Custom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Custom")
            .field("bound", &self.bound)
            .field("drift_concave", &self.drift_concave)
            .field("vol_convex", &self.vol_convex)
            .finish_non_exhaustive()
    }
}

impl Custom {
    pub fn new(family: Arc<dyn RetentionFamily>, bound: f64) -> Result<Self> {
        if !(bound > 0.0) {
            return Err(Error::config("reinsurance.bound", "retention bound must be > 0"));
        }
        Ok(Self {
            family,
            bound,
            drift_concave: false,
            vol_convex: false,
        })
    }

    pub fn from_fns<M, S>(drift: M, vol: S, bound: f64) -> Result<Self>
    where
        M: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        S: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(Arc::new(FnFamily { drift, vol }), bound)
    }

    /// Declares the hypotheses under which Ψ has a unique maximiser.
    pub fn with_shape(mut self, drift_concave: bool, vol_convex: bool) -> Self {
        self.drift_concave = drift_concave;
        self.vol_convex = vol_convex;
        self
    }

    fn fd_step(&self, u: f64) -> (f64, f64) {
        let h = 1e-6 * u.abs().max(1.0);
        let lo = (u - h).max(0.0);
        let hi = if self.bound.is_finite() { (u + h).min(self.bound) } else { u + h };
        (lo, hi)
    }
}

#[derive(Debug, Clone)]
pub enum ReinsuranceModel {
    Proportional(Proportional),
    ExcessOfLoss(ExcessOfLoss),
    Custom(Custom),
}

impl ReinsuranceModel {
    /// Upper end `I` of the admissible retention interval `[0, I]`.
    pub fn retention_bound(&self) -> f64 {
        match self {
            ReinsuranceModel::Proportional(_) => 1.0,
            ReinsuranceModel::ExcessOfLoss(_) => f64::INFINITY,
            ReinsuranceModel::Custom(c) => c.bound,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ReinsuranceModel::Proportional(p) => p.validate(),
            ReinsuranceModel::ExcessOfLoss(x) => x.validate(),
            ReinsuranceModel::Custom(c) => {
                if c.bound > 0.0 {
                    Ok(())
                } else {
                    Err(Error::config("reinsurance.bound", "retention bound must be > 0"))
                }
            }
        }
    }

    /// Whether the model satisfies the "m concave, σ ≥ 0 convex" hypotheses
    /// that make Ψ concave.
    pub fn declares_concave_psi(&self) -> bool {
        match self {
            ReinsuranceModel::Proportional(_) => true,
            ReinsuranceModel::ExcessOfLoss(_) => false,
            ReinsuranceModel::Custom(c) => c.drift_concave && c.vol_convex,
        }
    }

    pub fn check_retention(&self, u: f64) -> Result<()> {
        let bound = self.retention_bound();
        if u >= 0.0 && u <= bound {
            Ok(())
        } else {
            Err(Error::Domain {
                what: "retention",
                value: u,
                expected: "0 <= u <= I",
            })
        }
    }

    /// `m(t, y, u)` without the domain check.
    pub fn drift_at(&self, t: f64, y: f64, u: f64) -> f64 {
        match self {
            ReinsuranceModel::Proportional(p) => {
                let q = p.q.eval(t, y);
                p.p.eval(t, y) - q + q * u
            }
            ReinsuranceModel::ExcessOfLoss(x) => {
                x.theta * x.claims.int_tail(u) - (x.theta - x.eta) * x.claims.mean()
            }
            ReinsuranceModel::Custom(c) => c.family.drift(t, y, u),
        }
    }

    /// `σ(t, y, u)` without the domain check.
    pub fn vol_at(&self, t: f64, y: f64, u: f64) -> f64 {
        match self {
            ReinsuranceModel::Proportional(p) => p.sigma0.eval(t, y) * u,
            ReinsuranceModel::ExcessOfLoss(x) => x.claims.int_2z_tail(u).sqrt(),
            ReinsuranceModel::Custom(c) => c.family.vol(t, y, u),
        }
    }

    pub fn drift_m(&self, s: &StatePoint, u: f64) -> Result<f64> {
        self.check_retention(u)?;
        Ok(self.drift_at(s.t, s.y, u))
    }

    pub fn vol_sigma(&self, s: &StatePoint, u: f64) -> Result<f64> {
        self.check_retention(u)?;
        Ok(self.vol_at(s.t, s.y, u))
    }

    /// `∂m/∂u`.
    pub fn drift_du(&self, t: f64, y: f64, u: f64) -> f64 {
        match self {
            ReinsuranceModel::Proportional(p) => p.q.eval(t, y),
            ReinsuranceModel::ExcessOfLoss(x) => x.theta * x.claims.tail(u.max(0.0)).unwrap_or(0.0),
            ReinsuranceModel::Custom(c) => c.family.drift_du(t, y, u).unwrap_or_else(|| {
                let (lo, hi) = c.fd_step(u);
                (c.family.drift(t, y, hi) - c.family.drift(t, y, lo)) / (hi - lo)
            }),
        }
    }

    /// `σ ∂σ/∂u`, i.e. half the derivative of the retained variance.
    pub fn vol_vol_du(&self, t: f64, y: f64, u: f64) -> f64 {
        match self {
            ReinsuranceModel::Proportional(p) => {
                let s0 = p.sigma0.eval(t, y);
                s0 * s0 * u
            }
            ReinsuranceModel::ExcessOfLoss(x) => u * x.claims.tail(u.max(0.0)).unwrap_or(0.0),
            ReinsuranceModel::Custom(c) => {
                let sigma = c.family.vol(t, y, u);
                let dsigma = c.family.vol_du(t, y, u).unwrap_or_else(|| {
                    let (lo, hi) = c.fd_step(u);
                    (c.family.vol(t, y, hi) - c.family.vol(t, y, lo)) / (hi - lo)
                });
                sigma * dsigma
            }
        }
    }
}

/// Ψ from its ingredients.
pub fn psi_value(drift: f64, vol: f64, mkt: &MarketPoint, ara: f64) -> f64 {
    let MarketPoint { mu, sigma1, sigma2 } = *mkt;
    drift
        + (mu * mu - 2.0 * mu * vol * sigma1 * ara - vol * vol * sigma2 * sigma2 * ara * ara)
            / (2.0 * mkt.total_variance() * ara)
}

/// The pointwise reinsurance criterion Ψ at state `s` and retention `u`.
pub fn psi(
    model: &ReinsuranceModel,
    mkt: &MarketParams,
    util: &UtilityModel,
    s: &StatePoint,
    u: f64,
) -> Result<f64> {
    model.check_retention(u)?;
    Ok(psi_unchecked(model, &mkt.at(s.t, s.y), util.ara(s.x), s, u))
}

pub(crate) fn psi_unchecked(
    model: &ReinsuranceModel,
    mp: &MarketPoint,
    ara: f64,
    s: &StatePoint,
    u: f64,
) -> f64 {
    psi_value(model.drift_at(s.t, s.y, u), model.vol_at(s.t, s.y, u), mp, ara)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcavityReport {
    pub concave: bool,
    pub grid_n: usize,
    pub lo: f64,
    pub hi: f64,
    pub tolerance: f64,
    /// Retention and second difference at the first violation.
    pub first_violation: Option<(f64, f64)>,
    pub max_second_difference: f64,
}

pub const CONCAVITY_TOL: f64 = 1e-12;

/// Scans second differences of Ψ on `grid_n` equispaced points of `[0, I]`
/// (or `[0, 50 E[Z]]` for an unbounded retention).
pub fn check_concavity(
    model: &ReinsuranceModel,
    mkt: &MarketParams,
    util: &UtilityModel,
    s: &StatePoint,
    grid_n: usize,
) -> Result<ConcavityReport> {
    let hi = match model {
        ReinsuranceModel::ExcessOfLoss(x) => 50.0 * x.claims.mean(),
        _ => model.retention_bound(),
    };
    if !hi.is_finite() {
        return Err(Error::config(
            "reinsurance.bound",
            "concavity scan needs a finite retention range",
        ));
    }
    check_concavity_on(model, mkt, util, s, 0.0, hi, grid_n, CONCAVITY_TOL)
}

#[allow(clippy::too_many_arguments)]
pub fn check_concavity_on(
    model: &ReinsuranceModel,
    mkt: &MarketParams,
    util: &UtilityModel,
    s: &StatePoint,
    lo: f64,
    hi: f64,
    grid_n: usize,
    tolerance: f64,
) -> Result<ConcavityReport> {
    if grid_n < 3 {
        return Err(Error::Domain {
            what: "grid_n",
            value: grid_n as f64,
            expected: "grid_n >= 3",
        });
    }
    model.check_retention(lo)?;
    model.check_retention(hi)?;
    let mp = mkt.at(s.t, s.y);
    let ara = util.ara(s.x);
    let h = (hi - lo) / (grid_n - 1) as f64;
    let values: Vec<f64> = (0..grid_n)
        .map(|i| psi_unchecked(model, &mp, ara, s, lo + i as f64 * h))
        .collect();
    let mut first_violation = None;
    let mut max_sd = f64::NEG_INFINITY;
    for i in 1..grid_n - 1 {
        let sd = values[i + 1] - 2.0 * values[i] + values[i - 1];
        max_sd = max_sd.max(sd);
        if sd > tolerance && first_violation.is_none() {
            first_violation = Some((lo + i as f64 * h, sd));
        }
    }
    Ok(ConcavityReport {
        concave: first_violation.is_none(),
        grid_n,
        lo,
        hi,
        tolerance,
        first_violation,
        max_second_difference: max_sd,
    })
}

/// Everything needed to evaluate strategies and simulate wealth.
#[derive(Debug, Clone)]
pub struct Problem {
    pub utility: UtilityModel,
    pub market: MarketParams,
    pub env: EnvParams,
    pub reinsurance: ReinsuranceModel,
}

impl Problem {
    /// Baseline parameters: μ = 0.08, σ₁ = σ₂ = σ₀ = 0.5, q = 0.05 (p = 0.03),
    /// SAHARA(a = 1, b = 1, d = 0), constant environment.
    pub fn baseline() -> Self {
        Self {
            utility: UtilityModel::sahara(1.0, 1.0, 0.0).expect("valid"),
            market: MarketParams::constant(0.08, 0.5, 0.5),
            env: EnvParams::default(),
            reinsurance: ReinsuranceModel::Proportional(
                Proportional::constant(0.03, 0.05, 0.5).expect("valid"),
            ),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.market.validate()?;
        self.env.validate()?;
        self.reinsurance.validate()
    }

    pub fn psi(&self, s: &StatePoint, u: f64) -> Result<f64> {
        psi(&self.reinsurance, &self.market, &self.utility, s, u)
    }

    /// True when every coefficient is constant in `(t, y)`.
    pub fn has_constant_coefficients(&self) -> bool {
        let reins = match &self.reinsurance {
            ReinsuranceModel::Proportional(p) => {
                p.p.is_constant() && p.q.is_constant() && p.sigma0.is_constant()
            }
            ReinsuranceModel::ExcessOfLoss(_) => true,
            ReinsuranceModel::Custom(_) => false,
        };
        reins && self.market.is_constant()
    }
}
