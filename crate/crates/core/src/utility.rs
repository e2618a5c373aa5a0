//! SAHARA and exponential utility.
//!
//! A SAHARA utility is characterised by its absolute risk aversion
//! `A(x) = a / sqrt(b^2 + (x - d)^2)`, which is symmetric about the threshold
//! wealth `d` and decays hyperbolically away from it. Strategies only need
//! `A`; the utility value itself is used when scoring Monte Carlo runs.
//!
//! Normalisation for SAHARA: `U'(d) = 1` and `U(d) = 0`. Any positive affine
//! transform gives the same preferences.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::quad;

const QUAD_TOL: f64 = 1e-10;
/// Anchors for the cached antiderivative are spaced one `b` apart out to
/// `ANCHOR_SPAN` scale units on either side of `d`.
const ANCHOR_SPAN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaharaParams {
    /// Risk aversion, > 0.
    pub a: f64,
    /// Scale, > 0.
    pub b: f64,
    /// Threshold wealth.
    pub d: f64,
}

impl SaharaParams {
    pub fn new(a: f64, b: f64, d: f64) -> Result<Self> {
        let p = Self { a, b, d };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::config("utility.a", "must be finite and > 0"));
        }
        if !(self.b > 0.0 && self.b.is_finite()) {
            return Err(Error::config("utility.b", "must be finite and > 0"));
        }
        if !self.d.is_finite() {
            return Err(Error::config("utility.d", "must be finite"));
        }
        Ok(())
    }

    pub fn ara(&self, x: f64) -> f64 {
        self.a / self.b.hypot(x - self.d)
    }

    /// `U'(x) = exp(-a asinh((x - d) / b))`, the exact solution of
    /// `U''/U' = -A` with `U'(d) = 1`.
    pub fn marginal_utility(&self, x: f64) -> f64 {
        (-self.a * ((x - self.d) / self.b).asinh()).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialParams {
    pub beta: f64,
}

impl ExponentialParams {
    pub fn new(beta: f64) -> Result<Self> {
        let p = Self { beta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::config("utility.beta", "must be finite and > 0"));
        }
        Ok(())
    }
}

/// Cumulative values of `U` at `d + k b` for `k` in `-ANCHOR_SPAN..=ANCHOR_SPAN`.
#[derive(Debug, Clone)]
struct AnchorTable {
    values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Sahara {
    params: SaharaParams,
    anchors: OnceLock<AnchorTable>,
}

impl Sahara {
    pub fn new(params: SaharaParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            anchors: OnceLock::new(),
        })
    }

    pub fn params(&self) -> &SaharaParams {
        &self.params
    }

    fn anchors(&self) -> &AnchorTable {
        self.anchors.get_or_init(|| {
            let p = self.params;
            let n = ANCHOR_SPAN;
            let mut values = vec![0.0; 2 * n + 1];
            let cell_tol = QUAD_TOL / (2 * n) as f64;
            let f = |s: f64| p.marginal_utility(s);
            for k in 1..=n {
                let lo = p.d + (k - 1) as f64 * p.b;
                let hi = p.d + k as f64 * p.b;
                values[n + k] = values[n + k - 1] + quad::integrate(f, lo, hi, cell_tol);
                let lo = p.d - (k - 1) as f64 * p.b;
                let hi = p.d - k as f64 * p.b;
                values[n - k] = values[n - k + 1] + quad::integrate(f, lo, hi, cell_tol);
            }
            AnchorTable { values }
        })
    }

    pub fn utility_value(&self, x: f64) -> f64 {
        let p = self.params;
        let n = ANCHOR_SPAN as isize;
        let k = ((x - p.d) / p.b).round().clamp(-n as f64, n as f64) as isize;
        let anchor = p.d + k as f64 * p.b;
        let base = self.anchors().values[(k + n) as usize];
        base + quad::integrate(|s| p.marginal_utility(s), anchor, x, QUAD_TOL)
    }
}

impl PartialEq for Sahara {
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum UtilityModel {
    Sahara(Sahara),
    Exponential(ExponentialParams),
}

impl UtilityModel {
    pub fn sahara(a: f64, b: f64, d: f64) -> Result<Self> {
        Ok(UtilityModel::Sahara(Sahara::new(SaharaParams::new(a, b, d)?)?))
    }

    pub fn exponential(beta: f64) -> Result<Self> {
        Ok(UtilityModel::Exponential(ExponentialParams::new(beta)?))
    }

    /// Absolute risk aversion `-U''/U'`.
    pub fn ara(&self, x: f64) -> f64 {
        match self {
            UtilityModel::Sahara(s) => s.params.ara(x),
            UtilityModel::Exponential(e) => e.beta,
        }
    }

    pub fn marginal_utility(&self, x: f64) -> f64 {
        match self {
            UtilityModel::Sahara(s) => s.params.marginal_utility(x),
            UtilityModel::Exponential(e) => e.beta * (-e.beta * x).exp(),
        }
    }

    /// `U''(x) = -A(x) U'(x)`.
    pub fn second_derivative(&self, x: f64) -> f64 {
        -self.ara(x) * self.marginal_utility(x)
    }

    pub fn utility_value(&self, x: f64) -> f64 {
        match self {
            UtilityModel::Sahara(s) => s.utility_value(x),
            UtilityModel::Exponential(e) => -(-e.beta * x).exp(),
        }
    }

    /// True when the risk aversion does not depend on wealth.
    pub fn is_constant_ara(&self) -> bool {
        matches!(self, UtilityModel::Exponential(_))
    }
}
