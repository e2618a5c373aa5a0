//! Claim-size distributions and the truncated tail integrals used by the
//! excess-of-loss model:
//!
//! * `int_tail(u)    = ∫₀ᵘ F̄(z) dz`      (expected retained claim, `E[min(Z, u)]`)
//! * `int_2z_tail(u) = ∫₀ᵘ 2z F̄(z) dz`   (second moment, `E[min(Z, u)²]`)
//!
//! Both accept `u = ∞`, returning `E[Z]` and `E[Z²]`. An infinite second
//! moment is returned as `f64::INFINITY`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum ClaimDistribution {
    Exponential { rate: f64 },
    /// Pareto type I: `F̄(z) = 1` below `scale`, `(scale/z)^shape` above.
    Pareto { shape: f64, scale: f64 },
    Tabulated(TabulatedTail),
}

/// Piecewise-linear `F̄` through the given knots, followed by an exponential
/// tail whose log-slope matches the last segment.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedTail {
    z: Vec<f64>,
    tail: Vec<f64>,
    tail_rate: f64,
}

impl TabulatedTail {
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        let field = "claims.points";
        if points.len() < 2 {
            return Err(Error::config(field, "need at least two (z, tail) points"));
        }
        if points[0] != (0.0, 1.0) {
            return Err(Error::config(field, "first point must be [0, 1]"));
        }
        for w in points.windows(2) {
            let ((z0, f0), (z1, f1)) = (w[0], w[1]);
            if !(z1 > z0) || !z1.is_finite() {
                return Err(Error::config(field, "z must be finite and strictly increasing"));
            }
            if f1 > f0 {
                return Err(Error::config(field, "tail must be non-increasing"));
            }
            if !(f1 > 0.0) {
                return Err(Error::config(field, "tail must stay strictly positive"));
            }
        }
        let n = points.len();
        let (zp, fp) = points[n - 2];
        let (zl, fl) = points[n - 1];
        if !(fl < fp) {
            return Err(Error::config(
                field,
                "last segment must be strictly decreasing to define the tail beyond it",
            ));
        }
        let tail_rate = (fp / fl).ln() / (zl - zp);
        Ok(Self {
            z: points.iter().map(|p| p.0).collect(),
            tail: points.iter().map(|p| p.1).collect(),
            tail_rate,
        })
    }

    fn last(&self) -> (f64, f64) {
        let n = self.z.len();
        (self.z[n - 1], self.tail[n - 1])
    }

    fn tail_at(&self, z: f64) -> f64 {
        let (zl, fl) = self.last();
        if z >= zl {
            return fl * (-self.tail_rate * (z - zl)).exp();
        }
        let i = self.z.partition_point(|&k| k <= z) - 1;
        let (z0, z1) = (self.z[i], self.z[i + 1]);
        let (f0, f1) = (self.tail[i], self.tail[i + 1]);
        f0 + (f1 - f0) * (z - z0) / (z1 - z0)
    }

    /// Integrates `z^k F̄(z)` exactly (k = 0 or 1) over `[0, u]`.
    fn moment(&self, u: f64, k: i32) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.z.len() - 1 {
            let z0 = self.z[i];
            if u <= z0 {
                return acc;
            }
            let z1 = self.z[i + 1].min(u);
            let f0 = self.tail[i];
            let slope = (self.tail[i + 1] - f0) / (self.z[i + 1] - z0);
            // f(z) = f0 + slope (z - z0) = c0 + slope z
            let c0 = f0 - slope * z0;
            acc += match k {
                0 => c0 * (z1 - z0) + 0.5 * slope * (z1 * z1 - z0 * z0),
                _ => {
                    0.5 * c0 * (z1 * z1 - z0 * z0)
                        + slope * (z1 * z1 * z1 - z0 * z0 * z0) / 3.0
                }
            };
        }
        let (zl, fl) = self.last();
        if u <= zl {
            return acc;
        }
        let r = self.tail_rate;
        let span = u - zl;
        // ∫₀^span (zl + w)^k fl e^{-r w} dw
        let e = if span.is_infinite() { 0.0 } else { (-r * span).exp() };
        let m0 = (1.0 - e) / r;
        acc + match k {
            0 => fl * m0,
            _ => {
                let m1 = if span.is_infinite() {
                    1.0 / (r * r)
                } else {
                    (1.0 - e * (1.0 + r * span)) / (r * r)
                };
                fl * (zl * m0 + m1)
            }
        }
    }
}

/// `1 - e^{-x}(1 + x)` without cancellation for small `x`.
fn one_minus_exp_poly(x: f64) -> f64 {
    if x < 0.5 {
        // Σ_{k≥2} (-1)^k (k-1) x^k / k!
        let mut term = x * x / 2.0; // x^k / k! at k = 2
        let mut sum = term;
        let mut k = 2.0;
        loop {
            k += 1.0;
            term *= -x / k;
            let add = term * (k - 1.0);
            sum += add;
            if add.abs() <= 1e-17 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        1.0 - (-x).exp() * (1.0 + x)
    }
}

impl ClaimDistribution {
    pub fn exponential(rate: f64) -> Result<Self> {
        let d = ClaimDistribution::Exponential { rate };
        d.validate()?;
        Ok(d)
    }

    pub fn pareto(shape: f64, scale: f64) -> Result<Self> {
        let d = ClaimDistribution::Pareto { shape, scale };
        d.validate()?;
        Ok(d)
    }

    pub fn tabulated(points: &[(f64, f64)]) -> Result<Self> {
        Ok(ClaimDistribution::Tabulated(TabulatedTail::new(points)?))
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ClaimDistribution::Exponential { rate } => {
                if !(rate > 0.0 && rate.is_finite()) {
                    return Err(Error::config("claims.lambda", "must be finite and > 0"));
                }
            }
            ClaimDistribution::Pareto { shape, scale } => {
                if !(shape > 1.0 && shape.is_finite()) {
                    return Err(Error::config("claims.alpha", "must be > 1 (finite mean)"));
                }
                if !(scale > 0.0 && scale.is_finite()) {
                    return Err(Error::config("claims.xm", "must be finite and > 0"));
                }
            }
            ClaimDistribution::Tabulated(_) => {}
        }
        Ok(())
    }

    /// `F̄(z) = P[Z > z]`.
    pub fn tail(&self, z: f64) -> Result<f64> {
        if !(z >= 0.0) {
            return Err(Error::Domain {
                what: "claim size",
                value: z,
                expected: "z >= 0",
            });
        }
        Ok(match self {
            ClaimDistribution::Exponential { rate } => (-rate * z).exp(),
            ClaimDistribution::Pareto { shape, scale } => {
                if z <= *scale {
                    1.0
                } else {
                    (scale / z).powf(*shape)
                }
            }
            ClaimDistribution::Tabulated(t) => t.tail_at(z),
        })
    }

    pub fn mean(&self) -> f64 {
        self.int_tail(f64::INFINITY)
    }

    pub fn second_moment(&self) -> f64 {
        self.int_2z_tail(f64::INFINITY)
    }

    /// `∫₀ᵘ F̄(z) dz`. Negative `u` is treated as 0.
    pub fn int_tail(&self, u: f64) -> f64 {
        if !(u > 0.0) {
            return 0.0;
        }
        match *self {
            ClaimDistribution::Exponential { rate } => -(-rate * u).exp_m1() / rate,
            ClaimDistribution::Pareto { shape, scale } => {
                if u <= scale {
                    u
                } else {
                    scale + scale / (shape - 1.0) * (1.0 - (scale / u).powf(shape - 1.0))
                }
            }
            ClaimDistribution::Tabulated(ref t) => t.moment(u, 0),
        }
    }

    /// `∫₀ᵘ 2z F̄(z) dz`. Negative `u` is treated as 0.
    pub fn int_2z_tail(&self, u: f64) -> f64 {
        if !(u > 0.0) {
            return 0.0;
        }
        match *self {
            ClaimDistribution::Exponential { rate } => {
                if u.is_infinite() {
                    2.0 / (rate * rate)
                } else {
                    2.0 / (rate * rate) * one_minus_exp_poly(rate * u)
                }
            }
            ClaimDistribution::Pareto { shape, scale } => {
                if u <= scale {
                    u * u
                } else if u.is_infinite() {
                    if shape <= 2.0 {
                        f64::INFINITY
                    } else {
                        scale * scale * shape / (shape - 2.0)
                    }
                } else if shape == 2.0 {
                    scale * scale * (1.0 + 2.0 * (u / scale).ln())
                } else {
                    let ratio = (u / scale).powf(2.0 - shape);
                    scale * scale * (1.0 + 2.0 * (ratio - 1.0) / (2.0 - shape))
                }
            }
            ClaimDistribution::Tabulated(ref t) => 2.0 * t.moment(u, 1),
        }
    }
}
