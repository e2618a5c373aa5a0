//! Geometric bracketing and bisection for scalar equations on `[0, ∞)`.

use crate::error::{Error, Result};

pub const MAX_BISECTIONS: usize = 200;
pub const BRACKET_START: f64 = 1e-6;
pub const BRACKET_DOUBLINGS: i32 = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Bisection on `[lo, hi]` with `f(lo) < 0 < f(hi)` (or the reverse). Stops
/// when the interval is narrower than `width_tol`, when the midpoint no longer
/// separates the endpoints, or after [`MAX_BISECTIONS`] halvings.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, width_tol: f64) -> Result<Root> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(Root { x: lo, residual: 0.0, iterations: 0 });
    }
    if f_hi == 0.0 {
        return Ok(Root { x: hi, residual: 0.0, iterations: 0 });
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::RootNotBracketed(format!(
            "f({lo}) = {f_lo} and f({hi}) = {f_hi} have the same sign"
        )));
    }
    let mut iterations = 0;
    while iterations < MAX_BISECTIONS && hi - lo > width_tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(Root { x: mid, residual: 0.0, iterations });
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    Ok(Root {
        x,
        residual: f(x).abs(),
        iterations,
    })
}

/// Scans `f` at `0` and `u₀·2^k` (k = 0..=60) for sign changes between
/// consecutive nonzero samples; exact zeros (e.g. an underflowed tail) do not
/// count. `f0` is the value (or one-sided limit) at zero.
///
/// Returns the first bracket, or an error if there is none or more than one.
pub fn geometric_bracket<F: Fn(f64) -> f64>(f: F, f0: f64) -> Result<(f64, f64)> {
    let mut last = (f0 != 0.0).then_some((0.0, f0));
    let mut first = None;
    let mut changes = 0;
    for k in 0..=BRACKET_DOUBLINGS {
        let u = BRACKET_START * 2f64.powi(k);
        let v = f(u);
        if v.is_nan() {
            return Err(Error::RootNotBracketed(format!("f({u}) is NaN")));
        }
        if v == 0.0 {
            continue;
        }
        if let Some((lu, lv)) = last {
            if v.signum() != lv.signum() {
                changes += 1;
                first.get_or_insert((lu, u));
            }
        }
        last = Some((u, v));
    }
    match (first, changes) {
        (None, _) => Err(Error::RootNotBracketed(format!(
            "no sign change on [0, {:e}]",
            BRACKET_START * 2f64.powi(BRACKET_DOUBLINGS)
        ))),
        (Some(b), 1) => Ok(b),
        (Some(_), n) => Err(Error::AmbiguousRoot { sign_changes: n }),
    }
}
