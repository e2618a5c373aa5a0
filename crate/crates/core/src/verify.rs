//! Independent oracles for the closed-form strategies: brute-force grid
//! maximisers of Ψ and of the pointwise HJB integrand, finite-difference ARA
//! checks, and region-boundary continuity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::claims::ClaimDistribution;
use crate::error::{Error, Result};
use crate::market::{
    psi_unchecked, Custom, ExcessOfLoss, MarketParams, MarketPoint, Problem, Proportional,
    ReinsuranceModel, RetentionFamily, StatePoint,
};
use crate::strategy::{
    optimal_independent, optimal_strategy, optimal_xl, proportional_with_ara, xl_first_order,
    Region, StrategyPoint,
};
use crate::utility::UtilityModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub name: String,
    pub closed_form: f64,
    pub oracle: f64,
    pub abs_diff: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub grid_spec: String,
}

impl OracleReport {
    pub fn new(
        name: impl Into<String>,
        closed_form: f64,
        oracle: f64,
        tolerance: f64,
        grid_spec: impl Into<String>,
    ) -> Self {
        Self::with_diff(name, closed_form, oracle, (closed_form - oracle).abs(), tolerance, grid_spec)
    }

    /// One-sided check: `abs_diff` is how far `closed_form` falls below `oracle`.
    pub fn shortfall(
        name: impl Into<String>,
        closed_form: f64,
        oracle: f64,
        tolerance: f64,
        grid_spec: impl Into<String>,
    ) -> Self {
        Self::with_diff(name, closed_form, oracle, (oracle - closed_form).max(0.0), tolerance, grid_spec)
    }

    fn with_diff(
        name: impl Into<String>,
        closed_form: f64,
        oracle: f64,
        abs_diff: f64,
        tolerance: f64,
        grid_spec: impl Into<String>,
    ) -> Self {
        Self {
            name: name.into(),
            closed_form,
            oracle,
            abs_diff,
            tolerance,
            // NaN compares false, so it fails
            pass: abs_diff <= tolerance,
            grid_spec: grid_spec.into(),
        }
    }

    fn failed(name: impl Into<String>, err: &Error) -> Self {
        Self {
            name: name.into(),
            closed_form: f64::NAN,
            oracle: f64::NAN,
            abs_diff: f64::NAN,
            tolerance: 0.0,
            pass: false,
            grid_spec: format!("error: {err}"),
        }
    }
}

pub fn all_pass(reports: &[OracleReport]) -> bool {
    reports.iter().all(|r| r.pass)
}

/// A strategy solver under test.
pub type Solver = dyn Fn(&Problem, &StatePoint) -> Result<StrategyPoint> + Sync;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridMax {
    pub u: f64,
    pub value: f64,
    pub h: f64,
    pub u_max: f64,
}

/// Upper end of the retention grid: `I`, or `u_max` (default `50·E[Z]`) when
/// the retention is unbounded.
fn grid_top(problem: &Problem, u_max: Option<f64>) -> Result<f64> {
    let bound = problem.reinsurance.retention_bound();
    if bound.is_finite() {
        return Ok(u_max.map_or(bound, |m| m.min(bound)));
    }
    let hi = match (&problem.reinsurance, u_max) {
        (_, Some(m)) => m,
        (ReinsuranceModel::ExcessOfLoss(x), None) => 50.0 * x.claims.mean(),
        _ => f64::INFINITY,
    };
    if hi.is_finite() && hi > 0.0 {
        Ok(hi)
    } else {
        Err(Error::config("verify.u_max", "unbounded retention needs a finite u_max"))
    }
}

fn grid_points(hi: f64, h: f64) -> Vec<f64> {
    let n = (hi / h - 1e-9).ceil() as usize;
    (0..n).map(|i| i as f64 * h).chain(std::iter::once(hi)).collect()
}

/// Smallest maximiser of Ψ on the grid `{0, h, 2h, …} ∪ {top}`.
///
/// With an unbounded retention the grid stops at `u_max`, and Ψ must be
/// decreasing there; otherwise the result is inconclusive.
pub fn grid_argmax_u(problem: &Problem, s: &StatePoint, h: f64, u_max: Option<f64>) -> Result<GridMax> {
    if !(h > 0.0) {
        return Err(Error::config("verify.h", "grid step must be > 0"));
    }
    let hi = grid_top(problem, u_max)?;
    let mp = problem.market.at(s.t, s.y);
    let ara = problem.utility.ara(s.x);
    let model = &problem.reinsurance;
    let us = grid_points(hi, h);
    let values: Vec<f64> = us
        .par_iter()
        .map(|&u| psi_unchecked(model, &mp, ara, s, u))
        .collect();
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    if !model.retention_bound().is_finite() {
        let n = values.len();
        if best == n - 1 || values[n - 1] >= values[n - 2] {
            return Err(Error::Inconclusive(format!(
                "Ψ not decreasing at u_max = {hi}; enlarge u_max"
            )));
        }
    }
    Ok(GridMax {
        u: us[best],
        value: values[best],
        h,
        u_max: hi,
    })
}

/// Pointwise HJB integrand divided by `U'(x)`:
/// `(m + aμ) − ½A[(σ + aσ₁)² + a²σ₂²]`.
pub fn hjb_integrand(drift: f64, vol: f64, a: f64, mp: &MarketPoint, ara: f64) -> f64 {
    let v1 = vol + a * mp.sigma1;
    let v2 = a * mp.sigma2;
    drift + a * mp.mu - 0.5 * ara * (v1 * v1 + v2 * v2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointGrid {
    pub u_step: f64,
    pub a_lo: f64,
    pub a_hi: f64,
    pub a_points: usize,
    /// Pattern-search refinement stops once both steps reach this size.
    pub final_step: f64,
}

impl Default for JointGrid {
    fn default() -> Self {
        Self {
            u_step: 1e-3,
            a_lo: -10.0,
            a_hi: 10.0,
            a_points: 20_001,
            final_step: 1e-6,
        }
    }
}

impl JointGrid {
    fn a_step(&self) -> f64 {
        (self.a_hi - self.a_lo) / (self.a_points - 1) as f64
    }

    pub fn describe(&self) -> String {
        format!(
            "u step {:e}, a in [{}, {}] step {:e}, refined to {:e}",
            self.u_step,
            self.a_lo,
            self.a_hi,
            self.a_step(),
            self.final_step
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointMax {
    pub u: f64,
    pub a: f64,
    pub value: f64,
    pub grid: JointGrid,
}

#[derive(Clone, Copy)]
struct Cand {
    value: f64,
    u: f64,
    a: f64,
}

fn better(x: Cand, y: Cand) -> Cand {
    // larger value; ties go to the smaller (u, a)
    if y.value > x.value || (y.value == x.value && (y.u, y.a) < (x.u, x.a)) {
        y
    } else {
        x
    }
}

const WINDOW: i64 = 10;
const MAX_RECENTER: usize = 1000;

/// Joint grid maximiser of the HJB integrand over `u × a`, followed by a
/// pattern search that shrinks both steps tenfold per level.
///
/// A coarse maximiser on the edge of the a-grid is inconclusive.
pub fn grid_argmax_ua(problem: &Problem, s: &StatePoint, grid: JointGrid) -> Result<JointMax> {
    if !(grid.u_step > 0.0 && grid.a_hi > grid.a_lo && grid.a_points >= 3 && grid.final_step > 0.0) {
        return Err(Error::config("verify.grid", "invalid joint grid"));
    }
    let hi = grid_top(problem, None)?;
    let mp = problem.market.at(s.t, s.y);
    let ara = problem.utility.ara(s.x);
    let model = &problem.reinsurance;
    let f = |u: f64, a: f64| {
        hjb_integrand(model.drift_at(s.t, s.y, u), model.vol_at(s.t, s.y, u), a, &mp, ara)
    };
    let a_step = grid.a_step();
    let us = grid_points(hi, grid.u_step);
    let coarse = us
        .par_iter()
        .map(|&u| {
            let (m, sig) = (model.drift_at(s.t, s.y, u), model.vol_at(s.t, s.y, u));
            let mut best = Cand {
                value: f64::NEG_INFINITY,
                u,
                a: grid.a_lo,
            };
            for j in 0..grid.a_points {
                let a = grid.a_lo + j as f64 * a_step;
                let v = hjb_integrand(m, sig, a, &mp, ara);
                if v > best.value {
                    best = Cand { value: v, u, a };
                }
            }
            best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .reduce(better)
        .expect("non-empty grid");
    let a_edge = a_step * 0.5;
    if coarse.a - grid.a_lo < a_edge || grid.a_hi - coarse.a < a_edge {
        return Err(Error::Inconclusive(format!(
            "joint maximiser on the a-grid edge at a = {}; widen the grid",
            coarse.a
        )));
    }

    let (mut hu, mut ha) = (grid.u_step, a_step);
    let mut c = coarse;
    loop {
        for _ in 0..MAX_RECENTER {
            let mut best = c;
            let mut best_ij = (0, 0);
            for i in -WINDOW..=WINDOW {
                let u = (c.u + i as f64 * hu).clamp(0.0, hi);
                for j in -WINDOW..=WINDOW {
                    let a = c.a + j as f64 * ha;
                    let next = better(best, Cand { value: f(u, a), u, a });
                    if (next.u, next.a) != (best.u, best.a) {
                        best_ij = (i, j);
                    }
                    best = next;
                }
            }
            let (i, j) = best_ij;
            let edge = (i.abs() == WINDOW && best.u > 0.0 && best.u < hi) || j.abs() == WINDOW;
            c = best;
            if !edge {
                break;
            }
        }
        if hu <= grid.final_step && ha <= grid.final_step {
            break;
        }
        hu = (hu / 10.0).max(grid.final_step);
        ha = (ha / 10.0).max(grid.final_step);
    }
    Ok(JointMax {
        u: c.u,
        a: c.a,
        value: c.value,
        grid,
    })
}

/// [`grid_argmax_ua`] starting from the default grid, doubling the a-range
/// (same point count) while the maximiser sits on its edge.
pub fn joint_oracle(problem: &Problem, s: &StatePoint, u_step: f64) -> Result<JointMax> {
    let mut grid = JointGrid {
        u_step,
        ..JointGrid::default()
    };
    for _ in 0..40 {
        match grid_argmax_ua(problem, s, grid) {
            Err(Error::Inconclusive(_)) => {
                grid.a_lo *= 2.0;
                grid.a_hi *= 2.0;
            }
            other => return other,
        }
    }
    Err(Error::Inconclusive("a-grid widening did not converge".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryCrossing {
    pub boundary: f64,
    pub left: Region,
    pub right: Region,
    pub report: OracleReport,
}

pub const BOUNDARY_STEP: f64 = 1e-8;
pub const BOUNDARY_JUMP_TOL: f64 = 1e-6;

/// Locates the region change of `f` on `[lo, hi]` by bisection and measures
/// the jump in `u*` across a parameter step of [`BOUNDARY_STEP`].
pub fn boundary_continuity<F>(name: &str, f: F, lo: f64, hi: f64) -> Result<BoundaryCrossing>
where
    F: Fn(f64) -> Result<StrategyPoint>,
{
    let left = f(lo)?.region;
    let right = f(hi)?.region;
    if left == right {
        return Err(Error::config(
            "verify.boundary",
            format!("no region change on [{lo}, {hi}] ({left} at both ends)"),
        ));
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if f(mid)?.region == left {
            a = mid;
        } else {
            b = mid;
        }
    }
    let boundary = 0.5 * (a + b);
    let below = f(boundary - 0.5 * BOUNDARY_STEP)?;
    let above = f(boundary + 0.5 * BOUNDARY_STEP)?;
    let report = OracleReport::new(
        name,
        below.u_star,
        above.u_star,
        BOUNDARY_JUMP_TOL,
        format!(
            "{} -> {} at {boundary:.12}, step {BOUNDARY_STEP:e}",
            below.region, above.region
        ),
    );
    Ok(BoundaryCrossing {
        boundary,
        left,
        right,
        report,
    })
}

/// Central-difference `−U''/U'` from `U'` against the closed-form ARA.
pub fn ara_fd_report(util: &UtilityModel, x: f64) -> OracleReport {
    let h = 1e-5 * x.abs().max(1.0);
    let fd = -(util.marginal_utility(x + h) - util.marginal_utility(x - h))
        / (2.0 * h * util.marginal_utility(x));
    let exact = util.ara(x);
    OracleReport::new(
        format!("ara_fd(x={x})"),
        exact,
        fd,
        1e-8 * exact.max(1.0),
        format!("central difference of U', h = {h:e}"),
    )
}

/// One randomized parameter set for the proportional model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Draw {
    pub mu: f64,
    pub sigma0: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub q: f64,
    pub x: f64,
    pub a: f64,
    pub b: f64,
    pub d: f64,
}

impl Draw {
    pub fn sample<R: Rng>(rng: &mut R) -> Self {
        Self {
            mu: rng.random_range(0.0..=0.3),
            sigma0: rng.random_range(0.05..=1.0),
            sigma1: rng.random_range(0.05..=1.0),
            sigma2: rng.random_range(0.05..=1.0),
            q: rng.random_range(0.01..=0.3),
            x: rng.random_range(-5.0..=5.0),
            a: rng.random_range(0.2..=3.0),
            b: rng.random_range(0.2..=3.0),
            d: rng.random_range(-2.0..=2.0),
        }
    }

    pub fn problem(&self) -> Result<Problem> {
        Ok(Problem {
            utility: UtilityModel::sahara(self.a, self.b, self.d)?,
            market: MarketParams::constant(self.mu, self.sigma1, self.sigma2),
            reinsurance: ReinsuranceModel::Proportional(Proportional::constant(
                0.5 * self.q,
                self.q,
                self.sigma0,
            )?),
            ..Problem::baseline()
        })
    }

    pub fn state(&self) -> StatePoint {
        StatePoint::new(0.0, self.x, 0.0)
    }
}

/// `n` draws from a ChaCha stream; draw `i` is the same for any `n > i`.
pub fn random_draws(n: usize, seed: u64) -> Vec<Draw> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| Draw::sample(&mut rng)).collect()
}

pub const SUITE_U_STEP: f64 = 1e-3;
pub const SUITE_U_TOL: f64 = 1e-3;
pub const SUITE_PSI_TOL: f64 = 1e-9;
pub const JOINT_TOL: f64 = 1e-4;
pub const INDEPENDENT_TOL: f64 = 1e-10;

/// Closed-form retention against the Ψ grid maximiser, plus the check that
/// Ψ at the closed form is not below the grid maximum.
pub fn proportional_suite(n: usize, seed: u64, solver: &Solver) -> Vec<OracleReport> {
    random_draws(n, seed)
        .par_iter()
        .enumerate()
        .map(|(i, d)| {
            let run = || -> Result<[OracleReport; 2]> {
                let p = d.problem()?;
                let s = d.state();
                let sp = solver(&p, &s)?;
                let g = grid_argmax_u(&p, &s, SUITE_U_STEP, None)?;
                let spec = format!("u in [0, 1] step {SUITE_U_STEP:e}");
                Ok([
                    OracleReport::new(format!("proportional_u[{i}]"), sp.u_star, g.u, SUITE_U_TOL, spec.clone()),
                    OracleReport::shortfall(
                        format!("proportional_psi[{i}]"),
                        p.psi(&s, sp.u_star.clamp(0.0, 1.0))?,
                        g.value,
                        SUITE_PSI_TOL,
                        spec,
                    ),
                ])
            };
            run().map(Vec::from).unwrap_or_else(|e| vec![OracleReport::failed(format!("proportional[{i}]"), &e)])
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// `(u*, a*)` against the joint HJB grid maximiser.
pub fn joint_suite(n: usize, seed: u64, solver: &Solver) -> Vec<OracleReport> {
    random_draws(n, seed)
        .par_iter()
        .enumerate()
        .map(|(i, d)| {
            let run = || -> Result<[OracleReport; 2]> {
                let p = d.problem()?;
                let s = d.state();
                let sp = solver(&p, &s)?;
                let j = joint_oracle(&p, &s, SUITE_U_STEP)?;
                let spec = j.grid.describe();
                Ok([
                    OracleReport::new(format!("joint_u[{i}]"), sp.u_star, j.u, JOINT_TOL, spec.clone()),
                    OracleReport::new(format!("joint_a[{i}]"), sp.a_star, j.a, JOINT_TOL, spec),
                ])
            };
            run().map(Vec::from).unwrap_or_else(|e| vec![OracleReport::failed(format!("joint[{i}]"), &e)])
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// Proportional reinsurance rebuilt through the generic custom interface,
/// with analytic derivatives, to exercise the independent-market solver.
struct LinearFamily {
    p: f64,
    q: f64,
    sigma0: f64,
}

impl RetentionFamily for LinearFamily {
    fn drift(&self, _t: f64, _y: f64, u: f64) -> f64 {
        self.p - self.q + self.q * u
    }
    fn vol(&self, _t: f64, _y: f64, u: f64) -> f64 {
        self.sigma0 * u
    }
    fn drift_du(&self, _t: f64, _y: f64, _u: f64) -> Option<f64> {
        Some(self.q)
    }
    fn vol_du(&self, _t: f64, _y: f64, _u: f64) -> Option<f64> {
        Some(self.sigma0)
    }
}

/// With `σ₁ = 0` the general solvers must reproduce `u* = q/(σ₀²A) ∧ 1` and,
/// for excess-of-loss, `u* = θ/A`.
pub fn independent_suite(n: usize, seed: u64) -> Vec<OracleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let extra: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.random_range(0.1..=0.5), rng.random_range(0.5..=2.0)))
        .collect();
    random_draws(n, seed)
        .par_iter()
        .zip(extra.par_iter())
        .enumerate()
        .map(|(i, (d, &(theta, lambda)))| {
            let run = || -> Result<Vec<OracleReport>> {
                let mut p = d.problem()?;
                p.market.sigma1 = 0.0.into();
                let s = d.state();
                let ara = p.utility.ara(s.x);
                let expect_prop = (d.q / (d.sigma0 * d.sigma0 * ara)).min(1.0);
                let closed = optimal_strategy(&p, &s)?;
                let custom = ReinsuranceModel::Custom(Custom::new(
                    Arc::new(LinearFamily {
                        p: 0.5 * d.q,
                        q: d.q,
                        sigma0: d.sigma0,
                    }),
                    1.0,
                )?);
                let generic = optimal_independent(&p.market, &p.utility, &custom, &s)?;
                let xl = ExcessOfLoss::new(theta, 0.1, ClaimDistribution::exponential(lambda)?)?;
                let root = optimal_xl(&p.market, &p.utility, &xl, &s)?;
                let spec = "closed form, sigma1 = 0";
                Ok(vec![
                    OracleReport::new(format!("independent_prop[{i}]"), closed.u_star, expect_prop, INDEPENDENT_TOL, spec),
                    OracleReport::new(format!("independent_custom[{i}]"), generic.u_star, expect_prop, INDEPENDENT_TOL, spec),
                    OracleReport::new(format!("independent_xl[{i}]"), root.u_star, theta / ara, INDEPENDENT_TOL, spec),
                ])
            };
            run().unwrap_or_else(|e| vec![OracleReport::failed(format!("independent[{i}]"), &e)])
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

fn exp_xl(theta: f64) -> ReinsuranceModel {
    ReinsuranceModel::ExcessOfLoss(
        ExcessOfLoss::new(theta, 0.1, ClaimDistribution::exponential(1.0).expect("valid"))
            .expect("valid"),
    )
}

/// Baseline-parameter checks: the proportional optimum on a fine grid, the
/// excess-of-loss root and its residual, and the full-reinsurance case.
pub fn baseline_reports(solver: &Solver) -> Vec<OracleReport> {
    let mut out = Vec::new();
    let p = Problem::baseline();
    let s = StatePoint::new(0.0, 1.0, 0.0);
    let mut push = |name: &str, r: Result<Vec<OracleReport>>| match r {
        Ok(v) => out.extend(v),
        Err(e) => out.push(OracleReport::failed(name, &e)),
    };
    push("baseline_proportional", (|| {
        let sp = solver(&p, &s)?;
        let g = grid_argmax_u(&p, &s, 1e-6, None)?;
        let j = joint_oracle(&p, &s, 1e-3)?;
        Ok(vec![
            OracleReport::new("baseline_u", sp.u_star, g.u, 1e-6, "u in [0, 1] step 1e-6"),
            OracleReport::new("baseline_a", sp.a_star, j.a, 1e-6, j.grid.describe()),
        ])
    })());
    push("baseline_xl", (|| {
        let mut q = p.clone();
        q.reinsurance = exp_xl(0.2);
        let sp = optimal_strategy(&q, &s)?;
        let g = grid_argmax_u(&q, &s, 1e-5, Some(5.0))?;
        let ReinsuranceModel::ExcessOfLoss(x) = &q.reinsurance else { unreachable!() };
        let g_res = xl_first_order(x, &q.market.at(0.0, 0.0), q.utility.ara(1.0), sp.u_star).abs();
        q.reinsurance = ReinsuranceModel::ExcessOfLoss(ExcessOfLoss::new(
            0.06,
            0.05,
            ClaimDistribution::exponential(1.0)?,
        )?);
        let a0 = optimal_strategy(&q, &s)?;
        Ok(vec![
            OracleReport::new("xl_root", sp.u_star, g.u, 1e-4, "u in [0, 5] step 1e-5"),
            OracleReport::new("xl_residual", g_res, 0.0, 1e-10, "first-order condition"),
            OracleReport::new("xl_full_reinsurance", a0.u_star, 0.0, 0.0, "theta = 0.06 below threshold 0.08"),
        ])
    })());
    out
}

/// Continuity of `u*` across the three region boundaries of the baseline.
pub fn boundary_reports() -> Vec<OracleReport> {
    let s = StatePoint::new(0.0, 1.0, 0.0);
    let base = Problem::baseline();
    let with_mu = |mu: f64| {
        let mut p = base.clone();
        p.market = MarketParams::constant(mu, 0.5, 0.5);
        optimal_strategy(&p, &s)
    };
    let with_q = |q: f64| {
        let mut p = base.clone();
        p.reinsurance = ReinsuranceModel::Proportional(Proportional::constant(0.03, q, 0.5)?);
        optimal_strategy(&p, &s)
    };
    let with_theta = |theta: f64| {
        let mut p = base.clone();
        p.reinsurance = ReinsuranceModel::ExcessOfLoss(ExcessOfLoss::new(
            theta,
            0.05,
            ClaimDistribution::exponential(1.0)?,
        )?);
        optimal_strategy(&p, &s)
    };
    [
        boundary_continuity("boundary_mu_a0", with_mu, 0.05, 0.15),
        boundary_continuity("boundary_q_a1", with_q, 0.1, 0.2),
        boundary_continuity("boundary_theta_a0", with_theta, 0.05, 0.2),
    ]
    .into_iter()
    .zip(["boundary_mu_a0", "boundary_q_a1", "boundary_theta_a0"])
    .map(|(r, name)| r.map(|c| c.report).unwrap_or_else(|e| OracleReport::failed(name, &e)))
    .collect()
}

/// Symmetry about `d`, wealth-independence under exponential utility, and
/// finite-difference ARA.
pub fn structural_reports() -> Vec<OracleReport> {
    let mut out = Vec::new();
    let base = Problem::baseline();
    let at = |p: &Problem, x: f64| optimal_strategy(p, &StatePoint::new(0.0, x, 0.0));
    for delta in [0.1, 1.0, 5.0] {
        match (at(&base, delta), at(&base, -delta)) {
            (Ok(hi), Ok(lo)) => {
                out.push(OracleReport::new(format!("symmetry_u(delta={delta})"), hi.u_star, lo.u_star, 1e-12, "x = d ± delta"));
                out.push(OracleReport::new(format!("symmetry_a(delta={delta})"), hi.a_star, lo.a_star, 1e-12, "x = d ± delta"));
            }
            (Err(e), _) | (_, Err(e)) => out.push(OracleReport::failed("symmetry", &e)),
        }
    }
    let mut expo = base.clone();
    expo.utility = UtilityModel::exponential(std::f64::consts::FRAC_1_SQRT_2).expect("valid");
    match (at(&expo, -5.0), at(&expo, 5.0)) {
        (Ok(lo), Ok(hi)) => {
            out.push(OracleReport::new("exponential_u", hi.u_star, lo.u_star, 1e-15, "x = ±5"));
            out.push(OracleReport::new("exponential_a", hi.a_star, lo.a_star, 1e-15, "x = ±5"));
        }
        (Err(e), _) | (_, Err(e)) => out.push(OracleReport::failed("exponential", &e)),
    }
    for x in [-5.0, -1.0, 0.0, 0.5, 3.0] {
        out.push(ara_fd_report(&base.utility, x));
    }
    out
}

pub const SUITE_DRAWS: usize = 1000;
pub const JOINT_DRAWS: usize = 100;
pub const INDEPENDENT_DRAWS: usize = 100;

/// Every oracle check, in a fixed order.
pub fn default_suite(seed: u64, solver: &Solver) -> Vec<OracleReport> {
    let mut out = proportional_suite(SUITE_DRAWS, seed, solver);
    out.extend(joint_suite(JOINT_DRAWS, seed.wrapping_add(1), solver));
    out.extend(independent_suite(INDEPENDENT_DRAWS, seed.wrapping_add(2)));
    out.extend(baseline_reports(solver));
    out.extend(boundary_reports());
    out.extend(structural_reports());
    out
}

/// The solver under test: the piecewise closed form for proportional
/// reinsurance, via the general dispatcher.
pub fn closed_form_solver(problem: &Problem, s: &StatePoint) -> Result<StrategyPoint> {
    optimal_strategy(problem, s)
}

/// Mutation fixture: proportional closed form with the sign of `μσ₀σ₁`
/// flipped in the interior numerator. The suite must reject it.
pub fn mutated_proportional(problem: &Problem, s: &StatePoint) -> Result<StrategyPoint> {
    let ReinsuranceModel::Proportional(prop) = &problem.reinsurance else {
        return optimal_strategy(problem, s);
    };
    let mp = problem.market.at(s.t, s.y);
    let ara = problem.utility.ara(s.x);
    let q = prop.q.eval(s.t, s.y);
    let sigma0 = prop.sigma0.eval(s.t, s.y);
    let total = mp.total_variance();
    let u = ((total * q + mp.mu * sigma0 * mp.sigma1) / (sigma0 * sigma0 * mp.sigma2 * mp.sigma2 * ara))
        .clamp(0.0, 1.0);
    let correct = proportional_with_ara(&mp, ara, q, sigma0)?;
    Ok(StrategyPoint {
        u_star: u,
        ..correct
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table1_state() -> StatePoint {
        StatePoint::new(0.0, 1.0, 0.0)
    }

    #[test]
    fn grid_oracle_confirms_baseline_retention() {
        let g = grid_argmax_u(&Problem::baseline(), &table1_state(), 1e-4, None).unwrap();
        assert!((g.u - 0.1131).abs() < 1e-12);
        let fine = grid_argmax_u(&Problem::baseline(), &table1_state(), 1e-6, None).unwrap();
        assert!((fine.u - 0.113_137_084_989_847_6).abs() <= 5e-7);
    }

    #[test]
    fn grid_oracle_full_reinsurance() {
        let mut p = Problem::baseline();
        p.market = MarketParams::constant(0.2, 0.5, 0.5);
        let g = grid_argmax_u(&p, &table1_state(), 1e-4, None).unwrap();
        assert_eq!(g.u, 0.0);
    }

    #[test]
    fn grid_oracle_xl() {
        let mut p = Problem::baseline();
        p.reinsurance = exp_xl(0.2);
        let g = grid_argmax_u(&p, &table1_state(), 1e-5, Some(5.0)).unwrap();
        assert!((g.u - 0.314_732_908_758_697_9).abs() <= 1e-5, "{g:?}");
    }

    #[test]
    fn grid_oracle_needs_decrease_at_u_max() {
        let mut p = Problem::baseline();
        p.reinsurance = exp_xl(0.2);
        // Ψ is convex and increasing past its inflection point near 1.32
        assert!(matches!(
            grid_argmax_u(&p, &table1_state(), 1e-3, Some(0.05)),
            Err(Error::Inconclusive(_))
        ));
    }

    #[test]
    fn halving_the_step_does_not_worsen_agreement() {
        let p = Problem::baseline();
        let s = table1_state();
        let exact = optimal_strategy(&p, &s).unwrap().u_star;
        let mut prev = f64::INFINITY;
        for k in 0..8 {
            let h = 1e-2 / 2f64.powi(k);
            let diff = (grid_argmax_u(&p, &s, h, None).unwrap().u - exact).abs();
            assert!(diff <= 0.5 * h + 1e-15);
            assert!(diff <= 2.0 * prev + 1e-15);
            prev = diff;
        }
    }

    #[test]
    fn joint_oracle_baseline() {
        let j = joint_oracle(&Problem::baseline(), &table1_state(), 1e-3).unwrap();
        assert!((j.u - 0.113_137_084_989_847_6).abs() < 1e-5, "{j:?}");
        assert!((j.a - 0.169_705_627_484_771_4).abs() < 1e-5, "{j:?}");
    }

    #[test]
    fn joint_oracle_zero_drift_no_correlation() {
        let mut p = Problem::baseline();
        p.market = MarketParams::constant(0.0, 0.0, 0.5);
        let j = joint_oracle(&p, &table1_state(), 1e-3).unwrap();
        assert!(j.a.abs() <= 1e-3, "{j:?}");
    }

    #[test]
    fn joint_oracle_decouples_without_correlation() {
        let mut p = Problem::baseline();
        p.market = MarketParams::constant(0.08, 0.0, 0.5);
        let s = table1_state();
        let coarse = grid_argmax_ua(&p, &s, JointGrid::default()).unwrap();
        let fine = grid_argmax_ua(
            &p,
            &s,
            JointGrid {
                a_points: 40_001,
                ..JointGrid::default()
            },
        )
        .unwrap();
        assert!((coarse.u - fine.u).abs() <= 1e-6);
        assert!((coarse.u - 0.282_842_712_474_619).abs() <= 1e-5);
    }

    #[test]
    fn joint_grid_edge_is_inconclusive() {
        let p = Problem::baseline();
        let g = JointGrid {
            a_lo: -0.1,
            a_hi: 0.1,
            a_points: 201,
            ..JointGrid::default()
        };
        assert!(matches!(grid_argmax_ua(&p, &table1_state(), g), Err(Error::Inconclusive(_))));
    }

    #[test]
    fn boundaries_are_located_and_continuous() {
        let reports = boundary_reports();
        assert!(all_pass(&reports), "{reports:#?}");
        assert!(reports[0].grid_spec.contains("0.1000000000"));
        assert!(reports[1].grid_spec.contains("0.12838834764"));
        assert!(reports[2].grid_spec.contains("0.0800000000"));
    }

    #[test]
    fn structural_reports_pass() {
        let r = structural_reports();
        assert!(all_pass(&r), "{r:#?}");
    }

    #[test]
    fn small_suites_pass_and_mutant_fails() {
        let good = proportional_suite(50, 11, &closed_form_solver);
        assert!(all_pass(&good), "{:#?}", good.iter().find(|r| !r.pass));
        let bad = proportional_suite(50, 11, &mutated_proportional);
        assert!(!all_pass(&bad));
        let joint = joint_suite(5, 3, &closed_form_solver);
        assert!(all_pass(&joint), "{:#?}", joint.iter().find(|r| !r.pass));
        let ind = independent_suite(20, 5);
        assert!(all_pass(&ind), "{:#?}", ind.iter().find(|r| !r.pass));
    }

    #[test]
    fn baseline_reports_pass() {
        let r = baseline_reports(&closed_form_solver);
        assert!(all_pass(&r), "{r:#?}");
    }

    #[test]
    fn draws_are_prefix_stable() {
        let a = random_draws(10, 9);
        let b = random_draws(20, 9);
        assert_eq!(a[..], b[..10]);
    }

    #[test]
    fn report_pass_matches_tolerance() {
        assert!(OracleReport::new("x", 1.0, 1.0 + 1e-9, 1e-8, "").pass);
        assert!(!OracleReport::new("x", 1.0, 1.1, 1e-8, "").pass);
        assert!(!OracleReport::new("x", f64::NAN, 1.0, 1e-8, "").pass);
        let s = OracleReport::shortfall("s", 2.0, 1.0, 0.0, "");
        assert_eq!(s.abs_diff, 0.0);
        assert!(s.pass);
    }
}
