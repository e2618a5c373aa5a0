//! Optimal retention and investment.
//!
//! For a given retention `u` the optimal amount invested is
//! `a* = (μ − Aσ(u)σ₁) / (A(σ₁² + σ₂²))`; the retention itself maximises Ψ.
//! Proportional reinsurance has a piecewise closed form, excess-of-loss
//! reduces to a scalar root, and when the insurance and financial noises are
//! uncorrelated (`σ₁ = 0`) the first-order condition `m'(u) = Aσσ'(u)` holds
//! for any model with concave Ψ.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{
    check_concavity, psi_unchecked, ExcessOfLoss, MarketParams, MarketPoint, Problem,
    Proportional, ReinsuranceModel, StatePoint,
};
use crate::root::{self, Root};
use crate::utility::UtilityModel;

/// Which branch of the piecewise optimum applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    /// Full reinsurance, `u* = 0`.
    A0,
    Interior,
    /// No reinsurance, `u* = I`.
    AI,
}

impl Region {
    pub fn label(&self) -> &'static str {
        match self {
            Region::A0 => "A0",
            Region::Interior => "Interior",
            Region::AI => "AI",
        }
    }
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyPoint {
    pub u_star: f64,
    pub a_star: f64,
    pub region: Region,
    /// Set when the maximiser came from a grid search because the
    /// uniqueness hypotheses could not be confirmed.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub fallback: bool,
    /// Absolute residual of the first-order equation, for root-based solvers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
}

impl StrategyPoint {
    fn closed(u_star: f64, a_star: f64, region: Region) -> Self {
        Self {
            u_star,
            a_star,
            region,
            fallback: false,
            residual: None,
        }
    }
}

/// `a* = (μ − Aσσ₁) / (A(σ₁² + σ₂²))` for a retained volatility `vol`.
pub fn investment_for(mp: &MarketPoint, ara: f64, vol: f64) -> f64 {
    (mp.mu - ara * vol * mp.sigma1) / (ara * mp.total_variance())
}

fn require_variance(mp: &MarketPoint) -> Result<()> {
    if mp.total_variance() > 0.0 {
        Ok(())
    } else {
        Err(Error::config(
            "market.sigma2",
            "sigma1^2 + sigma2^2 must be > 0",
        ))
    }
}

/// Optimal investment for a fixed retention `u`.
pub fn optimal_investment(
    model: &ReinsuranceModel,
    mkt: &MarketParams,
    util: &UtilityModel,
    s: &StatePoint,
    u: f64,
) -> Result<f64> {
    let vol = model.vol_sigma(s, u)?;
    let mp = mkt.at(s.t, s.y);
    require_variance(&mp)?;
    Ok(investment_for(&mp, util.ara(s.x), vol))
}

/// Region thresholds for proportional reinsurance at one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProportionalThresholds {
    /// `q` below this ⇒ full reinsurance.
    pub full_reinsurance: f64,
    /// `q` above this ⇒ no reinsurance.
    pub no_reinsurance: f64,
}

pub fn proportional_thresholds(mp: &MarketPoint, ara: f64, sigma0: f64) -> ProportionalThresholds {
    let var = mp.total_variance();
    ProportionalThresholds {
        full_reinsurance: mp.mu * mp.sigma1 * sigma0 / var,
        no_reinsurance: sigma0 * (mp.sigma2 * mp.sigma2 * ara * sigma0 + mp.mu * mp.sigma1) / var,
    }
}

/// Closed-form proportional optimum for a given risk aversion value.
pub fn proportional_with_ara(
    mp: &MarketPoint,
    ara: f64,
    q: f64,
    sigma0: f64,
) -> Result<StrategyPoint> {
    require_variance(mp)?;
    if !(mp.sigma2 > 0.0) {
        return Err(Error::config(
            "market.sigma2",
            "proportional optimum needs sigma2 > 0",
        ));
    }
    let th = proportional_thresholds(mp, ara, sigma0);
    let (u, region) = if q < th.full_reinsurance {
        (0.0, Region::A0)
    } else if q > th.no_reinsurance {
        (1.0, Region::AI)
    } else {
        let u = (mp.total_variance() * q - mp.mu * sigma0 * mp.sigma1)
            / (sigma0 * sigma0 * mp.sigma2 * mp.sigma2 * ara);
        (u.clamp(0.0, 1.0), Region::Interior)
    };
    let a = investment_for(mp, ara, sigma0 * u);
    Ok(StrategyPoint::closed(u, a, region))
}

pub fn optimal_proportional(
    mkt: &MarketParams,
    util: &UtilityModel,
    model: &Proportional,
    s: &StatePoint,
) -> Result<StrategyPoint> {
    let mp = mkt.at(s.t, s.y);
    proportional_with_ara(&mp, util.ara(s.x), model.q.eval(s.t, s.y), model.sigma0.eval(s.t, s.y))
}

/// Proportional optimum under `U(x) = −e^{−βx}`; independent of wealth.
pub fn optimal_exponential(
    mkt: &MarketParams,
    beta: f64,
    model: &Proportional,
    s: &StatePoint,
) -> Result<StrategyPoint> {
    if !(beta > 0.0) {
        return Err(Error::config("utility.beta", "must be > 0"));
    }
    let mp = mkt.at(s.t, s.y);
    proportional_with_ara(&mp, beta, model.q.eval(s.t, s.y), model.sigma0.eval(s.t, s.y))
}

/// Excess-of-loss first-order function
/// `g(u) = μσ₁u/sqrt(∫₀ᵘ2zF̄) + σ₂²Au − θ(σ₁² + σ₂²)`; `Ψ'(u) = −F̄(u)g(u)/(σ₁² + σ₂²)`.
///
/// `g(0)` is the one-sided limit `μσ₁ − θ(σ₁² + σ₂²)`.
pub fn xl_first_order(model: &ExcessOfLoss, mp: &MarketPoint, ara: f64, u: f64) -> f64 {
    let lhs = model.theta * mp.total_variance();
    let cov = mp.mu * mp.sigma1;
    if u <= 0.0 {
        return cov - lhs;
    }
    let ratio = u / model.claims.int_2z_tail(u).sqrt();
    cov * ratio + mp.sigma2 * mp.sigma2 * ara * u - lhs
}

/// `θ` at or below this ⇒ full reinsurance is optimal.
pub fn xl_threshold(mp: &MarketPoint) -> f64 {
    mp.mu * mp.sigma1 / mp.total_variance()
}

const ROOT_WIDTH: f64 = 1e-14;

pub fn optimal_xl(
    mkt: &MarketParams,
    util: &UtilityModel,
    model: &ExcessOfLoss,
    s: &StatePoint,
) -> Result<StrategyPoint> {
    let mp = mkt.at(s.t, s.y);
    require_variance(&mp)?;
    let ara = util.ara(s.x);
    if model.theta <= xl_threshold(&mp) {
        let a = investment_for(&mp, ara, 0.0);
        return Ok(StrategyPoint::closed(0.0, a, Region::A0));
    }
    let g = |u: f64| xl_first_order(model, &mp, ara, u);
    let (lo, hi) = root::geometric_bracket(g, g(0.0))?;
    let Root { x: u, residual, .. } = root::bisect(g, lo, hi, ROOT_WIDTH)?;
    let a = investment_for(&mp, ara, model.claims.int_2z_tail(u).sqrt());
    Ok(StrategyPoint {
        u_star: u,
        a_star: a,
        region: Region::Interior,
        fallback: false,
        residual: Some(residual),
    })
}

/// Grid points used when the maximiser has to be found by search.
pub const FALLBACK_GRID: usize = 20_001;

/// Smallest grid maximiser of Ψ over `[0, hi]`.
fn grid_maximise(
    model: &ReinsuranceModel,
    mp: &MarketPoint,
    ara: f64,
    s: &StatePoint,
    hi: f64,
) -> (f64, f64) {
    let h = hi / (FALLBACK_GRID - 1) as f64;
    let mut best = (0.0, psi_unchecked(model, mp, ara, s, 0.0));
    for i in 1..FALLBACK_GRID {
        let u = i as f64 * h;
        let v = psi_unchecked(model, mp, ara, s, u);
        if v > best.1 {
            best = (u, v);
        }
    }
    best
}

fn region_of(u: f64, bound: f64) -> Region {
    if u <= 0.0 {
        Region::A0
    } else if u >= bound {
        Region::AI
    } else {
        Region::Interior
    }
}

/// Optimum when `σ₁ = 0`: `a* = μ/(Aσ₂²)` and `u*` solves
/// `∂m/∂u = Aσ∂σ/∂u`, clamped to `[0, I]`.
///
/// Ψ must be concave. Models that do not declare it are scanned; if the scan
/// fails the smallest grid maximiser is returned with `fallback` set.
pub fn optimal_independent(
    mkt: &MarketParams,
    util: &UtilityModel,
    model: &ReinsuranceModel,
    s: &StatePoint,
) -> Result<StrategyPoint> {
    let mp = mkt.at(s.t, s.y);
    if mp.sigma1 != 0.0 {
        return Err(Error::config(
            "market.sigma1",
            "independent-market solver requires sigma1 = 0",
        ));
    }
    if !(mp.sigma2 > 0.0) {
        return Err(Error::config("market.sigma2", "must be > 0"));
    }
    let ara = util.ara(s.x);
    let a_star = mp.mu / (ara * mp.sigma2 * mp.sigma2);
    let bound = model.retention_bound();

    // XL: g(u) = F̄(u)(θ − Au), so the root is θ/A.
    if let ReinsuranceModel::ExcessOfLoss(x) = model {
        if x.theta <= 0.0 {
            return Ok(StrategyPoint::closed(0.0, a_star, Region::A0));
        }
        return Ok(StrategyPoint::closed(x.theta / ara, a_star, Region::Interior));
    }
    if !model.declares_concave_psi() && !check_concavity(model, mkt, util, s, 1001)?.concave {
        if !bound.is_finite() {
            return Err(Error::Inconclusive(
                "non-concave criterion on an unbounded retention range".into(),
            ));
        }
        let (u, _) = grid_maximise(model, &mp, ara, s, bound);
        return Ok(StrategyPoint {
            u_star: u,
            a_star,
            region: region_of(u, bound),
            fallback: true,
            residual: None,
        });
    }

    let g = |u: f64| model.drift_du(s.t, s.y, u) - ara * model.vol_vol_du(s.t, s.y, u);
    let g0 = g(0.0);
    if g0 <= 0.0 {
        return Ok(StrategyPoint::closed(0.0, a_star, Region::A0));
    }
    let (lo, hi) = if bound.is_finite() {
        if g(bound) >= 0.0 {
            return Ok(StrategyPoint::closed(bound, a_star, Region::AI));
        }
        (0.0, bound)
    } else {
        root::geometric_bracket(g, g0)?
    };
    let r = root::bisect(g, lo, hi, ROOT_WIDTH)?;
    Ok(StrategyPoint {
        u_star: r.x,
        a_star,
        region: Region::Interior,
        fallback: false,
        residual: Some(r.residual),
    })
}

/// Golden-section refinement of the grid maximiser, for concave Ψ.
fn maximise_concave(
    model: &ReinsuranceModel,
    mp: &MarketPoint,
    ara: f64,
    s: &StatePoint,
    bound: f64,
) -> f64 {
    let (u0, _) = grid_maximise(model, mp, ara, s, bound);
    let h = bound / (FALLBACK_GRID - 1) as f64;
    let (mut lo, mut hi) = ((u0 - h).max(0.0), (u0 + h).min(bound));
    let f = |u: f64| psi_unchecked(model, mp, ara, s, u);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - ratio * (hi - lo);
    let mut d = lo + ratio * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..100 {
        if hi - lo < 1e-13 {
            break;
        }
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - ratio * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + ratio * (hi - lo);
            fd = f(d);
        }
    }
    let mid = 0.5 * (lo + hi);
    // keep an endpoint when the optimum sits on it
    [0.0, mid, bound]
        .into_iter()
        .fold((mid, f(mid)), |best, u| {
            let v = f(u);
            if v > best.1 {
                (u, v)
            } else {
                best
            }
        })
        .0
}

/// Optimal strategy for any supported model.
pub fn optimal_strategy(problem: &Problem, s: &StatePoint) -> Result<StrategyPoint> {
    match &problem.reinsurance {
        ReinsuranceModel::Proportional(p) => optimal_proportional(&problem.market, &problem.utility, p, s),
        ReinsuranceModel::ExcessOfLoss(x) => optimal_xl(&problem.market, &problem.utility, x, s),
        model @ ReinsuranceModel::Custom(c) => {
            let mp = problem.market.at(s.t, s.y);
            if mp.sigma1 == 0.0 {
                return optimal_independent(&problem.market, &problem.utility, model, s);
            }
            require_variance(&mp)?;
            let bound = c.bound;
            if !bound.is_finite() {
                return Err(Error::config(
                    "reinsurance.bound",
                    "custom models with sigma1 > 0 need a finite retention bound",
                ));
            }
            let ara = problem.utility.ara(s.x);
            let concave = model.declares_concave_psi()
                || check_concavity(model, &problem.market, &problem.utility, s, 1001)?.concave;
            let u = if concave {
                maximise_concave(model, &mp, ara, s, bound)
            } else {
                grid_maximise(model, &mp, ara, s, bound).0
            };
            let a = investment_for(&mp, ara, model.vol_at(s.t, s.y, u));
            Ok(StrategyPoint {
                u_star: u,
                a_star: a,
                region: region_of(u, bound),
                fallback: !concave,
                residual: None,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::claims::ClaimDistribution;
    use crate::market::{psi, Custom, Proportional};

    fn table1() -> Problem {
        Problem::baseline()
    }

    fn prop(p: &Problem) -> Proportional {
        match p.reinsurance {
            ReinsuranceModel::Proportional(pp) => pp,
            _ => unreachable!(),
        }
    }

    fn at_x(x: f64) -> StatePoint {
        StatePoint::new(0.0, x, 0.0)
    }

    fn exp_xl(theta: f64) -> ExcessOfLoss {
        ExcessOfLoss::new(theta, 0.1, ClaimDistribution::exponential(1.0).unwrap()).unwrap()
    }

    #[test]
    fn baseline_interior_point() {
        let p = table1();
        let sp = optimal_proportional(&p.market, &p.utility, &prop(&p), &at_x(1.0)).unwrap();
        assert_eq!(sp.region, Region::Interior);
        assert!((sp.u_star - 0.113_137_084_989_847_6).abs() < 1e-12);
        assert!((sp.a_star - 0.169_705_627_484_771_4).abs() < 1e-12);
    }

    #[test]
    fn high_drift_buys_full_reinsurance() {
        let mut p = table1();
        p.market.mu = 0.2.into();
        let sp = optimal_proportional(&p.market, &p.utility, &prop(&p), &at_x(1.0)).unwrap();
        assert_eq!((sp.u_star, sp.region), (0.0, Region::A0));
    }

    #[test]
    fn expensive_reinsurance_is_declined() {
        let p = table1();
        let model = Proportional::constant(0.03, 0.2, 0.5).unwrap();
        let sp = optimal_proportional(&p.market, &p.utility, &model, &at_x(1.0)).unwrap();
        assert_eq!((sp.u_star, sp.region), (1.0, Region::AI));
        let th = proportional_thresholds(&p.market.at(0.0, 0.0), p.utility.ara(1.0), 0.5);
        assert!((th.no_reinsurance - 0.128_388_347_648_318_4).abs() < 1e-15);
    }

    #[test]
    fn zero_drift_means_no_investment() {
        let mut p = table1();
        p.market.mu = 0.0.into();
        for u in [0.0, 0.3, 1.0] {
            // a* = -σσ₁/(σ₁²+σ₂²) when μ = 0 only vanishes with σ(u) = 0
            let a = optimal_investment(&p.reinsurance, &p.market, &p.utility, &at_x(1.0), u).unwrap();
            assert!((a + 0.5 * u * 0.5 / 0.5).abs() < 1e-15);
        }
        let mut indep = p.clone();
        indep.market.sigma1 = 0.0.into();
        let a = optimal_investment(&indep.reinsurance, &indep.market, &indep.utility, &at_x(1.0), 0.4).unwrap();
        assert_eq!(a, 0.0);
    }

    #[test]
    fn investment_at_baseline_retention() {
        let p = table1();
        let a = optimal_investment(&p.reinsurance, &p.market, &p.utility, &at_x(1.0), 0.113_137_084_989_847_6)
            .unwrap();
        assert!((a - 0.169_705_627_484_771_4).abs() < 1e-12);
        let mut indep = table1();
        indep.market.sigma1 = 0.0.into();
        let a = optimal_investment(&indep.reinsurance, &indep.market, &indep.utility, &at_x(1.0), 0.5).unwrap();
        assert!((a - 0.452_548_339_959_390_4).abs() < 1e-12);
    }

    #[test]
    fn degenerate_sigma2_is_rejected() {
        let mut p = table1();
        p.market.sigma2 = 0.0.into();
        let err = optimal_proportional(&p.market, &p.utility, &prop(&p), &at_x(1.0)).unwrap_err();
        assert!(matches!(err, Error::Config { ref field, .. } if field == "market.sigma2"));
    }

    #[test]
    fn exponential_matches_sahara_at_same_ara() {
        let p = table1();
        let beta = p.utility.ara(1.0);
        let e = optimal_exponential(&p.market, beta, &prop(&p), &at_x(1.0)).unwrap();
        let s = optimal_proportional(&p.market, &p.utility, &prop(&p), &at_x(1.0)).unwrap();
        assert_eq!(e, s);
        let lo = optimal_exponential(&p.market, 0.3, &prop(&p), &at_x(-5.0)).unwrap();
        let hi = optimal_exponential(&p.market, 0.3, &prop(&p), &at_x(5.0)).unwrap();
        assert_eq!(lo, hi);
    }

    #[test]
    fn very_risk_averse_exponential_stays_interior() {
        let p = table1();
        let sp = optimal_exponential(&p.market, 1e3, &prop(&p), &at_x(0.0)).unwrap();
        assert_eq!(sp.region, Region::Interior);
        assert!((sp.u_star - 8e-5).abs() < 1e-15);
    }

    #[test]
    fn xl_root_at_baseline() {
        let p = table1();
        let sp = optimal_xl(&p.market, &p.utility, &exp_xl(0.2), &at_x(1.0)).unwrap();
        assert_eq!(sp.region, Region::Interior);
        // mpmath findroot: 0.314732908758697904804...
        assert!((sp.u_star - 0.314_732_908_758_697_9).abs() < 1e-12);
        assert!(sp.residual.unwrap() <= 1e-10);
        // a* = (μ − Aσ₁σ(u*)) / (A(σ₁²+σ₂²)), mpmath: −0.05750831116744565
        assert!((sp.a_star + 0.057_508_311_167_445_66).abs() < 1e-12);
    }

    #[test]
    fn xl_root_maximises_criterion() {
        let p = table1();
        let model = ReinsuranceModel::ExcessOfLoss(exp_xl(0.2));
        let s = at_x(1.0);
        let u = optimal_xl(&p.market, &p.utility, &exp_xl(0.2), &s).unwrap().u_star;
        let f = |v: f64| psi(&model, &p.market, &p.utility, &s, v).unwrap();
        for dv in [1e-3, 1e-2, 0.1] {
            assert!(f(u) > f(u + dv) && f(u) > f(u - dv));
        }
    }

    #[test]
    fn cheap_xl_below_threshold_is_full_reinsurance() {
        let p = table1();
        // threshold μσ₁/(σ₁²+σ₂²) = 0.08; θ = 0.1 is above it
        let sp = optimal_xl(&p.market, &p.utility, &exp_xl(0.1), &at_x(1.0)).unwrap();
        assert_eq!(sp.region, Region::Interior);
        assert!((sp.u_star - 0.052_576_855_519_703_57).abs() < 1e-12);
        let low = |theta| ExcessOfLoss::new(theta, 0.05, ClaimDistribution::exponential(1.0).unwrap()).unwrap();
        let sp = optimal_xl(&p.market, &p.utility, &low(0.06), &at_x(1.0)).unwrap();
        assert_eq!((sp.u_star, sp.region), (0.0, Region::A0));
        // the boundary itself belongs to A0
        let sp = optimal_xl(&p.market, &p.utility, &low(0.08), &at_x(1.0)).unwrap();
        assert_eq!(sp.region, Region::A0);
    }

    #[test]
    fn xl_with_independent_markets() {
        let mut p = table1();
        p.market.sigma1 = 0.0.into();
        let sp = optimal_xl(&p.market, &p.utility, &exp_xl(0.2), &at_x(1.0)).unwrap();
        assert!((sp.u_star - 0.2 * 2f64.sqrt()).abs() < 1e-13);
        let ind = optimal_independent(&p.market, &p.utility, &ReinsuranceModel::ExcessOfLoss(exp_xl(0.2)), &at_x(1.0))
            .unwrap();
        assert!((ind.u_star - 0.2 * 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn xl_with_heavy_tail() {
        let p = table1();
        let model = ExcessOfLoss::new(0.25, 0.1, ClaimDistribution::pareto(1.8, 0.5).unwrap()).unwrap();
        let sp = optimal_xl(&p.market, &p.utility, &model, &at_x(1.0)).unwrap();
        let mp = p.market.at(0.0, 0.0);
        assert!(xl_first_order(&model, &mp, p.utility.ara(1.0), sp.u_star).abs() <= 1e-10);
    }

    #[test]
    fn independent_proportional_corollary() {
        let mut p = table1();
        p.market.sigma1 = 0.0.into();
        let sp = optimal_independent(&p.market, &p.utility, &p.reinsurance, &at_x(1.0)).unwrap();
        assert!((sp.u_star - 0.282_842_712_474_619).abs() < 1e-13);
        assert!((sp.a_star - 0.452_548_339_959_390_4).abs() < 1e-12);
        // far from d the risk aversion is small and the cap binds
        let sp = optimal_independent(&p.market, &p.utility, &p.reinsurance, &at_x(100.0)).unwrap();
        assert_eq!((sp.u_star, sp.region), (1.0, Region::AI));
    }

    #[test]
    fn independent_constant_drift_buys_full_cover() {
        let mut p = table1();
        p.market.sigma1 = 0.0.into();
        let model = ReinsuranceModel::Custom(
            Custom::from_fns(|_, _, _| 0.01, |_, _, u| 0.3 * u + u * u, 1.0)
                .unwrap()
                .with_shape(true, true),
        );
        let sp = optimal_independent(&p.market, &p.utility, &model, &at_x(1.0)).unwrap();
        assert_eq!((sp.u_star, sp.region), (0.0, Region::A0));
    }

    #[test]
    fn independent_requires_uncorrelated_markets() {
        let p = table1();
        assert!(optimal_independent(&p.market, &p.utility, &p.reinsurance, &at_x(1.0)).is_err());
    }

    #[test]
    fn non_concave_custom_falls_back_to_grid() {
        let mut p = table1();
        p.market.sigma1 = 0.0.into();
        // bimodal: m has a bump near u = 0.2, tail gain at u = 1
        let model = ReinsuranceModel::Custom(
            Custom::from_fns(
                |_, _, u| 0.02 * (-(u - 0.2).powi(2) / 0.002).exp() + 0.3 * u.powi(6),
                |_, _, u| 0.2 * u,
                1.0,
            )
            .unwrap(),
        );
        let sp = optimal_independent(&p.market, &p.utility, &model, &at_x(1.0)).unwrap();
        assert!(sp.fallback);
        let mp = p.market.at(0.0, 0.0);
        let ara = p.utility.ara(1.0);
        let s = at_x(1.0);
        let best = psi_unchecked(&model, &mp, ara, &s, sp.u_star);
        for i in 0..=1000 {
            let u = i as f64 / 1000.0;
            assert!(psi_unchecked(&model, &mp, ara, &s, u) <= best + 1e-12);
        }
    }

    #[test]
    fn custom_general_solver_matches_proportional() {
        let p = table1();
        let model = ReinsuranceModel::Custom(
            Custom::from_fns(|_, _, u| -0.02 + 0.05 * u, |_, _, u| 0.5 * u, 1.0)
                .unwrap()
                .with_shape(true, true),
        );
        let q = Problem {
            reinsurance: model,
            ..p.clone()
        };
        let sp = optimal_strategy(&q, &at_x(1.0)).unwrap();
        assert!((sp.u_star - 0.113_137_084_989_847_6).abs() < 1e-9);
        assert!((sp.a_star - 0.169_705_627_484_771_4).abs() < 1e-9);
        assert!(!sp.fallback);
    }

    #[test]
    fn strategy_point_json() {
        let sp = StrategyPoint::closed(0.5, 0.25, Region::Interior);
        let j = serde_json::to_string(&sp).unwrap();
        assert_eq!(j, r#"{"u_star":0.5,"a_star":0.25,"region":"Interior"}"#);
    }
}
