//! Euler–Maruyama simulation of wealth and environment under feedback
//! strategies, and Monte Carlo estimates of expected terminal utility.
//!
//! Each path draws its three Brownian increments from its own ChaCha streams
//! keyed by `(seed, path, noise)`, so a path's noise does not depend on how
//! paths are scheduled across threads. Strategies compared in one run see the
//! same increments on every path (common random numbers). Reductions run in
//! path order with compensated summation, so results are bit-identical for
//! any worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{Problem, StatePoint};
use crate::strategy::{investment_for, optimal_strategy};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Horizon `T`.
    pub horizon: f64,
    pub dt: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub store_paths: bool,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            horizon: 1.0,
            dt: 1e-3,
            n_paths: 100_000,
            seed: 42,
            store_paths: false,
            workers: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::config("sim.horizon", "must be finite and > 0"));
        }
        if !(self.dt > 0.0 && self.dt <= self.horizon) {
            return Err(Error::config("sim.dt", "must satisfy 0 < dt <= horizon"));
        }
        let steps = (self.horizon / self.dt).round();
        if (steps * self.dt - self.horizon).abs() > 1e-9 * self.horizon {
            return Err(Error::config("sim.dt", "must divide the horizon"));
        }
        if self.n_paths == 0 {
            return Err(Error::config("sim.n_paths", "must be >= 1"));
        }
        if self.workers == Some(0) {
            return Err(Error::config("sim.workers", "must be >= 1"));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeedbackStrategy {
    /// `(u*, a*)` re-evaluated at every step.
    Optimal,
    Constant { u: f64, a: f64 },
    /// Fixed retention with the investment that is optimal for it.
    FixedRetention { u: f64 },
    /// Base rule shifted by `(du, da)`; retention clamped to `[0, I]`.
    Perturbed {
        base: Box<FeedbackStrategy>,
        du: f64,
        da: f64,
    },
}

impl FeedbackStrategy {
    pub fn perturbed(base: FeedbackStrategy, du: f64, da: f64) -> Self {
        FeedbackStrategy::Perturbed {
            base: Box::new(base),
            du,
            da,
        }
    }

    /// Controls `(u, a)` at `(t, x, y)`.
    pub fn controls(&self, problem: &Problem, t: f64, x: f64, y: f64) -> Result<(f64, f64)> {
        let bound = problem.reinsurance.retention_bound();
        let (u, a) = match self {
            FeedbackStrategy::Optimal => {
                let sp = optimal_strategy(problem, &StatePoint::new(t, x, y))?;
                (sp.u_star, sp.a_star)
            }
            FeedbackStrategy::Constant { u, a } => (*u, *a),
            FeedbackStrategy::FixedRetention { u } => {
                let u = u.clamp(0.0, bound);
                let mp = problem.market.at(t, y);
                let vol = problem.reinsurance.vol_at(t, y, u);
                (u, investment_for(&mp, problem.utility.ara(x), vol))
            }
            FeedbackStrategy::Perturbed { base, du, da } => {
                let (u, a) = base.controls(problem, t, x, y)?;
                (u + du, a + da)
            }
        };
        Ok((u.clamp(0.0, bound), a))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub path: usize,
    pub step: usize,
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub u: f64,
    pub a: f64,
}

/// Terminal wealth per path for one strategy.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimOutput {
    pub terminal: Vec<f64>,
    /// `∫₀ᵀ a_t² dt` per path.
    pub int_a_squared: Vec<f64>,
    /// Full trajectories when `store_paths` is set, path-major.
    pub paths: Option<Vec<PathRecord>>,
}

impl SimOutput {
    pub fn mean_int_a_squared(&self) -> f64 {
        neumaier_sum(self.int_a_squared.iter().copied()) / self.int_a_squared.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub seed: u64,
}

/// `mean(U_baseline − U_other)` over common paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedDifference {
    pub baseline: usize,
    pub other: usize,
    pub mean: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub estimates: Vec<McEstimate>,
    /// First strategy against each strategy, in input order.
    pub differences: Vec<PairedDifference>,
    /// Strategy indices by decreasing mean utility.
    pub ranking: Vec<usize>,
}

/// Per-path noise: independent streams for `W¹`, `W²`, `W^Y`.
struct PathNoise {
    streams: [ChaCha8Rng; 3],
}

impl PathNoise {
    fn new(seed: u64, path: usize) -> Self {
        let make = |k: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(3 * path as u64 + k);
            rng
        };
        Self {
            streams: [make(0), make(1), make(2)],
        }
    }

    fn draw(&mut self) -> [f64; 3] {
        let [w1, w2, wy] = &mut self.streams;
        [
            StandardNormal.sample(w1),
            StandardNormal.sample(w2),
            StandardNormal.sample(wy),
        ]
    }
}

struct PathResult {
    terminal: Vec<f64>,
    int_a_sq: Vec<f64>,
    records: Vec<Vec<PathRecord>>,
}

fn simulate_one_path(
    problem: &Problem,
    strategies: &[FeedbackStrategy],
    cfg: &SimConfig,
    x0: f64,
    path: usize,
) -> Result<PathResult> {
    let n_steps = cfg.n_steps();
    let dt = cfg.dt;
    let sqrt_dt = dt.sqrt();
    let mut noise = PathNoise::new(cfg.seed, path);
    let k = strategies.len();
    let mut xs = vec![x0; k];
    let mut int_a_sq = vec![0.0; k];
    let mut records: Vec<Vec<PathRecord>> = if cfg.store_paths {
        vec![Vec::with_capacity(n_steps + 1); k]
    } else {
        Vec::new()
    };
    let mut y = problem.env.y0;
    let reins = &problem.reinsurance;
    for step in 0..n_steps {
        let t = step as f64 * dt;
        let [z1, z2, zy] = noise.draw();
        let (dw1, dw2, dwy) = (z1 * sqrt_dt, z2 * sqrt_dt, zy * sqrt_dt);
        let mp = problem.market.at(t, y);
        for (j, strategy) in strategies.iter().enumerate() {
            let x = xs[j];
            let (u, a) = strategy.controls(problem, t, x, y)?;
            if cfg.store_paths {
                records[j].push(PathRecord { path, step, t, x, y, u, a });
            }
            let drift = reins.drift_at(t, y, u) + a * mp.mu;
            let vol1 = reins.vol_at(t, y, u) + a * mp.sigma1;
            let next = x + drift * dt + vol1 * dw1 + a * mp.sigma2 * dw2;
            if !next.is_finite() {
                return Err(Error::NonFinite { path, step, t, x: next, y });
            }
            xs[j] = next;
            int_a_sq[j] += a * a * dt;
        }
        y += problem.env.mu_y.eval(t, y) * dt + problem.env.sigma_y.eval(t, y) * dwy;
        if !y.is_finite() {
            return Err(Error::NonFinite { path, step, t, x: xs[0], y });
        }
    }
    if cfg.store_paths {
        let t = n_steps as f64 * dt;
        for (j, strategy) in strategies.iter().enumerate() {
            let (u, a) = strategy.controls(problem, t, xs[j], y)?;
            records[j].push(PathRecord {
                path,
                step: n_steps,
                t,
                x: xs[j],
                y,
                u,
                a,
            });
        }
    }
    Ok(PathResult {
        terminal: xs,
        int_a_sq,
        records,
    })
}

fn run_in_pool<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::config("sim.workers", e.to_string()))?;
            Ok(pool.install(job))
        }
    }
}

/// Simulates several strategies on common paths from `X₀ = x0`, `Y₀ = y0`.
pub fn simulate_many(
    problem: &Problem,
    strategies: &[FeedbackStrategy],
    cfg: &SimConfig,
    x0: f64,
) -> Result<Vec<SimOutput>> {
    cfg.validate()?;
    if !x0.is_finite() {
        return Err(Error::config("state.x", "must be finite"));
    }
    let results: Vec<Result<PathResult>> = run_in_pool(cfg.workers, || {
        (0..cfg.n_paths)
            .into_par_iter()
            .map(|path| simulate_one_path(problem, strategies, cfg, x0, path))
            .collect()
    })?;
    let mut outputs: Vec<SimOutput> = strategies
        .iter()
        .map(|_| SimOutput {
            terminal: Vec::with_capacity(cfg.n_paths),
            int_a_squared: Vec::with_capacity(cfg.n_paths),
            paths: cfg.store_paths.then(Vec::new),
        })
        .collect();
    for r in results {
        let r = r?;
        for (j, out) in outputs.iter_mut().enumerate() {
            out.terminal.push(r.terminal[j]);
            out.int_a_squared.push(r.int_a_sq[j]);
            if let Some(paths) = out.paths.as_mut() {
                paths.extend_from_slice(&r.records[j]);
            }
        }
    }
    Ok(outputs)
}

pub fn simulate_paths(
    problem: &Problem,
    strategy: &FeedbackStrategy,
    cfg: &SimConfig,
    x0: f64,
) -> Result<SimOutput> {
    Ok(simulate_many(problem, std::slice::from_ref(strategy), cfg, x0)?
        .pop()
        .expect("one strategy"))
}

/// Neumaier-compensated sum in iteration order.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Sample mean and standard error. Values are shifted by the first sample
/// before summing, so a constant sample has an exactly zero standard error.
pub fn mean_and_std_error(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let shift = values[0];
    let mean_shifted = neumaier_sum(values.iter().map(|v| v - shift)) / n as f64;
    let mean = shift + mean_shifted;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss = neumaier_sum(values.iter().map(|v| {
        let d = v - shift - mean_shifted;
        d * d
    }));
    (mean, (ss / (n - 1) as f64 / n as f64).sqrt())
}

fn utilities(problem: &Problem, out: &SimOutput, workers: Option<usize>) -> Result<Vec<f64>> {
    run_in_pool(workers, || {
        out.terminal
            .par_iter()
            .map(|&x| problem.utility.utility_value(x))
            .collect()
    })
}

fn estimate_from(values: &[f64], cfg: &SimConfig) -> McEstimate {
    let (mean, std_error) = mean_and_std_error(values);
    McEstimate {
        mean,
        std_error,
        n_paths: values.len(),
        seed: cfg.seed,
    }
}

/// Monte Carlo estimate of `E[U(X_T)]` from simulated terminal wealth.
pub fn estimate_from_output(problem: &Problem, out: &SimOutput, cfg: &SimConfig) -> Result<McEstimate> {
    Ok(estimate_from(&utilities(problem, out, cfg.workers)?, cfg))
}

pub fn estimate_expected_utility(
    problem: &Problem,
    strategy: &FeedbackStrategy,
    cfg: &SimConfig,
    x0: f64,
) -> Result<McEstimate> {
    estimate_from_output(problem, &simulate_paths(problem, strategy, cfg, x0)?, cfg)
}

/// Estimates for outputs simulated on common paths, with the paired
/// difference `U_first − U_other` for each.
pub fn compare_outputs(problem: &Problem, outputs: &[SimOutput], cfg: &SimConfig) -> Result<Comparison> {
    if outputs.len() < 2 {
        return Err(Error::config("strategies", "need at least two strategies to compare"));
    }
    let utils: Vec<Vec<f64>> = outputs
        .iter()
        .map(|o| utilities(problem, o, cfg.workers))
        .collect::<Result<_>>()?;
    let estimates: Vec<McEstimate> = utils.iter().map(|u| estimate_from(u, cfg)).collect();
    let differences = (0..outputs.len())
        .map(|j| {
            let diff: Vec<f64> = utils[0].iter().zip(&utils[j]).map(|(a, b)| a - b).collect();
            let (mean, std_error) = mean_and_std_error(&diff);
            PairedDifference {
                baseline: 0,
                other: j,
                mean,
                std_error,
            }
        })
        .collect();
    let mut ranking: Vec<usize> = (0..outputs.len()).collect();
    ranking.sort_by(|&a, &b| estimates[b].mean.total_cmp(&estimates[a].mean));
    Ok(Comparison {
        estimates,
        differences,
        ranking,
    })
}

/// Runs all strategies on common random numbers and compares them against
/// the first.
pub fn compare_strategies(
    problem: &Problem,
    strategies: &[FeedbackStrategy],
    cfg: &SimConfig,
    x0: f64,
) -> Result<Comparison> {
    if strategies.len() < 2 {
        return Err(Error::config("strategies", "need at least two strategies to compare"));
    }
    compare_outputs(problem, &simulate_many(problem, strategies, cfg, x0)?, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{Custom, MarketParams, ReinsuranceModel};

    fn small_cfg(n_paths: usize) -> SimConfig {
        SimConfig {
            horizon: 1.0,
            dt: 0.01,
            n_paths,
            seed: 7,
            store_paths: false,
            workers: None,
        }
    }

    #[test]
    fn config_validation() {
        let mut c = small_cfg(10);
        c.dt = 0.3;
        assert!(c.validate().is_err());
        c.dt = 2.0;
        assert!(c.validate().is_err());
        c.dt = 0.25;
        assert!(c.validate().is_ok());
        c.n_paths = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn deterministic_ode_without_noise() {
        let mut p = Problem::baseline();
        p.market = MarketParams::constant(0.08, 0.0, 0.0);
        p.reinsurance = ReinsuranceModel::Custom(
            Custom::from_fns(|_, _, u| -0.02 + 0.05 * u, |_, _, _| 0.0, 1.0).unwrap(),
        );
        let strat = FeedbackStrategy::Constant { u: 0.4, a: 0.3 };
        let out = simulate_paths(&p, &strat, &small_cfg(5), 1.0).unwrap();
        let expected = 1.0 + (-0.02 + 0.05 * 0.4 + 0.3 * 0.08) * 1.0;
        for x in &out.terminal {
            assert!((x - expected).abs() < 1e-14);
        }
        let est = estimate_expected_utility(&p, &strat, &small_cfg(5), 1.0).unwrap();
        assert_eq!(est.std_error, 0.0);
        assert!((est.mean - p.utility.utility_value(out.terminal[0])).abs() < 1e-15);
    }

    #[test]
    fn full_reinsurance_without_investment_is_riskless() {
        let p = Problem::baseline();
        let strat = FeedbackStrategy::Constant { u: 0.0, a: 0.0 };
        let out = simulate_paths(&p, &strat, &small_cfg(20), 1.0).unwrap();
        for x in &out.terminal {
            assert!((x - 0.98).abs() < 1e-14);
        }
    }

    #[test]
    fn paired_self_comparison_is_exactly_zero() {
        let p = Problem::baseline();
        let s = FeedbackStrategy::Optimal;
        let c = compare_strategies(&p, &[s.clone(), s], &small_cfg(200), 1.0).unwrap();
        assert_eq!(c.differences[1].mean, 0.0);
        assert_eq!(c.differences[1].std_error, 0.0);
        assert_eq!(c.estimates[0], c.estimates[1]);
    }

    #[test]
    fn bit_identical_across_worker_counts() {
        let p = Problem::baseline();
        let mut cfg = small_cfg(300);
        cfg.workers = Some(1);
        let a = estimate_expected_utility(&p, &FeedbackStrategy::Optimal, &cfg, 1.0).unwrap();
        cfg.workers = Some(4);
        let b = estimate_expected_utility(&p, &FeedbackStrategy::Optimal, &cfg, 1.0).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }

    #[test]
    fn std_error_shrinks_like_root_n() {
        let p = Problem::baseline();
        let s = FeedbackStrategy::Optimal;
        let e1 = estimate_expected_utility(&p, &s, &small_cfg(4000), 1.0).unwrap();
        let e2 = estimate_expected_utility(&p, &s, &small_cfg(8000), 1.0).unwrap();
        let ratio = e2.std_error / e1.std_error;
        assert!((ratio - std::f64::consts::FRAC_1_SQRT_2).abs() <= 0.2 * std::f64::consts::FRAC_1_SQRT_2);
    }

    #[test]
    fn exponential_optimal_controls_are_constant_along_paths() {
        let mut p = Problem::baseline();
        p.utility = crate::utility::UtilityModel::exponential(0.8).unwrap();
        let mut cfg = small_cfg(20);
        cfg.store_paths = true;
        let out = simulate_paths(&p, &FeedbackStrategy::Optimal, &cfg, 1.0).unwrap();
        let reference = optimal_strategy(&p, &StatePoint::new(0.0, 0.0, 0.0)).unwrap();
        let dev = out
            .paths
            .unwrap()
            .iter()
            .map(|r| (r.u - reference.u_star).abs().max((r.a - reference.a_star).abs()))
            .fold(0.0, f64::max);
        assert_eq!(dev, 0.0);
    }

    #[test]
    fn stored_paths_have_one_row_per_step() {
        let p = Problem::baseline();
        let mut cfg = small_cfg(3);
        cfg.store_paths = true;
        let out = simulate_paths(&p, &FeedbackStrategy::Optimal, &cfg, 1.0).unwrap();
        let rows = out.paths.unwrap();
        assert_eq!(rows.len(), 3 * 101);
        assert_eq!(rows[0].step, 0);
        assert_eq!(rows[100].step, 100);
        assert_eq!(rows[100].x, out.terminal[0]);
        assert_eq!(rows[101].path, 1);
    }

    #[test]
    fn blow_up_is_reported() {
        let mut p = Problem::baseline();
        p.reinsurance = ReinsuranceModel::Custom(
            Custom::from_fns(|_, _, u| 1e308 * u, |_, _, _| 0.0, 1.0).unwrap(),
        );
        let strat = FeedbackStrategy::Constant { u: 0.5, a: 0.0 };
        let mut cfg = small_cfg(2);
        cfg.dt = 1.0;
        let err = simulate_paths(&p, &strat, &cfg, 0.9 * f64::MAX).unwrap_err();
        assert!(matches!(err, Error::NonFinite { path: 0, step: 0, .. }));
    }

    #[test]
    fn perturbation_clamps_retention() {
        let p = Problem::baseline();
        let s = FeedbackStrategy::perturbed(FeedbackStrategy::Constant { u: 0.9, a: 0.1 }, 0.5, -0.2);
        let (u, a) = s.controls(&p, 0.0, 1.0, 0.0).unwrap();
        assert_eq!(u, 1.0);
        assert!((a + 0.1).abs() < 1e-16);
    }

    #[test]
    fn compensated_statistics() {
        assert_eq!(neumaier_sum([1e16, 1.0, -1e16]), 1.0);
        let (m, se) = mean_and_std_error(&[2.0, 4.0, 6.0, 8.0]);
        assert_eq!(m, 5.0);
        assert!((se - (20.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_and_std_error(&[0.3; 17]), (0.3, 0.0));
    }

    #[test]
    fn strategy_json_shapes() {
        let s: FeedbackStrategy = serde_json::from_str(r#"{"kind":"constant","u":0,"a":0}"#).unwrap();
        assert_eq!(s, FeedbackStrategy::Constant { u: 0.0, a: 0.0 });
        let s: FeedbackStrategy =
            serde_json::from_str(r#"{"kind":"perturbed","base":{"kind":"optimal"},"du":0.2,"da":0}"#).unwrap();
        assert_eq!(s, FeedbackStrategy::perturbed(FeedbackStrategy::Optimal, 0.2, 0.0));
        let e = McEstimate {
            mean: 0.5,
            std_error: 0.01,
            n_paths: 10,
            seed: 3,
        };
        assert_eq!(
            serde_json::to_string(&e).unwrap(),
            r#"{"mean":0.5,"std_error":0.01,"n_paths":10,"seed":3}"#
        );
    }
}
