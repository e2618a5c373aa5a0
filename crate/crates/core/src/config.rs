//! Run configuration: a flat JSON document whose defaults are the baseline
//! parameter set (μ = 0.08, σ₁ = σ₂ = σ₀ = 0.5, q = 0.05, x = 1, a = b = 1, d = 0).

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::claims::ClaimDistribution;
use crate::error::{Error, Result};
use crate::market::{
    Coefficient, EnvParams, ExcessOfLoss, MarketParams, Problem, Proportional, ReinsuranceModel,
    StatePoint,
};
use crate::simulate::{FeedbackStrategy, SimConfig};
use crate::utility::UtilityModel;

/// A coefficient given either as a number or as a full [`Coefficient`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefficientValue {
    Number(f64),
    Coefficient(Coefficient),
}

impl From<f64> for CoefficientValue {
    fn from(v: f64) -> Self {
        CoefficientValue::Number(v)
    }
}

impl From<CoefficientValue> for Coefficient {
    fn from(v: CoefficientValue) -> Self {
        match v {
            CoefficientValue::Number(x) => Coefficient::constant(x),
            CoefficientValue::Coefficient(c) => c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UtilityKind {
    Sahara,
    Exponential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UtilityConfig {
    pub kind: UtilityKind,
    pub a: f64,
    pub b: f64,
    pub d: f64,
    pub beta: f64,
}

impl Default for UtilityConfig {
    fn default() -> Self {
        Self {
            kind: UtilityKind::Sahara,
            a: 1.0,
            b: 1.0,
            d: 0.0,
            beta: std::f64::consts::FRAC_1_SQRT_2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarketConfig {
    pub mu: CoefficientValue,
    pub sigma1: CoefficientValue,
    pub sigma2: CoefficientValue,
}

impl Default for MarketConfig {
    fn default() -> Self {
        Self {
            mu: 0.08.into(),
            sigma1: 0.5.into(),
            sigma2: 0.5.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvironmentConfig {
    pub mu_y: CoefficientValue,
    pub sigma_y: CoefficientValue,
    pub y0: f64,
}

impl Default for EnvironmentConfig {
    fn default() -> Self {
        Self {
            mu_y: 0.0.into(),
            sigma_y: 0.0.into(),
            y0: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReinsuranceKind {
    Proportional,
    ExcessOfLoss,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReinsuranceConfig {
    pub kind: ReinsuranceKind,
    pub p: CoefficientValue,
    pub q: CoefficientValue,
    pub sigma0: CoefficientValue,
    pub theta: f64,
    pub eta: f64,
}

impl Default for ReinsuranceConfig {
    fn default() -> Self {
        Self {
            kind: ReinsuranceKind::Proportional,
            p: 0.03.into(),
            q: 0.05.into(),
            sigma0: 0.5.into(),
            theta: 0.2,
            eta: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimsKind {
    Exponential,
    Pareto,
    Tabulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClaimsConfig {
    pub kind: ClaimsKind,
    pub lambda: f64,
    pub alpha: f64,
    pub xm: f64,
    /// `(z, F̄(z))` knots for the tabulated tail.
    pub points: Vec<(f64, f64)>,
}

impl Default for ClaimsConfig {
    fn default() -> Self {
        Self {
            kind: ClaimsKind::Exponential,
            lambda: 1.0,
            alpha: 3.0,
            xm: 1.0,
            points: Vec::new(),
        }
    }
}

impl ClaimsConfig {
    pub fn distribution(&self) -> Result<ClaimDistribution> {
        match self.kind {
            ClaimsKind::Exponential => ClaimDistribution::exponential(self.lambda),
            ClaimsKind::Pareto => ClaimDistribution::pareto(self.alpha, self.xm),
            ClaimsKind::Tabulated => ClaimDistribution::tabulated(&self.points),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StateConfig {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

impl Default for StateConfig {
    fn default() -> Self {
        Self { t: 0.0, x: 1.0, y: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    pub horizon: f64,
    pub dt: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub workers: Option<usize>,
    pub store_paths: bool,
    pub strategy: FeedbackStrategy,
    /// When non-empty, `strategy` is compared against these on common paths.
    pub compare: Vec<FeedbackStrategy>,
}

impl Default for SimSection {
    fn default() -> Self {
        let d = SimConfig::default();
        Self {
            horizon: d.horizon,
            dt: d.dt,
            n_paths: d.n_paths,
            seed: d.seed,
            workers: d.workers,
            store_paths: d.store_paths,
            strategy: FeedbackStrategy::Optimal,
            compare: Vec::new(),
        }
    }
}

/// Parameters a sweep may vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParameter {
    Sigma1,
    Sigma2,
    Sigma0,
    Q,
    Theta,
    X,
    A,
    B,
    D,
    Mu,
    Beta,
}

impl SweepParameter {
    pub const ALL: [SweepParameter; 11] = [
        SweepParameter::Sigma1,
        SweepParameter::Sigma2,
        SweepParameter::Sigma0,
        SweepParameter::Q,
        SweepParameter::Theta,
        SweepParameter::X,
        SweepParameter::A,
        SweepParameter::B,
        SweepParameter::D,
        SweepParameter::Mu,
        SweepParameter::Beta,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SweepParameter::Sigma1 => "sigma1",
            SweepParameter::Sigma2 => "sigma2",
            SweepParameter::Sigma0 => "sigma0",
            SweepParameter::Q => "q",
            SweepParameter::Theta => "theta",
            SweepParameter::X => "x",
            SweepParameter::A => "a",
            SweepParameter::B => "b",
            SweepParameter::D => "d",
            SweepParameter::Mu => "mu",
            SweepParameter::Beta => "beta",
        }
    }

    /// Sets this parameter (as a constant) in `cfg`.
    pub fn apply(&self, cfg: &mut RunConfig, v: f64) {
        match self {
            SweepParameter::Sigma1 => cfg.market.sigma1 = v.into(),
            SweepParameter::Sigma2 => cfg.market.sigma2 = v.into(),
            SweepParameter::Mu => cfg.market.mu = v.into(),
            SweepParameter::Sigma0 => cfg.reinsurance.sigma0 = v.into(),
            SweepParameter::Q => cfg.reinsurance.q = v.into(),
            SweepParameter::Theta => cfg.reinsurance.theta = v,
            SweepParameter::X => cfg.state.x = v,
            SweepParameter::A => cfg.utility.a = v,
            SweepParameter::B => cfg.utility.b = v,
            SweepParameter::D => cfg.utility.d = v,
            SweepParameter::Beta => cfg.utility.beta = v,
        }
    }
}

impl std::fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: SweepParameter,
    pub from: f64,
    pub to: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_points() -> usize {
    101
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.from.is_finite() && self.to.is_finite()) {
            return Err(Error::config("sweep.from", "sweep bounds must be finite"));
        }
        if self.points < 2 {
            return Err(Error::config("sweep.points", "must be >= 2"));
        }
        Ok(())
    }

    /// Equispaced values from `from` to `to`, both included exactly.
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| {
                if i == n - 1 {
                    self.to
                } else {
                    self.from + (self.to - self.from) * i as f64 / (n - 1) as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub csv: Option<String>,
    pub svg: Option<String>,
    /// Per-step path dump for `simulate` (requires `sim.store_paths`).
    pub paths_csv: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub utility: UtilityConfig,
    pub market: MarketConfig,
    pub environment: EnvironmentConfig,
    pub reinsurance: ReinsuranceConfig,
    pub claims: ClaimsConfig,
    pub state: StateConfig,
    pub sim: SimSection,
    pub sweep: Option<SweepConfig>,
    pub output: OutputConfig,
}

fn parse_error(err: serde_path_to_error::Error<serde_json::Error>) -> Error {
    let path = err.path().to_string();
    let field = if path == "." { "config".to_string() } else { path };
    Error::config(field, err.into_inner().to_string())
}

/// Parses `text` as a JSON scalar/array/object; anything else is a string.
fn parse_override_value(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|_| Value::String(text.to_string()))
}

/// Applies a dotted-path override such as `market.sigma1=0.3`, creating
/// intermediate objects as needed.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::config(assignment, "override must have the form key=value"))?;
    let path = path.trim();
    if path.is_empty() || path.split('.').any(str::is_empty) {
        return Err(Error::config(path, "empty key in override"));
    }
    let mut node = doc;
    let mut parts = path.split('.').peekable();
    while let Some(key) = parts.next() {
        if !node.is_object() {
            if node.is_null() {
                *node = Value::Object(Default::default());
            } else {
                return Err(Error::config(path, format!("`{key}` is inside a non-object value")));
            }
        }
        let map = node.as_object_mut().expect("object");
        if parts.peek().is_none() {
            map.insert(key.to_string(), parse_override_value(raw.trim()));
            return Ok(());
        }
        node = map.entry(key.to_string()).or_insert(Value::Null);
    }
    Ok(())
}

impl RunConfig {
    pub fn from_value(doc: Value) -> Result<Self> {
        let cfg: RunConfig = serde_path_to_error::deserialize(doc).map_err(parse_error)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses a JSON document (empty text means all defaults) and applies
    /// `key=value` overrides in order.
    pub fn from_json_str(text: &str, overrides: &[String]) -> Result<Self> {
        let mut doc = if text.trim().is_empty() {
            Value::Object(Default::default())
        } else {
            let de = &mut serde_json::Deserializer::from_str(text);
            serde_path_to_error::deserialize::<_, Value>(de).map_err(parse_error)?
        };
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        Self::from_value(doc)
    }

    pub fn validate(&self) -> Result<()> {
        self.problem()?;
        self.sim_config().validate()?;
        if let Some(s) = &self.sweep {
            s.validate()?;
        }
        for (name, v) in [("state.t", self.state.t), ("state.x", self.state.x), ("state.y", self.state.y)] {
            if !v.is_finite() {
                return Err(Error::config(name, "must be finite"));
            }
        }
        Ok(())
    }

    pub fn utility(&self) -> Result<UtilityModel> {
        let u = &self.utility;
        match u.kind {
            UtilityKind::Sahara => UtilityModel::sahara(u.a, u.b, u.d),
            UtilityKind::Exponential => UtilityModel::exponential(u.beta),
        }
    }

    pub fn problem(&self) -> Result<Problem> {
        let market = MarketParams {
            mu: self.market.mu.into(),
            sigma1: self.market.sigma1.into(),
            sigma2: self.market.sigma2.into(),
        };
        let env = EnvParams {
            mu_y: self.environment.mu_y.into(),
            sigma_y: self.environment.sigma_y.into(),
            y0: self.environment.y0,
        };
        let r = &self.reinsurance;
        let reinsurance = match r.kind {
            ReinsuranceKind::Proportional => ReinsuranceModel::Proportional(Proportional {
                p: r.p.into(),
                q: r.q.into(),
                sigma0: r.sigma0.into(),
            }),
            ReinsuranceKind::ExcessOfLoss => ReinsuranceModel::ExcessOfLoss(ExcessOfLoss::new(
                r.theta,
                r.eta,
                self.claims.distribution()?,
            )?),
        };
        let problem = Problem {
            utility: self.utility()?,
            market,
            env,
            reinsurance,
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn state(&self) -> StatePoint {
        StatePoint::new(self.state.t, self.state.x, self.state.y)
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            horizon: self.sim.horizon,
            dt: self.sim.dt,
            n_paths: self.sim.n_paths,
            seed: self.sim.seed,
            store_paths: self.sim.store_paths,
            workers: self.sim.workers,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::optimal_strategy;

    fn field_of(err: Error) -> String {
        match err {
            Error::Config { field, .. } => field,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn empty_config_is_baseline() {
        let cfg = RunConfig::from_json_str("", &[]).unwrap();
        let sp = optimal_strategy(&cfg.problem().unwrap(), &cfg.state()).unwrap();
        assert!((sp.u_star - 0.113_137_084_989_847_6).abs() < 1e-12);
        assert!((sp.a_star - 0.169_705_627_484_771_4).abs() < 1e-12);
        assert_eq!(RunConfig::from_json_str("{}", &[]).unwrap(), cfg);
    }

    #[test]
    fn overrides_apply_in_order() {
        let cfg = RunConfig::from_json_str(
            r#"{"market": {"sigma1": 0.2}}"#,
            &["market.sigma1=0".into(), "utility.kind=exponential".into(), "sweep.parameter=x".into(), "sweep.from=-5".into(), "sweep.to=5".into()],
        )
        .unwrap();
        assert_eq!(cfg.market.sigma1, CoefficientValue::Number(0.0));
        assert_eq!(cfg.utility.kind, UtilityKind::Exponential);
        let sweep = cfg.sweep.unwrap();
        assert_eq!((sweep.parameter, sweep.points), (SweepParameter::X, 101));
        assert_eq!(sweep.values()[100], 5.0);
    }

    #[test]
    fn coefficient_objects_are_accepted() {
        let cfg = RunConfig::from_json_str(
            r#"{"market": {"mu": {"kind": "affine", "intercept": 0.08, "slope": 0.01, "min": 0.0, "max": 0.2}}}"#,
            &[],
        )
        .unwrap();
        let p = cfg.problem().unwrap();
        assert!(!p.market.is_constant());
        assert!((p.market.at(0.0, 2.0).mu - 0.1).abs() < 1e-15);
    }

    #[test]
    fn errors_name_the_field() {
        let e = RunConfig::from_json_str(r#"{"market": {"sigma3": 1}}"#, &[]).unwrap_err();
        assert_eq!(field_of(e), "market.sigma3");
        let e = RunConfig::from_json_str("", &["utility.a=-1".into()]).unwrap_err();
        assert_eq!(field_of(e), "utility.a");
        let e = RunConfig::from_json_str("", &["sweep.parameter=eta".into(), "sweep.from=0".into(), "sweep.to=1".into()])
            .unwrap_err();
        assert_eq!(field_of(e), "sweep.parameter");
        let e = RunConfig::from_json_str("", &["reinsurance.q=0.01".into()]).unwrap_err();
        assert!(field_of(e).starts_with("reinsurance"));
        let e = RunConfig::from_json_str("", &["sim.dt=0.3".into()]).unwrap_err();
        assert_eq!(field_of(e), "sim.dt");
        let e = RunConfig::from_json_str("{", &[]).unwrap_err();
        assert!(matches!(e, Error::Config { .. }));
        let e = RunConfig::from_json_str("", &["market.sigma1".into()]).unwrap_err();
        assert!(matches!(e, Error::Config { .. }));
    }

    #[test]
    fn sweep_parameters_round_trip() {
        for p in SweepParameter::ALL {
            let v: SweepParameter = serde_json::from_value(Value::String(p.name().into())).unwrap();
            assert_eq!(v, p);
        }
    }

    #[test]
    fn sweep_apply_changes_the_problem() {
        let mut cfg = RunConfig::default();
        SweepParameter::Sigma1.apply(&mut cfg, 0.0);
        let sp = optimal_strategy(&cfg.problem().unwrap(), &cfg.state()).unwrap();
        assert!((sp.u_star - 0.282_842_712_474_619).abs() < 1e-13);
    }

    #[test]
    fn xl_config() {
        let cfg = RunConfig::from_json_str(r#"{"reinsurance": {"kind": "excess_of_loss"}}"#, &[]).unwrap();
        let sp = optimal_strategy(&cfg.problem().unwrap(), &cfg.state()).unwrap();
        assert!((sp.u_star - 0.314_732_908_758_697_9).abs() < 1e-12);
        let e = RunConfig::from_json_str(r#"{"reinsurance": {"kind": "excess_of_loss"}, "claims": {"lambda": 0}}"#, &[])
            .unwrap_err();
        assert_eq!(field_of(e), "claims.lambda");
    }

    #[test]
    fn strategies_in_sim_section() {
        let cfg = RunConfig::from_json_str(
            r#"{"sim": {"compare": [{"kind": "constant", "u": 0, "a": 0}, {"kind": "fixed_retention", "u": 1}]}}"#,
            &[],
        )
        .unwrap();
        assert_eq!(cfg.sim.compare.len(), 2);
        assert_eq!(cfg.sim.strategy, FeedbackStrategy::Optimal);
    }
}
