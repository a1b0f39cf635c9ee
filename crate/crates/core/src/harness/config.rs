//! JSON experiment configuration.
//!
//! ```json
//! {
//!   "schema_version": "1",
//!   "sim": { "N": [40, 80, 160], "dt": 0.1, "horizon": "lemma-window" },
//!   "controller": { "name": "pd-asymmetric", "params": { "a": 1, "b1": 2, "b2": 0.5 } },
//!   "disturbance": { "kind": "ramp-windowed", "alpha": "budget", "T": "lemma-window" },
//!   "criterion": { "definition": 4, "C1": 1.0 },
//!   "outputs": { "trajectory_csv": "traj.csv", "report_json": "report.json" }
//! }
//! ```
//!
//! Unknown fields anywhere are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::lemma_window_steps;
use crate::chain::SimulationConfig;
use crate::controllers::{
    nonlinear_comm_controller, pd_asymmetric, pd_symmetric, zero_controller, ControllerDefinition,
};
use crate::criterion::StabilityCriterion;
use crate::disturbances::{admissible_alpha_steps, grid_steps, AmplitudeBudget, DisturbanceKind, DisturbanceProfile};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: String,
    pub sim: SimSpec,
    pub controller: ControllerSpec,
    pub disturbance: DisturbanceSpec,
    #[serde(default)]
    pub criterion: CriterionSpec,
    #[serde(default)]
    pub outputs: OutputSpec,
    #[serde(default)]
    pub sweep: SweepSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSpec {
    #[serde(rename = "N")]
    pub chain_size: ChainSizes,
    pub dt: f64,
    pub horizon: HorizonRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChainSizes {
    One(usize),
    Many(Vec<usize>),
}

impl ChainSizes {
    pub fn as_slice(&self) -> &[usize] {
        match self {
            Self::One(n) => std::slice::from_ref(n),
            Self::Many(v) => v,
        }
    }
}

/// Number of steps to simulate. `lemma-window` and `fig2` use the same step
/// counts as the matching ramp-duration rules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HorizonRule {
    LemmaWindow,
    Fig2,
    Steps(usize),
    Time(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", content = "params", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ControllerSpec {
    Zero,
    PdAsymmetric(PdAsymmetricParams),
    PdSymmetric(PdSymmetricParams),
    NonlinearComm(NonlinearCommParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdAsymmetricParams {
    pub a: f64,
    pub b1: f64,
    pub b2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdSymmetricParams {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearCommParams {
    pub kappa: f64,
    pub sat_limit: f64,
}

impl ControllerSpec {
    pub fn build(&self, dt: f64) -> ControllerDefinition<f64> {
        match *self {
            Self::Zero => zero_controller(),
            Self::PdAsymmetric(PdAsymmetricParams { a, b1, b2 }) => pd_asymmetric(a, b1, b2, dt),
            Self::PdSymmetric(PdSymmetricParams { a, b }) => pd_symmetric(a, b, dt),
            Self::NonlinearComm(NonlinearCommParams { kappa, sat_limit }) => {
                nonlinear_comm_controller(kappa, sat_limit, dt)
            }
        }
    }

    /// `(m1, m2)` of the built controller.
    pub fn radii(&self) -> (usize, usize) {
        (1, 1)
    }

    fn validate(&self) -> Result<()> {
        let finite = |field: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(format!("controller.params.{field}"), "must be finite"))
            }
        };
        match *self {
            Self::Zero => Ok(()),
            Self::PdAsymmetric(PdAsymmetricParams { a, b1, b2 }) => {
                finite("a", a)?;
                finite("b1", b1)?;
                finite("b2", b2)
            }
            Self::PdSymmetric(PdSymmetricParams { a, b }) => {
                finite("a", a)?;
                finite("b", b)
            }
            Self::NonlinearComm(NonlinearCommParams { kappa, sat_limit }) => {
                if !(kappa > 0.0 && kappa.is_finite()) {
                    return Err(Error::config("controller.params.kappa", "must be positive"));
                }
                if !(sat_limit > 0.0 && sat_limit.is_finite()) {
                    return Err(Error::config("controller.params.sat_limit", "must be positive"));
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceSpec {
    pub kind: DisturbanceKind,
    #[serde(default = "Amplitude::unit")]
    pub alpha: Amplitude,
    #[serde(rename = "T", default = "WindowRule::lemma")]
    pub window: WindowRule,
}

/// Fixed amplitude, or `"budget"` to saturate the criterion's `C1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Amplitude {
    Value(f64),
    Budget(BudgetMarker),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BudgetMarker {
    Budget,
}

impl Amplitude {
    fn unit() -> Self {
        Self::Value(1.0)
    }

    pub fn is_budget(&self) -> bool {
        matches!(self, Self::Budget(_))
    }
}

/// Ramp end `T`: `lemma-window` is `N dt / (2 (m1 + m2))`, `fig2` is
/// `N dt / 5`, both floored to the grid; `{"value": t}` is explicit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowRule {
    LemmaWindow,
    Fig2,
    Value(f64),
}

impl WindowRule {
    fn lemma() -> Self {
        Self::LemmaWindow
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriterionSpec {
    pub definition: u8,
    #[serde(default = "default_exponent")]
    pub p: u32,
    #[serde(default = "default_exponent")]
    pub q: u32,
    #[serde(rename = "C1", default = "default_budget")]
    pub c1: f64,
}

fn default_exponent() -> u32 {
    2
}

fn default_budget() -> f64 {
    1.0
}

impl Default for CriterionSpec {
    fn default() -> Self {
        Self {
            definition: 4,
            p: 2,
            q: 2,
            c1: 1.0,
        }
    }
}

impl CriterionSpec {
    pub fn criterion(&self) -> Result<StabilityCriterion> {
        StabilityCriterion::from_parts(self.definition, self.p, self.q).map_err(|e| {
            let field = match self.definition {
                1..=4 if self.p == 0 => "criterion.p",
                1..=4 => "criterion.q",
                _ => "criterion.definition",
            };
            Error::config(field, e.to_string())
        })
    }

    pub fn budget(&self) -> Result<AmplitudeBudget<f64>> {
        AmplitudeBudget::new(self.criterion()?, self.c1)
            .map_err(|e| Error::config("criterion.C1", e.to_string()))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory_csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report_json: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot_data: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepSource {
    #[default]
    Simulation,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub source: SweepSource,
    #[serde(default = "default_exponent_tolerance")]
    pub exponent_tolerance: f64,
}

pub const DEFAULT_EXPONENT_TOLERANCE: f64 = 0.15;

fn default_exponent_tolerance() -> f64 {
    DEFAULT_EXPONENT_TOLERANCE
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            source: SweepSource::default(),
            exponent_tolerance: DEFAULT_EXPONENT_TOLERANCE,
        }
    }
}

/// Everything needed to run one chain size.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub sim: SimulationConfig<f64>,
    pub controller: ControllerDefinition<f64>,
    pub disturbance: DisturbanceProfile<f64>,
    /// Ramp end in steps.
    pub window_steps: usize,
    pub criterion: StabilityCriterion,
}

impl ResolvedRun {
    pub fn chain_size(&self) -> usize {
        self.sim.chain_size
    }

    pub fn alpha(&self) -> f64 {
        self.disturbance.alpha
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)
            .map_err(|e| Error::config("<root>", e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("<file>", format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn chain_sizes(&self) -> &[usize] {
        self.sim.chain_size.as_slice()
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::config(
                "schema_version",
                format!("expected \"{SCHEMA_VERSION}\", got \"{}\"", self.schema_version),
            ));
        }
        let sizes = self.chain_sizes();
        if sizes.is_empty() {
            return Err(Error::config("sim.N", "at least one chain size is required"));
        }
        if let Some(i) = sizes.iter().position(|&n| n < 1) {
            let path = match self.sim.chain_size {
                ChainSizes::One(_) => "sim.N".to_string(),
                ChainSizes::Many(_) => format!("sim.N[{i}]"),
            };
            return Err(Error::config(path, "chain size must be at least 1"));
        }
        if !(self.sim.dt > 0.0 && self.sim.dt.is_finite()) {
            return Err(Error::config("sim.dt", "dt must be positive and finite"));
        }
        match self.sim.horizon {
            HorizonRule::Time(t) if !(t >= 0.0 && t.is_finite()) => {
                return Err(Error::config("sim.horizon.time", "must be non-negative"))
            }
            _ => {}
        }
        self.controller.validate()?;
        match self.disturbance.alpha {
            Amplitude::Value(a) if !(a >= 0.0 && a.is_finite()) => {
                return Err(Error::config("disturbance.alpha", "must be non-negative"))
            }
            _ => {}
        }
        if let WindowRule::Value(t) = self.disturbance.window {
            grid_steps(&t, &self.sim.dt)
                .map_err(|e| Error::config("disturbance.T", e.to_string()))?;
        }
        self.criterion.budget()?;
        if !(self.sweep.exponent_tolerance > 0.0) {
            return Err(Error::config("sweep.exponent_tolerance", "must be positive"));
        }
        for &n in sizes {
            self.resolve(n)?;
        }
        Ok(())
    }

    /// Resolves rules, the controller and the amplitude for chain size `n`.
    pub fn resolve(&self, n: usize) -> Result<ResolvedRun> {
        let dt = self.sim.dt;
        let (m1, m2) = self.controller.radii();
        let window_steps = match self.disturbance.window {
            WindowRule::LemmaWindow => lemma_window_steps(n, m1, m2)?,
            WindowRule::Fig2 => n / 5,
            WindowRule::Value(t) => grid_steps(&t, &dt)?,
        };
        let horizon = match self.sim.horizon {
            HorizonRule::LemmaWindow => lemma_window_steps(n, m1, m2)?,
            HorizonRule::Fig2 => n / 5,
            HorizonRule::Steps(s) => s,
            HorizonRule::Time(t) => (t / dt + 1e-9).floor() as usize,
        };
        if self.disturbance.kind != DisturbanceKind::Zero && horizon < window_steps {
            return Err(Error::config(
                "sim.horizon",
                format!("horizon of {horizon} steps is shorter than T = {window_steps} steps at N={n}"),
            ));
        }
        let criterion = self.criterion.criterion()?;
        let alpha = match self.disturbance.alpha {
            Amplitude::Value(a) => a,
            Amplitude::Budget(_) => {
                admissible_alpha_steps(&self.criterion.budget()?, n, window_steps, dt)?
            }
        };
        let disturbance = match self.disturbance.kind {
            DisturbanceKind::RampWindowed => DisturbanceProfile::ramp_windowed_steps(alpha, window_steps),
            DisturbanceKind::RampStep => DisturbanceProfile::ramp_step(alpha),
            DisturbanceKind::Zero => DisturbanceProfile::zero(),
        };
        Ok(ResolvedRun {
            sim: SimulationConfig::new(n, dt, horizon).map_err(|e| Error::config("sim", e.to_string()))?,
            controller: self.controller.build(dt),
            disturbance,
            window_steps,
            criterion,
        })
    }
}
