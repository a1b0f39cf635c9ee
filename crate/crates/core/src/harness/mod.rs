//! Experiment orchestration and serialization.

pub mod config;
pub mod figures;
pub mod output;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    error_metric, oracle_metric, ramp_response_at, validity_window, OracleParams, ScalingReport,
    ScalingSample,
};
use crate::controllers::ControllerDefinition;
use crate::criterion::StabilityCriterion;
use crate::disturbances::{DisturbanceKind, DisturbanceProfile};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::simulation::Simulation;

pub use config::{ExperimentConfig, ResolvedRun, SweepSource};

/// Default relative tolerance for closed-form agreement.
pub const LEMMA_TOLERANCE: f64 = 1e-9;

/// One CSV row: a vehicle at a step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub n: u64,
    pub t: f64,
    pub k: usize,
    pub x: f64,
    pub v: f64,
    pub e: Option<f64>,
    pub edot: Option<f64>,
    pub d1: f64,
    pub d2: f64,
    pub in_window: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    #[serde(rename = "N")]
    pub chain_size: usize,
    pub dt: f64,
    pub horizon: usize,
    pub controller: String,
    pub disturbance: DisturbanceKind,
    pub alpha: f64,
    pub window_steps: usize,
    /// Error metric of each criterion over the whole run and all vehicles,
    /// keyed by criterion label.
    pub metrics: BTreeMap<String, f64>,
    pub max_abs_e: f64,
    /// Largest relative deviation from the closed form over in-window points,
    /// when the disturbance is a ramp.
    pub oracle_max_deviation: Option<f64>,
    pub oracle_points: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SimulationRun {
    pub records: Vec<TrajectoryRecord>,
    pub summary: RunSummary,
    /// `e_1..e_N` at every step, for plot data.
    pub errors: Vec<Vec<f64>>,
}

/// `|a - b| / |b|`, or `|a - b|` when `b` is zero.
pub fn relative_deviation<T: Scalar>(actual: &T, expected: &T) -> T {
    let diff = (actual.clone() - expected.clone()).abs();
    if expected.is_zero() {
        diff
    } else {
        diff / expected.abs()
    }
}

/// Outcome of comparing a simulation against the closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaCheck<T> {
    pub max_rel_deviation: T,
    pub points: usize,
}

/// Simulates a ramp from rest for `steps` steps and compares every
/// in-window `(e_k, edot_k)` against the signed closed form.
pub fn check_lemma<T: Scalar>(
    controller: &ControllerDefinition<T>,
    disturbance: &DisturbanceProfile<T>,
    chain_size: usize,
    dt: T,
    steps: usize,
) -> Result<LemmaCheck<T>> {
    if !disturbance.is_ramp() {
        return Err(Error::Scenario(
            "closed-form verification needs a ramp disturbance".into(),
        ));
    }
    let config = crate::chain::SimulationConfig::new(chain_size, dt.clone(), steps)?;
    let params = OracleParams {
        alpha: disturbance.alpha.clone(),
        chain_size,
        dt,
        m1: controller.m1(),
        m2: controller.m2(),
    };
    let states = Simulation::new(controller, disturbance, &config)?.run(steps)?;
    let mut worst = T::zero();
    let mut points = 0;
    for (n, state) in states.iter().enumerate() {
        let expected = ramp_response_at(&params, n);
        for k in params.validity_window(n) {
            let e = state.spacing_error(k).expect("k in 1..=N");
            let edot = state.spacing_rate(k).expect("k in 1..=N");
            for dev in [
                relative_deviation(&e, &expected.e),
                relative_deviation(&edot, &expected.edot),
            ] {
                if dev > worst {
                    worst = dev;
                }
            }
            points += 1;
        }
    }
    Ok(LemmaCheck {
        max_rel_deviation: worst,
        points,
    })
}

/// Runs a single chain size and collects per-step records.
pub fn run_simulation(config: &ExperimentConfig) -> Result<SimulationRun> {
    let sizes = config.chain_sizes();
    if sizes.len() != 1 {
        return Err(Error::config("sim.N", "simulate needs a single chain size"));
    }
    simulate_resolved(&config.resolve(sizes[0])?)
}

/// [`run_simulation`] for an already resolved chain size.
pub fn simulate_resolved(run: &ResolvedRun) -> Result<SimulationRun> {
    let criterion = &run.criterion;
    let n_size = run.chain_size();
    let dt = run.sim.dt;
    let horizon = run.sim.horizon;
    let params = OracleParams {
        alpha: run.alpha(),
        chain_size: n_size,
        dt,
        m1: run.controller.m1(),
        m2: run.controller.m2(),
    };
    let is_ramp = run.disturbance.is_ramp();
    let in_window = |n: usize, k: usize| {
        is_ramp && n <= run.window_steps && params.validity_window(n).contains(&k)
    };

    let mut sim = Simulation::new(&run.controller, &run.disturbance, &run.sim)?;
    let mut records = Vec::with_capacity((horizon + 1) * (n_size + 1));
    let mut errors = Vec::with_capacity(horizon + 1);
    let mut oracle_dev: Option<f64> = None;
    let mut oracle_points = 0;
    let mut warnings = Vec::new();

    for n in 0..=horizon {
        let state = sim.state().clone();
        let (d1, d2) = sim.current_disturbance();
        let (e, edot) = state.spacing_errors();
        let t = n as f64 * dt;
        if is_ramp && n <= run.window_steps {
            let window = params.validity_window(n);
            if window.is_empty() {
                warnings.push(format!("empty validity window at step {n}"));
            }
            let expected = ramp_response_at(&params, n);
            for k in window {
                let dev = relative_deviation(&e[k - 1], &expected.e)
                    .max(relative_deviation(&edot[k - 1], &expected.edot));
                oracle_dev = Some(oracle_dev.map_or(dev, |d| d.max(dev)));
                oracle_points += 1;
            }
        }
        for k in 0..=n_size {
            records.push(TrajectoryRecord {
                n: n as u64,
                t,
                k,
                x: state.x[k],
                v: state.v[k],
                e: (k >= 1).then(|| e[k - 1]),
                edot: (k >= 1).then(|| edot[k - 1]),
                d1: d1[k],
                d2: d2[k],
                in_window: in_window(n, k),
            });
        }
        errors.push(e);
        if n < horizon {
            sim.advance()?;
        }
    }

    let histories: Vec<Vec<f64>> = (0..n_size)
        .map(|j| errors.iter().map(|row| row[j]).collect())
        .collect();
    let (p, q) = (criterion.p().unwrap_or(2), criterion.q().unwrap_or(2));
    let mut metrics = BTreeMap::new();
    for c in [
        StabilityCriterion::VectorDisturbance { p, q },
        StabilityCriterion::Summed { p, q },
        StabilityCriterion::PerVehicle { p },
        StabilityCriterion::Bibo,
    ] {
        metrics.insert(c.label(), error_metric(&histories, &c, dt)?.worst());
    }
    let max_abs_e = errors.iter().flatten().fold(0.0f64, |m, e| m.max(e.abs()));

    Ok(SimulationRun {
        records,
        summary: RunSummary {
            chain_size: n_size,
            dt,
            horizon,
            controller: run.controller.name().to_string(),
            disturbance: run.disturbance.kind,
            alpha: run.alpha(),
            window_steps: run.window_steps,
            metrics,
            max_abs_e,
            oracle_max_deviation: oracle_dev,
            oracle_points,
            warnings,
        },
        errors,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    #[serde(rename = "N")]
    pub chain_size: usize,
    pub controller: String,
    pub alpha: f64,
    pub window_steps: usize,
    pub points_checked: usize,
    pub max_rel_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Checks the closed form for every configured chain size up to the ramp end.
pub fn verify_lemma(config: &ExperimentConfig, tolerance: f64) -> Result<Vec<LemmaReport>> {
    if config.disturbance.kind == DisturbanceKind::Zero {
        return Err(Error::Scenario(
            "closed-form verification needs a ramp disturbance".into(),
        ));
    }
    config
        .chain_sizes()
        .iter()
        .map(|&n| {
            let run = config.resolve(n)?;
            let check = check_lemma(&run.controller, &run.disturbance, n, run.sim.dt, run.window_steps)?;
            Ok(LemmaReport {
                chain_size: n,
                controller: run.controller.name().to_string(),
                alpha: run.alpha(),
                window_steps: run.window_steps,
                points_checked: check.points,
                max_rel_deviation: check.max_rel_deviation,
                tolerance,
                passed: check.max_rel_deviation <= tolerance,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub report: ScalingReport,
    pub source: SweepSource,
    pub controller: String,
    pub dt: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    pub exponent_tolerance: f64,
    pub passed: bool,
}

/// Error metric of one chain size over `[0, T]` on the vehicles valid for the
/// whole window.
pub fn sweep_point(run: &ResolvedRun, source: SweepSource) -> Result<ScalingSample> {
    let n = run.chain_size();
    let steps = run.window_steps;
    let (m1, m2) = (run.controller.m1(), run.controller.m2());
    let window = validity_window(m1, m2, n, steps);
    if window.is_empty() {
        return Err(Error::Scenario(format!(
            "empty validity window at N={n} for T = {steps} steps"
        )));
    }
    let metric = match source {
        SweepSource::Oracle => {
            let params = OracleParams {
                alpha: run.alpha(),
                chain_size: n,
                dt: run.sim.dt,
                m1,
                m2,
            };
            oracle_metric(&params, &run.criterion, steps)?
        }
        SweepSource::Simulation => {
            let states = Simulation::new(&run.controller, &run.disturbance, &run.sim)?.run(steps)?;
            let histories: Vec<Vec<f64>> = window
                .clone()
                .map(|k| states.iter().map(|s| s.spacing_error(k).unwrap()).collect())
                .collect();
            error_metric(&histories, &run.criterion, run.sim.dt)?.worst()
        }
    };
    Ok(ScalingSample {
        chain_size: n,
        metric,
        alpha: run.alpha(),
        window_steps: steps,
        window_vehicles: window.len(),
    })
}

/// Budget-saturating sweep over the configured chain sizes. `jobs > 1` runs
/// chain sizes on a thread pool; samples are ordered by `N` either way.
pub fn run_sweep(config: &ExperimentConfig, jobs: usize, source: SweepSource) -> Result<SweepOutcome> {
    let mut sizes = config.chain_sizes().to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < 3 {
        return Err(Error::config("sim.N", "a sweep needs at least 3 distinct chain sizes"));
    }
    if !config.disturbance.alpha.is_budget() {
        return Err(Error::config("disturbance.alpha", "a sweep needs \"budget\" amplitude"));
    }
    if config.disturbance.kind != DisturbanceKind::RampWindowed {
        return Err(Error::config("disturbance.kind", "a sweep needs a ramp-windowed disturbance"));
    }
    let runs: Vec<ResolvedRun> = sizes.iter().map(|&n| config.resolve(n)).collect::<Result<_>>()?;
    let samples: Vec<ScalingSample> = if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Parameter(format!("thread pool: {e}")))?;
        pool.install(|| runs.par_iter().map(|r| sweep_point(r, source)).collect::<Result<_>>())?
    } else {
        runs.iter().map(|r| sweep_point(r, source)).collect::<Result<_>>()?
    };
    let criterion = config.criterion.criterion()?;
    let report = ScalingReport::from_samples(&criterion, samples)?;
    let tolerance = config.sweep.exponent_tolerance;
    Ok(SweepOutcome {
        passed: report.deviation() <= tolerance,
        report,
        source,
        controller: config.controller.build(config.sim.dt).name().to_string(),
        dt: config.sim.dt,
        c1: config.criterion.c1,
        exponent_tolerance: tolerance,
    })
}
