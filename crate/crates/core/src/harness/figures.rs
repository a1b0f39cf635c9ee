//! Plot data for the three reference figures.
//!
//! All three use the asymmetric PD controller `a = 1, b1 = 2, b2 = 0.5`,
//! `dt = 0.1`, a ramp-step disturbance with `alpha = 1` and `T = N dt / 5`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::output::{csv_bytes, json_bytes, write_file};
use crate::analysis::{ramp_response_at, OracleParams};
use crate::chain::SimulationConfig;
use crate::controllers::{pd_asymmetric, ControllerDefinition};
use crate::disturbances::DisturbanceProfile;
use crate::error::{Error, Result};
use crate::simulation::Simulation;

pub const FIG_DT: f64 = 0.1;
pub const FIG_ALPHA: f64 = 1.0;
pub const FIG3_HORIZON: usize = 5000;
/// Steps over which the fig3 limit is checked.
pub const SETTLE_STEPS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureScenario {
    Fig1,
    Fig2,
    Fig3,
}

impl std::str::FromStr for FigureScenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(Self::Fig1),
            "fig2" => Ok(Self::Fig2),
            "fig3" => Ok(Self::Fig3),
            other => Err(Error::config("scenario", format!("unknown scenario {other:?}"))),
        }
    }
}

pub fn figure_controller() -> ControllerDefinition<f64> {
    pd_asymmetric(1.0, 2.0, 0.5, FIG_DT)
}

/// `T / dt` for the figure scenarios.
pub fn figure_window_steps(chain_size: usize) -> usize {
    chain_size / 5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisturbanceRow {
    pub n: usize,
    pub t: f64,
    pub k: usize,
    pub d1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub n: usize,
    pub t: f64,
    pub k: usize,
    pub e: f64,
    pub in_window: bool,
}

/// One oracle dot: the closed-form magnitude and the signed value the
/// simulation should show on vehicles `k_start..k_end`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub n: usize,
    pub t: f64,
    pub e_closed_form: f64,
    pub edot_closed_form: f64,
    pub e_predicted: f64,
    pub edot_predicted: f64,
    pub k_start: usize,
    pub k_end: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig3Marker {
    #[serde(rename = "N")]
    pub chain_size: usize,
    #[serde(rename = "T")]
    pub window_end: f64,
    pub window_steps: usize,
    pub horizon: usize,
    pub max_abs_e: f64,
    /// Largest `|e_k(end) - e_k(end - 100 steps)|` over vehicles.
    pub final_variation: f64,
    pub all_finite: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig2Data {
    pub errors: Vec<ErrorRow>,
    pub oracle: Vec<OracleRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig3Data {
    pub errors: Vec<ErrorRow>,
    pub marker: Fig3Marker,
}

fn check_size(chain_size: usize) -> Result<()> {
    if chain_size < 1 {
        return Err(Error::config("N", "chain size must be at least 1"));
    }
    Ok(())
}

/// `d_{k,1}(t)` for every vehicle over `N` steps.
pub fn fig1_series(chain_size: usize) -> Result<Vec<DisturbanceRow>> {
    check_size(chain_size)?;
    let profile = DisturbanceProfile::ramp_step(FIG_ALPHA);
    let mut rows = Vec::new();
    for n in 0..=chain_size {
        let (d1, _) = profile.sample_chain(n as i64, chain_size, &FIG_DT);
        rows.extend(d1.into_iter().enumerate().map(|(k, d1)| DisturbanceRow {
            n,
            t: n as f64 * FIG_DT,
            k,
            d1,
        }));
    }
    Ok(rows)
}

fn error_rows(chain_size: usize, horizon: usize, window_steps: usize) -> Result<Vec<ErrorRow>> {
    let controller = figure_controller();
    let profile = DisturbanceProfile::ramp_step(FIG_ALPHA);
    let config = SimulationConfig::new(chain_size, FIG_DT, horizon)?;
    let params = oracle_params(chain_size);
    let states = Simulation::new(&controller, &profile, &config)?.run(horizon)?;
    let mut rows = Vec::with_capacity(states.len() * chain_size);
    for (n, state) in states.iter().enumerate() {
        let window = params.validity_window(n);
        let (e, _) = state.spacing_errors();
        rows.extend(e.into_iter().enumerate().map(|(j, e)| ErrorRow {
            n,
            t: n as f64 * FIG_DT,
            k: j + 1,
            e,
            in_window: n <= window_steps && window.contains(&(j + 1)),
        }));
    }
    Ok(rows)
}

fn oracle_params(chain_size: usize) -> OracleParams<f64> {
    OracleParams {
        alpha: FIG_ALPHA,
        chain_size,
        dt: FIG_DT,
        m1: 1,
        m2: 1,
    }
}

/// Errors for `t <= T` and the oracle dot series.
pub fn fig2_data(chain_size: usize) -> Result<Fig2Data> {
    check_size(chain_size)?;
    let steps = figure_window_steps(chain_size);
    let params = oracle_params(chain_size);
    let oracle = (0..=steps)
        .map(|n| {
            let magnitude = params.closed_form_at(n);
            let signed = ramp_response_at(&params, n);
            let window = params.validity_window(n);
            OracleRow {
                n,
                t: n as f64 * FIG_DT,
                e_closed_form: magnitude.e,
                edot_closed_form: magnitude.edot,
                e_predicted: signed.e,
                edot_predicted: signed.edot,
                k_start: window.start,
                k_end: window.end,
            }
        })
        .collect();
    Ok(Fig2Data {
        errors: error_rows(chain_size, steps, steps)?,
        oracle,
    })
}

/// Errors over a long horizon with the end of the ramp window marked.
pub fn fig3_data(chain_size: usize, horizon: usize) -> Result<Fig3Data> {
    check_size(chain_size)?;
    let steps = figure_window_steps(chain_size);
    let errors = error_rows(chain_size, horizon, steps)?;
    let at = |n: usize, k: usize| errors[n * chain_size + k - 1].e;
    let final_variation = if horizon >= SETTLE_STEPS {
        (1..=chain_size)
            .map(|k| (at(horizon, k) - at(horizon - SETTLE_STEPS, k)).abs())
            .fold(0.0, f64::max)
    } else {
        f64::NAN
    };
    let marker = Fig3Marker {
        chain_size,
        window_end: steps as f64 * FIG_DT,
        window_steps: steps,
        horizon,
        max_abs_e: errors.iter().fold(0.0, |m, r| m.max(r.e.abs())),
        final_variation,
        all_finite: errors.iter().all(|r| r.e.is_finite()),
    };
    Ok(Fig3Data { errors, marker })
}

/// Writes the plot-data files of a scenario into `out_dir` and returns their
/// paths.
pub fn emit_fig_data(scenario: FigureScenario, chain_size: usize, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let files: Vec<(&str, Vec<u8>)> = match scenario {
        FigureScenario::Fig1 => vec![("fig1_d1.csv", csv_bytes(&fig1_series(chain_size)?)?)],
        FigureScenario::Fig2 => {
            let data = fig2_data(chain_size)?;
            vec![
                ("fig2_errors.csv", csv_bytes(&data.errors)?),
                ("fig2_oracle.csv", csv_bytes(&data.oracle)?),
            ]
        }
        FigureScenario::Fig3 => {
            let data = fig3_data(chain_size, FIG3_HORIZON)?;
            vec![
                ("fig3_errors.csv", csv_bytes(&data.errors)?),
                ("fig3_marker.json", json_bytes(&data.marker)?),
            ]
        }
    };
    files
        .into_iter()
        .map(|(name, bytes)| {
            let path = out_dir.join(name);
            write_file(&path, &bytes)?;
            Ok(path)
        })
        .collect()
}
