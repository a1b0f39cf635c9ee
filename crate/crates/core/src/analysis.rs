//! Closed-form central solution under the ramp, its validity window, the
//! error-side metrics of each criterion and the log-log growth fitter.
//!
//! From zero initial conditions, every vehicle pair far enough from both ends
//! sees identical windows, so all interior controllers issue identical
//! commands and the relative dynamics reduce to the disturbance difference
//! between neighbours. That gives, for `k` in the validity window,
//!
//! ```text
//! |e_k(t)|    = t (t + dt) alpha / (2N)
//! |edot_k(t)| = t alpha / N
//! ```
//!
//! The ramp pushes trailing vehicles harder, so with `e_k = x_{k-1} - x_k` the
//! simulated errors are the negatives of these values; [`ramp_response_at`]
//! returns the signed prediction.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::criterion::StabilityCriterion;
use crate::disturbances::grid_steps;
use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};

/// Parameters of the simulated configuration the oracle describes.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleParams<T> {
    pub alpha: T,
    pub chain_size: usize,
    pub dt: T,
    pub m1: usize,
    pub m2: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OraclePoint<T> {
    pub e: T,
    pub edot: T,
}

impl<T: Scalar> OracleParams<T> {
    /// Closed form at step `n`: `e = t (t + dt) alpha / (2N)`, `edot = t alpha / N`.
    pub fn closed_form_at(&self, n: usize) -> OraclePoint<T> {
        let t = T::from_count(n) * self.dt.clone();
        let big_n = T::from_count(self.chain_size);
        let two = T::one() + T::one();
        OraclePoint {
            e: t.clone() * (t.clone() + self.dt.clone()) * self.alpha.clone() / (two * big_n.clone()),
            edot: t * self.alpha.clone() / big_n,
        }
    }

    pub fn validity_window(&self, n: usize) -> Range<usize> {
        validity_window(self.m1, self.m2, self.chain_size, n)
    }
}

/// Closed-form central solution at time `t`, which must lie on the step grid.
pub fn closed_form_oracle<F: Real>(params: &OracleParams<F>, t: F) -> Result<OraclePoint<F>> {
    let n = grid_steps(&t, &params.dt)?;
    Ok(params.closed_form_at(n))
}

/// Signed spacing errors the ramp produces inside the validity window at step
/// `n`: the closed form with its sign flipped.
pub fn ramp_response_at<T: Scalar>(params: &OracleParams<T>, n: usize) -> OraclePoint<T> {
    let p = params.closed_form_at(n);
    OraclePoint {
        e: -p.e,
        edot: -p.edot,
    }
}

/// Vehicles `k` strictly between `n m1` and `N - n m2`; empty once the bounds
/// meet.
pub fn validity_window(m1: usize, m2: usize, chain_size: usize, n: usize) -> Range<usize> {
    let start = n * m1 + 1;
    let end = chain_size.saturating_sub(n * m2);
    if start >= end {
        start..start
    } else {
        start..end
    }
}

/// [`validity_window`] at time `t` on the step grid.
pub fn validity_window_at_time<F: Real>(params: &OracleParams<F>, t: F) -> Result<Range<usize>> {
    Ok(params.validity_window(grid_steps(&t, &params.dt)?))
}

/// `floor(N / (2 (m1 + m2)))`: ramp duration in steps that keeps the closed
/// form valid on about half the chain.
pub fn lemma_window_steps(chain_size: usize, m1: usize, m2: usize) -> Result<usize> {
    if m1 + m2 == 0 {
        return Err(Error::Parameter(
            "lemma window needs m1 + m2 >= 1".to_string(),
        ));
    }
    Ok(chain_size / (2 * (m1 + m2)))
}

/// `N dt / (2 (m1 + m2))` floored to the step grid.
#[allow(non_snake_case)]
pub fn lemma_window_T<T: Scalar>(chain_size: usize, dt: &T, m1: usize, m2: usize) -> Result<T> {
    Ok(T::from_count(lemma_window_steps(chain_size, m1, m2)?) * dt.clone())
}

/// Error-side value of a criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorMetric<F> {
    /// One value per vehicle (definitions 1 and 3).
    PerVehicle(Vec<F>),
    /// A single chain-wide value (definitions 2 and 4).
    Total(F),
}

impl<F: Real> ErrorMetric<F> {
    /// Worst vehicle for per-vehicle metrics, the value itself otherwise.
    pub fn worst(&self) -> F {
        match self {
            Self::PerVehicle(v) => v.iter().copied().fold(F::zero(), F::max),
            Self::Total(x) => *x,
        }
    }
}

/// Error metric over per-vehicle histories: `histories[j][n]` is `e` of the
/// `j`-th monitored vehicle at step `n`.
pub fn error_metric<F: Real>(
    histories: &[Vec<F>],
    criterion: &StabilityCriterion,
    dt: F,
) -> Result<ErrorMetric<F>> {
    criterion.validate()?;
    if histories.is_empty() || histories.iter().all(Vec::is_empty) {
        return Err(Error::Parameter("error history is empty".into()));
    }
    let time_sum = |series: &Vec<F>, p: u32| {
        series
            .iter()
            .fold(F::zero(), |acc, e| acc + num_traits::Float::abs(*e).powi(p as i32) * dt)
    };
    Ok(match *criterion {
        StabilityCriterion::VectorDisturbance { p, .. } | StabilityCriterion::PerVehicle { p } => {
            ErrorMetric::PerVehicle(histories.iter().map(|s| time_sum(s, p)).collect())
        }
        StabilityCriterion::Summed { p, q } => {
            let outer = F::from_u32(q).unwrap() / F::from_u32(p).unwrap();
            ErrorMetric::Total(
                histories
                    .iter()
                    .fold(F::zero(), |acc, s| acc + time_sum(s, p).powf(outer)),
            )
        }
        StabilityCriterion::Bibo => ErrorMetric::Total(
            histories
                .iter()
                .flatten()
                .fold(F::zero(), |acc, e| acc.max(num_traits::Float::abs(*e))),
        ),
    })
}

/// Growth exponent in `N` of the error metric under the budget-saturating
/// ramp with a duration proportional to `N dt`.
pub fn growth_exponent(criterion: &StabilityCriterion) -> Result<f64> {
    criterion.validate()?;
    Ok(match *criterion {
        StabilityCriterion::VectorDisturbance { p, q } => p as f64 - p as f64 / q as f64,
        StabilityCriterion::Summed { q, .. } => q as f64,
        StabilityCriterion::PerVehicle { p } => p as f64,
        StabilityCriterion::Bibo => 1.0,
    })
}

/// Least-squares slope of `ln(metric)` against `ln(N)`.
pub fn fit_exponent<F: Real>(samples: &[(usize, F)]) -> Result<F> {
    if samples.len() < 3 {
        return Err(Error::Fit(format!(
            "need at least 3 samples, got {}",
            samples.len()
        )));
    }
    let mut ns: Vec<usize> = samples.iter().map(|(n, _)| *n).collect();
    ns.sort_unstable();
    if ns.windows(2).any(|w| w[0] == w[1]) || ns[0] == 0 {
        return Err(Error::Fit("N values must be distinct and positive".into()));
    }
    if let Some((n, m)) = samples.iter().find(|(_, m)| !(*m > F::zero()) || !m.is_finite()) {
        return Err(Error::Fit(format!(
            "metric at N={n} is not a positive finite number ({})",
            m.to_f64_lossy()
        )));
    }
    let count = F::from_count(samples.len());
    let pts: Vec<(F, F)> = samples
        .iter()
        .map(|(n, m)| (F::from_count(*n).ln(), m.ln()))
        .collect();
    let mean_x = pts.iter().fold(F::zero(), |a, p| a + p.0) / count;
    let mean_y = pts.iter().fold(F::zero(), |a, p| a + p.1) / count;
    let (sxy, sxx) = pts.iter().fold((F::zero(), F::zero()), |(sxy, sxx), (x, y)| {
        let dx = *x - mean_x;
        (sxy + dx * (*y - mean_y), sxx + dx * dx)
    });
    Ok(sxy / sxx)
}

/// Error metric of the closed-form solution over steps `0..=window_steps`,
/// counted on every vehicle of the validity window at the last step.
pub fn oracle_metric<F: Real>(
    params: &OracleParams<F>,
    criterion: &StabilityCriterion,
    window_steps: usize,
) -> Result<F> {
    let vehicles = params.validity_window(window_steps).len();
    if vehicles == 0 {
        return Err(Error::Scenario(format!(
            "empty validity window at N={} after {window_steps} steps",
            params.chain_size
        )));
    }
    let series: Vec<F> = (0..=window_steps)
        .map(|n| ramp_response_at(params, n).e)
        .collect();
    let histories = vec![series; vehicles];
    Ok(error_metric(&histories, criterion, params.dt)?.worst())
}

/// One point of an `N` sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingSample {
    #[serde(rename = "N")]
    pub chain_size: usize,
    pub metric: f64,
    pub alpha: f64,
    pub window_steps: usize,
    pub window_vehicles: usize,
}

/// Measured error metrics against `N` with their fitted and reference growth
/// exponents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub definition_id: u8,
    pub p: Option<u32>,
    pub q: Option<u32>,
    pub samples: Vec<ScalingSample>,
    pub fitted_exponent: f64,
    pub reference_exponent: f64,
}

impl ScalingReport {
    /// Sorts samples by `N` and fits the growth exponent.
    pub fn from_samples(criterion: &StabilityCriterion, mut samples: Vec<ScalingSample>) -> Result<Self> {
        samples.sort_by_key(|s| s.chain_size);
        let pairs: Vec<(usize, f64)> = samples.iter().map(|s| (s.chain_size, s.metric)).collect();
        Ok(Self {
            definition_id: criterion.id(),
            p: criterion.p(),
            q: criterion.q(),
            fitted_exponent: fit_exponent(&pairs)?,
            reference_exponent: growth_exponent(criterion)?,
            samples,
        })
    }

    pub fn deviation(&self) -> f64 {
        (self.fitted_exponent - self.reference_exponent).abs()
    }
}
