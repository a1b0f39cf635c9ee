//! Ramp disturbances graded along the chain, their norms under each
//! criterion, and the largest amplitude fitting a disturbance budget.
//!
//! The ramp gives vehicle `k` the per-step pair
//! `d1 = alpha k dt / N`, `d2 = alpha k dt^2 / N`. The windowed variant is
//! active on the inclusive grid `t = 0, dt, ..., T` (`T/dt + 1` steps); the
//! step variant stays on for every `t >= 0`. Nothing is applied for `t < 0`.

use serde::{Deserialize, Serialize};

use crate::criterion::StabilityCriterion;
use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DisturbanceKind {
    RampWindowed,
    RampStep,
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisturbanceProfile<T> {
    pub kind: DisturbanceKind,
    pub alpha: T,
    /// `T / dt`; only meaningful for [`DisturbanceKind::RampWindowed`].
    pub window_steps: usize,
}

/// Converts a time on the step grid into a step count.
pub fn grid_steps<T: Scalar>(t: &T, dt: &T) -> Result<usize> {
    let grid_err = || Error::Grid {
        t: t.to_f64_lossy(),
        dt: dt.to_f64_lossy(),
    };
    if *dt <= T::zero() || *t < T::zero() {
        return Err(grid_err());
    }
    let ratio = (t.clone() / dt.clone()).to_f64_lossy();
    let steps = ratio.round();
    if !steps.is_finite() || (ratio - steps).abs() > 1e-9 * steps.max(1.0) {
        return Err(grid_err());
    }
    Ok(steps as usize)
}

impl<T: Scalar> DisturbanceProfile<T> {
    pub fn zero() -> Self {
        Self {
            kind: DisturbanceKind::Zero,
            alpha: T::zero(),
            window_steps: 0,
        }
    }

    pub fn ramp_step(alpha: T) -> Self {
        Self {
            kind: DisturbanceKind::RampStep,
            alpha,
            window_steps: 0,
        }
    }

    pub fn ramp_windowed_steps(alpha: T, window_steps: usize) -> Self {
        Self {
            kind: DisturbanceKind::RampWindowed,
            alpha,
            window_steps,
        }
    }

    /// Windowed ramp ending at `t_end`, which must be a multiple of `dt`.
    pub fn ramp_windowed(alpha: T, t_end: &T, dt: &T) -> Result<Self> {
        Ok(Self::ramp_windowed_steps(alpha, grid_steps(t_end, dt)?))
    }

    pub fn is_ramp(&self) -> bool {
        matches!(self.kind, DisturbanceKind::RampWindowed | DisturbanceKind::RampStep)
    }

    /// Whether the ramp is on at step `n`.
    pub fn is_active(&self, n: i64) -> bool {
        match self.kind {
            DisturbanceKind::Zero => false,
            DisturbanceKind::RampStep => n >= 0,
            DisturbanceKind::RampWindowed => n >= 0 && n as u64 <= self.window_steps as u64,
        }
    }

    /// `(d1, d2)` for vehicle `k` at step `n`.
    pub fn sample(&self, k: usize, n: i64, chain_size: usize, dt: &T) -> Result<(T, T)> {
        if k > chain_size {
            return Err(Error::Index { k, n: chain_size });
        }
        if !self.is_active(n) || k == 0 {
            return Ok((T::zero(), T::zero()));
        }
        let d1 = self.alpha.clone() * T::from_count(k) * dt.clone() / T::from_count(chain_size);
        let d2 = d1.clone() * dt.clone();
        Ok((d1, d2))
    }

    /// Disturbance vectors for the whole chain at step `n`.
    pub fn sample_chain(&self, n: i64, chain_size: usize, dt: &T) -> (Vec<T>, Vec<T>) {
        (0..=chain_size)
            .map(|k| self.sample(k, n, chain_size, dt).expect("k within chain"))
            .unzip()
    }
}

/// A criterion together with its disturbance budget `C1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeBudget<F> {
    pub criterion: StabilityCriterion,
    pub c1: F,
}

impl<F: Real> AmplitudeBudget<F> {
    pub fn new(criterion: StabilityCriterion, c1: F) -> Result<Self> {
        criterion.validate()?;
        if !(c1 > F::zero()) {
            return Err(Error::Parameter("C1 must be positive".into()));
        }
        Ok(Self { criterion, c1 })
    }
}

/// Left-hand side of the criterion's disturbance condition, by direct
/// summation over `k`, `s` and the `horizon` sampled steps `n = 0..horizon`.
///
/// For the step variant under definitions 1-3 the value grows with the
/// horizon; only definition 4 has a finite untruncated value.
pub fn disturbance_norm<F: Real>(
    profile: &DisturbanceProfile<F>,
    criterion: &StabilityCriterion,
    chain_size: usize,
    dt: F,
    horizon: usize,
) -> Result<F> {
    criterion.validate()?;
    if profile.kind == DisturbanceKind::RampWindowed && horizon < profile.window_steps + 1 {
        return Err(Error::Parameter(format!(
            "horizon of {horizon} samples does not cover the ramp support of {} samples",
            profile.window_steps + 1
        )));
    }
    let scale = [dt, dt * dt];
    // normalized[k][s][n] = |d_{k,s}(n dt)| / dt^s
    let normalized = |k: usize, s: usize, n: usize| -> F {
        let (d1, d2) = profile
            .sample(k, n as i64, chain_size, &dt)
            .expect("k within chain");
        let d = if s == 0 { d1 } else { d2 };
        num_traits::Float::abs(d) / scale[s]
    };
    let time_sum = |k: usize, s: usize, p: u32| -> F {
        (0..horizon).fold(F::zero(), |acc, n| acc + normalized(k, s, n).powi(p as i32) * dt)
    };
    let value = match *criterion {
        StabilityCriterion::VectorDisturbance { p, q } | StabilityCriterion::Summed { p, q } => {
            let outer = F::from_u32(q).unwrap() / F::from_u32(p).unwrap();
            let mut total = F::zero();
            for s in 0..2 {
                for k in 0..=chain_size {
                    total = total + time_sum(k, s, p).powf(outer);
                }
            }
            total
        }
        StabilityCriterion::PerVehicle { p } => {
            let mut worst = F::zero();
            for s in 0..2 {
                for k in 0..=chain_size {
                    worst = worst.max(time_sum(k, s, p));
                }
            }
            worst
        }
        StabilityCriterion::Bibo => {
            let mut worst = F::zero();
            for s in 0..2 {
                for k in 0..=chain_size {
                    for n in 0..horizon {
                        worst = worst.max(normalized(k, s, n));
                    }
                }
            }
            worst
        }
    };
    Ok(value)
}

/// Largest windowed-ramp amplitude whose disturbance norm stays within `C1`.
/// The norm is homogeneous in the amplitude, so the unit-amplitude norm is
/// inverted directly.
pub fn admissible_alpha<F: Real>(
    budget: &AmplitudeBudget<F>,
    chain_size: usize,
    t_end: F,
    dt: F,
) -> Result<F> {
    if chain_size < 1 {
        return Err(Error::Parameter("N must be at least 1".into()));
    }
    if !(t_end > F::zero()) {
        return Err(Error::Parameter("T must be positive".into()));
    }
    let steps = grid_steps(&t_end, &dt)?;
    admissible_alpha_steps(budget, chain_size, steps, dt)
}

/// [`admissible_alpha`] with the window given as a step count.
pub fn admissible_alpha_steps<F: Real>(
    budget: &AmplitudeBudget<F>,
    chain_size: usize,
    window_steps: usize,
    dt: F,
) -> Result<F> {
    let unit = DisturbanceProfile::ramp_windowed_steps(F::one(), window_steps);
    let unit_norm = disturbance_norm(&unit, &budget.criterion, chain_size, dt, window_steps + 1)?;
    let degree = F::from_u32(budget.criterion.amplitude_degree()).unwrap();
    Ok((budget.c1 / unit_norm).powf(degree.recip()))
}

/// `2 D^(q/p) (alpha/N)^q sum_{k=0}^N k^q`: the definition 1/2 norm of a ramp
/// whose per-vehicle time sums equal `D * (alpha k / N)^p`, where `D` is the
/// total duration of the support.
pub fn ramp_norm_closed_form<F: Real>(alpha: F, chain_size: usize, duration: F, p: u32, q: u32) -> F {
    let n = F::from_count(chain_size);
    let qf = F::from_u32(q).unwrap();
    let pf = F::from_u32(p).unwrap();
    let power_sum = (0..=chain_size).fold(F::zero(), |acc, k| acc + F::from_count(k).powi(q as i32));
    (F::one() + F::one()) * duration.powf(qf / pf) * (alpha / n).powi(q as i32) * power_sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, Exact};

    #[test]
    fn ramp_sample_values() {
        let p = DisturbanceProfile::ramp_windowed_steps(1.0f64, 3);
        let (d1, d2) = p.sample(5, 0, 10, &0.1).unwrap();
        assert!((d1 - 0.05).abs() < 1e-15 && (d2 - 0.005).abs() < 1e-15);
        assert_eq!(p.sample(0, 0, 10, &0.1).unwrap(), (0.0, 0.0));
        assert_eq!(p.sample(5, -1, 10, &0.1).unwrap(), (0.0, 0.0));
        assert_eq!(p.sample(5, 4, 10, &0.1).unwrap(), (0.0, 0.0));
        assert_ne!(p.sample(5, 3, 10, &0.1).unwrap(), (0.0, 0.0));
        assert!(matches!(p.sample(11, 0, 10, &0.1), Err(Error::Index { k: 11, n: 10 })));
    }

    #[test]
    fn exact_ramp_sample() {
        let p = DisturbanceProfile::ramp_step(ratio(1, 1));
        let (d1, d2) = p.sample(5, 1000, 10, &ratio(1, 10)).unwrap();
        assert_eq!(d1, ratio(1, 20));
        assert_eq!(d2, ratio(1, 200));
        assert_eq!(
            DisturbanceProfile::<Exact>::ramp_step(ratio(1, 1)).sample(3, -5, 10, &ratio(1, 10)).unwrap(),
            (ratio(0, 1), ratio(0, 1))
        );
    }

    #[test]
    fn grid_validation() {
        assert_eq!(grid_steps(&1.2, &0.1).unwrap(), 12);
        assert_eq!(grid_steps(&0.0, &0.1).unwrap(), 0);
        assert!(grid_steps(&0.15, &0.1).is_err());
        assert!(grid_steps(&-0.1, &0.1).is_err());
        assert_eq!(grid_steps(&ratio(6, 5), &ratio(1, 10)).unwrap(), 12);
        assert!(DisturbanceProfile::ramp_windowed(1.0, &0.25, &0.1).is_err());
    }

    #[test]
    fn zero_profile_has_zero_norm() {
        let z = DisturbanceProfile::<f64>::zero();
        for c in [
            StabilityCriterion::VectorDisturbance { p: 2, q: 2 },
            StabilityCriterion::Summed { p: 1, q: 3 },
            StabilityCriterion::PerVehicle { p: 2 },
            StabilityCriterion::Bibo,
        ] {
            assert_eq!(disturbance_norm(&z, &c, 10, 0.1, 20).unwrap(), 0.0);
        }
    }

    #[test]
    fn short_horizon_is_rejected() {
        let p = DisturbanceProfile::ramp_windowed_steps(1.0, 5);
        assert!(disturbance_norm(&p, &StabilityCriterion::Bibo, 4, 0.1, 5).is_err());
        assert!(disturbance_norm(&p, &StabilityCriterion::Bibo, 4, 0.1, 6).is_ok());
    }

    #[test]
    fn invalid_exponents_are_rejected() {
        let p = DisturbanceProfile::ramp_windowed_steps(1.0, 5);
        let bad = StabilityCriterion::Summed { p: 0, q: 2 };
        assert!(matches!(disturbance_norm(&p, &bad, 4, 0.1, 6), Err(Error::Parameter(_))));
    }

    #[test]
    fn bibo_alpha_is_the_budget() {
        let b = AmplitudeBudget::new(StabilityCriterion::Bibo, 1.0f64).unwrap();
        for n in [1, 7, 50] {
            for t in [0.1, 1.0, 3.0] {
                let a = admissible_alpha(&b, n, t, 0.1).unwrap();
                assert!((a - 1.0).abs() < 1e-12, "N={n} T={t}: {a}");
            }
        }
    }

    #[test]
    fn budget_scaling_follows_degree() {
        for c in [
            StabilityCriterion::VectorDisturbance { p: 2, q: 3 },
            StabilityCriterion::PerVehicle { p: 2 },
            StabilityCriterion::Bibo,
        ] {
            let a1 = admissible_alpha(&AmplitudeBudget::new(c, 1.0).unwrap(), 12, 0.6, 0.1).unwrap();
            let a4 = admissible_alpha(&AmplitudeBudget::new(c, 4.0).unwrap(), 12, 0.6, 0.1).unwrap();
            let expected = 4f64.powf(1.0 / c.amplitude_degree() as f64);
            assert!((a4 / a1 - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn budget_must_be_positive() {
        assert!(AmplitudeBudget::new(StabilityCriterion::Bibo, 0.0).is_err());
        assert!(AmplitudeBudget::new(StabilityCriterion::Bibo, f64::NAN).is_err());
    }

    #[test]
    fn closed_form_matches_summation_over_the_support_duration() {
        let p = DisturbanceProfile::ramp_windowed_steps(0.7f64, 12);
        let c = StabilityCriterion::VectorDisturbance { p: 2, q: 2 };
        let exact = disturbance_norm(&p, &c, 50, 0.1, 13).unwrap();
        let closed = ramp_norm_closed_form(0.7, 50, 13.0 * 0.1, 2, 2);
        assert!((exact - closed).abs() <= 1e-12 * closed);
    }
}
