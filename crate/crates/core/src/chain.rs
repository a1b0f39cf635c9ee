//! Chain state and the exact one-step update of a discretized double
//! integrator chain.
//!
//! Vehicle 0 is the leader. Spacing errors are `e_k = x_{k-1} - x_k` for
//! `k = 1..=N`. Stepping never mutates a state; it returns the next snapshot.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Chain size, step length and number of steps to simulate.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig<T> {
    /// `N`: the chain has `N + 1` vehicles.
    pub chain_size: usize,
    pub dt: T,
    pub horizon: usize,
}

impl<T: Scalar> SimulationConfig<T> {
    pub fn new(chain_size: usize, dt: T, horizon: usize) -> Result<Self> {
        let config = Self {
            chain_size,
            dt,
            horizon,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.chain_size < 1 {
            return Err(Error::config("sim.N", "chain size N must be at least 1"));
        }
        if self.dt <= T::zero() {
            return Err(Error::config("sim.dt", "dt must be positive"));
        }
        Ok(())
    }

    pub fn vehicles(&self) -> usize {
        self.chain_size + 1
    }
}

/// Per-vehicle integrated actuation and disturbance applied over `(t, t + dt]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepInput<T> {
    pub u1: Vec<T>,
    pub u2: Vec<T>,
    pub d1: Vec<T>,
    pub d2: Vec<T>,
}

impl<T: Scalar> StepInput<T> {
    pub fn zeros(vehicles: usize) -> Self {
        Self {
            u1: vec![T::zero(); vehicles],
            u2: vec![T::zero(); vehicles],
            d1: vec![T::zero(); vehicles],
            d2: vec![T::zero(); vehicles],
        }
    }

    fn check_len(&self, vehicles: usize) -> Result<()> {
        for (what, seq) in [
            ("u1", &self.u1),
            ("u2", &self.u2),
            ("d1", &self.d1),
            ("d2", &self.d2),
        ] {
            if seq.len() != vehicles {
                return Err(Error::Dimension {
                    what,
                    expected: vehicles,
                    found: seq.len(),
                });
            }
        }
        Ok(())
    }
}

/// Snapshot of the whole chain at step `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState<T> {
    pub n: u64,
    pub x: Vec<T>,
    pub v: Vec<T>,
    /// Controller memory per vehicle.
    pub xi: Vec<Vec<T>>,
    /// Forward-channel signal delivered to each vehicle at this step.
    pub c_plus: Vec<Vec<T>>,
    /// Backward-channel signal delivered to each vehicle at this step.
    pub c_minus: Vec<Vec<T>>,
}

impl<T: Scalar> ChainState<T> {
    /// All-zero chain: positions, velocities, memories and channels.
    pub fn init_zero(config: &SimulationConfig<T>, n_xi: usize, n_c: usize) -> Result<Self> {
        config.validate()?;
        let m = config.vehicles();
        Ok(Self {
            n: 0,
            x: vec![T::zero(); m],
            v: vec![T::zero(); m],
            xi: vec![vec![T::zero(); n_xi]; m],
            c_plus: vec![vec![T::zero(); n_c]; m],
            c_minus: vec![vec![T::zero(); n_c]; m],
        })
    }

    /// State with given positions and velocities and zeroed controller state.
    pub fn from_kinematics(x: Vec<T>, v: Vec<T>, n_xi: usize, n_c: usize) -> Result<Self> {
        if x.len() < 2 {
            return Err(Error::config("state.x", "a chain needs at least two vehicles"));
        }
        if v.len() != x.len() {
            return Err(Error::Dimension {
                what: "v",
                expected: x.len(),
                found: v.len(),
            });
        }
        let m = x.len();
        Ok(Self {
            n: 0,
            x,
            v,
            xi: vec![vec![T::zero(); n_xi]; m],
            c_plus: vec![vec![T::zero(); n_c]; m],
            c_minus: vec![vec![T::zero(); n_c]; m],
        })
    }

    pub fn vehicles(&self) -> usize {
        self.x.len()
    }

    /// `N`, the index of the last vehicle.
    pub fn chain_size(&self) -> usize {
        self.x.len() - 1
    }

    /// One exact step: `v' = v + u1 + d1`, `x' = x + v dt + u2 + d2`, using the
    /// pre-step velocity in the position update. Memory and channels are
    /// carried over unchanged; see [`ChainState::with_controller_state`].
    pub fn step(&self, input: &StepInput<T>, dt: &T) -> Result<Self> {
        input.check_len(self.vehicles())?;
        let mut x = Vec::with_capacity(self.vehicles());
        let mut v = Vec::with_capacity(self.vehicles());
        for k in 0..self.vehicles() {
            v.push(self.v[k].clone() + input.u1[k].clone() + input.d1[k].clone());
            x.push(
                self.x[k].clone()
                    + self.v[k].clone() * dt.clone()
                    + input.u2[k].clone()
                    + input.d2[k].clone(),
            );
        }
        Ok(Self {
            n: self.n + 1,
            x,
            v,
            xi: self.xi.clone(),
            c_plus: self.c_plus.clone(),
            c_minus: self.c_minus.clone(),
        })
    }

    /// Replaces memory and incoming channel signals.
    pub fn with_controller_state(
        mut self,
        xi: Vec<Vec<T>>,
        c_plus: Vec<Vec<T>>,
        c_minus: Vec<Vec<T>>,
    ) -> Result<Self> {
        for (what, seq) in [("xi", &xi), ("c_plus", &c_plus), ("c_minus", &c_minus)] {
            if seq.len() != self.vehicles() {
                return Err(Error::Dimension {
                    what,
                    expected: self.vehicles(),
                    found: seq.len(),
                });
            }
        }
        self.xi = xi;
        self.c_plus = c_plus;
        self.c_minus = c_minus;
        Ok(self)
    }

    /// `(e, edot)` where index `i` holds `e_{i+1}`.
    pub fn spacing_errors(&self) -> (Vec<T>, Vec<T>) {
        let e = self
            .x
            .windows(2)
            .map(|w| w[0].clone() - w[1].clone())
            .collect();
        let edot = self
            .v
            .windows(2)
            .map(|w| w[0].clone() - w[1].clone())
            .collect();
        (e, edot)
    }

    /// `e_k` for `k` in `1..=N`, `None` otherwise.
    pub fn spacing_error(&self, k: usize) -> Option<T> {
        (k >= 1 && k < self.vehicles()).then(|| self.x[k - 1].clone() - self.x[k].clone())
    }

    /// `edot_k` for `k` in `1..=N`, `None` otherwise.
    pub fn spacing_rate(&self, k: usize) -> Option<T> {
        (k >= 1 && k < self.vehicles()).then(|| self.v[k - 1].clone() - self.v[k].clone())
    }

    /// Physical time `n * dt`.
    pub fn time(&self, dt: &T) -> T {
        T::from_u64(self.n).expect("step count representable") * dt.clone()
    }
}
