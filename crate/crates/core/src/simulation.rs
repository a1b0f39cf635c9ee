//! Closed-loop stepping: controller outputs and disturbances feed the exact
//! chain update, and the controller's memory and channel signals are carried
//! to the next step.

use crate::chain::{ChainState, SimulationConfig};
use crate::controllers::{evaluate_chain, ControllerDefinition};
use crate::disturbances::DisturbanceProfile;
use crate::error::Result;
use crate::scalar::Scalar;

/// One advanced step: the state reached and the disturbance applied to get there.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord<T> {
    pub state: ChainState<T>,
    pub d1: Vec<T>,
    pub d2: Vec<T>,
}

pub struct Simulation<'a, T> {
    controller: &'a ControllerDefinition<T>,
    disturbance: &'a DisturbanceProfile<T>,
    chain_size: usize,
    dt: T,
    state: ChainState<T>,
}

impl<'a, T: Scalar> Simulation<'a, T> {
    /// Starts from the all-zero state.
    pub fn new(
        controller: &'a ControllerDefinition<T>,
        disturbance: &'a DisturbanceProfile<T>,
        config: &SimulationConfig<T>,
    ) -> Result<Self> {
        let state = ChainState::init_zero(config, controller.n_xi(), controller.n_c())?;
        Ok(Self::from_state(controller, disturbance, config.dt.clone(), state))
    }

    pub fn from_state(
        controller: &'a ControllerDefinition<T>,
        disturbance: &'a DisturbanceProfile<T>,
        dt: T,
        state: ChainState<T>,
    ) -> Self {
        Self {
            controller,
            disturbance,
            chain_size: state.chain_size(),
            dt,
            state,
        }
    }

    pub fn state(&self) -> &ChainState<T> {
        &self.state
    }

    pub fn dt(&self) -> &T {
        &self.dt
    }

    /// Disturbance applied over `(t, t + dt]` from the current step.
    pub fn current_disturbance(&self) -> (Vec<T>, Vec<T>) {
        self.disturbance
            .sample_chain(self.state.n as i64, self.chain_size, &self.dt)
    }

    /// Advances one step and returns the record of it.
    pub fn advance(&mut self) -> Result<StepRecord<T>> {
        let (d1, d2) = self.current_disturbance();
        let outputs = evaluate_chain(self.controller, &self.state, &self.dt)?;
        let (input, next) = outputs.into_step_input(d1.clone(), d2.clone());
        let state = self
            .state
            .step(&input, &self.dt)?
            .with_controller_state(next.xi, next.c_plus, next.c_minus)?;
        self.state = state.clone();
        Ok(StepRecord { state, d1, d2 })
    }

    /// States at steps `0..=steps`, starting with the current one.
    pub fn run(&mut self, steps: usize) -> Result<Vec<ChainState<T>>> {
        let mut states = Vec::with_capacity(steps + 1);
        states.push(self.state.clone());
        for _ in 0..steps {
            states.push(self.advance()?.state);
        }
        Ok(states)
    }

    /// Advances `steps` times keeping only the final state.
    pub fn run_to_end(&mut self, steps: usize) -> Result<&ChainState<T>> {
        for _ in 0..steps {
            self.advance()?;
        }
        Ok(&self.state)
    }
}
