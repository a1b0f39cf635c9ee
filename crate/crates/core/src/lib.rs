//! Deterministic simulator and falsification harness for chains of
//! discrete-time double integrators driven by homogeneous controllers that
//! see only relative measurements.
//!
//! The dynamics and controllers are generic over [`Scalar`], so the same code
//! runs in `f64` for experiments and in exact rationals ([`Exact`]) when an
//! identity must hold bit for bit. Type aliases below fix the common choices.

pub mod analysis;
pub mod chain;
pub mod controllers;
pub mod criterion;
pub mod disturbances;
pub mod error;
pub mod harness;
pub mod properties;
pub mod scalar;
pub mod simulation;

pub use chain::{ChainState, SimulationConfig, StepInput};
pub use controllers::{
    boundary_adapt, evaluate_chain, nonlinear_comm_controller, pd_asymmetric, pd_symmetric,
    zero_controller, ControllerDefinition, NeighborhoodWindow,
};
pub use criterion::StabilityCriterion;
pub use disturbances::{admissible_alpha, disturbance_norm, AmplitudeBudget, DisturbanceKind, DisturbanceProfile};
pub use error::{Error, Result};
pub use scalar::{ratio, Exact, Real, Scalar};
pub use simulation::Simulation;

pub type Chain = ChainState<f64>;
pub type ChainF32 = ChainState<f32>;
pub type ExactChain = ChainState<Exact>;

pub type Controller = ControllerDefinition<f64>;
pub type ControllerF32 = ControllerDefinition<f32>;
pub type ExactController = ControllerDefinition<Exact>;

pub type Disturbance = DisturbanceProfile<f64>;
pub type ExactDisturbance = DisturbanceProfile<Exact>;

pub type Config = SimulationConfig<f64>;
pub type ExactConfig = SimulationConfig<Exact>;
