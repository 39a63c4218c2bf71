//! Exact solver for the generalized least cost influence problem.

pub mod arc_model;
pub mod cf_model;
pub mod cover_cuts;
pub mod cuts;
pub mod generator;
pub mod instance;
pub mod lift;
pub mod milp;
pub mod oracle;
pub mod power;
pub mod propagation;
pub mod rational;
pub mod report;
pub mod solve;

pub use generator::{generate_instance, GeneratorParams};
pub use instance::{Arc, Instance, InstanceError, NodeId, NodeSpec};
pub use lift::LiftedPropagation;
pub use propagation::{simulate_cascade, CascadeResult, IncentiveSolution, Propagator};
pub use rational::Rational;
pub use report::{SolveReport, Termination};
pub use solve::{solve, Formulation, SolveError, SolveOptions, SolveOutcome};
