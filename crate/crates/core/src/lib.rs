//! Numerical solver for a two-species free boundary problem with nonlocal diffusion
//! for the first species and local diffusion for the second, on a common moving
//! interval `[g(t), h(t)]`.
//!
//! The moving domain is mapped onto `[-1, 1]`. Each step advances the nonlocal
//! equation explicitly and the local one by a θ-scheme, iterating on the front
//! positions until they settle.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod io;
pub mod model;
pub mod solvers;
pub mod stepper;
pub mod transform;
pub mod validation;

pub use bounds::{check_gamma_membership, compute_bounds, AprioriBounds, GammaReport};
pub use model::{
    validate_kernel, validate_reaction, ConfigError, InitialProfile, KernelError, KernelSpec,
    ProblemConfig, ReactionError, ReactionModel, TimeStep,
};
pub use solvers::SolverError;
pub use stepper::{front_speeds, run, Simulation, Trajectory};
pub use transform::{phys_of_ref, ref_of_phys, xi, zeta, FrontPair, ReferenceGrid};
pub use validation::{comparison_test, convergence_study, oracle_run, ValidationError};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Reaction(#[from] ReactionError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
