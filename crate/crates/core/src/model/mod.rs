//! Kernels, reactions and problem instances, with the hypothesis checks run before any solve.

mod config;
mod kernel;
mod reaction;

pub(crate) use config::node;
pub use config::{ConfigError, InitialProfile, ProblemConfig, TimeStep};
pub use kernel::{
    kernel_floor, validate_kernel, CustomKernel, KernelError, KernelFamily, KernelFloor,
    KernelSpec, FLOOR_SAMPLES, MASS_PANELS, MASS_TOLERANCE,
};
pub use reaction::{
    validate_reaction, BoxBoundFn, CustomReaction, RateFn, ReactionError, ReactionModel,
    ReactionReport, Species, THETA_SLACK,
};
