//! Master/slave partition and reduced models.

mod manifold;
mod partition;
mod report;
mod system;

pub use manifold::{
    reduce_manifold, solve_manifold, ManifoldConfig, ManifoldMap, ManifoldSolver, TransientMode, DEFAULT_MAX_ORDER,
    DEFAULT_RELATIVE_TOL,
};
pub use partition::{
    default_masters, partition, recover_states, reduce_linear, CompiledModel, PartitionedSystem, Provenance,
    ReducedModel, MAX_IMAGINARY_LEAK,
};
pub use report::{CheckStatus, Condition, ReducibilityCheck, ReducibilityReport, Scope};
pub use system::{
    transform_system, ForcingTerm, NonlinearTerm, QPSystem, TransformConfig, TransformedSystem,
};
