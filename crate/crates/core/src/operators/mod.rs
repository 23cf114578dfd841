//! Measurement operators, NUGS solves, the gridding baseline and error metrics.

pub mod gridding;
pub mod metrics;
pub mod signal;
pub mod solve;
pub mod system;

pub use gridding::{gridding_from_measurements, gridding_reconstruct};
pub use metrics::{error_panels, l2_error, project, projection_error, space_error};
pub use signal::{named_signal, Signal, SIGNAL_NAMES};
pub use solve::{
    solve_dense_auto, solve_nugs, solve_svd, Solution, SolveMethod, SolveOptions, DEFAULT_TOL,
    SVD_SWITCH_KAPPA,
};
pub use system::{
    build_matrix, build_system, build_system_with_limit, measure, normal_matrix,
    perturb_measurements, FactoredOperator, LinearOperator, MeasurementSystem,
    DEFAULT_MEMORY_LIMIT,
};
