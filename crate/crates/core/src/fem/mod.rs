//! Lagrange finite elements, assembly, and the mean-zero constrained solve.

mod assembly;
mod lagrange;
pub mod solve;
pub mod sparse;

pub use assembly::{
    assemble_load, assemble_stiffness, assemble_volume_functional, l2_error_grad, GradientError,
};
pub(crate) use assembly::tabulate;
pub use lagrange::{LagrangeSpace, ScalarField};
pub use solve::{
    check_compatibility, compatibility_ratio, is_compatible, solve_constrained, ConstrainedSolution, SolverKind,
    COMPATIBILITY_ABS_FLOOR, COMPATIBILITY_TOL,
};
pub use sparse::CsrMatrix;
