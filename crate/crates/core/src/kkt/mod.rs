//! Discrete first-order optimality system of a peer method: forward scheme
//! for the state, transposed scheme for the adjoint, coupled through the
//! eliminated control.

mod grid;
mod problem;
mod reference;
mod residual;
mod solver;
mod steps;

pub use grid::Grid;
pub use problem::{
    fd_jacobians, g_jacobian_or_fd, phi_jacobian_or_fd, terminal_jacobian_or_fd, BvProblem,
};
pub use reference::{reference_solution, DenseEvaluator, INTERPOLATION_POINTS};
pub use residual::{kkt_residual_of, step_b, step_set, KktResidual};
pub use solver::{
    kkt_residual, solve_kkt, DiscreteSolution, KktOptions, SolvePath, SolveStats, Strategy,
};
pub use steps::{
    adjoint_step, contract, forward_step, kron_apply, kron_apply_tr, kron_vec, start_rhs,
    terminal_rhs, STAGE_MAX_ITER, STAGE_TOL,
};

#[cfg(test)]
mod tests;
