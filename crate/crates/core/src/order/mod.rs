//! Order conditions of the combined scheme, leading error terms, the
//! Sylvester identity relating `A` and `K`, and synthesis of standard methods.

mod conditions;
mod operators;
mod sylvester;
mod synthesis;

pub use conditions::{
    achieved_orders, achieved_orders_with_tol, adjoint_residual, condition_residual,
    endpoint_adjoint_residual, forward_residual, leading_error, start_residual, ConditionKind,
    ConditionOutcome, OrderReport, ORDER_TOL,
};
pub use operators::{
    alternating_diag, flip, nilpotent_e, pascal, pascal_inverse, shifted_pascal, vandermonde,
    vandermonde_prime, OrderOperators,
};
pub use sylvester::{
    equidistant_kernel_matrix, kernel_determinant, kernel_map, pascal_congruence_defect,
    solve_pascal_sylvester, sylvester_general, sylvester_residual, sylvester_square,
    theta_e_operators, triangular_kernel, triangular_kernel_dimension, SylvesterResidual,
};
pub use synthesis::{
    synthesis_residual, synthesize_standard, SynthesisReport, GAUGE_K2, SYNTHESIS_TOL,
};
