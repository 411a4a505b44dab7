//! Method coefficients, derived boundary vectors, and the order-compatibility
//! polynomials.

mod catalog;
mod file;
mod poly;

pub use catalog::{
    bdf3_standard, builtin_by_name, builtin_suite, derive_v, BuiltinMethod, Nodes, PeerMethodSuite,
    StageMatrixSet, StageRole, NODE_GAP_TOL, PEER3O32W_C2, SUM_TOL,
};
pub use file::{
    load_method_file, load_suite, parse_method_file, suite_to_string, write_method_file, MethodFile,
};
pub use poly::{
    q_equidistant_coefficients, q_equidistant_factored, q_equidistant_roots, q_gradient,
    q_polynomial, qn_bdf3_cubic, qn_bdf3_roots,
};
