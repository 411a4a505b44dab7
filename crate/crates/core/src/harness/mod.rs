//! Convergence studies, CSV output and the command-line front end.

pub mod cli;
mod convergence;
mod csv_io;

pub use convergence::{
    converge_studies, converge_study, converge_with_reference, reference_is_adequate,
    solution_errors, ConvergenceTable, ReferencePair, NREF_FACTOR, NREF_FACTOR_MAX,
    REFERENCE_AGREEMENT,
};
pub use csv_io::{
    convergence_csv, fmt_f64, parse_convergence_csv, scan_csv, solution_csv, ConvergenceRow,
};
