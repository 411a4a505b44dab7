//! Small dense real/complex linear algebra used by every other module.

mod banded;
mod dense;
mod eig;
mod lstsq;
mod lu;
mod scalar;

pub use banded::{BandedLu, BandedMatrix};
pub use dense::{CMatrix, DenseMatrix, RMatrix};
pub use eig::{
    characteristic_polynomial, eig_small, horner, matrix_inf_norm, numeric_rank, polynomial_roots,
    sort_eigenvalues, spectral_radius, EIG_MAX_DIM,
};
pub use lstsq::{lstsq, LeastSquares};
pub use lu::{determinant, inverse, solve_dense, Lu, SINGULAR_RTOL};
pub use scalar::Scalar;
