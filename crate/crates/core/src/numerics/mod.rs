//! Dense linear algebra and LP kernels used by every solver.

mod cholesky;
mod eigen;
mod matrix;
mod simplex;

pub use cholesky::{cholesky_gram, solve_spd};
pub use eigen::{min_eigenvalue, sqrt_psd, symmetric_eigen, SymmetricEigen, PSD_TOL};
pub use matrix::{dot, norm2, DenseMatrix};
pub use simplex::{simplex_solve, LpProblem, LpSolution, RowSense};
