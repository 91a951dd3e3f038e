//! Complex linear algebra kernels: permanents, determinants and the random
//! matrix ensembles used by the sampling models.

mod ensembles;
mod matrix;
mod permanent;
mod random;

pub use ensembles::{gaussian_matrix, haar_orthonormal_rows, haar_unitary};
pub use matrix::{ComplexMatrix, MatrixLiteral};
pub use permanent::{determinant, permanent_naive, permanent_ryser, NAIVE_MAX_N, RYSER_MAX_N};
pub use random::RandomSource;
