//! Dense complex linear algebra: operator norms, Hermitian spectra,
//! orthonormal increments and unitary completion.

mod eigen;
mod matrix;
mod orth;
mod svd;

pub use eigen::{hermitian_eigenvalues, min_eigenvalue};
pub use matrix::ComplexMatrix;
pub use orth::{
    complete_to_unitary, dot, extend_to_basis, gram_deviation, orthonormal_increment, unit_vector, unitarity_defect,
    vec_norm,
};
pub use svd::{condition_number, numerical_rank, op_norm, operator_norm, singular_values};
