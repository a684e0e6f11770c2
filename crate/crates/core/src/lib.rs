//! Finite-truncation toolkit for wandering Montel theorems in free analysis:
//! matrix tuples, free polynomials, truncated `H`-valued nc functions,
//! wandering unitaries, hereditary kernels and sets of uniqueness.
//!
//! Every type is generic over the real scalar `T: Real` (`f32` or `f64`);
//! the aliases below fix `T = f64`.

// `!(x <= tol)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod freepoly;
pub mod gradedfun;
pub mod hereditary;
pub mod linalg;
pub mod ncpoints;
pub mod sampling;
pub mod scalar;
pub mod uniqueness;
pub mod wandering;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Matrix = linalg::ComplexMatrix<f64>;
pub type Tuple = ncpoints::MatrixTuple<f64>;
pub type Samples = ncpoints::SampleSet<f64>;
pub type Grid = ncpoints::ExhaustionGrid<f64>;
pub type Poly = freepoly::FreePoly<f64>;
pub type PolyMatrix = freepoly::FreePolyMatrix<f64>;
pub type Function = gradedfun::GradedFunction<f64>;
pub type Kernel = hereditary::HereditaryKernel<f64>;
pub type Sequence = wandering::SequenceSamples<f64>;
