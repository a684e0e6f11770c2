//! Seeded random generators for matrices, tuples, unitaries, similarities
//! and polynomials.
//!
//! Entries are i.i.d. complex with real and imaginary parts uniform in
//! `[-1, 1]`, rescaled where a norm bound or polyhedron margin is requested.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::freepoly::{FreePoly, FreePolyMatrix, Word};
use crate::linalg::{extend_to_basis, orthonormal_increment, ComplexMatrix};
use crate::ncpoints::MatrixTuple;
use crate::scalar::{Real, Vector};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex<T: Real>(rng: &mut impl Rng) -> Complex<T> {
    Complex::new(T::lit(rng.gen_range(-1.0..=1.0)), T::lit(rng.gen_range(-1.0..=1.0)))
}

pub fn vector<T: Real>(rng: &mut impl Rng, len: usize) -> Vector<T> {
    (0..len).map(|_| complex(rng)).collect()
}

pub fn matrix<T: Real>(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix<T> {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex(rng))
}

/// Matrix rescaled to operator norm exactly `norm` (up to round-off).
pub fn matrix_with_norm<T: Real>(rng: &mut impl Rng, rows: usize, cols: usize, norm: T) -> ComplexMatrix<T> {
    let m = matrix::<T>(rng, rows, cols);
    let current = crate::linalg::op_norm(&m);
    if current == T::zero() {
        return m;
    }
    m.scale_real(norm / current)
}

pub fn tuple<T: Real>(rng: &mut impl Rng, d: usize, n: usize) -> MatrixTuple<T> {
    MatrixTuple::new((0..d).map(|_| matrix(rng, n, n)).collect()).expect("square coordinates")
}

/// Tuple whose coordinates all have operator norm at most `bound`.
pub fn bounded_tuple<T: Real>(rng: &mut impl Rng, d: usize, n: usize, bound: T) -> MatrixTuple<T> {
    let t = tuple::<T>(rng, d, n);
    let current = t.max_norm();
    if current <= bound || current == T::zero() {
        return t;
    }
    t.scaled(bound / current)
}

/// Haar-like unitary: orthonormalized random vectors.
pub fn unitary<T: Real>(rng: &mut impl Rng, n: usize) -> ComplexMatrix<T> {
    let cands: Vec<Vector<T>> = (0..n).map(|_| vector(rng, n)).collect();
    let ortho = orthonormal_increment(&[], &cands, T::lit(1e-6)).expect("consistent lengths");
    let full = extend_to_basis(&ortho, n).expect("orthonormal input");
    ComplexMatrix::from_columns(n, &full).expect("square")
}

/// Invertible `n × n` matrix with condition number at most `max_cond`:
/// `U diag(σ) V` with singular values log-uniform in `[1, max_cond]`.
pub fn similarity<T: Real>(rng: &mut impl Rng, n: usize, max_cond: f64) -> ComplexMatrix<T> {
    let u = unitary::<T>(rng, n);
    let v = unitary::<T>(rng, n);
    let log_max = max_cond.max(1.0).ln();
    let sigmas: Vec<Complex<T>> = (0..n)
        .map(|i| {
            let s = match i {
                0 => 1.0,
                _ => rng.gen_range(0.0..=log_max).exp(),
            };
            Complex::new(T::lit(s), T::zero())
        })
        .collect();
    &(&u * &ComplexMatrix::diagonal(&sigmas)) * &v
}

/// Random polynomial with `terms` words of length at most `max_degree`.
pub fn poly<T: Real>(rng: &mut impl Rng, d: usize, max_degree: usize, terms: usize) -> FreePoly<T> {
    let mut p = FreePoly::zero();
    for _ in 0..terms {
        let len = rng.gen_range(0..=max_degree);
        let w = Word::new((0..len).map(|_| rng.gen_range(0..d)).collect());
        p.add_term(w, complex(rng));
    }
    p
}

pub fn poly_matrix<T: Real>(
    rng: &mut impl Rng,
    d: usize,
    rows: usize,
    cols: usize,
    max_degree: usize,
    terms: usize,
) -> FreePolyMatrix<T> {
    let entries = (0..rows * cols).map(|_| poly(rng, d, max_degree, terms)).collect();
    FreePolyMatrix::new(d, rows, cols, entries).expect("letters below d")
}

/// Shrinks `lambda` by halving until `polyhedron_margin(δ, λ) ≥ min_margin`.
///
/// Fails when `δ(0)` itself is outside the requested margin, since then no
/// scaling toward the origin can help.
pub fn scale_into_polyhedron<T: Real>(
    delta: &FreePolyMatrix<T>,
    lambda: &MatrixTuple<T>,
    min_margin: T,
) -> Result<MatrixTuple<T>> {
    let mut p = lambda.clone();
    for _ in 0..200 {
        if delta.polyhedron_margin(&p)? >= min_margin {
            return Ok(p);
        }
        p = p.scaled(T::lit(0.5));
    }
    Err(Error::precondition("could not scale the point into the polyhedron; is ‖δ(0)‖ < 1?"))
}
