//! Singular values by one-sided (Hestenes) Jacobi rotations.
//!
//! Columns of the working copy are rotated pairwise until mutually
//! orthogonal; the column norms are then the singular values. High relative
//! accuracy and no dependence on an eigen-decomposition of `A*A`.

use num_complex::Complex;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};
use crate::scalar::{czero, Real, Vector};

const MAX_SWEEPS: usize = 80;

/// Singular values in descending order. Length is `min(rows, cols)`.
pub fn singular_values<T: Real>(a: &ComplexMatrix<T>) -> Vec<T> {
    // Work on whichever orientation has fewer columns.
    let work = if a.rows() >= a.cols() { a.clone() } else { a.adjoint() };
    let mut cols: Vec<Vector<T>> = work.columns();
    orthogonalize_columns(&mut cols);
    let mut sv: Vec<T> = cols.iter().map(|c| norm(c)).collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    sv
}

fn orthogonalize_columns<T: Real>(cols: &mut [Vector<T>]) {
    let n = cols.len();
    let eps = T::epsilon();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha: T = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: T = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let g = cols[p].iter().zip(&cols[q]).fold(czero(), |acc, (x, y)| acc + x.conj() * y);
                let gabs = g.norm();
                if gabs == T::zero() || gabs <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = g.conj() / gabs;
                let two = T::one() + T::one();
                let zeta = (beta - alpha) / (two * gabs);
                let sign = if zeta >= T::zero() { T::one() } else { -T::one() };
                let t = sign / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                for i in 0..cols[p].len() {
                    let x = cols[p][i];
                    let y: Complex<T> = cols[q][i] * phase;
                    cols[p][i] = x * c - y * s;
                    cols[q][i] = x * s + y * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
}

fn norm<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

/// Largest singular value, `‖A‖ = σ_max(A)`.
pub fn operator_norm<T: Real>(a: &ComplexMatrix<T>) -> Result<T> {
    if !a.is_finite() {
        return Err(Error::invalid("operator_norm of a matrix with non-finite entries"));
    }
    Ok(op_norm(a))
}

/// Largest singular value without the finiteness check; NaN in, NaN out.
pub fn op_norm<T: Real>(a: &ComplexMatrix<T>) -> T {
    if a.cols() == 1 || a.rows() == 1 {
        return a.frobenius_norm();
    }
    singular_values(a)[0]
}

/// `σ_max / σ_min` of a square matrix; infinite when singular.
pub fn condition_number<T: Real>(a: &ComplexMatrix<T>) -> Result<T> {
    if !a.is_square() {
        return Err(Error::invalid(format!("condition number of a {}x{} matrix", a.rows(), a.cols())));
    }
    if !a.is_finite() {
        return Err(Error::invalid("condition number of a matrix with non-finite entries"));
    }
    let sv = singular_values(a);
    let smin = *sv.last().unwrap();
    if smin == T::zero() {
        return Ok(T::infinity());
    }
    Ok(sv[0] / smin)
}

/// Numerical rank: singular values above `rel_tol · σ_max`.
pub fn numerical_rank<T: Real>(a: &ComplexMatrix<T>, rel_tol: T) -> usize {
    let sv = singular_values(a);
    let cutoff = rel_tol * sv[0];
    if sv[0] == T::zero() {
        return 0;
    }
    sv.iter().filter(|&&s| s > cutoff).count()
}
