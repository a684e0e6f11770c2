//! Orthonormal increments and unitary completion.

use num_complex::Complex;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};
use crate::scalar::{cone, czero, Real, Vector};

/// `⟨x, y⟩ = Σ conj(x_i) y_i`, conjugate-linear in the first slot.
pub fn dot<T: Real>(x: &[Complex<T>], y: &[Complex<T>]) -> Complex<T> {
    x.iter().zip(y).fold(czero(), |acc, (a, b)| acc + a.conj() * b)
}

pub fn vec_norm<T: Real>(x: &[Complex<T>]) -> T {
    x.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

pub fn unit_vector<T: Real>(dim: usize, index: usize) -> Vector<T> {
    let mut v = vec![czero(); dim];
    v[index] = cone();
    v
}

/// Largest deviation of the Gram matrix of `vs` from the identity.
pub fn gram_deviation<T: Real>(vs: &[Vector<T>]) -> T {
    let mut worst = T::zero();
    for (i, a) in vs.iter().enumerate() {
        for (j, b) in vs.iter().enumerate().skip(i) {
            let target = if i == j { cone() } else { czero() };
            worst = worst.max((dot(a, b) - target).norm());
        }
    }
    worst
}

fn check_lengths<T: Real>(vs: &[Vector<T>], len: usize, what: &str) -> Result<()> {
    match vs.iter().find(|v| v.len() != len) {
        Some(v) => Err(Error::invalid(format!("{what} vector of length {} where {len} expected", v.len()))),
        None => Ok(()),
    }
}

/// Orthonormal basis of `span(existing ∪ candidates) ⊖ span(existing)`.
///
/// Candidates are processed in order with two passes of classical
/// Gram–Schmidt each; a candidate is dropped when its residual norm is at
/// most `rank_tol` times the largest candidate norm.
pub fn orthonormal_increment<T: Real>(
    existing: &[Vector<T>],
    candidates: &[Vector<T>],
    rank_tol: T,
) -> Result<Vec<Vector<T>>> {
    let Some(len) = existing.first().or(candidates.first()).map(Vec::len) else {
        return Ok(Vec::new());
    };
    check_lengths(existing, len, "existing")?;
    check_lengths(candidates, len, "candidate")?;
    let check_tol = rank_tol.max(T::epsilon() * T::lit(64.0 * len as f64));
    if gram_deviation(existing) > check_tol {
        return Err(Error::precondition("existing vectors are not orthonormal"));
    }

    let scale = candidates.iter().map(|c| vec_norm(c)).fold(T::zero(), T::max);
    if scale == T::zero() {
        return Ok(Vec::new());
    }
    let threshold = rank_tol * scale;
    let mut accepted: Vec<Vector<T>> = Vec::new();
    for c in candidates {
        let mut v = c.clone();
        for _ in 0..2 {
            for q in existing.iter().chain(&accepted) {
                let p = dot(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi = *vi - qi * p;
                }
            }
        }
        let r = vec_norm(&v);
        if r > threshold {
            accepted.push(v.into_iter().map(|z| z / r).collect());
        }
    }
    Ok(accepted)
}

/// Extends an orthonormal set to a basis of `C^dim` with standard basis
/// vectors tried in index order.
pub fn extend_to_basis<T: Real>(vs: &[Vector<T>], dim: usize) -> Result<Vec<Vector<T>>> {
    // A vector with residual ≥ 1/√dim always exists while the span is
    // deficient, so this threshold never stalls.
    let threshold = T::lit(0.5 / (dim as f64).sqrt());
    let basis: Vec<Vector<T>> = (0..dim).map(|i| unit_vector(dim, i)).collect();
    let extra = orthonormal_increment(vs, &basis, threshold)?;
    let mut all = vs.to_vec();
    all.extend(extra);
    if all.len() != dim {
        return Err(Error::precondition(format!("basis extension produced {} of {dim} vectors", all.len())));
    }
    Ok(all)
}

/// A `dim × dim` unitary with `U · source_j = target_j` for every pair.
///
/// Both orthonormal families are extended to full bases and the two
/// basis-change unitaries are composed: `U = T S*`.
pub fn complete_to_unitary<T: Real>(pairs: &[(Vector<T>, Vector<T>)], dim: usize, tol: T) -> Result<ComplexMatrix<T>> {
    if dim == 0 {
        return Err(Error::invalid("unitary of dimension 0"));
    }
    if pairs.len() > dim {
        return Err(Error::invalid(format!("{} constraints exceed dimension {dim}", pairs.len())));
    }
    if pairs.is_empty() {
        return Ok(ComplexMatrix::identity(dim));
    }
    let sources: Vec<Vector<T>> = pairs.iter().map(|p| p.0.clone()).collect();
    let targets: Vec<Vector<T>> = pairs.iter().map(|p| p.1.clone()).collect();
    check_lengths(&sources, dim, "source")?;
    check_lengths(&targets, dim, "target")?;
    if gram_deviation(&sources) > tol {
        return Err(Error::precondition("source vectors are not orthonormal"));
    }
    if gram_deviation(&targets) > tol {
        return Err(Error::precondition("target vectors are not orthonormal"));
    }
    let s = ComplexMatrix::from_columns(dim, &extend_to_basis(&sources, dim)?)?;
    let t = ComplexMatrix::from_columns(dim, &extend_to_basis(&targets, dim)?)?;
    Ok(&t * &s.adjoint())
}

/// `‖U*U − I‖` in operator norm.
pub fn unitarity_defect<T: Real>(u: &ComplexMatrix<T>) -> T {
    let g = &u.adjoint() * u;
    super::svd::op_norm(&(&g - &ComplexMatrix::identity(u.cols())))
}
