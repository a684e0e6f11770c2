//! Eigenvalues of Hermitian matrices.
//!
//! `H = A + iB` is embedded as the real symmetric `[[A, -B], [B, A]]`, whose
//! spectrum is that of `H` with every eigenvalue doubled, then diagonalized by
//! cyclic Jacobi rotations.

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues of a Hermitian matrix in ascending order.
///
/// The input is symmetrized as `(H + H*)/2` first; callers that care about
/// asymmetry should measure it separately.
pub fn hermitian_eigenvalues<T: Real>(h: &ComplexMatrix<T>) -> Result<Vec<T>> {
    if !h.is_square() {
        return Err(Error::invalid(format!("eigenvalues of a {}x{} matrix", h.rows(), h.cols())));
    }
    if !h.is_finite() {
        return Err(Error::invalid("eigenvalues of a matrix with non-finite entries"));
    }
    let n = h.rows();
    let half = T::lit(0.5);
    let m = 2 * n;
    let mut s = vec![T::zero(); m * m];
    for i in 0..n {
        for j in 0..n {
            let z = (h[(i, j)] + h[(j, i)].conj()) * half;
            s[i * m + j] = z.re;
            s[(i + n) * m + j + n] = z.re;
            s[i * m + j + n] = -z.im;
            s[(i + n) * m + j] = z.im;
        }
    }
    jacobi_symmetric(&mut s, m);
    let mut ev: Vec<T> = (0..m).map(|i| s[i * m + i]).collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(ev.into_iter().step_by(2).collect())
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue<T: Real>(h: &ComplexMatrix<T>) -> Result<T> {
    Ok(hermitian_eigenvalues(h)?[0])
}

fn jacobi_symmetric<T: Real>(s: &mut [T], m: usize) {
    let total: T = s.iter().map(|x| *x * *x).sum::<T>().sqrt();
    if total == T::zero() {
        return;
    }
    let eps = T::epsilon();
    for _ in 0..MAX_SWEEPS {
        let off: T = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| s[i * m + j] * s[i * m + j])
            .sum::<T>()
            .sqrt();
        if off <= eps * total {
            break;
        }
        for p in 0..m {
            for q in (p + 1)..m {
                let apq = s[p * m + q];
                if apq == T::zero() {
                    continue;
                }
                let app = s[p * m + p];
                let aqq = s[q * m + q];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let sign = if theta >= T::zero() { T::one() } else { -T::one() };
                let t = sign / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let sn = t * c;
                for k in 0..m {
                    let skp = s[k * m + p];
                    let skq = s[k * m + q];
                    s[k * m + p] = c * skp - sn * skq;
                    s[k * m + q] = sn * skp + c * skq;
                }
                for k in 0..m {
                    let spk = s[p * m + k];
                    let sqk = s[q * m + k];
                    s[p * m + k] = c * spk - sn * sqk;
                    s[q * m + k] = sn * spk + c * sqk;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex;

    #[test]
    fn pauli_y_spectrum() {
        let y = ComplexMatrix::<f64>::new(
            2,
            2,
            vec![Complex::new(0.0, 0.0), Complex::new(0.0, -1.0), Complex::new(0.0, 1.0), Complex::new(0.0, 0.0)],
        )
        .unwrap();
        let ev = hermitian_eigenvalues(&y).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn real_symmetric_three_by_three() {
        // [[2,1,0],[1,2,1],[0,1,2]] has eigenvalues 2 - √2, 2, 2 + √2.
        let a = ComplexMatrix::<f64>::from_real(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0]).unwrap();
        let ev = hermitian_eigenvalues(&a).unwrap();
        let r2 = 2f64.sqrt();
        for (got, want) in ev.iter().zip([2.0 - r2, 2.0, 2.0 + r2]) {
            assert!((got - want).abs() < 1e-13, "{got} vs {want}");
        }
    }
}
