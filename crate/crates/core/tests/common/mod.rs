#![allow(dead_code)]

use ncmontel_core::freepoly::FreePoly;
use ncmontel_core::gradedfun::{layout_row, GradedFunction};
use ncmontel_core::linalg::{op_norm, ComplexMatrix};
use ncmontel_core::ncpoints::{MatrixTuple, SampleRole, SampleSet};
use ncmontel_core::sampling::{self, SeededRng};
use ncmontel_core::wandering::SequenceSamples;
use num_complex::Complex;

pub type M = ComplexMatrix<f64>;

pub fn scalar_set(xs: &[f64]) -> SampleSet<f64> {
    SampleSet::new(xs.iter().map(|&x| MatrixTuple::real_scalars(&[x]).unwrap()).collect(), SampleRole::DenseGrid)
        .unwrap()
}

/// `values[k] = a·e_k` at the single point `(0.5)`.
pub fn shifting_sequence(k: usize, m: usize, a: f64) -> SequenceSamples<f64> {
    let values = (0..k)
        .map(|j| {
            let mut v = M::zeros(m, 1);
            v[(j, 0)] = Complex::new(a, 0.0);
            vec![v]
        })
        .collect();
    SequenceSamples::new(scalar_set(&[0.5]), m, values, a.abs()).unwrap()
}

/// Function built from `slots` random scalar polynomials.
pub fn random_poly_function(rng: &mut SeededRng, d: usize, slots: usize, max_degree: usize) -> GradedFunction<f64> {
    let qs: Vec<FreePoly<f64>> = (0..slots).map(|_| sampling::poly(rng, d, max_degree, 4)).collect();
    GradedFunction::from_scalar_polys(d, qs).unwrap()
}

/// Moves every H-coordinate `h` of a grading-`n` value to `h + shift`.
pub fn shift_value(v: &M, n: usize, m: usize, shift: usize) -> M {
    let mut out = M::zeros(n * m, n);
    for s in 0..n {
        for h in 0..m - shift {
            for r in 0..n {
                out[(layout_row(s, h + shift, m), r)] = v[(layout_row(s, h, m), r)];
            }
        }
    }
    out
}

/// Points with mixed gradings and small norms.
pub fn mixed_points(rng: &mut SeededRng, d: usize, gradings: &[usize], bound: f64) -> SampleSet<f64> {
    let pts = gradings.iter().map(|&n| sampling::bounded_tuple(rng, d, n, bound)).collect();
    SampleSet::new(pts, SampleRole::DenseGrid).unwrap()
}

/// `u^k = (id ⊗ S_k) u` for isometric shifts `S_k` by `k·base_m` slots: the
/// kernels `u^k(μ)*u^k(λ)` do not depend on `k`, the values wander off.
pub fn drifting_sequence(u: &GradedFunction<f64>, points: &SampleSet<f64>, k: usize, m: usize) -> SequenceSamples<f64> {
    let base_m = u.truncation();
    assert!(base_m * k <= m, "drift needs M ≥ K·m0");
    let wide = u.embed(m).unwrap();
    let base = wide.tabulate(points).unwrap();
    let gradings = points.gradings();
    let values: Vec<Vec<M>> =
        (0..k).map(|j| base.iter().zip(&gradings).map(|(v, &n)| shift_value(v, n, m, j * base_m)).collect()).collect();
    let bound = base.iter().map(op_norm).fold(0.0, f64::max);
    SequenceSamples::new(points.clone(), m, values, bound).unwrap()
}

/// Random sequence with values of operator norm at most `bound`.
pub fn random_sequence(
    rng: &mut SeededRng,
    gradings: &[usize],
    m: usize,
    k: usize,
    bound: f64,
) -> SequenceSamples<f64> {
    let points = mixed_points(rng, 2, gradings, 0.5);
    let values =
        (0..k).map(|_| gradings.iter().map(|&n| sampling::matrix_with_norm(rng, n * m, n, bound)).collect()).collect();
    SequenceSamples::new(points, m, values, bound).unwrap()
}
