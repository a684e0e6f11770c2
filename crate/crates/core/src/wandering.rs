//! Wandering unitaries and Cauchy-subsequence extraction.
//!
//! For each function index `k`, the coefficient vectors of the sampled values
//! `u^k(λ_1), …, u^k(λ_m)` are orthonormalized incrementally, point by point.
//! The increment contributed by point `i` has dimension at most `n_i²` and is
//! sent by `U^k` into the `i`-th block of `n_i²` standard coordinates, so
//! `(id ⊗ U^k) u^k(λ_i)` lives in `C^{n_i} ⊗ C^{D_i}`, `D_i = Σ_{j≤i} n_j²`,
//! for every `k` at once. The transformed values then sit in a fixed
//! finite-dimensional space and a finite diagonal argument picks an
//! approximately Cauchy subsequence.
//!
//! All points are constrained for every `k` (not only `i ≤ k`). With finitely
//! many samples "convergence" is a residual certificate on the selected
//! indices, not a statement about infinite tails.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gradedfun::{layout_row, lift_unitary, GradedFunction};
use crate::linalg::{
    complete_to_unitary, op_norm, orthonormal_increment, unit_vector, unitarity_defect, ComplexMatrix,
};
use crate::ncpoints::{MatrixTuple, SampleRole, SampleSet};
use crate::scalar::{Real, Vector};

/// Values of `K` functions at `m` sample points, with a declared uniform bound.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSamples<T: Real> {
    points: SampleSet<T>,
    m: usize,
    values: Vec<Vec<ComplexMatrix<T>>>,
    bound: T,
}

impl<T: Real> SequenceSamples<T> {
    /// `values[k][i]` must be `(n_i·M) × n_i` with operator norm at most `bound`.
    pub fn new(points: SampleSet<T>, m: usize, values: Vec<Vec<ComplexMatrix<T>>>, bound: T) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("truncation M must be positive"));
        }
        if values.is_empty() {
            return Err(Error::invalid("need at least one function (K ≥ 1)"));
        }
        if points.is_empty() {
            return Err(Error::invalid("need at least one sample point"));
        }
        if !(bound >= T::zero()) {
            return Err(Error::invalid("bound must be a nonnegative number"));
        }
        let gradings = points.gradings();
        let slack = bound * T::lit(1e-12) + T::epsilon();
        for (k, row) in values.iter().enumerate() {
            if row.len() != gradings.len() {
                return Err(Error::invalid(format!(
                    "function {k} has {} values for {} points",
                    row.len(),
                    gradings.len()
                )));
            }
            for (i, (v, &n)) in row.iter().zip(&gradings).enumerate() {
                if v.shape() != (n * m, n) {
                    return Err(Error::invalid(format!(
                        "values[{k}][{i}] is {}x{}, expected {}x{n}",
                        v.rows(),
                        v.cols(),
                        n * m
                    )));
                }
                let norm = op_norm(v);
                if !(norm <= bound + slack) {
                    return Err(Error::invalid(format!("‖values[{k}][{i}]‖ = {norm} exceeds the bound {bound}")));
                }
            }
        }
        Ok(Self { points, m, values, bound })
    }

    /// Tabulates functions on the points. `bound` defaults to the largest
    /// sampled norm.
    pub fn from_functions(functions: &[GradedFunction<T>], points: SampleSet<T>, bound: Option<T>) -> Result<Self> {
        let Some(first) = functions.first() else {
            return Err(Error::invalid("need at least one function (K ≥ 1)"));
        };
        let m = first.truncation();
        if functions.iter().any(|f| f.truncation() != m) {
            return Err(Error::invalid("functions have different truncations"));
        }
        let values = functions.iter().map(|f| f.tabulate(&points)).collect::<Result<Vec<_>>>()?;
        let bound = bound.unwrap_or_else(|| values.iter().flatten().map(op_norm).fold(T::zero(), T::max));
        Self::new(points, m, values, bound)
    }

    pub fn points(&self) -> &SampleSet<T> {
        &self.points
    }

    pub fn gradings(&self) -> Vec<usize> {
        self.points.gradings()
    }

    pub fn truncation(&self) -> usize {
        self.m
    }

    /// Number of functions `K`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn bound(&self) -> T {
        self.bound
    }

    pub fn values(&self) -> &[Vec<ComplexMatrix<T>>] {
        &self.values
    }

    /// Values at point `i` across all `k`.
    pub fn at_point(&self, i: usize) -> Vec<ComplexMatrix<T>> {
        self.values.iter().map(|row| row[i].clone()).collect()
    }

    /// `D_m = Σ_i n_i²`, the truncation needed for the construction.
    pub fn required_truncation(&self) -> usize {
        self.gradings().iter().map(|n| n * n).sum()
    }

    /// Keeps only the listed function indices, in order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let values = indices
            .iter()
            .map(|&k| self.values.get(k).cloned().ok_or_else(|| Error::invalid(format!("index {k} out of range"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.points.clone(), self.m, values, self.bound)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&SequenceRepr {
            k: self.values.len(),
            m: self.m,
            d: self.points.d().unwrap_or(0),
            b: self.bound,
            points: self.points.points().to_vec(),
            values: self.values.clone(),
        })?)
    }

    pub fn from_json(src: &str) -> Result<Self> {
        let r: SequenceRepr<T> = serde_json::from_str(src)?;
        if r.values.len() != r.k {
            return Err(Error::invalid(format!("declared K = {} but {} value rows", r.k, r.values.len())));
        }
        if r.points.iter().any(|p| p.d() != r.d) {
            return Err(Error::invalid("point d differs from declared d"));
        }
        Self::new(SampleSet::new(r.points, SampleRole::DenseGrid)?, r.m, r.values, r.b)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "")]
struct SequenceRepr<T: Real> {
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "M")]
    m: usize,
    d: usize,
    #[serde(rename = "B")]
    b: T,
    points: Vec<MatrixTuple<T>>,
    values: Vec<Vec<ComplexMatrix<T>>>,
}

fn check_value_shape<T: Real>(value: &ComplexMatrix<T>, n: usize, m: usize) -> Result<()> {
    if value.shape() != (n * m, n) {
        return Err(Error::invalid(format!(
            "value is {}x{}, expected {}x{n} for grading {n} and M = {m}",
            value.rows(),
            value.cols(),
            n * m
        )));
    }
    Ok(())
}

/// The `n²` vectors `x_{r,s} ∈ C^M` with `u e_r = Σ_s e_s ⊗ x_{r,s}`,
/// returned in `(r, s)` lexicographic order.
pub fn coefficient_vectors<T: Real>(value: &ComplexMatrix<T>, n: usize, m: usize) -> Result<Vec<Vector<T>>> {
    check_value_shape(value, n, m)?;
    let mut out = Vec::with_capacity(n * n);
    for r in 0..n {
        for s in 0..n {
            out.push((0..m).map(|h| value[(layout_row(s, h, m), r)]).collect());
        }
    }
    Ok(out)
}

/// Inverse of [`coefficient_vectors`].
pub fn reassemble<T: Real>(xs: &[Vector<T>], n: usize, m: usize) -> Result<ComplexMatrix<T>> {
    if xs.len() != n * n || xs.iter().any(|x| x.len() != m) {
        return Err(Error::invalid(format!("need {} vectors of length {m}", n * n)));
    }
    let mut v = ComplexMatrix::zeros(n * m, n);
    for r in 0..n {
        for s in 0..n {
            for h in 0..m {
                v[(layout_row(s, h, m), r)] = xs[r * n + s][h];
            }
        }
    }
    Ok(v)
}

/// Unitary `U` on `C^M` with `(id_{n_i} ⊗ U) values[i]` supported in the
/// first `D_i` H-coordinates of every layout block.
pub fn build_unitary<T: Real>(
    values: &[ComplexMatrix<T>],
    gradings: &[usize],
    m: usize,
    rank_tol: T,
) -> Result<ComplexMatrix<T>> {
    if values.len() != gradings.len() {
        return Err(Error::invalid(format!("{} values for {} gradings", values.len(), gradings.len())));
    }
    let required: usize = gradings.iter().map(|n| n * n).sum();
    if m < required {
        return Err(Error::Capacity { required, available: m });
    }
    let mut span: Vec<Vector<T>> = Vec::new();
    let mut pairs: Vec<(Vector<T>, Vector<T>)> = Vec::new();
    let mut offset = 0;
    for (value, &n) in values.iter().zip(gradings) {
        let xs = coefficient_vectors(value, n, m)?;
        let increment = orthonormal_increment(&span, &xs, rank_tol)?;
        debug_assert!(increment.len() <= n * n);
        for (t, q) in increment.iter().enumerate() {
            pairs.push((q.clone(), unit_vector(m, offset + t)));
        }
        span.extend(increment);
        offset += n * n;
    }
    complete_to_unitary(&pairs, m, T::default_rank_tol().max(rank_tol))
}

/// Norm of the part of `value` outside `C^n ⊗ C^{cutoff}`.
pub fn containment_violation<T: Real>(value: &ComplexMatrix<T>, n: usize, m: usize, cutoff: usize) -> T {
    if cutoff >= m {
        return T::zero();
    }
    let width = m - cutoff;
    let tail = ComplexMatrix::from_fn(n * width, n, |row, r| {
        let (s, h) = (row / width, cutoff + row % width);
        value[(layout_row(s, h, m), r)]
    });
    op_norm(&tail)
}

/// Selected indices and whether they form a usable (non-singleton) subsequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Subsequence {
    pub indices: Vec<usize>,
    pub converged: bool,
}

/// Finite diagonal argument over points.
///
/// At each point the current selection is covered greedily, in index order,
/// by balls of radius `ε_i / 2` around cluster leaders; the largest cluster
/// is kept (ties go to the smallest first index). Kept values are pairwise
/// within `ε_i`. Indices are zero-based.
pub fn extract_cauchy_subsequence<T: Real>(per_point: &[Vec<ComplexMatrix<T>>], eps: &[T]) -> Result<Subsequence> {
    if per_point.len() != eps.len() {
        return Err(Error::invalid(format!("{} tolerances for {} points", eps.len(), per_point.len())));
    }
    let k = per_point.first().map(Vec::len).unwrap_or(0);
    if k == 0 {
        return Err(Error::invalid("no values to select from"));
    }
    if per_point.iter().any(|vs| vs.len() != k) {
        return Err(Error::invalid("points carry different numbers of values"));
    }
    let mut selection: Vec<usize> = (0..k).collect();
    for (values, &tol) in per_point.iter().zip(eps) {
        let radius = tol / (T::one() + T::one());
        let mut clusters: Vec<Vec<usize>> = Vec::new();
        for &idx in &selection {
            let home = clusters
                .iter_mut()
                .find(|c| values[c[0]].try_sub(&values[idx]).map(|d| op_norm(&d) <= radius).unwrap_or(false));
            match home {
                Some(c) => c.push(idx),
                None => clusters.push(vec![idx]),
            }
        }
        let mut best = 0;
        for (c, members) in clusters.iter().enumerate() {
            if members.len() > clusters[best].len() {
                best = c;
            }
        }
        selection = clusters.swap_remove(best);
    }
    let converged = selection.len() >= 2 || k == 1;
    Ok(Subsequence { indices: selection, converged })
}

/// Output of [`run`].
#[derive(Debug, Clone, Serialize)]
pub struct WanderingResult<T: Real> {
    pub unitaries: Vec<ComplexMatrix<T>>,
    pub subsequence: Vec<usize>,
    pub limits: Vec<ComplexMatrix<T>>,
    /// Max over points of the diameter of the selected transformed values.
    pub cauchy_residual: T,
    /// Max mass of a transformed value outside its `C^{n_i} ⊗ C^{D_i}` block.
    pub containment_residual: T,
    /// Max `‖U*U − I‖` over the unitaries.
    pub unitarity_defect: T,
    pub epsilon: T,
    pub converged: bool,
    #[serde(skip)]
    pub transformed: Vec<Vec<ComplexMatrix<T>>>,
}

impl<T: Real> WanderingResult<T> {
    /// `(point_index, k, ‖(id ⊗ U^k) u^k(λ_i) − limit_i‖)` for every `k`.
    pub fn trace(&self) -> Vec<(usize, usize, T)> {
        let mut out = Vec::new();
        for (i, limit) in self.limits.iter().enumerate() {
            for (k, row) in self.transformed.iter().enumerate() {
                out.push((i, k, op_norm(&(&row[i] - limit))));
            }
        }
        out
    }

    pub fn write_trace_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "point_index,k,residual_to_limit")?;
        for (i, k, r) in self.trace() {
            writeln!(w, "{i},{k},{r:e}")?;
        }
        Ok(())
    }

    /// The selected transformed values as a new sequence.
    pub fn transformed_subsequence(&self, samples: &SequenceSamples<T>) -> Result<SequenceSamples<T>> {
        let values = self.subsequence.iter().map(|&k| self.transformed[k].clone()).collect();
        SequenceSamples::new(samples.points().clone(), samples.truncation(), values, samples.bound())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Default per-point tolerance `1e-6 · B`.
pub fn default_epsilon<T: Real>(samples: &SequenceSamples<T>) -> T {
    T::lit(1e-6) * samples.bound()
}

/// Builds the wandering unitaries, applies them, and extracts a subsequence
/// whose transformed values are pairwise within `epsilon` at every point.
pub fn run<T: Real>(samples: &SequenceSamples<T>, epsilon: T, rank_tol: T) -> Result<WanderingResult<T>> {
    let gradings = samples.gradings();
    let m = samples.truncation();
    let required = samples.required_truncation();
    if m < required {
        return Err(Error::Capacity { required, available: m });
    }
    let unitaries = samples
        .values()
        .par_iter()
        .map(|row| build_unitary(row, &gradings, m, rank_tol))
        .collect::<Result<Vec<_>>>()?;

    let transformed: Vec<Vec<ComplexMatrix<T>>> = unitaries
        .iter()
        .zip(samples.values())
        .map(|(u, row)| row.iter().zip(&gradings).map(|(v, &n)| &lift_unitary(u, n) * v).collect())
        .collect();

    let mut containment = T::zero();
    for row in &transformed {
        let mut cutoff = 0;
        for (v, &n) in row.iter().zip(&gradings) {
            cutoff += n * n;
            containment = containment.max(containment_violation(v, n, m, cutoff));
        }
    }
    let defect = unitaries.iter().map(unitarity_defect).fold(T::zero(), T::max);

    let per_point: Vec<Vec<ComplexMatrix<T>>> =
        (0..gradings.len()).map(|i| transformed.iter().map(|row| row[i].clone()).collect()).collect();
    let selection = extract_cauchy_subsequence(&per_point, &vec![epsilon; gradings.len()])?;

    let mut cauchy = T::zero();
    let mut limits = Vec::with_capacity(gradings.len());
    let count = T::from_usize(selection.indices.len()).unwrap();
    for values in &per_point {
        for (a, &p) in selection.indices.iter().enumerate() {
            for &q in &selection.indices[a + 1..] {
                cauchy = cauchy.max(op_norm(&(&values[p] - &values[q])));
            }
        }
        let mut sum = values[selection.indices[0]].clone();
        for &p in &selection.indices[1..] {
            sum = &sum + &values[p];
        }
        limits.push(sum.scale_real(T::one() / count));
    }

    Ok(WanderingResult {
        unitaries,
        subsequence: selection.indices,
        limits,
        cauchy_residual: cauchy,
        containment_residual: containment,
        unitarity_defect: defect,
        epsilon,
        converged: selection.converged && cauchy <= epsilon,
        transformed,
    })
}

/// [`run`] with `ε = 1e-6·B` and the scalar type's default rank tolerance.
pub fn run_default<T: Real>(samples: &SequenceSamples<T>) -> Result<WanderingResult<T>> {
    run(samples, default_epsilon(samples), T::default_rank_tol())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex;

    type M = ComplexMatrix<f64>;

    fn column(m: usize, entries: &[(usize, f64)]) -> M {
        let mut v = M::zeros(m, 1);
        for &(i, x) in entries {
            v[(i, 0)] = Complex::new(x, 0.0);
        }
        v
    }

    fn scalar_set(xs: &[f64]) -> SampleSet<f64> {
        SampleSet::new(xs.iter().map(|&x| MatrixTuple::real_scalars(&[x]).unwrap()).collect(), SampleRole::DenseGrid)
            .unwrap()
    }

    #[test]
    fn coefficient_vectors_grading_one_is_the_column() {
        let v = column(3, &[(0, 1.0), (2, -2.0)]);
        assert_eq!(coefficient_vectors(&v, 1, 3).unwrap(), vec![v.column(0)]);
    }

    #[test]
    fn coefficient_vectors_read_known_layout() {
        // x_{r,s} = e_{(2r+s) mod 3} scaled by (r+1)(s+1)
        let (n, m) = (2, 3);
        let xs: Vec<Vector<f64>> = (0..n)
            .flat_map(|r| (0..n).map(move |s| (r, s)))
            .map(|(r, s)| {
                let mut x = vec![Complex::new(0.0, 0.0); m];
                x[(2 * r + s) % 3] = Complex::new(((r + 1) * (s + 1)) as f64, 0.0);
                x
            })
            .collect();
        let v = reassemble(&xs, n, m).unwrap();
        assert_eq!(coefficient_vectors(&v, n, m).unwrap(), xs);
        assert!(coefficient_vectors(&v, 3, m).is_err());
    }

    #[test]
    fn unitary_sends_e5_to_e1() {
        let v = column(8, &[(4, 1.0)]);
        let u = build_unitary(std::slice::from_ref(&v), &[1], 8, 1e-10).unwrap();
        assert_eq!(&u * &v, column(8, &[(0, 1.0)]));
        assert!(unitarity_defect(&u) < 1e-15);
    }

    #[test]
    fn zero_values_give_identity() {
        let u = build_unitary(&[M::zeros(4, 1), M::zeros(4, 1)], &[1, 1], 4, 1e-10).unwrap();
        assert_eq!(u, M::identity(4));
    }

    #[test]
    fn repeated_direction_adds_no_increment() {
        let v = column(5, &[(2, 1.0)]);
        let u = build_unitary(&[v.clone(), v.clone()], &[1, 1], 5, 1e-10).unwrap();
        let image = &u * &v;
        assert_eq!(image, column(5, &[(0, 1.0)]));
        assert_eq!(containment_violation(&image, 1, 5, 1), 0.0);
    }

    #[test]
    fn capacity_error_names_required_m() {
        let vals = vec![M::zeros(4, 1), M::zeros(8, 2)];
        match build_unitary(&vals, &[1, 2], 4, 1e-10) {
            Err(Error::Capacity { required, available }) => assert_eq!((required, available), (5, 4)),
            other => panic!("unexpected {other:?}"),
        }
    }

    fn scalars(xs: &[f64]) -> Vec<M> {
        xs.iter().map(|&x| M::from_real(1, 1, &[x]).unwrap()).collect()
    }

    #[test]
    fn extraction_keeps_largest_cluster() {
        let s = extract_cauchy_subsequence(&[scalars(&[0.0, 1.0, 0.0, 1.0, 0.0])], &[0.1]).unwrap();
        assert_eq!(s.indices, vec![0, 2, 4]);
        assert!(s.converged);
    }

    #[test]
    fn extraction_all_close() {
        let s = extract_cauchy_subsequence(&[scalars(&[0.0, 0.01, 0.02])], &[0.1]).unwrap();
        assert_eq!(s.indices, vec![0, 1, 2]);
    }

    #[test]
    fn extraction_singleton_is_not_converged() {
        let s = extract_cauchy_subsequence(&[scalars(&[0.0, 0.5, 1.0])], &[0.1]).unwrap();
        assert_eq!(s, Subsequence { indices: vec![0], converged: false });
    }

    #[test]
    fn extraction_refines_point_by_point() {
        let p1 = scalars(&[0.0, 0.0, 0.0, 5.0]);
        let p2 = scalars(&[1.0, 2.0, 1.0, 1.0]);
        let s = extract_cauchy_subsequence(&[p1, p2], &[0.1, 0.1]).unwrap();
        assert_eq!(s.indices, vec![0, 2]);
    }

    fn shifting(k: usize, m: usize, a: f64) -> SequenceSamples<f64> {
        let values = (0..k).map(|j| vec![column(m, &[(j, a)])]).collect();
        SequenceSamples::new(scalar_set(&[0.5]), m, values, a.abs()).unwrap()
    }

    #[test]
    fn shifting_basis_collapses_to_one_slot() {
        let res = run_default(&shifting(10, 16, 0.5)).unwrap();
        assert_eq!(res.subsequence, (0..10).collect::<Vec<_>>());
        assert_eq!(res.cauchy_residual, 0.0);
        assert!(res.converged);
        for row in &res.transformed {
            assert_eq!(row[0], column(16, &[(0, 0.5)]));
        }
    }

    #[test]
    fn constant_sequence_limit_is_transformed_value() {
        let v = column(4, &[(1, 0.3), (3, -0.4)]);
        let s = SequenceSamples::new(scalar_set(&[0.1]), 4, vec![vec![v.clone()]; 3], 0.5).unwrap();
        let res = run_default(&s).unwrap();
        assert_eq!(res.cauchy_residual, 0.0);
        let want = &lift_unitary(&res.unitaries[0], 1) * &v;
        assert!((&res.limits[0] - &want).max_abs() < 1e-16);
    }

    #[test]
    fn run_capacity_error() {
        let s =
            SequenceSamples::new(scalar_set(&[0.1, 0.2]), 1, vec![vec![M::zeros(1, 1), M::zeros(1, 1)]], 1.0).unwrap();
        assert!(matches!(run_default(&s), Err(Error::Capacity { required: 2, available: 1 })));
    }

    #[test]
    fn samples_enforce_bound_and_shape() {
        let over = SequenceSamples::new(scalar_set(&[0.1]), 2, vec![vec![column(2, &[(0, 2.0)])]], 1.0);
        assert!(over.is_err());
        let bad_shape = SequenceSamples::new(scalar_set(&[0.1]), 2, vec![vec![M::zeros(3, 1)]], 1.0);
        assert!(bad_shape.is_err());
    }

    #[test]
    fn sequence_json_round_trip() {
        let s = shifting(3, 4, 0.5);
        let js = s.to_json().unwrap();
        assert!(js.starts_with(r#"{"K":3,"M":4,"d":1,"B":0.5,"points":["#));
        assert_eq!(SequenceSamples::<f64>::from_json(&js).unwrap(), s);
    }

    #[test]
    fn trace_csv_header() {
        let res = run_default(&shifting(2, 2, 1.0)).unwrap();
        let mut buf = Vec::new();
        res.write_trace_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("point_index,k,residual_to_limit\n0,0,"));
        assert_eq!(text.lines().count(), 3);
    }
}
