//! Hereditary kernels on same-grading pairs, the cone `P` of kernels
//! `u(μ)*u(λ)`, the model cone over a polynomial polyhedron, and closure
//! recovery for sampled sequences.
//!
//! The model-cone element for a `J × L` matrix polynomial `δ` is
//!
//! ```text
//! (id_L ⊗ u(μ))* (id − δ(μ)*δ(λ) ⊗ id_H) (id_L ⊗ u(λ))
//! ```
//!
//! on `C^L ⊗ C^n`, with `C^L ⊗ C^n` ordered leg-major (the block layout of
//! `δ(λ)`) and `H` fastest inside, so `id_L ⊗ u(λ)` is `L` diagonal copies of
//! `u(λ)`. For square `δ` the leg multiplier is `J = L`.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::freepoly::FreePolyMatrix;
use crate::gradedfun::GradedFunction;
use crate::linalg::{op_norm, ComplexMatrix};
use crate::ncpoints::{MatrixTuple, SampleSet};
use crate::scalar::Real;
use crate::wandering::{self, SequenceSamples};

type KernelFn<T> = dyn Fn(&MatrixTuple<T>, &MatrixTuple<T>) -> Result<ComplexMatrix<T>> + Send + Sync;

/// A function on pairs `(λ, μ)` of equal grading `n` with values of size
/// `(g·n) × (g·n)`.
#[derive(Clone)]
pub struct HereditaryKernel<T: Real> {
    d: usize,
    g: usize,
    evaluator: Arc<KernelFn<T>>,
    descriptor: String,
}

impl<T: Real> fmt::Debug for HereditaryKernel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HereditaryKernel")
            .field("d", &self.d)
            .field("g", &self.g)
            .field("descriptor", &self.descriptor)
            .finish()
    }
}

impl<T: Real> HereditaryKernel<T> {
    pub fn new(
        d: usize,
        g: usize,
        descriptor: impl Into<String>,
        evaluator: impl Fn(&MatrixTuple<T>, &MatrixTuple<T>) -> Result<ComplexMatrix<T>> + Send + Sync + 'static,
    ) -> Result<Self> {
        if d == 0 || g == 0 {
            return Err(Error::invalid("kernel needs d ≥ 1 and g ≥ 1"));
        }
        Ok(Self { d, g, evaluator: Arc::new(evaluator), descriptor: descriptor.into() })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Grading multiplier: 1 for cone `P`, the leg dimension for the model cone.
    pub fn multiplier(&self) -> usize {
        self.g
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    pub fn evaluate(&self, lambda: &MatrixTuple<T>, mu: &MatrixTuple<T>) -> Result<ComplexMatrix<T>> {
        if lambda.d() != self.d || mu.d() != self.d {
            return Err(Error::invalid(format!("kernel expects d = {}, got {} and {}", self.d, lambda.d(), mu.d())));
        }
        let n = lambda.grading();
        if mu.grading() != n {
            return Err(Error::invalid(format!("kernel defined on equal gradings only, got {n} and {}", mu.grading())));
        }
        let v = (self.evaluator)(lambda, mu)?;
        let size = self.g * n;
        if v.shape() != (size, size) {
            return Err(Error::invalid(format!("kernel value is {}x{}, expected {size}x{size}", v.rows(), v.cols())));
        }
        Ok(v)
    }
}

/// `u(μ)* u(λ)` from two sampled values.
pub fn cone_p_value<T: Real>(u_lambda: &ComplexMatrix<T>, u_mu: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    u_mu.adjoint().try_mul(u_lambda)
}

/// Model-cone value from sampled `δ` and `u` values at `λ` and `μ`.
pub fn model_cone_value<T: Real>(
    delta_lambda: &ComplexMatrix<T>,
    delta_mu: &ComplexMatrix<T>,
    u_lambda: &ComplexMatrix<T>,
    u_mu: &ComplexMatrix<T>,
    m: usize,
) -> Result<ComplexMatrix<T>> {
    let n = u_lambda.cols();
    if u_lambda.shape() != (n * m, n) || u_mu.shape() != (n * m, n) {
        return Err(Error::invalid("u values do not match the grading and truncation"));
    }
    if delta_lambda.shape() != delta_mu.shape()
        || !delta_lambda.rows().is_multiple_of(n)
        || !delta_lambda.cols().is_multiple_of(n)
    {
        return Err(Error::invalid("δ values do not match the grading"));
    }
    let legs = delta_lambda.cols() / n;
    let lift_l = u_lambda.repeat_diag(legs);
    let lift_m = u_mu.repeat_diag(legs);
    let gram = delta_mu.adjoint().try_mul(delta_lambda)?;
    let middle = ComplexMatrix::identity(legs * n * m).try_sub(&gram.kron(&ComplexMatrix::identity(m)))?;
    lift_m.adjoint().try_mul(&middle)?.try_mul(&lift_l)
}

/// Cone-`P` kernel `A(λ, μ) = u(μ)* u(λ)`.
pub fn kernel_from_function<T: Real>(u: &GradedFunction<T>) -> HereditaryKernel<T> {
    let f = u.clone();
    HereditaryKernel {
        d: u.d(),
        g: 1,
        descriptor: format!("u(μ)*u(λ), u = {}", u.descriptor()),
        evaluator: Arc::new(move |l, m| cone_p_value(&f.evaluate(l)?, &f.evaluate(m)?)),
    }
}

/// Model-cone kernel for `δ` and `u`, with multiplier `g = δ.cols()`.
pub fn model_cone_element<T: Real>(delta: &FreePolyMatrix<T>, u: &GradedFunction<T>) -> Result<HereditaryKernel<T>> {
    if delta.d() != u.d() {
        return Err(Error::invalid(format!("δ has d = {} but u has d = {}", delta.d(), u.d())));
    }
    let (dl, f) = (delta.clone(), u.clone());
    let m = u.truncation();
    Ok(HereditaryKernel {
        d: u.d(),
        g: delta.cols(),
        descriptor: format!("model cone, δ = {delta}, u = {}", u.descriptor()),
        evaluator: Arc::new(move |l, mu| {
            model_cone_value(&dl.evaluate(l)?, &dl.evaluate(mu)?, &f.evaluate(l)?, &f.evaluate(mu)?, m)
        }),
    })
}

fn check_compatible<T: Real>(
    a: &HereditaryKernel<T>,
    b: &HereditaryKernel<T>,
    grid: &SampleSet<T>,
) -> Result<Vec<(usize, usize)>> {
    if a.d != b.d || a.g != b.g {
        return Err(Error::invalid(format!("kernels differ in (d, g): ({}, {}) vs ({}, {})", a.d, a.g, b.d, b.g)));
    }
    let pairs = grid.same_grading_pairs();
    if pairs.is_empty() {
        return Err(Error::invalid("grid has no same-grading pairs"));
    }
    Ok(pairs)
}

/// `((i, j), ‖A(λ_i, λ_j) − B(λ_i, λ_j)‖)` over all same-grading pairs.
pub fn kernel_distance_trace<T: Real>(
    a: &HereditaryKernel<T>,
    b: &HereditaryKernel<T>,
    grid: &SampleSet<T>,
) -> Result<Vec<((usize, usize), T)>> {
    let pts = grid.points();
    check_compatible(a, b, grid)?
        .into_iter()
        .map(|(i, j)| {
            let diff = a.evaluate(&pts[i], &pts[j])?.try_sub(&b.evaluate(&pts[i], &pts[j])?)?;
            Ok(((i, j), op_norm(&diff)))
        })
        .collect()
}

/// Max over same-grading pairs of the grid of `‖A(λ, μ) − B(λ, μ)‖`.
pub fn kernel_distance<T: Real>(a: &HereditaryKernel<T>, b: &HereditaryKernel<T>, grid: &SampleSet<T>) -> Result<T> {
    Ok(kernel_distance_trace(a, b, grid)?.into_iter().map(|(_, x)| x).fold(T::zero(), T::max))
}

/// Max over same-grading pairs of `‖A(λ, μ)* − A(μ, λ)‖`.
pub fn hermitian_defect<T: Real>(a: &HereditaryKernel<T>, grid: &SampleSet<T>) -> Result<T> {
    let pts = grid.points();
    let mut worst = T::zero();
    for (i, j) in check_compatible(a, a, grid)? {
        let diff = a.evaluate(&pts[i], &pts[j])?.adjoint().try_sub(&a.evaluate(&pts[j], &pts[i])?)?;
        worst = worst.max(op_norm(&diff));
    }
    Ok(worst)
}

#[derive(Debug, Clone)]
pub enum ClosureMode<T: Real> {
    ConeP,
    ModelCone(FreePolyMatrix<T>),
}

impl<T: Real> ClosureMode<T> {
    pub fn name(&self) -> &'static str {
        match self {
            ClosureMode::ConeP => "cone-P",
            ClosureMode::ModelCone(_) => "model-cone",
        }
    }
}

/// Result of [`closure_recover`].
#[derive(Debug, Clone, Serialize)]
pub struct ClosureReport<T: Real> {
    pub mode: String,
    /// Distance between the kernel of the recovered limits and the mean of
    /// the kernels over the tail of the selected subsequence.
    pub residual: T,
    pub pairs_evaluated: usize,
    pub limits: Vec<ComplexMatrix<T>>,
    /// Max over `k` and pairs of the change in the kernel under `U^k`.
    pub invariance_residual: T,
    pub cauchy_residual: T,
    pub subsequence: Vec<usize>,
    /// Polyhedron margins of the grid points (model-cone mode only).
    pub margins: Vec<T>,
    #[serde(skip)]
    pub pair_distances: Vec<((usize, usize), T)>,
}

impl<T: Real> ClosureReport<T> {
    pub fn write_trace_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "pair_index,distance")?;
        for (p, (_, x)) in self.pair_distances.iter().enumerate() {
            writeln!(w, "{p},{x:e}")?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Sample index of every grid point (exact match, first occurrence).
fn locate<T: Real>(grid: &SampleSet<T>, samples: &SequenceSamples<T>) -> Result<Vec<usize>> {
    let pts = samples.points().points();
    grid.points()
        .iter()
        .enumerate()
        .map(|(g, p)| {
            pts.iter()
                .position(|q| q == p)
                .ok_or_else(|| Error::invalid(format!("grid point {g} is not among the sample points")))
        })
        .collect()
}

/// Normalizes a sequence with constant-ish kernels by wandering unitaries and
/// checks that the kernel of the recovered limit reproduces the sequence's
/// kernels on the grid.
pub fn closure_recover<T: Real>(
    samples: &SequenceSamples<T>,
    grid: &SampleSet<T>,
    mode: &ClosureMode<T>,
    epsilon: T,
) -> Result<ClosureReport<T>> {
    let index = locate(grid, samples)?;
    let m = samples.truncation();
    let pts = samples.points().points();

    let (deltas, margins) = match mode {
        ClosureMode::ConeP => (Vec::new(), Vec::new()),
        ClosureMode::ModelCone(delta) => {
            if samples.points().d() != Some(delta.d()) {
                return Err(Error::invalid("δ and the samples have different d"));
            }
            let deltas = pts.iter().map(|p| delta.evaluate(p)).collect::<Result<Vec<_>>>()?;
            let margins: Vec<T> = index.iter().map(|&i| T::one() - op_norm(&deltas[i])).collect();
            if let Some(g) = margins.iter().position(|&x| !(x > T::zero())) {
                return Err(Error::precondition(format!("grid point {g} has polyhedron margin {} ≤ 0", margins[g])));
            }
            (deltas, margins)
        }
    };
    let kernel = |vals: &dyn Fn(usize) -> ComplexMatrix<T>, i: usize, j: usize| -> Result<ComplexMatrix<T>> {
        match mode {
            ClosureMode::ConeP => cone_p_value(&vals(i), &vals(j)),
            ClosureMode::ModelCone(_) => model_cone_value(&deltas[i], &deltas[j], &vals(i), &vals(j), m),
        }
    };

    let result = wandering::run(samples, epsilon, T::default_rank_tol())?;
    if !result.converged {
        return Err(Error::NotConverged(format!(
            "selected {} of {} indices, cauchy residual {:e} vs ε = {:e}",
            result.subsequence.len(),
            samples.len(),
            result.cauchy_residual,
            epsilon
        )));
    }

    let pairs: Vec<(usize, usize)> = grid.same_grading_pairs().into_iter().map(|(a, b)| (index[a], index[b])).collect();
    if pairs.is_empty() {
        return Err(Error::invalid("grid has no same-grading pairs"));
    }

    let mut invariance = T::zero();
    for (raw, moved) in samples.values().iter().zip(&result.transformed) {
        for &(i, j) in &pairs {
            let a = kernel(&|p| raw[p].clone(), i, j)?;
            let b = kernel(&|p| moved[p].clone(), i, j)?;
            invariance = invariance.max(op_norm(&(&a - &b)));
        }
    }

    let sel = &result.subsequence;
    let tail = &sel[sel.len() / 2..];
    let weight = T::one() / T::from_usize(tail.len()).unwrap();
    let mut pair_distances = Vec::with_capacity(pairs.len());
    for (&(i, j), &gpair) in pairs.iter().zip(&grid.same_grading_pairs()) {
        let recovered = kernel(&|p| result.limits[p].clone(), i, j)?;
        let mut mean = ComplexMatrix::zeros(recovered.rows(), recovered.cols());
        for &k in tail {
            let row = &samples.values()[k];
            mean = &mean + &kernel(&|p| row[p].clone(), i, j)?.scale_real(weight);
        }
        pair_distances.push((gpair, op_norm(&(&recovered - &mean))));
    }
    let residual = pair_distances.iter().map(|&(_, x)| x).fold(T::zero(), T::max);

    Ok(ClosureReport {
        mode: mode.name().to_string(),
        residual,
        pairs_evaluated: pairs.len(),
        limits: index.iter().map(|&i| result.limits[i].clone()).collect(),
        invariance_residual: invariance,
        cauchy_residual: result.cauchy_residual,
        subsequence: result.subsequence,
        margins,
        pair_distances,
    })
}
