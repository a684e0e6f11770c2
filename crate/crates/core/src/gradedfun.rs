//! Truncated `H`-valued graded functions.
//!
//! With `H ≅ C^M`, a grading-`n` value is an `(n·M) × n` matrix laid out
//! H-index fastest: the coordinate `e_s ⊗ e_h` of `C^n ⊗ H` is row `s·M + h`
//! (zero-based). Under this layout `id_n ⊗ U` is `n` diagonal copies of `U`,
//! `S ⊗ id_H` is `kron(S, I_M)`, and the identification of
//! `(C^m ⊗ H) ⊕ (C^n ⊗ H)` with `C^{m+n} ⊗ H` is plain block-diagonal
//! placement.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freepoly::{FreePoly, WordCache};
use crate::linalg::{op_norm, unitarity_defect, ComplexMatrix};
use crate::ncpoints::{checked_inverse, conjugate, direct_sum, ExhaustionGrid, LevelTables, MatrixTuple, SampleSet};
use crate::scalar::Real;

type Evaluator<T> = dyn Fn(&MatrixTuple<T>) -> Result<ComplexMatrix<T>> + Send + Sync;

/// Row of `e_s ⊗ e_h` in the `C^n ⊗ C^M` layout.
pub fn layout_row(s: usize, h: usize, m: usize) -> usize {
    s * m + h
}

/// `id_n ⊗ U`.
pub fn lift_unitary<T: Real>(u: &ComplexMatrix<T>, n: usize) -> ComplexMatrix<T> {
    u.repeat_diag(n)
}

/// `S ⊗ id_H` for `H = C^m`.
pub fn lift_similarity<T: Real>(s: &ComplexMatrix<T>, m: usize) -> ComplexMatrix<T> {
    s.kron(&ComplexMatrix::identity(m))
}

/// `H`-valued graded function on `M^d`, truncated to `H = C^M`.
///
/// Evaluators must be pure; values are never cached here.
#[derive(Clone)]
pub struct GradedFunction<T: Real> {
    d: usize,
    m: usize,
    evaluator: Arc<Evaluator<T>>,
    descriptor: String,
}

impl<T: Real> fmt::Debug for GradedFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GradedFunction")
            .field("d", &self.d)
            .field("M", &self.m)
            .field("descriptor", &self.descriptor)
            .finish()
    }
}

impl<T: Real> GradedFunction<T> {
    pub fn new(
        d: usize,
        m: usize,
        descriptor: impl Into<String>,
        evaluator: impl Fn(&MatrixTuple<T>) -> Result<ComplexMatrix<T>> + Send + Sync + 'static,
    ) -> Result<Self> {
        if d == 0 || m == 0 {
            return Err(Error::invalid("d and M must be positive"));
        }
        Ok(Self { d, m, evaluator: Arc::new(evaluator), descriptor: descriptor.into() })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Truncation dimension of `H`.
    pub fn truncation(&self) -> usize {
        self.m
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    /// `u(λ)`, an `(n·M) × n` matrix.
    pub fn evaluate(&self, lambda: &MatrixTuple<T>) -> Result<ComplexMatrix<T>> {
        if lambda.d() != self.d {
            return Err(Error::invalid(format!("point has d = {}, function has d = {}", lambda.d(), self.d)));
        }
        let n = lambda.grading();
        let v = (self.evaluator)(lambda)?;
        if v.shape() != (n * self.m, n) {
            return Err(Error::invalid(format!(
                "{} returned {}x{} at grading {n}, expected {}x{n}",
                self.descriptor,
                v.rows(),
                v.cols(),
                n * self.m
            )));
        }
        Ok(v)
    }

    /// `u(λ) = c · (I_n ⊗ e_slot)`.
    pub fn constant(d: usize, m: usize, c: Complex<T>, slot: usize) -> Result<Self> {
        if slot >= m {
            return Err(Error::invalid(format!("slot {slot} outside H = C^{m}")));
        }
        Self::new(d, m, format!("constant {c} in slot {slot}"), move |lambda| {
            let n = lambda.grading();
            let mut v = ComplexMatrix::zeros(n * m, n);
            for s in 0..n {
                v[(layout_row(s, slot, m), s)] = c;
            }
            Ok(v)
        })
    }

    /// `u(λ)` with H-component `m` equal to `qs[m](λ)`:
    /// `u(λ)[s·M + m, r] = qs[m](λ)[s, r]`. Such functions are nc.
    pub fn from_scalar_polys(d: usize, qs: Vec<FreePoly<T>>) -> Result<Self> {
        if qs.is_empty() {
            return Err(Error::invalid("from_scalar_polys needs at least one polynomial"));
        }
        if let Some(q) = qs.iter().find(|q| q.min_vars() > d) {
            return Err(Error::invalid(format!("polynomial uses x{} with d = {d}", q.min_vars())));
        }
        let m = qs.len();
        let descriptor = format!("polys({})", qs.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "));
        Self::new(d, m, descriptor, move |lambda| {
            let n = lambda.grading();
            let mut cache = WordCache::new(lambda);
            let mut v = ComplexMatrix::zeros(n * m, n);
            for (h, q) in qs.iter().enumerate() {
                let component = cache.poly(q);
                for s in 0..n {
                    for r in 0..n {
                        v[(layout_row(s, h, m), r)] = component[(s, r)];
                    }
                }
            }
            Ok(v)
        })
    }

    /// Isometric inclusion `C^M ⊂ C^{M'}` onto the first `M` coordinates.
    pub fn embed(&self, target: usize) -> Result<Self> {
        if target < self.m {
            return Err(Error::Capacity { required: self.m, available: target });
        }
        let inner = self.clone();
        let m = self.m;
        Self::new(self.d, target, format!("embed[{target}]({})", self.descriptor), move |lambda| {
            let v = inner.evaluate(lambda)?;
            Ok(embed_value(&v, lambda.grading(), m, target))
        })
    }

    pub fn tabulate(&self, points: &SampleSet<T>) -> Result<Vec<ComplexMatrix<T>>> {
        points.points().iter().map(|p| self.evaluate(p)).collect()
    }

    pub fn tabulate_grid(&self, grid: &ExhaustionGrid<T>) -> Result<LevelTables<T>> {
        grid.levels().iter().map(|l| self.tabulate(l)).collect()
    }

    /// Sampled-function exchange record for the given points.
    pub fn sample(&self, points: &SampleSet<T>) -> Result<SampledFunction<T>> {
        Ok(SampledFunction {
            m: self.m,
            d: self.d,
            samples: points
                .points()
                .iter()
                .map(|p| Ok(Sample { point: p.clone(), value: self.evaluate(p)? }))
                .collect::<Result<_>>()?,
        })
    }
}

/// Pads a grading-`n` value from `H = C^m` into `C^target`.
pub fn embed_value<T: Real>(v: &ComplexMatrix<T>, n: usize, m: usize, target: usize) -> ComplexMatrix<T> {
    let mut out = ComplexMatrix::zeros(n * target, n);
    for s in 0..n {
        for h in 0..m {
            for r in 0..n {
                out[(layout_row(s, h, target), r)] = v[(layout_row(s, h, m), r)];
            }
        }
    }
    out
}

/// `U * u`, evaluating to `(id_n ⊗ U) u(λ)` at grading `n`.
pub fn unitary_action<T: Real>(unitary: &ComplexMatrix<T>, u: &GradedFunction<T>) -> Result<GradedFunction<T>> {
    if unitary.shape() != (u.m, u.m) {
        return Err(Error::invalid(format!("unitary is {}x{} but H = C^{}", unitary.rows(), unitary.cols(), u.m)));
    }
    let defect = unitarity_defect(unitary);
    if !(defect <= T::unitary_tol()) {
        return Err(Error::precondition(format!("matrix is not unitary: ‖U*U − I‖ = {defect:e}")));
    }
    let inner = u.clone();
    let unitary = unitary.clone();
    GradedFunction::new(u.d, u.m, format!("U*({})", u.descriptor), move |lambda| {
        let v = inner.evaluate(lambda)?;
        Ok(&lift_unitary(&unitary, lambda.grading()) * &v)
    })
}

/// One evaluated axiom instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NcCase<T: Real> {
    pub kind: AxiomKind,
    pub index: usize,
    pub gradings: Vec<usize>,
    pub residual: Option<T>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxiomKind {
    DirectSum,
    Similarity,
}

/// Residuals of the direct-sum and similarity axioms.
#[derive(Debug, Clone, Serialize)]
pub struct NcCheckReport<T: Real> {
    pub max_direct_sum_residual: T,
    pub max_similarity_residual: T,
    pub tol: T,
    pub cases: Vec<NcCase<T>>,
}

impl<T: Real> NcCheckReport<T> {
    pub fn passed(&self) -> bool {
        self.max_direct_sum_residual <= self.tol && self.max_similarity_residual <= self.tol
    }

    pub fn errors(&self) -> impl Iterator<Item = &NcCase<T>> {
        self.cases.iter().filter(|c| c.error.is_some())
    }
}

/// `‖u(λ ⊕ μ) − u(λ) ⊕ u(μ)‖`.
pub fn direct_sum_residual<T: Real>(u: &GradedFunction<T>, lambda: &MatrixTuple<T>, mu: &MatrixTuple<T>) -> Result<T> {
    let joint = u.evaluate(&direct_sum(lambda, mu)?)?;
    let split = ComplexMatrix::block_diag(&[&u.evaluate(lambda)?, &u.evaluate(mu)?])?;
    Ok(op_norm(&(&joint - &split)))
}

/// `‖u(SλS⁻¹) − (S ⊗ id_H) u(λ) S⁻¹‖`.
pub fn similarity_residual<T: Real>(u: &GradedFunction<T>, lambda: &MatrixTuple<T>, s: &ComplexMatrix<T>) -> Result<T> {
    let s_inv = checked_inverse(s, lambda.grading())?;
    let moved = u.evaluate(&conjugate(lambda, s)?)?;
    let transported = &(&lift_similarity(s, u.m) * &u.evaluate(lambda)?) * &s_inv;
    Ok(op_norm(&(&moved - &transported)))
}

/// Checks the direct-sum and similarity axioms on the given cases. Failing
/// evaluations are recorded per case and excluded from the maxima.
pub fn check_nc_axioms<T: Real>(
    u: &GradedFunction<T>,
    pairs: &[(MatrixTuple<T>, MatrixTuple<T>)],
    sims: &[(MatrixTuple<T>, ComplexMatrix<T>)],
    tol: T,
) -> NcCheckReport<T> {
    let mut cases = Vec::with_capacity(pairs.len() + sims.len());
    let mut max_ds = T::zero();
    let mut max_sim = T::zero();
    for (index, (l, m)) in pairs.iter().enumerate() {
        let outcome = direct_sum_residual(u, l, m);
        if let Ok(r) = &outcome {
            max_ds = max_ds.max(*r);
        }
        cases.push(case(AxiomKind::DirectSum, index, vec![l.grading(), m.grading()], outcome));
    }
    for (index, (l, s)) in sims.iter().enumerate() {
        let outcome = similarity_residual(u, l, s);
        if let Ok(r) = &outcome {
            max_sim = max_sim.max(*r);
        }
        cases.push(case(AxiomKind::Similarity, index, vec![l.grading()], outcome));
    }
    NcCheckReport { max_direct_sum_residual: max_ds, max_similarity_residual: max_sim, tol, cases }
}

fn case<T: Real>(kind: AxiomKind, index: usize, gradings: Vec<usize>, outcome: Result<T>) -> NcCase<T> {
    match outcome {
        Ok(r) => NcCase { kind, index, gradings, residual: Some(r), error: None },
        Err(e) => NcCase { kind, index, gradings, residual: None, error: Some(e.to_string()) },
    }
}

/// One sampled value in the exchange format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Sample<T: Real> {
    pub point: MatrixTuple<T>,
    pub value: ComplexMatrix<T>,
}

/// Sampled-function exchange format `{ "M", "d", "samples": [{point, value}] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SampledFunction<T: Real> {
    #[serde(rename = "M")]
    pub m: usize,
    pub d: usize,
    pub samples: Vec<Sample<T>>,
}

impl<T: Real> SampledFunction<T> {
    pub fn from_json(src: &str) -> Result<Self> {
        let f: Self = serde_json::from_str(src)?;
        for s in &f.samples {
            let n = s.point.grading();
            if s.point.d() != f.d || s.value.shape() != (n * f.m, n) {
                return Err(Error::invalid("sample shape inconsistent with declared M and d"));
            }
        }
        Ok(f)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// Lookup-table function defined exactly on the sampled points.
    pub fn into_function(self) -> Result<GradedFunction<T>> {
        let (d, m) = (self.d, self.m);
        let samples = self.samples;
        GradedFunction::new(d, m, "sampled table", move |lambda| {
            samples
                .iter()
                .find(|s| &s.point == lambda)
                .map(|s| s.value.clone())
                .ok_or_else(|| Error::invalid("point not in the sample table"))
        })
    }
}
