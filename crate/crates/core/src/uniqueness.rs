//! Sets of uniqueness relative to a finite polynomial class, weak probes, and
//! the weak-plus-Gram to norm convergence check.
//!
//! Uniqueness for all holomorphic functions cannot be decided from finitely
//! many points. Here it is decided relative to the span of the words of
//! length at most `D`: a point set is a set of uniqueness for that class iff
//! the evaluation map `p ↦ (p(λ_i))_i` is injective, i.e. iff the stacked
//! evaluation matrix has full column rank.
//!
//! Likewise a finite probe set cannot certify weak convergence in an
//! infinite-dimensional `H`; reports say "probes converge", never "weakly
//! convergent", and flag the gap as `inconclusive-weak` when it matters.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::freepoly::{Word, WordCache};
use crate::gradedfun::layout_row;
use crate::linalg::{dot, numerical_rank, op_norm, ComplexMatrix};
use crate::ncpoints::SampleSet;
use crate::scalar::Real;
use crate::wandering::SequenceSamples;

/// Words of length at most `D` in `d` letters, in canonical order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionClass {
    d: usize,
    max_degree: usize,
    basis: Vec<Word>,
}

impl FunctionClass {
    pub fn new(d: usize, max_degree: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("d must be positive"));
        }
        Ok(Self { d, max_degree, basis: Word::all_up_to(d, max_degree) })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn basis(&self) -> &[Word] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn describe(&self) -> String {
        format!("free polynomials in {} variables of degree ≤ {}", self.d, self.max_degree)
    }
}

/// Column `w` holds `w(λ_i)` flattened row-major, stacked over the points.
pub fn evaluation_matrix<T: Real>(points: &SampleSet<T>, cls: &FunctionClass) -> Result<ComplexMatrix<T>> {
    if points.is_empty() {
        return Err(Error::invalid("no points"));
    }
    if points.d() != Some(cls.d) {
        return Err(Error::invalid(format!("points have d = {:?}, class has d = {}", points.d(), cls.d)));
    }
    let rows: usize = points.gradings().iter().map(|n| n * n).sum();
    let mut out = ComplexMatrix::zeros(rows, cls.dim());
    let mut offset = 0;
    for p in points.points() {
        let mut cache = WordCache::new(p);
        let n = p.grading();
        for (c, w) in cls.basis.iter().enumerate() {
            let v = cache.word(w);
            for (k, z) in v.as_slice().iter().enumerate() {
                out[(offset + k, c)] = *z;
            }
        }
        offset += n * n;
    }
    Ok(out)
}

/// Rank information behind [`is_uniqueness_set`].
#[derive(Debug, Clone, Serialize)]
pub struct UniquenessReport {
    pub is_uniqueness_set: bool,
    pub rank: usize,
    pub dim: usize,
    pub rows: usize,
    pub class: String,
}

pub fn uniqueness_report<T: Real>(points: &SampleSet<T>, cls: &FunctionClass, rank_tol: T) -> Result<UniquenessReport> {
    let class = cls.describe();
    if points.is_empty() {
        return Ok(UniquenessReport { is_uniqueness_set: false, rank: 0, dim: cls.dim(), rows: 0, class });
    }
    let e = evaluation_matrix(points, cls)?;
    let rank = numerical_rank(&e, rank_tol);
    Ok(UniquenessReport { is_uniqueness_set: rank == cls.dim(), rank, dim: cls.dim(), rows: e.rows(), class })
}

/// True iff only the zero polynomial of `cls` vanishes on all points
/// (numerical rank with threshold `rank_tol · σ_max`).
pub fn is_uniqueness_set<T: Real>(points: &SampleSet<T>, cls: &FunctionClass, rank_tol: T) -> Result<bool> {
    Ok(uniqueness_report(points, cls, rank_tol)?.is_uniqueness_set)
}

/// `⟨u^k α, β⟩` for each value.
pub fn weak_probe<T: Real>(
    values: &[ComplexMatrix<T>],
    alpha: &[Complex<T>],
    beta: &[Complex<T>],
) -> Result<Vec<Complex<T>>> {
    values
        .iter()
        .map(|v| {
            if v.cols() != alpha.len() || v.rows() != beta.len() {
                return Err(Error::invalid(format!(
                    "value is {}x{}, probes have lengths {} and {}",
                    v.rows(),
                    v.cols(),
                    alpha.len(),
                    beta.len()
                )));
            }
            Ok(dot(beta, &v.mul_vec(alpha)?))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    InconclusiveWeak,
}

/// The default probe set at one point.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeInventory {
    pub point_index: usize,
    pub grading: usize,
    /// `α ∈ {e_r : r < n}`.
    pub alphas: usize,
    /// `β ∈ {e_s ⊗ e_h : s < n, h < min(M, 8)}`.
    pub betas: usize,
    /// Whether the `β` span all of `C^n ⊗ C^M`.
    pub complete: bool,
}

/// Where an oscillation maximum was attained.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub point_index: usize,
    pub k: usize,
    pub l: usize,
    /// `(r, s, h)` of the probe `α = e_r`, `β = e_s ⊗ e_h`, for weak probes.
    pub probe: Option<(usize, usize, usize)>,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NormUpgradeReport<T: Real> {
    pub weak_oscillation: T,
    pub gram_oscillation: T,
    pub norm_oscillation: T,
    pub tol: T,
    pub tail_start: usize,
    /// Hypotheses `weak, gram ≤ tol/10` hold for the probe set.
    pub hypotheses_hold: bool,
    pub probes_complete: bool,
    pub verdict: Verdict,
    pub probes: Vec<ProbeInventory>,
    pub weak_witness: Option<Witness>,
    pub norm_witness: Option<Witness>,
    /// Holdout points not found among the sample points.
    pub unmatched_holdout: Vec<usize>,
    pub note: String,
}

impl<T: Real> NormUpgradeReport<T> {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Max probe bound `min(M, 8)` for the `H` factor.
pub const MAX_H_PROBES: usize = 8;

/// Checks that when the weak probes and the Gram values `u^k(λ)*u^k(λ)`
/// settle on the tail `k ≥ ⌊K/2⌋`, the values settle in operator norm too.
///
/// Passes when `(c) ≤ tol` whenever `(a), (b) ≤ tol/10` (vacuously if the
/// hypotheses fail). A violation counts as `fail` only if the probes span
/// `C^n ⊗ H`; otherwise it is `inconclusive-weak`.
pub fn norm_upgrade_check<T: Real>(
    samples: &SequenceSamples<T>,
    holdout: &SampleSet<T>,
    tol: T,
) -> Result<NormUpgradeReport<T>> {
    let k_total = samples.len();
    if k_total < 3 {
        return Err(Error::invalid(format!("need K ≥ 3 functions, have {k_total}")));
    }
    let m = samples.truncation();
    let h_probes = m.min(MAX_H_PROBES);
    let pts = samples.points().points();
    let mut matched = Vec::new();
    let mut unmatched = Vec::new();
    for (h, p) in holdout.points().iter().enumerate() {
        match pts.iter().position(|q| q == p) {
            Some(i) => matched.push(i),
            None => unmatched.push(h),
        }
    }
    let tail_start = k_total / 2;
    let tail = tail_start..k_total;

    let (mut weak, mut gram, mut norm) = (T::zero(), T::zero(), T::zero());
    let (mut weak_w, mut norm_w) = (None, None);
    let mut probes = Vec::new();
    for &i in &matched {
        let n = pts[i].grading();
        probes.push(ProbeInventory {
            point_index: i,
            grading: n,
            alphas: n,
            betas: n * h_probes,
            complete: h_probes == m,
        });
        let vals = samples.at_point(i);
        let grams: Vec<ComplexMatrix<T>> = vals.iter().map(|v| &v.adjoint() * v).collect();
        for k in tail.clone() {
            for l in (k + 1)..k_total {
                for r in 0..n {
                    for s in 0..n {
                        for h in 0..h_probes {
                            let row = layout_row(s, h, m);
                            let x = (vals[k][(row, r)] - vals[l][(row, r)]).norm();
                            if x > weak || weak_w.is_none() {
                                weak = weak.max(x);
                                weak_w = Some(Witness {
                                    point_index: i,
                                    k,
                                    l,
                                    probe: Some((r, s, h)),
                                    value: x.to_f64().unwrap(),
                                });
                            }
                        }
                    }
                }
                gram = gram.max(op_norm(&(&grams[k] - &grams[l])));
                let x = op_norm(&(&vals[k] - &vals[l]));
                if x > norm || norm_w.is_none() {
                    norm = norm.max(x);
                    norm_w = Some(Witness { point_index: i, k, l, probe: None, value: x.to_f64().unwrap() });
                }
            }
        }
    }

    let tenth = tol / T::lit(10.0);
    let hypotheses_hold = weak <= tenth && gram <= tenth;
    let probes_complete = h_probes == m;
    let verdict = if !hypotheses_hold || norm <= tol {
        Verdict::Pass
    } else if probes_complete {
        Verdict::Fail
    } else {
        Verdict::InconclusiveWeak
    };
    let note = match verdict {
        Verdict::InconclusiveWeak => format!(
            "probes converge on their span ({h_probes} of {m} H-slots per block) but norm oscillation exceeds tol; \
             weak convergence in H is not certified"
        ),
        Verdict::Pass if !hypotheses_hold => "hypotheses not met on the tail; implication holds vacuously".to_string(),
        _ => "probes converge is a finite-probe statement, not weak convergence in H".to_string(),
    };

    Ok(NormUpgradeReport {
        weak_oscillation: weak,
        gram_oscillation: gram,
        norm_oscillation: norm,
        tol,
        tail_start,
        hypotheses_hold,
        probes_complete,
        verdict,
        probes,
        weak_witness: weak_w,
        norm_witness: norm_w,
        unmatched_holdout: unmatched,
        note,
    })
}
