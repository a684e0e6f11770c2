//! Points of the nc universe: matrix tuples, their direct sums and similarity
//! orbits, ordered sample sets, and the exhaustion metric on sampled
//! functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{condition_number, op_norm, ComplexMatrix};
use crate::scalar::Real;

/// Condition-number ceiling for similarity matrices.
pub const MAX_SIMILARITY_CONDITION: f64 = 1e12;

/// A `d`-tuple of `n × n` complex matrices, i.e. a point of grading `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixTuple<T: Real> {
    n: usize,
    matrices: Vec<ComplexMatrix<T>>,
}

impl<T: Real> MatrixTuple<T> {
    pub fn new(matrices: Vec<ComplexMatrix<T>>) -> Result<Self> {
        let Some(first) = matrices.first() else {
            return Err(Error::invalid("a matrix tuple needs at least one coordinate"));
        };
        let n = first.rows();
        if let Some(bad) = matrices.iter().find(|m| m.shape() != (n, n)) {
            return Err(Error::invalid(format!(
                "tuple coordinates must all be {n}x{n}, found {}x{}",
                bad.rows(),
                bad.cols()
            )));
        }
        Ok(Self { n, matrices })
    }

    /// Grading-1 point from complex scalars.
    pub fn scalars(values: &[num_complex::Complex<T>]) -> Result<Self> {
        Self::new(values.iter().map(|&z| ComplexMatrix::diagonal(&[z])).collect())
    }

    /// Grading-1 point from real scalars.
    pub fn real_scalars(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&x| ComplexMatrix::from_real(1, 1, &[x])).collect::<Result<_>>()?)
    }

    pub fn d(&self) -> usize {
        self.matrices.len()
    }

    pub fn grading(&self) -> usize {
        self.n
    }

    pub fn matrices(&self) -> &[ComplexMatrix<T>] {
        &self.matrices
    }

    pub fn coord(&self, j: usize) -> &ComplexMatrix<T> {
        &self.matrices[j]
    }

    /// Largest coordinate operator norm.
    pub fn max_norm(&self) -> T {
        self.matrices.iter().map(op_norm).fold(T::zero(), T::max)
    }

    pub fn scaled(&self, c: T) -> Self {
        Self { n: self.n, matrices: self.matrices.iter().map(|m| m.scale_real(c)).collect() }
    }

    /// Entrywise distance `max_j ‖λ_j − μ_j‖_max`; infinite across gradings.
    pub fn distance(&self, other: &Self) -> T {
        if self.n != other.n || self.d() != other.d() {
            return T::infinity();
        }
        self.matrices.iter().zip(&other.matrices).map(|(a, b)| (a - b).max_abs()).fold(T::zero(), T::max)
    }
}

/// Coordinate-wise block diagonal `λ ⊕ μ`.
pub fn direct_sum<T: Real>(lambda: &MatrixTuple<T>, mu: &MatrixTuple<T>) -> Result<MatrixTuple<T>> {
    if lambda.d() != mu.d() {
        return Err(Error::invalid(format!("direct sum of tuples with d = {} and d = {}", lambda.d(), mu.d())));
    }
    let matrices = lambda
        .matrices
        .iter()
        .zip(&mu.matrices)
        .map(|(a, b)| ComplexMatrix::block_diag(&[a, b]))
        .collect::<Result<Vec<_>>>()?;
    MatrixTuple::new(matrices)
}

/// Coordinate-wise `S λ_j S⁻¹`.
pub fn conjugate<T: Real>(lambda: &MatrixTuple<T>, s: &ComplexMatrix<T>) -> Result<MatrixTuple<T>> {
    let s_inv = checked_inverse(s, lambda.grading())?;
    let matrices = lambda.matrices.iter().map(|m| &(s * m) * &s_inv).collect();
    MatrixTuple::new(matrices)
}

/// Inverse of a similarity matrix after the size and condition guards.
pub(crate) fn checked_inverse<T: Real>(s: &ComplexMatrix<T>, n: usize) -> Result<ComplexMatrix<T>> {
    if s.shape() != (n, n) {
        return Err(Error::invalid(format!("similarity is {}x{} for a grading-{n} point", s.rows(), s.cols())));
    }
    let cond = condition_number(s)?;
    let limit = T::lit(MAX_SIMILARITY_CONDITION);
    if !(cond <= limit) {
        return Err(Error::Singular {
            condition: cond.to_f64().unwrap_or(f64::INFINITY),
            limit: MAX_SIMILARITY_CONDITION,
        });
    }
    s.inverse()
}

/// What a sample set stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleRole {
    DenseGrid,
    UniquenessSet,
    ExhaustionLevel,
}

/// Ordered finite list of points sharing `d`, possibly of mixed gradings.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet<T: Real> {
    points: Vec<MatrixTuple<T>>,
    role: SampleRole,
}

impl<T: Real> SampleSet<T> {
    pub fn new(points: Vec<MatrixTuple<T>>, role: SampleRole) -> Result<Self> {
        if let Some(first) = points.first() {
            if let Some(bad) = points.iter().find(|p| p.d() != first.d()) {
                return Err(Error::invalid(format!("sample set mixes d = {} and d = {}", first.d(), bad.d())));
            }
        }
        Ok(Self { points, role })
    }

    pub fn points(&self) -> &[MatrixTuple<T>] {
        &self.points
    }

    pub fn role(&self) -> SampleRole {
        self.role
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn d(&self) -> Option<usize> {
        self.points.first().map(MatrixTuple::d)
    }

    pub fn gradings(&self) -> Vec<usize> {
        self.points.iter().map(MatrixTuple::grading).collect()
    }

    /// Pairs `(i, j)`, `i < j`, of exactly repeated points.
    pub fn duplicates(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.points.len() {
            for j in (i + 1)..self.points.len() {
                if self.points[i] == self.points[j] {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Ordered pairs of points with equal grading, including `(i, i)`.
    pub fn same_grading_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.points.len() {
            for j in 0..self.points.len() {
                if self.points[i].grading() == self.points[j].grading() {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn with_role(self, role: SampleRole) -> Self {
        Self { role, ..self }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.points.iter().map(TupleRepr::from).collect::<Vec<_>>())?)
    }

    pub fn from_json(src: &str, role: SampleRole) -> Result<Self> {
        let reprs: Vec<TupleRepr<T>> = serde_json::from_str(src)?;
        let points = reprs.into_iter().map(MatrixTuple::try_from).collect::<Result<Vec<_>>>()?;
        Self::new(points, role)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "")]
pub(crate) struct TupleRepr<T: Real> {
    d: usize,
    n: usize,
    matrices: Vec<ComplexMatrix<T>>,
}

impl<T: Real> From<&MatrixTuple<T>> for TupleRepr<T> {
    fn from(p: &MatrixTuple<T>) -> Self {
        Self { d: p.d(), n: p.grading(), matrices: p.matrices.clone() }
    }
}

impl<T: Real> TryFrom<TupleRepr<T>> for MatrixTuple<T> {
    type Error = Error;

    fn try_from(r: TupleRepr<T>) -> Result<Self> {
        let p = MatrixTuple::new(r.matrices)?;
        if p.d() != r.d || p.grading() != r.n {
            return Err(Error::invalid(format!(
                "tuple declares d = {}, n = {} but holds d = {}, n = {}",
                r.d,
                r.n,
                p.d(),
                p.grading()
            )));
        }
        Ok(p)
    }
}

impl<T: Real> Serialize for MatrixTuple<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TupleRepr::from(self).serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for MatrixTuple<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        MatrixTuple::try_from(TupleRepr::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// Finite truncation of a compact exhaustion `K_1 ⊂ K_2 ⊂ …`, each level
/// represented by sample points.
#[derive(Debug, Clone)]
pub struct ExhaustionGrid<T: Real> {
    levels: Vec<SampleSet<T>>,
    weights: Vec<T>,
}

impl<T: Real> ExhaustionGrid<T> {
    /// Levels with the default weights `2^-1, 2^-2, …`.
    pub fn new(levels: Vec<SampleSet<T>>) -> Result<Self> {
        let weights = (1..=levels.len()).map(|k| T::lit(0.5f64.powi(k as i32))).collect();
        Self::with_weights(levels, weights)
    }

    pub fn with_weights(levels: Vec<SampleSet<T>>, weights: Vec<T>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::invalid("an exhaustion grid needs at least one level"));
        }
        if weights.len() != levels.len() {
            return Err(Error::invalid(format!("{} weights for {} levels", weights.len(), levels.len())));
        }
        if weights.iter().any(|w| !(*w >= T::zero())) {
            return Err(Error::invalid("weights must be nonnegative"));
        }
        let total: T = weights.iter().copied().sum();
        if total > T::one() + T::epsilon() {
            return Err(Error::invalid("weights must sum to at most 1"));
        }
        for (k, pair) in levels.windows(2).enumerate() {
            if let Some(p) = pair[0].points().iter().find(|p| !pair[1].points().contains(p)) {
                return Err(Error::invalid(format!(
                    "level {} is not contained in level {} (grading-{} point missing)",
                    k + 1,
                    k + 2,
                    p.grading()
                )));
            }
        }
        let levels = levels.into_iter().map(|l| l.with_role(SampleRole::ExhaustionLevel)).collect();
        Ok(Self { levels, weights })
    }

    /// Builds nested levels as prefixes of one ordered point list.
    pub fn from_prefixes(points: Vec<MatrixTuple<T>>, sizes: &[usize]) -> Result<Self> {
        let mut levels = Vec::with_capacity(sizes.len());
        for (k, &s) in sizes.iter().enumerate() {
            if s > points.len() || (k > 0 && s < sizes[k - 1]) {
                return Err(Error::invalid("prefix sizes must be nondecreasing and within the point list"));
            }
            levels.push(SampleSet::new(points[..s].to_vec(), SampleRole::ExhaustionLevel)?);
        }
        Self::new(levels)
    }

    pub fn levels(&self) -> &[SampleSet<T>] {
        &self.levels
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }
}

/// Per-level tables of sampled values, aligned with the grid's points.
pub type LevelTables<T> = Vec<Vec<ComplexMatrix<T>>>;

/// Truncated exhaustion metric
/// `d(f, g) = Σ_k w_k ‖f − g‖_k / (1 + ‖f − g‖_k)` where `‖·‖_k` is the
/// maximum operator norm over the level-`k` sample points.
///
/// Functions that agree on every sampled point are at distance zero even if
/// they differ elsewhere, so this is a pseudometric.
pub fn metric_distance<T: Real>(f: &LevelTables<T>, g: &LevelTables<T>, grid: &ExhaustionGrid<T>) -> Result<T> {
    Ok(level_sups(f, g, grid)?.into_iter().zip(grid.weights()).map(|(x, &w)| w * x / (T::one() + x)).sum())
}

/// `‖f − g‖_k` for each level.
pub fn level_sups<T: Real>(f: &LevelTables<T>, g: &LevelTables<T>, grid: &ExhaustionGrid<T>) -> Result<Vec<T>> {
    let n_levels = grid.levels().len();
    if f.len() != n_levels || g.len() != n_levels {
        return Err(Error::invalid(format!("tables have {} and {} levels, grid has {n_levels}", f.len(), g.len())));
    }
    let mut sups = Vec::with_capacity(n_levels);
    for (k, level) in grid.levels().iter().enumerate() {
        if f[k].len() != level.len() || g[k].len() != level.len() {
            return Err(Error::invalid(format!("level {} tables misaligned with {} points", k + 1, level.len())));
        }
        let mut sup = T::zero();
        for (a, b) in f[k].iter().zip(&g[k]) {
            sup = sup.max(op_norm(&a.try_sub(b)?));
        }
        sups.push(sup);
    }
    Ok(sups)
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = ComplexMatrix<f64>;

    fn tuple(ms: Vec<M>) -> MatrixTuple<f64> {
        MatrixTuple::new(ms).unwrap()
    }

    #[test]
    fn direct_sum_of_scalars() {
        let s = direct_sum(&MatrixTuple::real_scalars(&[1.0]).unwrap(), &MatrixTuple::real_scalars(&[2.0]).unwrap())
            .unwrap();
        assert_eq!(s.coord(0), &M::from_real(2, 2, &[1.0, 0.0, 0.0, 2.0]).unwrap());
    }

    #[test]
    fn direct_sum_top_left_block_is_lambda() {
        let a = tuple(vec![M::from_real(2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap()]);
        let b = MatrixTuple::real_scalars(&[7.0]).unwrap();
        let s = direct_sum(&a, &b).unwrap();
        assert_eq!(&s.coord(0).block(0, 0, 2, 2).unwrap(), a.coord(0));
        assert!(direct_sum(&a, &MatrixTuple::real_scalars(&[1.0, 2.0]).unwrap()).is_err());
    }

    #[test]
    fn conjugation_examples() {
        let l = tuple(vec![M::from_real(2, 2, &[1.0, 0.0, 0.0, 2.0]).unwrap()]);
        assert_eq!(conjugate(&l, &M::identity(2)).unwrap(), l);
        let swap = M::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        assert_eq!(conjugate(&l, &swap).unwrap().coord(0), &M::from_real(2, 2, &[2.0, 0.0, 0.0, 1.0]).unwrap());
        // diag(2,1) [[0,1],[0,0]] diag(1/2,1) = [[0,2],[0,0]]
        let n = tuple(vec![M::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap()]);
        let s = M::from_real(2, 2, &[2.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(conjugate(&n, &s).unwrap().coord(0), &M::from_real(2, 2, &[0.0, 2.0, 0.0, 0.0]).unwrap());
    }

    #[test]
    fn conjugation_guards() {
        let l = tuple(vec![M::identity(2)]);
        let singular = M::from_real(2, 2, &[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(conjugate(&l, &singular), Err(Error::Singular { .. })));
        assert!(matches!(conjugate(&l, &M::identity(3)), Err(Error::InvalidInput(_))));
        let ill = M::from_real(2, 2, &[1.0, 0.0, 0.0, 1e-13]).unwrap();
        assert!(conjugate(&l, &ill).is_err());
    }

    fn scalar_grid(levels: usize) -> ExhaustionGrid<f64> {
        let pts: Vec<_> = (0..levels).map(|k| MatrixTuple::real_scalars(&[0.1 * k as f64]).unwrap()).collect();
        let sizes: Vec<usize> = (1..=levels).collect();
        ExhaustionGrid::from_prefixes(pts, &sizes).unwrap()
    }

    fn tables(grid: &ExhaustionGrid<f64>, value: f64) -> LevelTables<f64> {
        grid.levels().iter().map(|l| vec![M::from_real(1, 1, &[value]).unwrap(); l.len()]).collect()
    }

    #[test]
    fn metric_of_equal_tables_is_zero() {
        let g = scalar_grid(3);
        assert_eq!(metric_distance(&tables(&g, 2.0), &tables(&g, 2.0), &g).unwrap(), 0.0);
    }

    #[test]
    fn metric_unit_difference_three_levels() {
        let g = scalar_grid(3);
        let d = metric_distance(&tables(&g, 1.0), &tables(&g, 0.0), &g).unwrap();
        assert!((d - 0.4375).abs() < 1e-15);
    }

    #[test]
    fn metric_single_level() {
        let g = scalar_grid(1);
        let d = metric_distance(&tables(&g, 3.0), &tables(&g, 0.0), &g).unwrap();
        assert!((d - 0.375).abs() < 1e-15);
    }

    #[test]
    fn metric_rejects_misaligned_tables() {
        let g = scalar_grid(2);
        let mut f = tables(&g, 1.0);
        f[1].pop();
        assert!(metric_distance(&f, &tables(&g, 0.0), &g).is_err());
    }

    #[test]
    fn grid_requires_nesting() {
        let a = SampleSet::<f64>::new(vec![MatrixTuple::real_scalars(&[1.0]).unwrap()], SampleRole::DenseGrid).unwrap();
        let b = SampleSet::new(vec![MatrixTuple::real_scalars(&[2.0]).unwrap()], SampleRole::DenseGrid).unwrap();
        assert!(ExhaustionGrid::new(vec![a, b]).is_err());
    }

    #[test]
    fn duplicates_are_flagged() {
        let p = MatrixTuple::<f64>::real_scalars(&[0.5]).unwrap();
        let q = MatrixTuple::real_scalars(&[0.25]).unwrap();
        let s = SampleSet::new(vec![p.clone(), q, p], SampleRole::DenseGrid).unwrap();
        assert_eq!(s.duplicates(), vec![(0, 2)]);
    }

    #[test]
    fn sample_set_json_round_trip() {
        let p = tuple(vec![M::from_real(2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap(), M::identity(2)]);
        let s = SampleSet::new(vec![p], SampleRole::DenseGrid).unwrap();
        let js = s.to_json().unwrap();
        assert!(js.starts_with(r#"[{"d":2,"n":2,"matrices":[{"rows":2"#));
        assert_eq!(SampleSet::<f64>::from_json(&js, SampleRole::DenseGrid).unwrap(), s);
        assert!(SampleSet::<f64>::from_json(
            r#"[{"d":3,"n":1,"matrices":[{"rows":1,"cols":1,"re":[1],"im":[0]}]}]"#,
            SampleRole::DenseGrid
        )
        .is_err());
    }
}
