//! Free polynomials in `d` noncommuting variables, matrices of them, their
//! evaluation on matrix tuples, and polynomial-polyhedron membership.

mod parse;

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{op_norm, ComplexMatrix};
use crate::ncpoints::MatrixTuple;
use crate::scalar::{cone, Real};

pub use parse::parse;

/// A monomial: variable indices (zero-based internally; `x1` is letter 0).
/// The empty word is the identity.
///
/// Words are ordered graded-lexicographically: shorter first, then by letters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn new(letters: Vec<usize>) -> Self {
        Word(letters)
    }

    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// All words of length at most `max_len` in `d` letters, in canonical order.
    pub fn all_up_to(d: usize, max_len: usize) -> Vec<Word> {
        let mut out = vec![Word::identity()];
        let mut layer = vec![Word::identity()];
        for _ in 0..max_len {
            let mut next = Vec::with_capacity(layer.len() * d);
            for w in &layer {
                for x in 0..d {
                    let mut v = w.0.clone();
                    v.push(x);
                    next.push(Word(v));
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.0.iter().map(|x| format!("x{}", x + 1)).collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// Finite linear combination of words. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FreePoly<T: Real> {
    terms: BTreeMap<Word, Complex<T>>,
}

impl<T: Real> FreePoly<T> {
    pub fn zero() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn constant(c: Complex<T>) -> Self {
        Self::monomial(Word::identity(), c)
    }

    pub fn monomial(w: Word, c: Complex<T>) -> Self {
        let mut p = Self::zero();
        p.add_term(w, c);
        p
    }

    /// The single variable `x_{index+1}`.
    pub fn var(index: usize) -> Self {
        Self::monomial(Word(vec![index]), cone())
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Word, Complex<T>)>) -> Self {
        let mut p = Self::zero();
        for (w, c) in terms {
            p.add_term(w, c);
        }
        p
    }

    pub fn add_term(&mut self, w: Word, c: Complex<T>) {
        let sum = self.coefficient(&w) + c;
        if sum.re == T::zero() && sum.im == T::zero() {
            self.terms.remove(&w);
        } else {
            self.terms.insert(w, sum);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Complex<T>)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, w: &Word) -> Complex<T> {
        self.terms.get(w).copied().unwrap_or_else(|| Complex::new(T::zero(), T::zero()))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Maximum word length; 0 for constants and for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(Word::len).max().unwrap_or(0)
    }

    /// Largest letter index used plus one, i.e. the least admissible `d`.
    pub fn min_vars(&self) -> usize {
        self.terms.keys().flat_map(|w| w.0.iter().map(|x| x + 1)).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut p = self.clone();
        for (w, c) in &other.terms {
            p.add_term(w.clone(), *c);
        }
        p
    }

    pub fn neg(&self) -> Self {
        Self { terms: self.terms.iter().map(|(w, c)| (w.clone(), -c)).collect() }
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self::from_terms(self.terms.iter().map(|(w, c)| (w.clone(), c * s)))
    }

    /// Product; words concatenate, so `x1 * x2 ≠ x2 * x1`.
    pub fn mul(&self, other: &Self) -> Self {
        let mut p = Self::zero();
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                p.add_term(w1.concat(w2), c1 * c2);
            }
        }
        p
    }

    /// `p(λ)` for a single polynomial: an `n × n` matrix.
    pub fn evaluate(&self, lambda: &MatrixTuple<T>) -> Result<ComplexMatrix<T>> {
        if self.min_vars() > lambda.d() {
            return Err(Error::invalid(format!(
                "polynomial uses x{} but the point has d = {}",
                self.min_vars(),
                lambda.d()
            )));
        }
        let mut cache = WordCache::new(lambda);
        Ok(cache.poly(self))
    }
}

impl<T: Real> fmt::Display for FreePoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(w, c)| {
                let sep = if c.im.is_sign_negative() { "" } else { "+" };
                let coeff = format!("({}{}{}i)", c.re, sep, c.im);
                if w.is_empty() {
                    coeff
                } else {
                    format!("{coeff}*{w}")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Memoized prefix products of words at one point.
pub(crate) struct WordCache<'a, T: Real> {
    point: &'a MatrixTuple<T>,
    products: HashMap<Vec<usize>, ComplexMatrix<T>>,
}

impl<'a, T: Real> WordCache<'a, T> {
    pub(crate) fn new(point: &'a MatrixTuple<T>) -> Self {
        Self { point, products: HashMap::new() }
    }

    /// `w(λ)` by left-to-right multiplication; letters must be checked first.
    pub(crate) fn word(&mut self, w: &Word) -> ComplexMatrix<T> {
        let n = self.point.grading();
        let letters = w.letters();
        let mut known = letters.len();
        while known > 0 && !self.products.contains_key(&letters[..known]) {
            known -= 1;
        }
        let mut acc = if known == 0 { ComplexMatrix::identity(n) } else { self.products[&letters[..known]].clone() };
        for end in (known + 1)..=letters.len() {
            acc = &acc * self.point.coord(letters[end - 1]);
            self.products.insert(letters[..end].to_vec(), acc.clone());
        }
        acc
    }

    pub(crate) fn poly(&mut self, p: &FreePoly<T>) -> ComplexMatrix<T> {
        let n = self.point.grading();
        let mut out = ComplexMatrix::zeros(n, n);
        for (w, c) in p.terms() {
            out = &out + &self.word(w).scale(*c);
        }
        out
    }
}

/// `J × L` matrix of free polynomials in `d` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct FreePolyMatrix<T: Real> {
    d: usize,
    rows: usize,
    cols: usize,
    entries: Vec<FreePoly<T>>,
}

impl<T: Real> FreePolyMatrix<T> {
    pub fn new(d: usize, rows: usize, cols: usize, entries: Vec<FreePoly<T>>) -> Result<Self> {
        if d == 0 || rows == 0 || cols == 0 {
            return Err(Error::invalid("d, J and L must be positive"));
        }
        if entries.len() != rows * cols {
            return Err(Error::invalid(format!("{rows}x{cols} polynomial matrix needs {} entries", rows * cols)));
        }
        if let Some(p) = entries.iter().find(|p| p.min_vars() > d) {
            return Err(Error::invalid(format!("variable index x{} out of range for d = {d}", p.min_vars())));
        }
        Ok(Self { d, rows, cols, entries })
    }

    pub fn scalar(d: usize, p: FreePoly<T>) -> Result<Self> {
        Self::new(d, 1, 1, vec![p])
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `J`.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// `L`.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, j: usize, l: usize) -> &FreePoly<T> {
        &self.entries[j * self.cols + l]
    }

    pub fn degree(&self) -> usize {
        self.entries.iter().map(FreePoly::degree).max().unwrap_or(0)
    }

    /// `δ(λ)`: the `(J·n) × (L·n)` block matrix whose `(j, l)` block is the
    /// `(j, l)` entry evaluated at `λ`.
    pub fn evaluate(&self, lambda: &MatrixTuple<T>) -> Result<ComplexMatrix<T>> {
        if lambda.d() != self.d {
            return Err(Error::invalid(format!("point has d = {}, polynomial matrix has d = {}", lambda.d(), self.d)));
        }
        let n = lambda.grading();
        let mut cache = WordCache::new(lambda);
        let mut out = ComplexMatrix::zeros(self.rows * n, self.cols * n);
        for j in 0..self.rows {
            for l in 0..self.cols {
                let block = cache.poly(self.entry(j, l));
                out.set_block(j * n, l * n, &block);
            }
        }
        Ok(out)
    }

    /// `1 − ‖δ(λ)‖`; positive exactly on the polyhedron `{‖δ(x)‖ < 1}`.
    pub fn polyhedron_margin(&self, lambda: &MatrixTuple<T>) -> Result<T> {
        Ok(T::one() - op_norm(&self.evaluate(lambda)?))
    }

    /// Text form accepted by [`parse`].
    pub fn format(&self) -> String {
        self.to_string()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&PolyMatrixRepr::from(self))?)
    }

    pub fn from_json(src: &str) -> Result<Self> {
        let repr: PolyMatrixRepr = serde_json::from_str(src)?;
        repr.try_into()
    }
}

/// `polyhedron_margin` as a free function.
pub fn polyhedron_margin<T: Real>(delta: &FreePolyMatrix<T>, lambda: &MatrixTuple<T>) -> Result<T> {
    delta.polyhedron_margin(lambda)
}

impl<T: Real> fmt::Display for FreePolyMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.rows)
            .map(|j| {
                let cells: Vec<String> = (0..self.cols).map(|l| self.entry(j, l).to_string()).collect();
                format!("[{}]", cells.join(", "))
            })
            .collect();
        write!(f, "[{}]", rows.join(", "))
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    word: Vec<usize>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct PolyMatrixRepr {
    d: usize,
    #[serde(rename = "J")]
    rows: usize,
    #[serde(rename = "L")]
    cols: usize,
    entries: Vec<Vec<Vec<TermRepr>>>,
}

impl<T: Real> From<&FreePolyMatrix<T>> for PolyMatrixRepr {
    fn from(m: &FreePolyMatrix<T>) -> Self {
        let entries = (0..m.rows)
            .map(|j| {
                (0..m.cols)
                    .map(|l| {
                        m.entry(j, l)
                            .terms()
                            .map(|(w, c)| TermRepr {
                                word: w.letters().iter().map(|x| x + 1).collect(),
                                re: c.re.to_f64().unwrap_or(f64::NAN),
                                im: c.im.to_f64().unwrap_or(f64::NAN),
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self { d: m.d, rows: m.rows, cols: m.cols, entries }
    }
}

impl<T: Real> TryFrom<PolyMatrixRepr> for FreePolyMatrix<T> {
    type Error = Error;

    fn try_from(r: PolyMatrixRepr) -> Result<Self> {
        if r.entries.len() != r.rows || r.entries.iter().any(|row| row.len() != r.cols) {
            return Err(Error::invalid("entries do not match declared J and L"));
        }
        let mut entries = Vec::with_capacity(r.rows * r.cols);
        for row in r.entries {
            for cell in row {
                let mut p = FreePoly::zero();
                for t in cell {
                    if t.word.iter().any(|&x| x == 0 || x > r.d) {
                        return Err(Error::invalid(format!("word {:?} has letters outside 1..={}", t.word, r.d)));
                    }
                    if !t.re.is_finite() || !t.im.is_finite() {
                        return Err(Error::invalid("non-finite coefficient"));
                    }
                    p.add_term(Word(t.word.iter().map(|x| x - 1).collect()), Complex::new(T::lit(t.re), T::lit(t.im)));
                }
                entries.push(p);
            }
        }
        Self::new(r.d, r.rows, r.cols, entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = ComplexMatrix<f64>;

    fn pt(ms: Vec<M>) -> MatrixTuple<f64> {
        MatrixTuple::new(ms).unwrap()
    }

    #[test]
    fn commutator_on_matrix_units() {
        let p = parse::<f64>("[[x1*x2 - x2*x1]]", 2).unwrap();
        let lam = pt(vec![
            M::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap(),
            M::from_real(2, 2, &[0.0, 0.0, 1.0, 0.0]).unwrap(),
        ]);
        assert_eq!(p.evaluate(&lam).unwrap(), M::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]).unwrap());
    }

    #[test]
    fn constant_is_identity() {
        let p = parse::<f64>("[[1]]", 3).unwrap();
        let lam = pt(vec![M::from_real(3, 3, &[1.0; 9]).unwrap(); 3]);
        assert_eq!(p.evaluate(&lam).unwrap(), M::identity(3));
    }

    #[test]
    fn single_variable_substitution() {
        let p = parse::<f64>("[[x1]]", 1).unwrap();
        let a = M::from_real(2, 2, &[0.0, 2.0, 0.0, 0.0]).unwrap();
        assert_eq!(p.evaluate(&pt(vec![a.clone()])).unwrap(), a);
    }

    #[test]
    fn evaluate_rejects_wrong_d() {
        let p = parse::<f64>("[[x1]]", 2).unwrap();
        assert!(p.evaluate(&MatrixTuple::real_scalars(&[0.5]).unwrap()).is_err());
    }

    #[test]
    fn block_layout_of_rectangular_delta() {
        let p = parse::<f64>("[[x1, 2*x2]]", 2).unwrap();
        let a = M::from_real(2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = M::identity(2);
        let v = p.evaluate(&pt(vec![a.clone(), b])).unwrap();
        assert_eq!(v.shape(), (2, 4));
        assert_eq!(v.block(0, 0, 2, 2).unwrap(), a);
        assert_eq!(v.block(0, 2, 2, 2).unwrap(), M::identity(2).scale_real(2.0));
    }

    #[test]
    fn margins() {
        let d1 = parse::<f64>("[[x1]]", 1).unwrap();
        let m = d1.polyhedron_margin(&MatrixTuple::real_scalars(&[0.5]).unwrap()).unwrap();
        assert!((m - 0.5).abs() < 1e-15);
        let nil = pt(vec![M::from_real(2, 2, &[0.0, 2.0, 0.0, 0.0]).unwrap()]);
        assert!((d1.polyhedron_margin(&nil).unwrap() + 1.0).abs() < 1e-15);
        let row = parse::<f64>("[[x1, x2]]", 2).unwrap();
        let m = row.polyhedron_margin(&MatrixTuple::real_scalars(&[0.6, 0.8]).unwrap()).unwrap();
        assert!(m.abs() < 1e-15);
    }

    #[test]
    fn word_order_is_graded_lex() {
        let mut ws = vec![Word::new(vec![1]), Word::new(vec![0, 0]), Word::identity(), Word::new(vec![0])];
        ws.sort();
        assert_eq!(ws, vec![Word::identity(), Word::new(vec![0]), Word::new(vec![1]), Word::new(vec![0, 0])]);
        assert_eq!(Word::all_up_to(2, 2).len(), 7);
    }

    #[test]
    fn json_uses_one_based_letters() {
        let p = parse::<f64>("[[x1*x2 - (0.5-1i)]]", 2).unwrap();
        let js = p.to_json().unwrap();
        assert_eq!(
            js,
            r#"{"d":2,"J":1,"L":1,"entries":[[[{"word":[],"re":-0.5,"im":1.0},{"word":[1,2],"re":1.0,"im":0.0}]]]}"#
        );
        assert_eq!(FreePolyMatrix::<f64>::from_json(&js).unwrap(), p);
        assert!(FreePolyMatrix::<f64>::from_json(r#"{"d":1,"J":1,"L":1,"entries":[[[{"word":[2],"re":1,"im":0}]]]}"#)
            .is_err());
    }
}
