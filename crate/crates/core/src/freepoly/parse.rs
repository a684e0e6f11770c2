//! Recursive-descent parser for polynomial matrices.
//!
//! ```text
//! matrix := "[" row ("," row)* "]"        row := "[" poly ("," poly)* "]"
//! poly   := ["+"|"-"] term (("+"|"-") term)*
//! term   := coeff? ("*"? factor)*
//! factor := "x" INTEGER | "(" poly ")"
//! coeff  := REAL | "(" REAL ("+"|"-") REAL "i" ")"
//! ```
//! Whitespace is ignored between tokens.

use num_complex::Complex;

use super::{FreePoly, FreePolyMatrix, Word};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Parses `src` as a matrix of polynomials in `d` variables.
pub fn parse<T: Real>(src: &str, d: usize) -> Result<FreePolyMatrix<T>> {
    if d == 0 {
        return Err(Error::invalid("d must be positive"));
    }
    let mut p = Parser { src: src.as_bytes(), pos: 0, d };
    let rows = p.matrix()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("trailing input"));
    }
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Parse { pos: 0, message: "rows have different lengths".into() });
    }
    let n_rows = rows.len();
    FreePolyMatrix::new(d, n_rows, cols, rows.into_iter().flatten().collect())
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    d: usize,
}

impl Parser<'_> {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse { pos: self.pos, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{}'", c as char)))
        }
    }

    fn matrix<T: Real>(&mut self) -> Result<Vec<Vec<FreePoly<T>>>> {
        self.expect(b'[')?;
        let mut rows = vec![self.row()?];
        while self.eat(b',') {
            rows.push(self.row()?);
        }
        self.expect(b']')?;
        Ok(rows)
    }

    fn row<T: Real>(&mut self) -> Result<Vec<FreePoly<T>>> {
        self.expect(b'[')?;
        let mut cells = vec![self.poly()?];
        while self.eat(b',') {
            cells.push(self.poly()?);
        }
        self.expect(b']')?;
        Ok(cells)
    }

    fn poly<T: Real>(&mut self) -> Result<FreePoly<T>> {
        let mut negate = false;
        if self.eat(b'-') {
            negate = true;
        } else {
            self.eat(b'+');
        }
        let first = self.term()?;
        let mut acc = if negate { first.neg() } else { first };
        loop {
            if self.eat(b'+') {
                acc = acc.add(&self.term()?);
            } else if self.eat(b'-') {
                acc = acc.add(&self.term()?.neg());
            } else {
                return Ok(acc);
            }
        }
    }

    fn term<T: Real>(&mut self) -> Result<FreePoly<T>> {
        let start = self.pos;
        let mut acc: Option<FreePoly<T>> = match self.peek() {
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                Some(FreePoly::constant(Complex::new(self.real()?, T::zero())))
            }
            _ => None,
        };
        loop {
            let starred = self.eat(b'*');
            match self.peek() {
                Some(b'x') | Some(b'(') => {
                    let f = self.factor()?;
                    acc = Some(match acc {
                        Some(a) => a.mul(&f),
                        None => f,
                    });
                }
                _ if starred => return Err(self.error("expected a factor after '*'")),
                _ => break,
            }
        }
        acc.ok_or_else(|| Error::Parse { pos: start, message: "expected a term".into() })
    }

    fn factor<T: Real>(&mut self) -> Result<FreePoly<T>> {
        if self.eat(b'x') {
            let at = self.pos;
            let digits = self.take_while(|c| c.is_ascii_digit());
            if digits.is_empty() {
                return Err(self.error("expected a variable index after 'x'"));
            }
            let idx: usize = digits.parse().map_err(|_| Error::Parse { pos: at, message: "bad index".into() })?;
            if idx == 0 || idx > self.d {
                return Err(Error::Parse {
                    pos: at,
                    message: format!("variable index x{idx} out of range 1..={}", self.d),
                });
            }
            return Ok(FreePoly::monomial(Word::new(vec![idx - 1]), Complex::new(T::one(), T::zero())));
        }
        let open = self.pos;
        self.expect(b'(')?;
        let save = self.pos;
        if let Some(z) = self.complex_tail::<T>() {
            return Ok(FreePoly::constant(z));
        }
        self.pos = save;
        let inner = self.poly()?;
        if !self.eat(b')') {
            return Err(Error::Parse { pos: self.pos, message: format!("unclosed '(' opened at byte {open}") });
        }
        Ok(inner)
    }

    /// After an opening parenthesis: `REAL ("+"|"-") REAL "i" ")"`.
    fn complex_tail<T: Real>(&mut self) -> Option<Complex<T>> {
        let neg_re = self.eat(b'-');
        if !neg_re {
            self.eat(b'+');
        }
        let re: T = self.real().ok()?;
        let sign = if self.eat(b'+') {
            T::one()
        } else if self.eat(b'-') {
            -T::one()
        } else {
            return None;
        };
        let im: T = self.real().ok()?;
        if !self.eat(b'i') || !self.eat(b')') {
            return None;
        }
        Some(Complex::new(if neg_re { -re } else { re }, sign * im))
    }

    fn real<T: Real>(&mut self) -> Result<T> {
        self.skip_ws();
        let start = self.pos;
        self.take_while(|c| c.is_ascii_digit());
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            self.take_while(|c| c.is_ascii_digit());
        }
        if matches!(self.src.get(self.pos), Some(b'e') | Some(b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if self.take_while(|c| c.is_ascii_digit()).is_empty() {
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        let value: f64 = text
            .parse()
            .map_err(|_| Error::Parse { pos: start, message: format!("expected a number, found {text:?}") })?;
        T::from_f64(value).ok_or_else(|| Error::Parse { pos: start, message: "number out of range".into() })
    }

    fn take_while(&mut self, f: impl Fn(u8) -> bool) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && f(self.src[self.pos]) {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }
}
