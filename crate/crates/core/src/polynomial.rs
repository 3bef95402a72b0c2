//! Multivariate polynomials over ℂ with double-precision coefficients.
//!
//! Terms are kept in graded lexicographic order so that evaluation and
//! printing are deterministic. The text grammar accepted by [`ComplexPoly::parse`]:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary ('*' unary)*
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' integer)?
//! atom   := number ['i'] | 'i' | 'z' integer | '(' expr ')'
//! ```

use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Deref, DerefMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A point of ℂ^{n+1}.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(pub Vec<Complex64>);

impl Point {
    pub fn new(coords: Vec<Complex64>) -> Self {
        Point(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        Point(vec![ZERO; dim])
    }

    /// Builds a point from interleaved real coordinates `(re z1, im z1, re z2, ...)`.
    pub fn from_real(x: &[f64]) -> Self {
        assert!(x.len().is_multiple_of(2), "realified vector must have even length");
        Point(x.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect())
    }

    /// Interleaved real coordinates.
    pub fn to_real(&self) -> Vec<f64> {
        self.0.iter().flat_map(|c| [c.re, c.im]).collect()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, alpha: Complex64) -> Point {
        Point(self.0.iter().map(|c| alpha * c).collect())
    }

    pub fn add(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn distance(&self, other: &Point) -> f64 {
        self.sub(other).norm()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

impl Deref for Point {
    type Target = [Complex64];
    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

impl DerefMut for Point {
    fn deref_mut(&mut self) -> &mut [Complex64] {
        &mut self.0
    }
}

impl From<Vec<Complex64>> for Point {
    fn from(v: Vec<Complex64>) -> Self {
        Point(v)
    }
}

/// Exponent vector ordered graded-lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Polynomial in `z1 .. z{n_vars}`; no duplicate exponents, no zero coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPoly {
    n_vars: usize,
    terms: BTreeMap<Monomial, Complex64>,
}

impl ComplexPoly {
    pub fn zero(n_vars: usize) -> Self {
        assert!(n_vars > 0, "polynomial needs at least one variable");
        ComplexPoly {
            n_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n_vars: usize, c: Complex64) -> Self {
        let mut p = Self::zero(n_vars);
        p.add_term(vec![0; n_vars], c);
        p
    }

    /// The monomial `z_{index+1}` (zero-based index).
    pub fn variable(n_vars: usize, index: usize) -> Self {
        let mut exps = vec![0; n_vars];
        exps[index] = 1;
        let mut p = Self::zero(n_vars);
        p.add_term(exps, Complex64::new(1.0, 0.0));
        p
    }

    /// Builds a polynomial from `(coefficient, exponents)` pairs, merging duplicates.
    pub fn from_terms(
        n_vars: usize,
        terms: impl IntoIterator<Item = (Complex64, Vec<u32>)>,
    ) -> Result<Self> {
        let mut p = Self::zero(n_vars);
        for (c, exps) in terms {
            if exps.len() != n_vars {
                return Err(Error::DimensionMismatch {
                    expected: n_vars,
                    got: exps.len(),
                });
            }
            check_finite(c)?;
            p.add_term(exps, c);
        }
        Ok(p)
    }

    /// Parses and expands polynomial text in variables `z1 .. z{n_vars}`.
    pub fn parse(text: &str, n_vars: usize) -> Result<Self> {
        if n_vars == 0 {
            return Err(Error::VariableOutOfRange { index: 0, n_vars });
        }
        let mut parser = Parser {
            src: text.as_bytes(),
            pos: 0,
            n_vars,
        };
        let p = parser.expr()?;
        parser.skip_ws();
        if parser.pos != parser.src.len() {
            return Err(parser.error("unexpected trailing input"));
        }
        Ok(p)
    }

    fn add_term(&mut self, exps: Vec<u32>, c: Complex64) {
        match self.terms.entry(Monomial(exps)) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if *e.get() == ZERO {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                if c != ZERO {
                    e.insert(c);
                }
            }
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in graded lexicographic order.
    pub fn terms(&self) -> impl Iterator<Item = (&[u32], Complex64)> {
        self.terms.iter().map(|(m, c)| (m.0.as_slice(), *c))
    }

    pub fn coefficient(&self, exps: &[u32]) -> Complex64 {
        self.terms
            .get(&Monomial(exps.to_vec()))
            .copied()
            .unwrap_or(ZERO)
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn add(&self, other: &ComplexPoly) -> ComplexPoly {
        assert_eq!(self.n_vars, other.n_vars);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.0.clone(), *c);
        }
        out
    }

    pub fn sub(&self, other: &ComplexPoly) -> ComplexPoly {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> ComplexPoly {
        let mut out = ComplexPoly::zero(self.n_vars);
        for (m, v) in &self.terms {
            out.add_term(m.0.clone(), v * c);
        }
        out
    }

    pub fn mul(&self, other: &ComplexPoly) -> ComplexPoly {
        assert_eq!(self.n_vars, other.n_vars);
        let mut out = ComplexPoly::zero(self.n_vars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let exps = ma.0.iter().zip(&mb.0).map(|(a, b)| a + b).collect();
                out.add_term(exps, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> ComplexPoly {
        let mut out = ComplexPoly::constant(self.n_vars, Complex64::new(1.0, 0.0));
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    fn check_dim(&self, z: &[Complex64]) -> Result<()> {
        if z.len() != self.n_vars {
            return Err(Error::DimensionMismatch {
                expected: self.n_vars,
                got: z.len(),
            });
        }
        Ok(())
    }

    /// Value at `z`, summed in term order.
    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        self.check_dim(z)?;
        Ok(self.eval_unchecked(z))
    }

    pub(crate) fn eval_unchecked(&self, z: &[Complex64]) -> Complex64 {
        let mut acc = ZERO;
        for (m, c) in &self.terms {
            let mut t = *c;
            for (zj, &e) in z.iter().zip(&m.0) {
                if e > 0 {
                    t *= zj.powu(e);
                }
            }
            acc += t;
        }
        acc
    }

    /// Formal holomorphic partial derivative ∂/∂z_j, `j` one-based.
    pub fn wirtinger_partial(&self, j: usize) -> Result<ComplexPoly> {
        if j == 0 || j > self.n_vars {
            return Err(Error::VariableOutOfRange {
                index: j,
                n_vars: self.n_vars,
            });
        }
        let k = j - 1;
        let mut out = ComplexPoly::zero(self.n_vars);
        for (m, c) in &self.terms {
            let e = m.0[k];
            if e == 0 {
                continue;
            }
            let mut exps = m.0.clone();
            exps[k] -= 1;
            out.add_term(exps, c * e as f64);
        }
        Ok(out)
    }

    /// `(conj ∂p/∂z_1 (z), ..., conj ∂p/∂z_{n_vars} (z))`.
    pub fn conj_gradient(&self, z: &[Complex64]) -> Result<Point> {
        self.check_dim(z)?;
        (1..=self.n_vars)
            .map(|j| Ok(self.wirtinger_partial(j)?.eval_unchecked(z).conj()))
            .collect::<Result<Vec<_>>>()
            .map(Point)
    }

    /// `Some(d)` when every term has total degree `d`. The zero polynomial has none.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degrees = self.terms.keys().map(Monomial::degree);
        let d = degrees.next()?;
        degrees.all(|e| e == d).then_some(d)
    }
}

fn check_finite(c: Complex64) -> Result<()> {
    if c.re.is_finite() && c.im.is_finite() {
        Ok(())
    } else {
        Err(Error::Syntax {
            position: 0,
            message: format!("non-finite coefficient {c}"),
        })
    }
}

fn fmt_coefficient(c: Complex64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let sign = if c.im.is_sign_negative() { '-' } else { '+' };
    write!(f, "({:?}{}{:?}i)", c.re, sign, c.im.abs())
}

impl fmt::Display for ComplexPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (m, c)) in self.terms.iter().enumerate() {
            if idx > 0 {
                write!(f, " + ")?;
            }
            fmt_coefficient(*c, f)?;
            for (j, &e) in m.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*z{}", j + 1)?,
                    _ => write!(f, "*z{}^{}", j + 1, e)?,
                }
            }
        }
        Ok(())
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    n_vars: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Syntax {
            position: self.pos,
            message: message.to_string(),
        }
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

    fn expr(&mut self) -> Result<ComplexPoly> {
        let mut acc = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                b'+' => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                b'-' => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<ComplexPoly> {
        let mut acc = self.unary()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = acc.mul(&self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<ComplexPoly> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(self.unary()?.scale(Complex64::new(-1.0, 0.0)))
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<ComplexPoly> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            let k = self.integer()?;
            let k = u32::try_from(k).map_err(|_| Error::Syntax {
                position: start,
                message: "exponent too large".into(),
            })?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<usize> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected non-negative integer"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| Error::Syntax {
                position: start,
                message: "integer out of range".into(),
            })
    }

    fn number(&mut self) -> Result<f64> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut count = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            count += digits(self);
        }
        if count == 0 {
            self.pos = start;
            return Err(self.error("expected number"));
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii number");
        let value: f64 = text.parse().map_err(|_| Error::Syntax {
            position: start,
            message: format!("malformed number '{text}'"),
        })?;
        if !value.is_finite() {
            return Err(Error::Syntax {
                position: start,
                message: format!("number '{text}' is not finite"),
            });
        }
        Ok(value)
    }

    fn atom(&mut self) -> Result<ComplexPoly> {
        let n = self.n_vars;
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(b'z') => {
                self.pos += 1;
                let index = self.integer()?;
                if index == 0 || index > n {
                    return Err(Error::VariableOutOfRange { index, n_vars: n });
                }
                Ok(ComplexPoly::variable(n, index - 1))
            }
            Some(b'i') => {
                self.pos += 1;
                Ok(ComplexPoly::constant(n, I))
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let v = self.number()?;
                if self.src.get(self.pos) == Some(&b'i') {
                    self.pos += 1;
                    Ok(ComplexPoly::constant(n, Complex64::new(0.0, v)))
                } else {
                    Ok(ComplexPoly::constant(n, Complex64::new(v, 0.0)))
                }
            }
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }
}

/// A polynomial with its first and second holomorphic partials precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyJet {
    poly: ComplexPoly,
    first: Vec<ComplexPoly>,
    second: Vec<Vec<ComplexPoly>>,
}

impl PolyJet {
    pub fn new(poly: ComplexPoly) -> Self {
        let n = poly.n_vars();
        let first: Vec<ComplexPoly> = (1..=n)
            .map(|j| poly.wirtinger_partial(j).expect("index in range"))
            .collect();
        let second = first
            .iter()
            .map(|d| {
                (1..=n)
                    .map(|k| d.wirtinger_partial(k).expect("index in range"))
                    .collect()
            })
            .collect();
        PolyJet {
            poly,
            first,
            second,
        }
    }

    pub fn poly(&self) -> &ComplexPoly {
        &self.poly
    }

    pub fn n_vars(&self) -> usize {
        self.poly.n_vars()
    }

    pub fn value(&self, z: &[Complex64]) -> Complex64 {
        self.poly.eval_unchecked(z)
    }

    /// Holomorphic partials `∂p/∂z_j (z)`.
    pub fn partials(&self, z: &[Complex64]) -> Vec<Complex64> {
        self.first.iter().map(|d| d.eval_unchecked(z)).collect()
    }

    /// Conjugate gradient, the complex vector whose real inner product with
    /// a direction `v` gives `Re dp(v)`.
    pub fn conj_gradient(&self, z: &[Complex64]) -> Point {
        Point(self.first.iter().map(|d| d.eval_unchecked(z).conj()).collect())
    }

    /// Second holomorphic partials `∂²p/∂z_j∂z_k (z)`.
    pub fn second_partials(&self, z: &[Complex64]) -> Vec<Vec<Complex64>> {
        self.second
            .iter()
            .map(|row| row.iter().map(|d| d.eval_unchecked(z)).collect())
            .collect()
    }

    /// Holomorphic differential applied to a direction.
    pub fn differential(&self, z: &[Complex64], v: &[Complex64]) -> Complex64 {
        self.partials(z).iter().zip(v).map(|(d, w)| d * w).sum()
    }
}
