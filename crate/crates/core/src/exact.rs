//! Exact rational arithmetic, symmetric-matrix routines and the quadratic
//! field Q(√d).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{BigInt, BigRational, One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses "p/q" or "p". A sign is only accepted on the numerator.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational {s:?}"));
    let (num, den) = match s.split_once('/') {
        Some((p, q)) => (p, Some(q)),
        None => (s, None),
    };
    let p: BigInt = num.parse().map_err(|_| bad())?;
    let q: BigInt = match den {
        Some(q) if q.starts_with(['-', '+']) => return Err(bad()),
        Some(q) => q.parse().map_err(|_| bad())?,
        None => BigInt::one(),
    };
    if q.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(p, q))
}

pub fn fmt_rational(r: &Rational) -> String {
    r.to_string()
}

/// Lossy conversion, only for display annotations.
pub fn to_f64(r: &Rational) -> f64 {
    use num::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Dense matrix of rationals, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged matrix rows".into()));
        }
        Ok(RationalMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_strs<S: AsRef<str>>(rows: &[Vec<S>]) -> Result<Self> {
        let parsed = rows
            .iter()
            .map(|row| row.iter().map(|s| parse_rational(s.as_ref())).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(parsed)
    }

    pub fn from_ints(rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn to_strings(&self) -> Vec<Vec<String>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| fmt_rational(self.get(i, j))).collect())
            .collect()
    }

    pub fn trace(&self) -> Rational {
        (0..self.rows.min(self.cols)).fold(Rational::zero(), |acc, i| acc + self.get(i, i))
    }

    pub fn mul(&self, other: &RationalMatrix) -> Result<RationalMatrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let v = out.get(i, j) + a * b;
                        out.set(i, j, v);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!("{} columns, vector of {}", self.cols, v.len())));
        }
        Ok((0..self.rows)
            .map(|i| (0..self.cols).fold(Rational::zero(), |acc, j| acc + self.get(i, j) * &v[j]))
            .collect())
    }

    /// vᵀ M v
    pub fn quadratic_form(&self, v: &[Rational]) -> Result<Rational> {
        let mv = self.mul_vec(v)?;
        Ok(mv.iter().zip(v).fold(Rational::zero(), |acc, (a, b)| acc + a * b))
    }

    /// Determinant by cofactor expansion over all permutations. Exponential;
    /// kept as an oracle for small matrices.
    pub fn det_by_permutations(&self) -> Result<Rational> {
        if !self.is_square() {
            return Err(Error::Dimension("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut perm: Vec<usize> = (0..n).collect();
        let mut total = Rational::zero();
        permutations(&mut perm, 0, &mut |p| {
            let mut term = if parity(p) { Rational::one() } else { -Rational::one() };
            for (i, &j) in p.iter().enumerate() {
                term *= self.get(i, j);
            }
            total += term;
        });
        Ok(total)
    }
}

fn permutations(p: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permutations(p, k + 1, f);
        p.swap(k, i);
    }
}

// true when even
fn parity(p: &[usize]) -> bool {
    let mut inversions = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inversions += 1;
            }
        }
    }
    inversions % 2 == 0
}

/// Coefficients c_0..c_n (lowest degree first, c_n = 1) of det(xI − M),
/// by the Faddeev–LeVerrier recurrence.
pub fn char_poly(m: &RationalMatrix) -> Result<Vec<Rational>> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("char_poly of a {}x{} matrix", m.rows, m.cols)));
    }
    let n = m.rows;
    let mut c = vec![Rational::zero(); n + 1];
    c[n] = Rational::one();
    let mut mk = RationalMatrix::zeros(n, n);
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = m.mul(&mk)?;
        for i in 0..n {
            let v = next.get(i, i) + &c[n - k + 1];
            next.set(i, i, v);
        }
        let amk = m.mul(&next)?;
        c[n - k] = -amk.trace() / int(k as i64);
        mk = next;
    }
    Ok(c)
}

/// Highest degree first, e.g. "x^4 - 35/12 x^3".
pub fn format_poly(c: &[Rational]) -> String {
    let mut out = String::new();
    for (k, coef) in c.iter().enumerate().rev() {
        if coef.is_zero() {
            continue;
        }
        let neg = coef.is_negative();
        let mag = coef.abs();
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mono = match k {
            0 => String::new(),
            1 => "x".to_string(),
            _ => format!("x^{k}"),
        };
        if mono.is_empty() {
            out.push_str(&mag.to_string());
        } else if mag.is_one() {
            out.push_str(&mono);
        } else {
            out.push_str(&format!("{mag} {mono}"));
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// Outcome of the exact PSD decision.
#[derive(Clone, Debug)]
pub struct PsdReport {
    pub psd: bool,
    /// Positive pivots taken by the symmetric elimination, in order.
    pub pivots: Vec<Rational>,
    /// Pivot indices (original coordinates).
    pub order: Vec<usize>,
    /// When not PSD: a vector with vᵀMv < 0.
    pub witness: Option<Vec<Rational>>,
}

/// Exact LDLᵀ with symmetric pivoting. M is PSD iff every pivot is positive
/// and the block left once no positive diagonal remains is identically zero.
pub fn is_psd(m: &RationalMatrix) -> Result<PsdReport> {
    if !m.is_symmetric() {
        return Err(Error::Symmetry);
    }
    let n = m.rows;
    // s holds the current Schur complement on the active indices; basis[r]
    // is the original-coordinate vector with basis[r]ᵀ M basis[s] = s[r][s].
    let mut s = m.clone();
    let mut basis: Vec<Vec<Rational>> = (0..n)
        .map(|r| (0..n).map(|c| if c == r { Rational::one() } else { Rational::zero() }).collect())
        .collect();
    let mut active: Vec<usize> = (0..n).collect();
    let mut pivots = Vec::new();
    let mut order = Vec::new();
    let fail = |w: Vec<Rational>, pivots, order| {
        Ok(PsdReport { psd: false, pivots, order, witness: Some(simple_witness(m).unwrap_or(w)) })
    };
    loop {
        if let Some(&j) = active.iter().find(|&&j| s.get(j, j).is_negative()) {
            return fail(basis[j].clone(), pivots, order);
        }
        let pivot = active
            .iter()
            .copied()
            .filter(|&j| s.get(j, j).is_positive())
            .max_by(|&a, &b| s.get(a, a).cmp(s.get(b, b)).then(b.cmp(&a)));
        let Some(p) = pivot else { break };
        let d = s.get(p, p).clone();
        active.retain(|&j| j != p);
        for &r in &active {
            let f = s.get(r, p) / &d;
            if f.is_zero() {
                continue;
            }
            for &c in &active {
                let v = s.get(r, c) - &f * s.get(p, c);
                s.set(r, c, v);
            }
            let bp = basis[p].clone();
            for (x, y) in basis[r].iter_mut().zip(bp) {
                *x -= &f * y;
            }
        }
        pivots.push(d);
        order.push(p);
    }
    // all remaining diagonals are zero
    for &j in &active {
        for &i in &active {
            let sij = s.get(i, j);
            if i != j && !sij.is_zero() {
                let t = -(s.get(i, i) + Rational::one()) / (int(2) * sij);
                let w = basis[j].iter().zip(&basis[i]).map(|(bj, bi)| &t * bj + bi).collect();
                return fail(w, pivots, order);
            }
        }
    }
    Ok(PsdReport { psd: true, pivots, order, witness: None })
}

// Prefer a short witness when one exists: a negative diagonal, or e_i ± e_j.
fn simple_witness(m: &RationalMatrix) -> Option<Vec<Rational>> {
    let n = m.rows;
    let unit = |i: usize| -> Vec<Rational> {
        (0..n).map(|c| if c == i { Rational::one() } else { Rational::zero() }).collect()
    };
    for i in 0..n {
        if m.get(i, i).is_negative() {
            return Some(unit(i));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let mut v = unit(i);
            v[j] = if m.get(i, j).is_positive() { -Rational::one() } else { Rational::one() };
            if m.quadratic_form(&v).ok()?.is_negative() {
                return Some(v);
            }
        }
    }
    None
}

/// M ⪰ 0 iff (−1)^(n−k) c_k ≥ 0 for every k (M symmetric, real spectrum).
pub fn psd_by_sign_rule(m: &RationalMatrix) -> Result<bool> {
    if !m.is_symmetric() {
        return Err(Error::Symmetry);
    }
    let c = char_poly(m)?;
    let n = m.rows;
    Ok(c.iter().enumerate().all(|(k, ck)| {
        if (n - k).is_multiple_of(2) {
            !ck.is_negative()
        } else {
            !ck.is_positive()
        }
    }))
}

/// a + b√d with a fixed square-free radicand d.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadraticValue {
    #[serde(with = "rational_str")]
    pub a: Rational,
    #[serde(with = "rational_str")]
    pub b: Rational,
    pub d: u64,
}

impl QuadraticValue {
    pub fn new(a: Rational, b: Rational, d: u64) -> Result<Self> {
        if d == 0 || !is_square_free(d) {
            return Err(Error::Field(format!("radicand {d} is not a positive square-free integer")));
        }
        Ok(QuadraticValue { a, b, d })
    }

    pub fn rational(a: Rational, d: u64) -> Result<Self> {
        Self::new(a, Rational::zero(), d)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    fn same_field(&self, o: &Self) -> Result<()> {
        if self.d != o.d {
            return Err(Error::Field(format!("mixed radicands {} and {}", self.d, o.d)));
        }
        Ok(())
    }

    pub fn try_add(&self, o: &Self) -> Result<Self> {
        self.same_field(o)?;
        Ok(QuadraticValue { a: &self.a + &o.a, b: &self.b + &o.b, d: self.d })
    }

    pub fn try_sub(&self, o: &Self) -> Result<Self> {
        self.same_field(o)?;
        Ok(QuadraticValue { a: &self.a - &o.a, b: &self.b - &o.b, d: self.d })
    }

    pub fn try_mul(&self, o: &Self) -> Result<Self> {
        self.same_field(o)?;
        let d = int(self.d as i64);
        Ok(QuadraticValue {
            a: &self.a * &o.a + &self.b * &o.b * d,
            b: &self.a * &o.b + &self.b * &o.a,
            d: self.d,
        })
    }

    pub fn scale(&self, r: &Rational) -> Self {
        QuadraticValue { a: &self.a * r, b: &self.b * r, d: self.d }
    }
}

impl fmt::Display for QuadraticValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else if self.a.is_zero() {
            write!(f, "{}√{}", self.b, self.d)
        } else if self.b.is_negative() {
            write!(f, "{} - {}√{}", self.a, -&self.b, self.d)
        } else {
            write!(f, "{} + {}√{}", self.a, self.b, self.d)
        }
    }
}

impl Add for &QuadraticValue {
    type Output = QuadraticValue;
    fn add(self, o: &QuadraticValue) -> QuadraticValue {
        self.try_add(o).expect("radicands differ")
    }
}

impl Sub for &QuadraticValue {
    type Output = QuadraticValue;
    fn sub(self, o: &QuadraticValue) -> QuadraticValue {
        self.try_sub(o).expect("radicands differ")
    }
}

impl Mul for &QuadraticValue {
    type Output = QuadraticValue;
    fn mul(self, o: &QuadraticValue) -> QuadraticValue {
        self.try_mul(o).expect("radicands differ")
    }
}

impl Neg for &QuadraticValue {
    type Output = QuadraticValue;
    fn neg(self) -> QuadraticValue {
        QuadraticValue { a: -&self.a, b: -&self.b, d: self.d }
    }
}

fn is_square_free(d: u64) -> bool {
    let mut p = 2u64;
    while p * p <= d {
        if d.is_multiple_of(p * p) {
            return false;
        }
        p += 1;
    }
    true
}

/// Evaluates a polynomial (lowest degree first) at x.
pub fn eval_poly(c: &[Rational], x: &QuadraticValue) -> QuadraticValue {
    let mut acc = QuadraticValue { a: Rational::zero(), b: Rational::zero(), d: x.d };
    for ck in c.iter().rev() {
        acc = &acc * x;
        acc.a += ck;
    }
    acc
}

/// True iff M v = λ v exactly in Q(√d).
pub fn eigencheck(m: &RationalMatrix, v: &[QuadraticValue], lambda: &QuadraticValue) -> Result<bool> {
    if !m.is_square() || v.len() != m.cols {
        return Err(Error::Dimension(format!("{}x{} matrix, vector of {}", m.rows, m.cols, v.len())));
    }
    for x in v {
        lambda.same_field(x)?;
    }
    for i in 0..m.rows {
        let mut lhs = QuadraticValue { a: Rational::zero(), b: Rational::zero(), d: lambda.d };
        for (j, x) in v.iter().enumerate() {
            lhs = &lhs + &x.scale(m.get(i, j));
        }
        if lhs != lambda * &v[i] {
            return Ok(false);
        }
    }
    Ok(true)
}

/// True iff M = c·v·vᵀ entrywise.
pub fn rank1_check(m: &RationalMatrix, c: &Rational, v: &[Rational]) -> Result<bool> {
    Ok(rank1_mismatch(m, c, v)?.is_none())
}

/// First entry (i, j) where M differs from c·v·vᵀ.
pub fn rank1_mismatch(m: &RationalMatrix, c: &Rational, v: &[Rational]) -> Result<Option<(usize, usize)>> {
    if m.rows != v.len() || m.cols != v.len() {
        return Err(Error::Dimension(format!("{}x{} matrix, vector of {}", m.rows, m.cols, v.len())));
    }
    for i in 0..m.rows {
        for j in 0..m.cols {
            if *m.get(i, j) != c * &v[i] * &v[j] {
                return Ok(Some((i, j)));
            }
        }
    }
    Ok(None)
}

pub mod rational_str {
    //! serde adapter: Rational <-> "p/q".
    use super::{fmt_rational, parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}
