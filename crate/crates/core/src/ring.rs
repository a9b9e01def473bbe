//! Exact arithmetic in `Q(sqrt5)[c^(1/3), c^(-1/3)]`.
//!
//! The dispersion parameter `c` is carried as a formal symbol `t` with `t^3 = c`,
//! so an element is a finite Laurent polynomial in `t` whose coefficients are
//! `a + b*sqrt5` with `a, b` rational.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RingError {
    #[error("element has {0} terms, only monomials can be inverted")]
    NotAMonomial(usize),
    #[error("division by zero")]
    ZeroDivisor,
    #[error("the dispersion parameter must be nonzero")]
    ZeroParameter,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("invalid rational literal {0:?}")]
    Rational(String),
    #[error("invalid ring element: {0}")]
    Json(String),
}

/// Small integer as a rational.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `n/d` as a rational. Panics on `d == 0`.
pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p/q"` or `"p"`.
pub fn parse_rational(s: &str) -> Result<Rational, ParseError> {
    let s = s.trim();
    let err = || ParseError::Rational(s.to_string());
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    if num.is_empty() || den.is_empty() {
        return Err(err());
    }
    let n = BigInt::from_str(num).map_err(|_| err())?;
    let d = BigInt::from_str(den).map_err(|_| err())?;
    if d.is_zero() {
        return Err(err());
    }
    Ok(Rational::new(n, d))
}

/// Always `"p/q"`, integers included.
pub fn format_rational(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// `a + b*sqrt5`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuadExt {
    pub a: Rational,
    pub b: Rational,
}

impl QuadExt {
    pub fn new(a: Rational, b: Rational) -> Self {
        QuadExt { a, b }
    }

    pub fn rational(a: Rational) -> Self {
        QuadExt { a, b: Rational::zero() }
    }

    pub fn zero() -> Self {
        Self::rational(Rational::zero())
    }

    pub fn one() -> Self {
        Self::rational(Rational::one())
    }

    pub fn sqrt5() -> Self {
        QuadExt { a: Rational::zero(), b: Rational::one() }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn conj(&self) -> Self {
        QuadExt { a: self.a.clone(), b: -self.b.clone() }
    }

    /// Field norm `a^2 - 5 b^2`.
    pub fn norm(&self) -> Rational {
        &self.a * &self.a - rat(5) * &self.b * &self.b
    }

    pub fn inv(&self) -> Result<Self, RingError> {
        let n = self.norm();
        // a^2 = 5 b^2 has no nonzero rational solution
        if n.is_zero() {
            debug_assert!(self.is_zero());
            return Err(RingError::ZeroDivisor);
        }
        Ok(QuadExt { a: &self.a / &n, b: -(&self.b / &n) })
    }

    pub fn scale(&self, q: &Rational) -> Self {
        QuadExt { a: &self.a * q, b: &self.b * q }
    }

    pub fn to_f64(&self) -> f64 {
        self.a.to_f64().unwrap_or(f64::NAN) + self.b.to_f64().unwrap_or(f64::NAN) * 5f64.sqrt()
    }
}

impl Add for &QuadExt {
    type Output = QuadExt;
    fn add(self, o: &QuadExt) -> QuadExt {
        QuadExt { a: &self.a + &o.a, b: &self.b + &o.b }
    }
}

impl Sub for &QuadExt {
    type Output = QuadExt;
    fn sub(self, o: &QuadExt) -> QuadExt {
        QuadExt { a: &self.a - &o.a, b: &self.b - &o.b }
    }
}

impl Mul for &QuadExt {
    type Output = QuadExt;
    fn mul(self, o: &QuadExt) -> QuadExt {
        QuadExt {
            a: &self.a * &o.a + rat(5) * &self.b * &o.b,
            b: &self.a * &o.b + &o.a * &self.b,
        }
    }
}

impl Neg for &QuadExt {
    type Output = QuadExt;
    fn neg(self) -> QuadExt {
        QuadExt { a: -self.a.clone(), b: -self.b.clone() }
    }
}

impl fmt::Display for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a.is_zero(), self.b.is_zero()) {
            (_, true) => write!(f, "{}", self.a),
            (true, false) => write!(f, "{}*sqrt5", self.b),
            (false, false) => write!(f, "({} + {}*sqrt5)", self.a, self.b),
        }
    }
}

/// Element of `Q(sqrt5)[c^(±1/3)]`: map from `k` (meaning `c^(k/3)`) to coefficient.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RingElemJson", into = "RingElemJson")]
pub struct RingElem {
    terms: BTreeMap<i64, QuadExt>,
}

impl RingElem {
    pub fn zero() -> Self {
        RingElem { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::monomial(QuadExt::one(), 0)
    }

    /// `q * c^(k/3)`.
    pub fn monomial(q: QuadExt, k: i64) -> Self {
        let mut terms = BTreeMap::new();
        if !q.is_zero() {
            terms.insert(k, q);
        }
        RingElem { terms }
    }

    /// Rational constant.
    pub fn from_rational(q: Rational) -> Self {
        Self::monomial(QuadExt::rational(q), 0)
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(rat(n))
    }

    /// `(n/d) * c^(k/3)`.
    pub fn frac_c(n: i64, d: i64, k: i64) -> Self {
        Self::monomial(QuadExt::rational(frac(n, d)), k)
    }

    /// `c^(k/3)`.
    pub fn c_pow(k: i64) -> Self {
        Self::monomial(QuadExt::one(), k)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &QuadExt)> {
        self.terms.iter().map(|(k, q)| (*k, q))
    }

    pub fn coeff(&self, k: i64) -> QuadExt {
        self.terms.get(&k).cloned().unwrap_or_else(QuadExt::zero)
    }

    /// `(q, k)` when the element is a single monomial.
    pub fn as_monomial(&self) -> Option<(&QuadExt, i64)> {
        if self.terms.len() == 1 {
            self.terms.iter().next().map(|(k, q)| (q, *k))
        } else {
            None
        }
    }

    /// True when every coefficient has zero `sqrt5` part.
    pub fn is_rational(&self) -> bool {
        self.terms.values().all(QuadExt::is_rational)
    }

    fn insert_add(&mut self, k: i64, q: QuadExt) {
        if q.is_zero() {
            return;
        }
        match self.terms.get_mut(&k) {
            Some(slot) => {
                let s = &*slot + &q;
                if s.is_zero() {
                    self.terms.remove(&k);
                } else {
                    *slot = s;
                }
            }
            None => {
                self.terms.insert(k, q);
            }
        }
    }

    pub fn scale(&self, q: &Rational) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        RingElem { terms: self.terms.iter().map(|(k, v)| (*k, v.scale(q))).collect() }
    }

    /// Multiplies by `c^(k/3)`.
    pub fn shift(&self, k: i64) -> Self {
        RingElem { terms: self.terms.iter().map(|(e, v)| (e + k, v.clone())).collect() }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    pub fn invert(&self) -> Result<Self, RingError> {
        if self.terms.is_empty() {
            return Err(RingError::ZeroDivisor);
        }
        let (q, k) = self.as_monomial().ok_or(RingError::NotAMonomial(self.terms.len()))?;
        Ok(Self::monomial(q.inv()?, -k))
    }

    /// Floating evaluation at `c = c_value` with the real cube root.
    ///
    /// Arithmetic is f64; `precision` above 53 bits is accepted but not honoured.
    pub fn eval(&self, c_value: f64, precision: u32) -> Result<f64, RingError> {
        let _ = precision;
        if c_value == 0.0 {
            return Err(RingError::ZeroParameter);
        }
        let t = c_value.cbrt();
        Ok(self.terms.iter().map(|(k, q)| q.to_f64() * t.powi(*k as i32)).sum())
    }

    /// Exact evaluation at `c = t^3` for rational `t`.
    pub fn eval_at_cube(&self, t: &Rational) -> Result<QuadExt, RingError> {
        if t.is_zero() {
            return Err(RingError::ZeroParameter);
        }
        let mut acc = QuadExt::zero();
        for (k, q) in &self.terms {
            let tk = if *k >= 0 { pow_rat(t, *k as u32) } else { pow_rat(&t.recip(), (-*k) as u32) };
            acc = &acc + &q.scale(&tk);
        }
        Ok(acc)
    }
}

fn pow_rat(t: &Rational, n: u32) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..n {
        acc *= t;
    }
    acc
}

impl Add for &RingElem {
    type Output = RingElem;
    fn add(self, o: &RingElem) -> RingElem {
        let mut out = self.clone();
        for (k, q) in &o.terms {
            out.insert_add(*k, q.clone());
        }
        out
    }
}

impl AddAssign<&RingElem> for RingElem {
    fn add_assign(&mut self, o: &RingElem) {
        for (k, q) in &o.terms {
            self.insert_add(*k, q.clone());
        }
    }
}

impl Sub for &RingElem {
    type Output = RingElem;
    fn sub(self, o: &RingElem) -> RingElem {
        let mut out = self.clone();
        for (k, q) in &o.terms {
            out.insert_add(*k, -q);
        }
        out
    }
}

impl Neg for &RingElem {
    type Output = RingElem;
    fn neg(self) -> RingElem {
        RingElem { terms: self.terms.iter().map(|(k, q)| (*k, -q)).collect() }
    }
}

impl Mul for &RingElem {
    type Output = RingElem;
    fn mul(self, o: &RingElem) -> RingElem {
        let mut out = RingElem::zero();
        for (k1, q1) in &self.terms {
            for (k2, q2) in &o.terms {
                out.insert_add(k1 + k2, q1 * q2);
            }
        }
        out
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for RingElem {
            type Output = RingElem;
            fn $m(self, o: RingElem) -> RingElem {
                (&self).$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for RingElem {
    type Output = RingElem;
    fn neg(self) -> RingElem {
        -&self
    }
}

impl fmt::Display for RingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, q) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match (k, k % 3) {
                (0, _) => write!(f, "{}", q)?,
                (_, 0) => write!(f, "{}*c^{}", q, k / 3)?,
                _ => write!(f, "{}*c^({}/3)", q, k)?,
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    k: i64,
    a: String,
    b: String,
}

#[derive(Serialize, Deserialize)]
struct RingElemJson {
    terms: Vec<TermJson>,
}

impl From<RingElem> for RingElemJson {
    fn from(r: RingElem) -> Self {
        RingElemJson {
            terms: r
                .terms
                .iter()
                .map(|(k, q)| TermJson { k: *k, a: format_rational(&q.a), b: format_rational(&q.b) })
                .collect(),
        }
    }
}

impl TryFrom<RingElemJson> for RingElem {
    type Error = ParseError;
    fn try_from(j: RingElemJson) -> Result<Self, ParseError> {
        let mut out = RingElem::zero();
        for t in j.terms {
            let q = QuadExt::new(parse_rational(&t.a)?, parse_rational(&t.b)?);
            out.insert_add(t.k, q);
        }
        Ok(out)
    }
}

impl RingElem {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("ring element serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, ParseError> {
        serde_json::from_str(s).map_err(|e| ParseError::Json(e.to_string()))
    }
}

/// Sign of a nonzero rational as ±1, 0 for zero.
pub fn sign(q: &Rational) -> i32 {
    if q.is_zero() {
        0
    } else if q.is_positive() {
        1
    } else {
        -1
    }
}
