//! Truncated power series in `w, w_1, w_2, ...` (`w_i` the i-th x-derivative of `w`).
//!
//! Every series carries its truncation degree `D`; products silently drop
//! homogeneity degrees above `D`, so identities hold "through degree D".

use std::collections::BTreeMap;
use std::fmt;

use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ring::{frac, rat, ParseError, QuadExt, Rational, RingElem, RingError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("truncation degrees differ ({0} vs {1})")]
    TruncMismatch(u32, u32),
    #[error("constant term is not an invertible monomial")]
    NonInvertibleConstantTerm,
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// Exponent vector `(a_0, a_1, ...)`: `a_i` is the power of `w_i`. Trailing zeros trimmed.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DerivMultiIndex(Vec<u32>);

impl DerivMultiIndex {
    pub fn new(mut exps: Vec<u32>) -> Self {
        while exps.last() == Some(&0) {
            exps.pop();
        }
        DerivMultiIndex(exps)
    }

    pub fn constant() -> Self {
        DerivMultiIndex(Vec::new())
    }

    /// The single variable `w_i`.
    pub fn var(i: usize) -> Self {
        let mut v = vec![0; i + 1];
        v[i] = 1;
        DerivMultiIndex(v)
    }

    /// Monomial from a list of derivative orders, e.g. `[0, 2]` is `w * w_2`.
    pub fn from_factors(orders: &[usize]) -> Self {
        let mut v = Vec::new();
        for &i in orders {
            if v.len() <= i {
                v.resize(i + 1, 0);
            }
            v[i] += 1;
        }
        DerivMultiIndex(v)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn exp(&self, i: usize) -> u32 {
        self.0.get(i).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn weight(&self) -> u32 {
        self.0.iter().enumerate().map(|(i, a)| i as u32 * a).sum()
    }

    /// Largest derivative index present.
    pub fn top(&self) -> Option<usize> {
        if self.0.is_empty() {
            None
        } else {
            Some(self.0.len() - 1)
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.0.len().max(o.0.len());
        let v = (0..n).map(|i| self.exp(i) + o.exp(i)).collect();
        DerivMultiIndex(v)
    }

    /// Derivative orders with multiplicity, ascending.
    pub fn factors(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (i, a) in self.0.iter().enumerate() {
            for _ in 0..*a {
                out.push(i);
            }
        }
        out
    }
}

impl fmt::Display for DerivMultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        for (i, a) in self.0.iter().enumerate() {
            if *a == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            write!(f, "w{}", i)?;
            if *a > 1 {
                write!(f, "^{}", a)?;
            }
        }
        Ok(())
    }
}

/// Class membership report for a density.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCertificate {
    pub in_sigma: bool,
    pub affine_top: bool,
    pub min_degree: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SeriesJson", into = "SeriesJson")]
pub struct DiffSeries {
    trunc_degree: u32,
    order: u32,
    terms: BTreeMap<DerivMultiIndex, RingElem>,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    alpha: Vec<u32>,
    coeff: RingElem,
}

#[derive(Serialize, Deserialize)]
struct SeriesJson {
    trunc_degree: u32,
    order: u32,
    terms: Vec<TermJson>,
}

impl From<DiffSeries> for SeriesJson {
    fn from(s: DiffSeries) -> Self {
        SeriesJson {
            trunc_degree: s.trunc_degree,
            order: s.order,
            terms: s.terms.into_iter().map(|(a, c)| TermJson { alpha: a.0, coeff: c }).collect(),
        }
    }
}

impl TryFrom<SeriesJson> for DiffSeries {
    type Error = ParseError;
    fn try_from(j: SeriesJson) -> Result<Self, ParseError> {
        let mut s = DiffSeries::zero(j.trunc_degree);
        s.order = j.order;
        for t in j.terms {
            let a = DerivMultiIndex::new(t.alpha);
            if a.degree() > j.trunc_degree {
                return Err(ParseError::Json(format!("term {} exceeds truncation degree", a)));
            }
            if a.top().is_some_and(|t| t as u32 > j.order) {
                return Err(ParseError::Json(format!("term {} exceeds order {}", a, j.order)));
            }
            s.add_term(a, t.coeff);
        }
        Ok(s)
    }
}

impl DiffSeries {
    pub fn zero(trunc_degree: u32) -> Self {
        DiffSeries { trunc_degree, order: 0, terms: BTreeMap::new() }
    }

    pub fn constant(trunc_degree: u32, c: RingElem) -> Self {
        let mut s = Self::zero(trunc_degree);
        s.add_term(DerivMultiIndex::constant(), c);
        s
    }

    pub fn one(trunc_degree: u32) -> Self {
        Self::constant(trunc_degree, RingElem::one())
    }

    /// `w_i` itself.
    pub fn var(trunc_degree: u32, i: usize) -> Self {
        let mut s = Self::zero(trunc_degree);
        s.add_term(DerivMultiIndex::var(i), RingElem::one());
        s.order = i as u32;
        s
    }

    /// Single term `coeff * w^alpha` (dropped when above the truncation).
    pub fn monomial(trunc_degree: u32, alpha: DerivMultiIndex, coeff: RingElem) -> Self {
        let mut s = Self::zero(trunc_degree);
        s.order = alpha.top().unwrap_or(0) as u32;
        s.add_term(alpha, coeff);
        s
    }

    pub fn trunc_degree(&self) -> u32 {
        self.trunc_degree
    }

    pub fn order(&self) -> u32 {
        self.order
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

    pub fn terms(&self) -> impl Iterator<Item = (&DerivMultiIndex, &RingElem)> {
        self.terms.iter()
    }

    pub fn coeff(&self, alpha: &DerivMultiIndex) -> RingElem {
        self.terms.get(alpha).cloned().unwrap_or_default()
    }

    /// Coefficient of the monomial with the given derivative factors.
    pub fn coeff_of(&self, factors: &[usize]) -> RingElem {
        self.coeff(&DerivMultiIndex::from_factors(factors))
    }

    fn add_term(&mut self, alpha: DerivMultiIndex, c: RingElem) {
        if c.is_zero() || alpha.degree() > self.trunc_degree {
            return;
        }
        if let Some(t) = alpha.top() {
            self.order = self.order.max(t as u32);
        }
        match self.terms.get_mut(&alpha) {
            Some(slot) => {
                *slot += &c;
                if slot.is_zero() {
                    self.terms.remove(&alpha);
                }
            }
            None => {
                self.terms.insert(alpha, c);
            }
        }
    }

    fn check(&self, o: &Self) -> Result<(), SeriesError> {
        if self.trunc_degree != o.trunc_degree {
            Err(SeriesError::TruncMismatch(self.trunc_degree, o.trunc_degree))
        } else {
            Ok(())
        }
    }

    pub fn add(&self, o: &Self) -> Result<Self, SeriesError> {
        self.check(o)?;
        let mut out = self.clone();
        out.order = self.order.max(o.order);
        for (a, c) in &o.terms {
            out.add_term(a.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, o: &Self) -> Result<Self, SeriesError> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&RingElem::from_int(-1))
    }

    pub fn scale(&self, r: &RingElem) -> Self {
        let mut out = Self::zero(self.trunc_degree);
        out.order = self.order;
        if r.is_zero() {
            return out;
        }
        for (a, c) in &self.terms {
            out.add_term(a.clone(), c * r);
        }
        out
    }

    pub fn scale_rat(&self, q: &Rational) -> Self {
        self.scale(&RingElem::from_rational(q.clone()))
    }

    pub fn mul(&self, o: &Self) -> Result<Self, SeriesError> {
        self.check(o)?;
        let mut out = Self::zero(self.trunc_degree);
        out.order = self.order.max(o.order);
        for (a, ca) in &self.terms {
            let da = a.degree();
            for (b, cb) in &o.terms {
                if da + b.degree() > self.trunc_degree {
                    continue;
                }
                out.add_term(a.mul(b), ca * cb);
            }
        }
        Ok(out)
    }

    /// Total x-derivative, `d/dx w_i = w_{i+1}`.
    pub fn dx(&self) -> Self {
        let mut out = Self::zero(self.trunc_degree);
        out.order = self.order + 1;
        for (a, c) in &self.terms {
            for (i, &e) in a.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let mut v = a.0.clone();
                v[i] -= 1;
                if v.len() <= i + 1 {
                    v.resize(i + 2, 0);
                }
                v[i + 1] += 1;
                out.add_term(DerivMultiIndex::new(v), c.scale(&rat(e as i64)));
            }
        }
        out
    }

    pub fn dxx(&self) -> Self {
        self.dx().dx()
    }

    /// Homogeneous part of degree `d`.
    pub fn part(&self, d: u32) -> Self {
        let mut out = Self::zero(self.trunc_degree);
        out.order = self.order;
        for (a, c) in &self.terms {
            if a.degree() == d {
                out.add_term(a.clone(), c.clone());
            }
        }
        out
    }

    /// Sum of the parts with degree in `lo..=hi`.
    pub fn parts(&self, lo: u32, hi: u32) -> Self {
        let mut out = Self::zero(self.trunc_degree);
        out.order = self.order;
        for (a, c) in &self.terms {
            if (lo..=hi).contains(&a.degree()) {
                out.add_term(a.clone(), c.clone());
            }
        }
        out
    }

    pub fn constant_term(&self) -> RingElem {
        self.coeff(&DerivMultiIndex::constant())
    }

    /// Inverse through degree `D` by a geometric series around the constant term.
    pub fn invert(&self) -> Result<Self, SeriesError> {
        let c0 = self.constant_term();
        let c0_inv = c0.invert().map_err(|_| SeriesError::NonInvertibleConstantTerm)?;
        // f = c0 (1 + r), 1/f = c0^{-1} sum (-r)^k
        let minus_r = self.parts(1, self.trunc_degree).scale(&(-&c0_inv));
        let mut acc = Self::one(self.trunc_degree);
        let mut pw = Self::one(self.trunc_degree);
        for _ in 0..self.trunc_degree {
            pw = pw.mul(&minus_r)?;
            if pw.is_zero() {
                break;
            }
            acc = acc.add(&pw)?;
        }
        let mut out = acc.scale(&c0_inv);
        out.order = self.order;
        Ok(out)
    }

    /// Checks the weight bound `sum i*a_i <= claimed_order` and affinity in `w_{claimed_order}`.
    pub fn classify(&self, claimed_order: u32) -> ClassCertificate {
        let top = claimed_order as usize;
        let in_sigma = self.terms.keys().all(|a| a.weight() <= claimed_order);
        let affine_top = self.terms.keys().all(|a| {
            let e = a.exp(top);
            e == 0 || (e == 1 && (1..top).all(|i| a.exp(i) == 0) && a.top() == Some(top))
        });
        let min_degree = self.terms.keys().map(DerivMultiIndex::degree).min().unwrap_or(self.trunc_degree + 1);
        ClassCertificate { in_sigma, affine_top, min_degree }
    }

    /// Pointwise evaluation; `derivs[i][x]` holds `w_i` at grid point `x`.
    pub fn eval_grid(&self, derivs: &[Vec<f64>], c_value: f64) -> Result<Vec<f64>, SeriesError> {
        let n = derivs.first().map_or(0, Vec::len);
        let mut out = vec![0.0; n];
        for (a, c) in &self.terms {
            let cv = c.eval(c_value, 53)?;
            let f = a.factors();
            for (x, o) in out.iter_mut().enumerate() {
                let mut v = cv;
                for &i in &f {
                    v *= derivs[i][x];
                }
                *o += v;
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("series serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, ParseError> {
        serde_json::from_str(s).map_err(|e| ParseError::Json(e.to_string()))
    }
}

impl fmt::Display for DiffSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(a, c)| format!("[{}]*{}", c, a)).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Taylor expansion of `p = -(c+w)^(1/3)` through degree `D`.
pub fn taylor_p(d: u32) -> DiffSeries {
    let mut s = DiffSeries::zero(d);
    let third = frac(1, 3);
    // binom(1/3, n)
    let mut binom = Rational::one();
    for n in 0..=d {
        if n > 0 {
            binom = binom * (&third - rat(n as i64 - 1)) / rat(n as i64);
        }
        let coeff = RingElem::monomial(QuadExt::rational(-binom.clone()), 1 - 3 * n as i64);
        s.add_term(DerivMultiIndex::new(vec![n]), coeff);
    }
    s
}

/// Normalization of the `rho^(n+2) p^2` term in the order-by-order recursion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// Coefficient 1, reproducing the published constants.
    #[default]
    Printed,
    /// Coefficient 3, consistent with the Riccati relation that also yields `rho^(1)`.
    Lax,
}

impl Convention {
    pub fn lead(self) -> i64 {
        match self {
            Convention::Printed => 1,
            Convention::Lax => 3,
        }
    }
}

/// The densities `rho^(0..=N)` and the building blocks used to produce them.
#[derive(Clone, Debug)]
pub struct RhoSequence {
    pub convention: Convention,
    pub p: DiffSeries,
    pub rho: Vec<DiffSeries>,
    rho_x: Vec<DiffSeries>,
}

impl RhoSequence {
    /// Everything except `lead * p^2 * rho^(n+2)` in the level-`n` relation:
    /// `rho^n - rho^n_xx - 3 sum p rho^k1 rho^k2 - sum rho rho rho - 3 (rho^(n+1) p)_x - 3 sum rho^k1 rho^k2_x`.
    pub fn level_rhs(&self, n: usize) -> Result<DiffSeries, SeriesError> {
        level_rhs(&self.p, &self.rho, &self.rho_x, n)
    }

    /// `rho^n - rho^n_xx - (lead p^2 rho^(n+2) + rest)`; zero through degree `D` when consistent.
    pub fn residual(&self, n: usize) -> Result<DiffSeries, SeriesError> {
        let p2 = self.p.mul(&self.p)?;
        let lhs = p2.mul(&self.rho[n + 2])?.scale_rat(&rat(self.convention.lead()));
        self.level_rhs(n)?.sub(&lhs)
    }
}

fn level_rhs(p: &DiffSeries, rho: &[DiffSeries], rho_x: &[DiffSeries], n: usize) -> Result<DiffSeries, SeriesError> {
    let mut acc = rho[n].sub(&rho_x[n].dx())?;
    // 3 p sum_{k1+k2=n+1} rho^k1 rho^k2 (ordered pairs)
    let mut pair = DiffSeries::zero(p.trunc_degree());
    for k1 in 0..=n + 1 {
        let k2 = n + 1 - k1;
        if k1 > k2 {
            break;
        }
        let prod = rho[k1].mul(&rho[k2])?;
        let w = if k1 == k2 { 1 } else { 2 };
        pair = pair.add(&prod.scale_rat(&rat(w)))?;
    }
    acc = acc.sub(&p.mul(&pair)?.scale_rat(&rat(3)))?;
    // sum_{k1+k2+k3=n} rho rho rho (ordered triples)
    for k1 in 0..=n {
        for k2 in 0..=n - k1 {
            let k3 = n - k1 - k2;
            let prod = rho[k1].mul(&rho[k2])?.mul(&rho[k3])?;
            acc = acc.sub(&prod)?;
        }
    }
    acc = acc.sub(&rho[n + 1].mul(p)?.dx().scale_rat(&rat(3)))?;
    for k1 in 0..=n {
        let k2 = n - k1;
        acc = acc.sub(&rho[k1].mul(&rho_x[k2])?.scale_rat(&rat(3)))?;
    }
    Ok(acc)
}

/// `rho^(0..=N)` through degree `D` under the printed normalization.
pub fn rho_seq(n_max: usize, d: u32) -> Result<Vec<DiffSeries>, SeriesError> {
    Ok(rho_sequence(n_max, d, Convention::Printed)?.rho)
}

pub fn rho_sequence(n_max: usize, d: u32, convention: Convention) -> Result<RhoSequence, SeriesError> {
    let p = taylor_p(d);
    let px = p.dx();
    let pxx = px.dx();
    let pinv = p.invert()?;
    let pinv2 = pinv.mul(&pinv)?;
    let pinv3 = pinv2.mul(&pinv)?;

    let rho0 = px.mul(&pinv)?.neg();
    let rho1 = px
        .mul(&px)?
        .mul(&pinv3)?
        .neg()
        .add(&pxx.mul(&pinv2)?.scale_rat(&frac(2, 3)))?
        .add(&pinv.scale_rat(&frac(1, 3)))?;

    let mut rho = vec![rho0];
    if n_max >= 1 {
        rho.push(rho1);
    }
    let mut rho_x: Vec<DiffSeries> = rho.iter().map(DiffSeries::dx).collect();
    let inv_lead = RingElem::from_rational(frac(1, convention.lead()));
    let divisor = pinv2.scale(&inv_lead);
    let mut n = 0;
    while n + 2 <= n_max {
        let next = divisor.mul(&level_rhs(&p, &rho, &rho_x, n)?)?;
        rho_x.push(next.dx());
        rho.push(next);
        n += 1;
    }
    for (i, r) in rho.iter_mut().enumerate() {
        let mut fixed = r.clone();
        fixed.order = i as u32 + 1;
        *r = fixed;
    }
    Ok(RhoSequence { convention, p, rho, rho_x })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(f: &[usize]) -> DerivMultiIndex {
        DerivMultiIndex::from_factors(f)
    }

    #[test]
    fn index_basics() {
        let a = DerivMultiIndex::new(vec![1, 0, 2, 0, 0]);
        assert_eq!(a.exponents(), &[1, 0, 2]);
        assert_eq!(a.degree(), 3);
        assert_eq!(a.weight(), 4);
        assert_eq!(a.to_string(), "w0*w2^2");
        assert_eq!(m(&[2, 0, 2]), a);
    }

    #[test]
    fn derivative_leibniz_examples() {
        let d = 4;
        assert_eq!(DiffSeries::var(d, 0).dx(), DiffSeries::var(d, 1));
        let w2 = DiffSeries::monomial(d, m(&[0, 0]), RingElem::one());
        assert_eq!(w2.dx().coeff_of(&[0, 1]), RingElem::from_int(2));
        let w0w2 = DiffSeries::monomial(d, m(&[0, 2]), RingElem::one()).dx();
        assert_eq!(w0w2.len(), 2);
        assert_eq!(w0w2.coeff_of(&[1, 2]), RingElem::one());
        assert_eq!(w0w2.coeff_of(&[0, 3]), RingElem::one());
    }

    #[test]
    fn truncation_drops_overflow() {
        let d = 3;
        let w = DiffSeries::var(d, 0);
        let w3 = DiffSeries::monomial(d, m(&[0, 0, 0]), RingElem::one());
        assert!(w.mul(&w3).unwrap().is_zero());
        assert_eq!(w.mul(&DiffSeries::var(d, 1)).unwrap().coeff_of(&[0, 1]), RingElem::one());
        assert_eq!(DiffSeries::zero(2).add(&DiffSeries::zero(3)), Err(SeriesError::TruncMismatch(2, 3)));
    }

    #[test]
    fn p_expansion_low_coefficients() {
        let p = taylor_p(4);
        assert_eq!(p.coeff_of(&[]), RingElem::frac_c(-1, 1, 1));
        assert_eq!(p.coeff_of(&[0]), RingElem::frac_c(-1, 3, -2));
        assert_eq!(p.coeff_of(&[0, 0]), RingElem::frac_c(1, 9, -5));
        assert_eq!(p.coeff_of(&[0, 0, 0]), RingElem::frac_c(-5, 81, -8));
        let p2 = p.mul(&p).unwrap();
        assert_eq!(p2.constant_term(), RingElem::c_pow(2));
        assert_eq!(p2.invert().unwrap().constant_term(), RingElem::c_pow(-2));
    }

    #[test]
    fn geometric_inverse() {
        let d = 5;
        let f = DiffSeries::one(d).add(&DiffSeries::var(d, 0)).unwrap();
        let g = f.invert().unwrap();
        for k in 0..=5usize {
            let sign = if k % 2 == 0 { 1 } else { -1 };
            assert_eq!(g.coeff_of(&vec![0; k]), RingElem::from_int(sign));
        }
        assert_eq!(f.mul(&g).unwrap(), DiffSeries::one(d));
        let bad = DiffSeries::var(d, 0);
        assert_eq!(bad.invert(), Err(SeriesError::NonInvertibleConstantTerm));
    }

    #[test]
    fn classify_examples() {
        let bad = DiffSeries::monomial(4, m(&[2, 2]), RingElem::one());
        assert!(!bad.classify(2).affine_top);
        assert_eq!(DiffSeries::zero(4).classify(1).min_degree, 5);
        let mixed = DiffSeries::monomial(4, m(&[1, 2]), RingElem::one());
        assert!(!mixed.classify(2).affine_top);
        assert!(!mixed.classify(2).in_sigma);
    }

    #[test]
    fn json_round_trip() {
        let r = rho_seq(2, 3).unwrap();
        let s = r[1].to_json();
        let back = DiffSeries::from_json(&s).unwrap();
        assert_eq!(back, r[1]);
        assert!(DiffSeries::from_json(r#"{"trunc_degree":1,"order":0,"terms":[{"alpha":[2],"coeff":{"terms":[]}}]}"#).is_err());
    }
}
