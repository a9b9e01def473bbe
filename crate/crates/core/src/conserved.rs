//! Conserved functionals built from the densities, their linear and quadratic
//! coefficient structure, and the triangular recombination into Sobolev-type invariants.
//!
//! Integrals are over the torus normalized to volume 1, modulo total derivatives.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::diffpoly::{rho_sequence, taylor_p, Convention, DerivMultiIndex, DiffSeries, SeriesError};
use crate::ring::{frac, rat, QuadExt, Rational, RingElem};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConservedError {
    #[error("even level {0} has a nonzero quadratic part")]
    ParityViolation(usize),
    #[error("linear coefficient c_{0} disagrees with the closed form")]
    ClosedFormMismatch(usize),
    #[error("linear coefficient c_{0} violates the two-step recursion")]
    RecursionMismatch(usize),
    #[error("S_{0} vanishes")]
    VanishingSn(usize),
    #[error("S_{0} requested for an even index")]
    EvenIndex(usize),
    #[error("leading quadratic coefficient of level {level} is {coeff}, cannot normalize F_{level}")]
    DegenerateLeadingCoefficient { level: usize, coeff: RingElem, partial: Vec<ConservedFunctional> },
    #[error("linear table too short: need c_{0}")]
    TableTooShort(usize),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// `sum_i d_i * integral (d^i w)^2`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QuadraticForm {
    coeffs: BTreeMap<u32, RingElem>,
}

impl QuadraticForm {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, i: u32) -> RingElem {
        self.coeffs.get(&i).cloned().unwrap_or_default()
    }

    pub fn add_at(&mut self, i: u32, c: &RingElem) {
        let e = self.coeffs.entry(i).or_default();
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(&i);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn support(&self) -> Vec<u32> {
        self.coeffs.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &RingElem)> {
        self.coeffs.iter().map(|(i, c)| (*i, c))
    }

    /// Highest derivative order carried.
    pub fn top(&self) -> Option<u32> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn scale(&self, r: &RingElem) -> Self {
        let mut out = Self::new();
        for (i, c) in &self.coeffs {
            out.add_at(*i, &(c * r));
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (i, c) in &o.coeffs {
            out.add_at(*i, c);
        }
        out
    }

    /// Weight on `|u_j|^2` after `w_j = (1+j^2) u_j`, summed over `j` and `-j` separately.
    pub fn fourier_weight(&self, j: i64) -> RingElem {
        let mut acc = RingElem::zero();
        let j2 = rat(j * j);
        let mult = (rat(1) + &j2) * (rat(1) + &j2);
        for (i, c) in &self.coeffs {
            let mut f = mult.clone();
            for _ in 0..*i {
                f *= &j2;
            }
            acc += &c.scale(&f);
        }
        acc
    }
}

impl fmt::Display for QuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.coeffs.iter().map(|(i, c)| format!("d{} = {}", i, c)).collect();
        write!(f, "{}", parts.join(", "))
    }
}

/// Integral of a density split by degree.
#[derive(Clone, Debug, PartialEq)]
pub struct ConservedFunctional {
    pub n: usize,
    pub constant: RingElem,
    pub quadratic: QuadraticForm,
    /// Degree >= 3 remainder, not canonicalized.
    pub higher: DiffSeries,
    pub linear_coeff_top: RingElem,
}

impl ConservedFunctional {
    /// `sum_k r_k * F_k` over functionals with a common truncation.
    pub fn combine(n: usize, terms: &[(RingElem, &ConservedFunctional)]) -> Result<Self, SeriesError> {
        let d = terms.first().map_or(3, |t| t.1.higher.trunc_degree());
        let mut out = ConservedFunctional {
            n,
            constant: RingElem::zero(),
            quadratic: QuadraticForm::new(),
            higher: DiffSeries::zero(d),
            linear_coeff_top: RingElem::zero(),
        };
        for (r, f) in terms {
            out.constant += &(r * &f.constant);
            out.quadratic = out.quadratic.add(&f.quadratic.scale(r));
            out.higher = out.higher.add(&f.higher.scale(r))?;
        }
        Ok(out)
    }
}

/// Integrates by parts the quadratic part into diagonal form; degree-1 part integrates to 0.
pub fn ibp_reduce(density: &DiffSeries) -> (QuadraticForm, DiffSeries) {
    let mut q = QuadraticForm::new();
    for (alpha, c) in density.terms() {
        if alpha.degree() != 2 {
            continue;
        }
        let f = alpha.factors();
        let (k1, k2) = (f[0] as i64, f[1] as i64);
        if (k1 + k2) % 2 != 0 {
            continue;
        }
        let m = (k1 + k2) / 2;
        let sign = if (k1 - m).rem_euclid(2) == 0 { 1 } else { -1 };
        q.add_at(m as u32, &c.scale(&rat(sign)));
    }
    (q, density.parts(3, density.trunc_degree()))
}

fn integrate(n: usize, density: &DiffSeries) -> ConservedFunctional {
    let (quadratic, higher) = ibp_reduce(density);
    let linear_coeff_top = density.coeff(&DerivMultiIndex::var(n + 1));
    ConservedFunctional { n, constant: density.constant_term(), quadratic, higher, linear_coeff_top }
}

/// `Gamma^(0..=N)` through degree `D`.
pub fn gammas(n_max: usize, d: u32, convention: Convention) -> Result<Vec<ConservedFunctional>, ConservedError> {
    let seq = rho_sequence(n_max, d, convention)?;
    let mut out = Vec::with_capacity(n_max + 1);
    for (n, r) in seq.rho.iter().enumerate() {
        let g = integrate(n, r);
        if n % 2 == 0 && !g.quadratic.is_zero() {
            return Err(ConservedError::ParityViolation(n));
        }
        out.push(g);
    }
    Ok(out)
}

pub fn gamma(n: usize, d: u32) -> Result<ConservedFunctional, ConservedError> {
    Ok(gammas(n, d, Convention::Printed)?.pop().expect("nonempty"))
}

/// `integral (c+w)^(1/3) = -integral p`.
pub fn m1_expansion(d: u32) -> ConservedFunctional {
    let mut f = integrate(0, &taylor_p(d).neg());
    f.linear_coeff_top = RingElem::zero();
    f
}

/// Linear coefficients `c_m`: coefficient of `w_{m+1}` in `rho^(m)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearCoeffTable {
    pub c: Vec<RingElem>,
}

/// `(3 ± sqrt5)/2 * c^(-1/3)`.
pub fn root_a() -> RingElem {
    RingElem::monomial(QuadExt::new(frac(3, 2), frac(1, 2)), -1)
}

pub fn root_b() -> RingElem {
    RingElem::monomial(QuadExt::new(frac(3, 2), frac(-1, 2)), -1)
}

/// `(-3 ∓ sqrt5)/(18 c)`.
pub fn weight_d1() -> RingElem {
    RingElem::monomial(QuadExt::new(frac(-1, 6), frac(-1, 18)), -3)
}

pub fn weight_d2() -> RingElem {
    RingElem::monomial(QuadExt::new(frac(-1, 6), frac(1, 18)), -3)
}

/// `d1 b^m + d2 a^m`: the weight `(-3-sqrt5)/(18c)` goes with the smaller root.
pub fn closed_form_c(m: u32) -> RingElem {
    &(&weight_d1() * &root_b().pow(m)) + &(&weight_d2() * &root_a().pow(m))
}

impl LinearCoeffTable {
    /// Reads `c_0..=c_N` off the recursion (degree 2 suffices for linear terms).
    pub fn from_recursion(n_max: usize, convention: Convention) -> Result<Self, ConservedError> {
        let seq = rho_sequence(n_max.max(1), 2, convention)?;
        let c = seq.rho.iter().enumerate().take(n_max + 1).map(|(m, r)| r.coeff(&DerivMultiIndex::var(m + 1))).collect();
        Ok(LinearCoeffTable { c })
    }

    /// Checks `c_{n+2} = -c^(-2/3) c_n + 3 c^(-1/3) c_{n+1}` and the closed form.
    pub fn verify(&self) -> Result<(), ConservedError> {
        for n in 0..self.c.len().saturating_sub(2) {
            let pred = &(-&(&RingElem::c_pow(-2) * &self.c[n])) + &(&RingElem::frac_c(3, 1, -1) * &self.c[n + 1]);
            if pred != self.c[n + 2] {
                return Err(ConservedError::RecursionMismatch(n + 2));
            }
        }
        for (m, cm) in self.c.iter().enumerate() {
            if closed_form_c(m as u32) != *cm {
                return Err(ConservedError::ClosedFormMismatch(m));
            }
        }
        Ok(())
    }

    fn get(&self, k: usize) -> Result<&RingElem, ConservedError> {
        self.c.get(k).ok_or(ConservedError::TableTooShort(k))
    }
}

pub fn linear_table(n_max: usize) -> Result<LinearCoeffTable, ConservedError> {
    let t = LinearCoeffTable::from_recursion(n_max, Convention::Printed)?;
    t.verify()?;
    Ok(t)
}

fn neg_one_pow(e: i64) -> i64 {
    if e.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// `S_n = sum_{k=0}^{n+1} (-1)^((n+1)/2 - k) c_k c_{n+1-k}`, checked against the paired form.
pub fn compute_sn(table: &LinearCoeffTable, n: usize) -> Result<RingElem, ConservedError> {
    if n % 2 == 0 {
        return Err(ConservedError::EvenIndex(n));
    }
    let h = (n as i64 + 1) / 2;
    let mut direct = RingElem::zero();
    for k in 0..=n + 1 {
        let t = table.get(k)? * table.get(n + 1 - k)?;
        direct += &t.scale(&rat(neg_one_pow(h - k as i64)));
    }
    // 2 (-1)^h (sum_{k<h, even} - sum_{k<h, odd}) c_k c_{n+1-k} + c_h^2
    let mut paired = RingElem::zero();
    for k in 0..h as usize {
        let t = table.get(k)? * table.get(n + 1 - k)?;
        paired += &t.scale(&rat(2 * neg_one_pow(h) * neg_one_pow(k as i64)));
    }
    paired += &table.get(h as usize)?.pow(2);
    assert_eq!(direct, paired, "paired form of S_{} disagrees with the direct sum", n);
    if direct.is_zero() {
        return Err(ConservedError::VanishingSn(n));
    }
    Ok(direct)
}

/// Predicted top quadratic coefficient of `Gamma^(n+2)` for odd `n`:
/// `3 c^(-1/3) S_n - (2/3) c^(-1) (-1)^((n+3)/2) c_{n+2}`.
pub fn quad_relation(table: &LinearCoeffTable, n: usize) -> Result<RingElem, ConservedError> {
    let s = compute_sn(table, n).or_else(|e| match e {
        ConservedError::VanishingSn(_) => Ok(RingElem::zero()),
        other => Err(other),
    })?;
    let first = &RingElem::frac_c(3, 1, -1) * &s;
    let sign = neg_one_pow((n as i64 + 3) / 2);
    let second = &RingElem::frac_c(2 * sign, 3, -3) * table.get(n + 2)?;
    Ok(&first - &second)
}

/// Machine recursion vs predicted top quadratic coefficient of `Gamma^(n+2)`.
pub fn quad_consistency(n: usize, table: &LinearCoeffTable, gammas: &[ConservedFunctional]) -> Result<bool, ConservedError> {
    let g = gammas.get(n + 2).ok_or(ConservedError::TableTooShort(n + 2))?;
    let top = (n as u32 + 3) / 2;
    Ok(g.quadratic.get(top) == quad_relation(table, n)?)
}

/// `F_1, F_3, ..., F_{2K+1}` with quadratic parts `integral (d^{k+1} w)^2`.
pub fn triangularize(k_max: usize, gammas: &[ConservedFunctional], m1: &ConservedFunctional) -> Result<Vec<ConservedFunctional>, ConservedError> {
    let m2 = m1.quadratic.get(0);
    let m2_inv = m2.invert().map_err(|_| ConservedError::DegenerateLeadingCoefficient { level: 0, coeff: m2.clone(), partial: vec![] })?;
    let mut fs: Vec<ConservedFunctional> = Vec::new();
    for k in 0..=k_max {
        let level = 2 * k + 1;
        let g = gammas.get(level).ok_or(ConservedError::TableTooShort(level))?;
        let lead = g.quadratic.get(k as u32 + 1);
        let lead_inv = match lead.invert() {
            Ok(x) => x,
            Err(_) => return Err(ConservedError::DegenerateLeadingCoefficient { level, coeff: lead, partial: fs }),
        };
        let mut terms: Vec<(RingElem, &ConservedFunctional)> = vec![(RingElem::one(), g)];
        terms.push((-&(&g.quadratic.get(0) * &m2_inv), m1));
        for (i, f) in fs.iter().enumerate() {
            terms.push((-&g.quadratic.get(i as u32 + 1), f));
        }
        let raw = ConservedFunctional::combine(level, &terms)?;
        let mut f = ConservedFunctional::combine(level, &[(lead_inv, &raw)])?;
        f.linear_coeff_top = RingElem::zero();
        fs.push(f);
    }
    Ok(fs)
}

/// Fourier weights `|j|^(2(n-1)) (1+j^2)^2` of the quadratic part of `K_n`, `0 < |j| <= J`.
pub fn k_quadratic_fourier(n: u32, cutoff: i64) -> BTreeMap<i64, Rational> {
    let mut out = BTreeMap::new();
    for j in (-cutoff..=cutoff).filter(|j| *j != 0) {
        let j2 = rat(j * j);
        let mut w = (rat(1) + &j2) * (rat(1) + &j2);
        for _ in 1..n {
            w *= &j2;
        }
        out.insert(j, w);
    }
    out
}

/// Flat report row used by the CLI.
#[derive(Clone, Debug, Serialize)]
pub struct QuadRow {
    pub order: u32,
    pub coeff: RingElem,
}

pub fn quad_rows(q: &QuadraticForm) -> Vec<QuadRow> {
    q.iter().map(|(i, c)| QuadRow { order: i, coeff: c.clone() }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_step_integration_by_parts() {
        let d = 3;
        let w0w2 = DiffSeries::monomial(d, DerivMultiIndex::from_factors(&[0, 2]), RingElem::one());
        let (q, h) = ibp_reduce(&w0w2);
        assert_eq!(q.get(1), RingElem::from_int(-1));
        assert!(h.is_zero());
        let w1w2 = DiffSeries::monomial(d, DerivMultiIndex::from_factors(&[1, 2]), RingElem::one());
        assert!(ibp_reduce(&w1w2).0.is_zero());
        let w1w3 = DiffSeries::monomial(d, DerivMultiIndex::from_factors(&[1, 3]), RingElem::one());
        assert_eq!(ibp_reduce(&w1w3).0.get(2), RingElem::from_int(-1));
        let w0w4 = DiffSeries::monomial(d, DerivMultiIndex::from_factors(&[0, 4]), RingElem::one());
        assert_eq!(ibp_reduce(&w0w4).0.get(2), RingElem::one());
    }

    #[test]
    fn fourier_weights_match_single_mode() {
        let w = k_quadratic_fourier(1, 3);
        assert_eq!(w[&1], rat(4));
        assert_eq!(w[&-1], rat(4));
        assert_eq!(k_quadratic_fourier(2, 2)[&2], rat(100));
        let mut q = QuadraticForm::new();
        q.add_at(2, &RingElem::one());
        for j in 1..5 {
            assert_eq!(q.fourier_weight(j), RingElem::from_rational(k_quadratic_fourier(3, 5)[&j].clone()));
        }
    }

    #[test]
    fn sn_rejects_even() {
        let t = LinearCoeffTable { c: vec![RingElem::one(); 5] };
        assert!(matches!(compute_sn(&t, 2), Err(ConservedError::EvenIndex(2))));
        assert!(matches!(compute_sn(&t, 7), Err(ConservedError::TableTooShort(_))));
    }
}
