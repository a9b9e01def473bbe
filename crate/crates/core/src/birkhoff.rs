//! Zero-momentum Fourier polynomials in the modes `u_j`, their Poisson bracket,
//! resonance classification and Birkhoff normal-form steps.
//!
//! Bracket: `{P, Q} = sum_j i*omega(j) dP/du_j dQ/du_{-j}`, the Fourier form of
//! `integral grad P . J grad Q` with `J = (1-dxx)^{-1}(4-dxx)dx`, so that
//! `{H0, u^a} = -i Omega(a) u^a` for `H0 = sum_{j>0} u_j u_{-j}`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::diffpoly::DiffSeries;
use crate::ring::{format_rational, frac, rat, Rational, RingError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BirkhoffError {
    #[error("mode 0 is not part of the phase space")]
    ZeroMode,
    #[error("duplicate index {0}")]
    DuplicateIndex(i64),
    #[error("mode cutoffs differ ({0} vs {1})")]
    CutoffMismatch(i64, i64),
    #[error("index {0} has nonzero momentum")]
    NonzeroMomentum(FourierMultiIndex),
    #[error("index {0} leaves the cutoff {1}")]
    OutsideCutoff(FourierMultiIndex, i64),
    #[error("quadratic part is not diagonal at {0}")]
    NotDiagonal(FourierMultiIndex),
    #[error("coefficient has an irrational part after evaluation")]
    IrrationalCoefficient,
    #[error("normal form term {0} is not trivially resonant")]
    NonTrivialNormalTerm(FourierMultiIndex),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// `omega(j) = j (4 + j^2) / (1 + j^2)`.
pub fn omega(j: i64) -> Result<Rational, BirkhoffError> {
    if j == 0 {
        return Err(BirkhoffError::ZeroMode);
    }
    Ok(Rational::new(BigInt::from(j) * BigInt::from(4 + j * j), BigInt::from(1 + j * j)))
}

fn omega_nz(j: i64) -> Rational {
    omega(j).expect("indices never carry mode 0")
}

/// Multi-index `a`: map mode `j != 0` to its multiplicity.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FourierMultiIndex(BTreeMap<i64, u32>);

impl FourierMultiIndex {
    /// From a list of modes with repetition, e.g. `[1, 2, -3]`.
    pub fn from_modes(modes: &[i64]) -> Result<Self, BirkhoffError> {
        let mut m = BTreeMap::new();
        for &j in modes {
            if j == 0 {
                return Err(BirkhoffError::ZeroMode);
            }
            *m.entry(j).or_insert(0) += 1;
        }
        Ok(FourierMultiIndex(m))
    }

    pub fn get(&self, j: i64) -> u32 {
        self.0.get(&j).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, u32)> + '_ {
        self.0.iter().map(|(j, a)| (*j, *a))
    }

    pub fn degree(&self) -> u32 {
        self.0.values().sum()
    }

    pub fn momentum(&self) -> i64 {
        self.0.iter().map(|(j, a)| j * *a as i64).sum()
    }

    /// `a_j = a_{-j}` for all `j`.
    pub fn is_trivially_resonant(&self) -> bool {
        self.0.iter().all(|(j, a)| self.get(-j) == *a)
    }

    pub fn max_abs(&self) -> i64 {
        self.0.keys().map(|j| j.abs()).max().unwrap_or(0)
    }

    /// Modes with repetition, ascending.
    pub fn modes(&self) -> Vec<i64> {
        let mut out = Vec::new();
        for (j, a) in &self.0 {
            for _ in 0..*a {
                out.push(*j);
            }
        }
        out
    }

    /// `j -> -j`.
    pub fn reflect(&self) -> Self {
        FourierMultiIndex(self.0.iter().map(|(j, a)| (-j, *a)).collect())
    }

    fn combine_remove(&self, o: &Self, j: i64) -> Self {
        let mut m = self.0.clone();
        for (k, a) in &o.0 {
            *m.entry(*k).or_insert(0) += a;
        }
        for k in [j, -j] {
            let e = m.get_mut(&k).expect("contracted mode present");
            *e -= 1;
            if *e == 0 {
                m.remove(&k);
            }
        }
        FourierMultiIndex(m)
    }
}

impl fmt::Display for FourierMultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m: Vec<String> = self.modes().iter().map(i64::to_string).collect();
        write!(f, "({})", m.join(","))
    }
}

/// `re + i*im` over the rationals.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct GaussianRational {
    pub re: Rational,
    pub im: Rational,
}

impl GaussianRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        GaussianRational { re, im }
    }

    pub fn real(re: Rational) -> Self {
        GaussianRational { re, im: Rational::zero() }
    }

    pub fn zero() -> Self {
        Self::real(Rational::zero())
    }

    pub fn one() -> Self {
        Self::real(Rational::one())
    }

    pub fn i() -> Self {
        GaussianRational { re: Rational::zero(), im: Rational::one() }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussianRational { re: self.re.clone(), im: -self.im.clone() }
    }

    pub fn scale(&self, q: &Rational) -> Self {
        GaussianRational { re: &self.re * q, im: &self.im * q }
    }

    pub fn inv(&self) -> Option<Self> {
        let n = &self.re * &self.re + &self.im * &self.im;
        if n.is_zero() {
            None
        } else {
            Some(GaussianRational { re: &self.re / &n, im: -(&self.im / &n) })
        }
    }

    /// `i^k`.
    pub fn i_pow(k: u32) -> Self {
        match k % 4 {
            0 => Self::one(),
            1 => Self::i(),
            2 => Self::real(rat(-1)),
            _ => Self::i().conj(),
        }
    }
}

impl Add for &GaussianRational {
    type Output = GaussianRational;
    fn add(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl Sub for &GaussianRational {
    type Output = GaussianRational;
    fn sub(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl Mul for &GaussianRational {
    type Output = GaussianRational;
    fn mul(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational { re: -self.re.clone(), im: -self.im.clone() }
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}i", self.im)
        } else {
            write!(f, "{}{}{}i", self.re, if self.im.is_negative() { "" } else { "+" }, self.im)
        }
    }
}

/// Finite sum of zero-momentum monomials supported in `0 < |j| <= cutoff`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FourierPolynomial {
    cutoff: i64,
    terms: BTreeMap<FourierMultiIndex, GaussianRational>,
}

impl FourierPolynomial {
    pub fn new(cutoff: i64) -> Self {
        FourierPolynomial { cutoff, terms: BTreeMap::new() }
    }

    pub fn monomial(cutoff: i64, alpha: FourierMultiIndex, c: GaussianRational) -> Result<Self, BirkhoffError> {
        let mut p = Self::new(cutoff);
        p.add_term(alpha, c)?;
        Ok(p)
    }

    pub fn cutoff(&self) -> i64 {
        self.cutoff
    }

    pub fn add_term(&mut self, alpha: FourierMultiIndex, c: GaussianRational) -> Result<(), BirkhoffError> {
        if alpha.momentum() != 0 {
            return Err(BirkhoffError::NonzeroMomentum(alpha));
        }
        if alpha.max_abs() > self.cutoff {
            return Err(BirkhoffError::OutsideCutoff(alpha, self.cutoff));
        }
        self.add_unchecked(alpha, c);
        Ok(())
    }

    fn add_unchecked(&mut self, alpha: FourierMultiIndex, c: GaussianRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&alpha) {
            Some(slot) => {
                *slot = &*slot + &c;
                if slot.is_zero() {
                    self.terms.remove(&alpha);
                }
            }
            None => {
                self.terms.insert(alpha, c);
            }
        }
    }

    pub fn coeff(&self, alpha: &FourierMultiIndex) -> GaussianRational {
        self.terms.get(alpha).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&FourierMultiIndex, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(FourierMultiIndex::degree).max().unwrap_or(0)
    }

    pub fn degrees(&self) -> Vec<u32> {
        let mut d: Vec<u32> = self.terms.keys().map(FourierMultiIndex::degree).collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    fn check(&self, o: &Self) -> Result<(), BirkhoffError> {
        if self.cutoff != o.cutoff {
            Err(BirkhoffError::CutoffMismatch(self.cutoff, o.cutoff))
        } else {
            Ok(())
        }
    }

    pub fn add(&self, o: &Self) -> Result<Self, BirkhoffError> {
        self.check(o)?;
        let mut out = self.clone();
        for (a, c) in &o.terms {
            out.add_unchecked(a.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, o: &Self) -> Result<Self, BirkhoffError> {
        self.add(&o.scale(&GaussianRational::real(rat(-1))))
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        let mut out = Self::new(self.cutoff);
        for (a, v) in &self.terms {
            out.add_unchecked(a.clone(), v * c);
        }
        out
    }

    /// Homogeneous part of degree `d`.
    pub fn part(&self, d: u32) -> Self {
        self.filter(|a| a.degree() == d)
    }

    /// Drops every degree above `d`.
    pub fn truncate(&self, d: u32) -> Self {
        self.filter(|a| a.degree() <= d)
    }

    pub fn filter(&self, keep: impl Fn(&FourierMultiIndex) -> bool) -> Self {
        let terms = self.terms.iter().filter(|(a, _)| keep(a)).map(|(a, c)| (a.clone(), c.clone())).collect();
        FourierPolynomial { cutoff: self.cutoff, terms }
    }

    /// Real-valued on real fields: coefficient at the reflected index is the conjugate.
    pub fn is_real(&self) -> bool {
        self.terms.iter().all(|(a, c)| self.coeff(&a.reflect()) == c.conj())
    }

    pub fn poisson(&self, o: &Self) -> Result<Self, BirkhoffError> {
        self.check(o)?;
        let mut out = Self::new(self.cutoff);
        for (a, pa) in &self.terms {
            for (b, qb) in &o.terms {
                for (j, aj) in a.iter() {
                    let bj = b.get(-j);
                    if bj == 0 {
                        continue;
                    }
                    let f = omega_nz(j) * rat(aj as i64 * bj as i64);
                    let c = &(pa * qb) * &GaussianRational::new(Rational::zero(), f);
                    out.add_unchecked(a.combine_remove(b, j), c);
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Display for FourierPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(a, c)| format!("[{}]u{}", c, a)).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// `Omega(a) = sum omega(j) a_j`.
pub fn divisor(alpha: &FourierMultiIndex) -> Rational {
    alpha.iter().map(|(j, a)| omega_nz(j) * rat(a as i64)).sum()
}

/// Divisor against a diagonal quadratic Hamiltonian `sum_{j>0} lambda_j u_j u_{-j}`.
pub fn weighted_divisor(alpha: &FourierMultiIndex, weights: &BTreeMap<i64, Rational>) -> Rational {
    alpha
        .iter()
        .map(|(j, a)| {
            let l = weights.get(&j.abs()).cloned().unwrap_or_else(Rational::zero);
            omega_nz(j) * l * rat(a as i64)
        })
        .sum()
}

/// `sum_j j^(2m-1) (1+j^2)(4+j^2) a_j`, the divisor against the quadratic part of `K_m`.
pub fn km_divisor(alpha: &FourierMultiIndex, m: u32) -> Rational {
    let mut acc = BigInt::zero();
    for (j, a) in alpha.iter() {
        let jb = BigInt::from(j);
        let mut t = BigInt::from(a) * BigInt::from(1 + j * j) * BigInt::from(4 + j * j);
        for _ in 0..(2 * m - 1) {
            t *= &jb;
        }
        acc += t;
    }
    Rational::from_integer(acc)
}

/// All zero-momentum indices of degree `n+2` with modes in `[-J, J] \ {0}`, each once,
/// in lexicographic order of their ascending mode lists.
pub fn enumerate_in(n: u32, cutoff: i64) -> Vec<FourierMultiIndex> {
    let vals: Vec<i64> = (-cutoff..=cutoff).filter(|j| *j != 0).collect();
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(vals: &[i64], start: usize, left: usize, sum: i64, cur: &mut Vec<i64>, out: &mut Vec<FourierMultiIndex>, hi: i64) {
        if left == 0 {
            if sum == 0 {
                out.push(FourierMultiIndex::from_modes(cur).expect("nonzero modes"));
            }
            return;
        }
        for i in start..vals.len() {
            let v = vals[i];
            // remaining entries are >= v and <= hi
            if sum + v * left as i64 > 0 {
                break;
            }
            if sum + v + hi * (left as i64 - 1) < 0 {
                continue;
            }
            cur.push(v);
            rec(vals, i, left - 1, sum + v, cur, out, hi);
            cur.pop();
        }
    }
    rec(&vals, 0, n as usize + 2, 0, &mut cur, &mut out, cutoff);
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResonanceReport {
    pub alpha: FourierMultiIndex,
    pub divisor: Rational,
    pub trivially_resonant: bool,
    pub km_divisors: Vec<Rational>,
}

pub fn classify_resonance(alpha: &FourierMultiIndex, m_max: u32) -> ResonanceReport {
    ResonanceReport {
        alpha: alpha.clone(),
        divisor: divisor(alpha),
        trivially_resonant: alpha.is_trivially_resonant(),
        km_divisors: (1..=m_max).map(|m| km_divisor(alpha, m)).collect(),
    }
}

impl ResonanceReport {
    pub fn csv_row(&self) -> String {
        let mut cols = vec![format!("\"{}\"", self.alpha), format_rational(&self.divisor), self.trivially_resonant.to_string()];
        cols.extend(self.km_divisors.iter().map(format_rational));
        cols.join(",")
    }
}

/// Odd-power Vandermonde matrix `V[r][i] = j_i^(2r+1)`, exact determinant by Bareiss elimination.
pub fn vandermonde_det(js: &[i64]) -> Result<BigInt, BirkhoffError> {
    validate_distinct(js)?;
    let n = js.len();
    if n == 0 {
        return Ok(BigInt::one());
    }
    let mut m: Vec<Vec<BigInt>> = (0..n)
        .map(|r| js.iter().map(|&j| num_traits::pow(BigInt::from(j), 2 * r + 1)).collect())
        .collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return Ok(BigInt::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
        }
        prev = m[k][k].clone();
    }
    Ok(sign * &m[n - 1][n - 1])
}

/// `prod j_i * prod_{a<b} (x_b - x_a)` with `x = j^2`.
pub fn vandermonde_factorized(js: &[i64]) -> Result<BigInt, BirkhoffError> {
    validate_distinct(js)?;
    let mut acc: BigInt = js.iter().map(|&j| BigInt::from(j)).product();
    for a in 0..js.len() {
        for b in a + 1..js.len() {
            acc *= BigInt::from(js[b] * js[b] - js[a] * js[a]);
        }
    }
    Ok(acc)
}

fn validate_distinct(js: &[i64]) -> Result<(), BirkhoffError> {
    for (i, &j) in js.iter().enumerate() {
        if j == 0 {
            return Err(BirkhoffError::ZeroMode);
        }
        if js[..i].contains(&j) {
            return Err(BirkhoffError::DuplicateIndex(j));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Default)]
pub struct ScanReport {
    pub n: u32,
    pub cutoff: i64,
    pub scanned: usize,
    pub resonant: Vec<ResonanceReport>,
    pub trivially_resonant: usize,
    /// Resonant, not trivially resonant.
    pub nontrivial: Vec<ResonanceReport>,
    /// Nontrivial resonances whose modes have pairwise distinct `|j|`.
    pub nontrivial_distinct: usize,
    /// Nontrivial resonances with every K_m divisor zero.
    pub violations: Vec<FourierMultiIndex>,
}

pub fn nonresonance_scan(n: u32, cutoff: i64, m_max: u32) -> ScanReport {
    nonresonance_scan_with(n, cutoff, m_max, divisor)
}

/// Scan with an arbitrary divisor (used to plant a degenerate dispersion law).
pub fn nonresonance_scan_with(n: u32, cutoff: i64, m_max: u32, div: impl Fn(&FourierMultiIndex) -> Rational) -> ScanReport {
    let mut rep = ScanReport { n, cutoff, ..Default::default() };
    for alpha in enumerate_in(n, cutoff) {
        rep.scanned += 1;
        let d = div(&alpha);
        if !d.is_zero() {
            continue;
        }
        let mut r = classify_resonance(&alpha, m_max);
        r.divisor = d;
        if r.trivially_resonant {
            rep.trivially_resonant += 1;
        } else {
            let abs: Vec<i64> = alpha.modes().iter().map(|j| j.abs()).collect();
            let mut dedup = abs.clone();
            dedup.sort_unstable();
            dedup.dedup();
            if dedup.len() == abs.len() {
                rep.nontrivial_distinct += 1;
            }
            if r.km_divisors.iter().all(Zero::is_zero) {
                rep.violations.push(alpha.clone());
            }
            rep.nontrivial.push(r.clone());
        }
        rep.resonant.push(r);
    }
    rep
}

fn multinomial(alpha: &FourierMultiIndex) -> Rational {
    let fact = |k: u32| -> BigInt { (1..=k).map(BigInt::from).product() };
    let num = fact(alpha.degree());
    let den: BigInt = alpha.iter().map(|(_, a)| fact(a)).product();
    Rational::new(num, den)
}

/// `H = c sum_{0<j<=J} u_j u_{-j} - (1/6) sum_{j+k+l=0} u_j u_k u_l`.
pub fn dp_hamiltonian_fourier(cutoff: i64, c: &Rational) -> FourierPolynomial {
    let mut h = FourierPolynomial::new(cutoff);
    for j in 1..=cutoff {
        let a = FourierMultiIndex::from_modes(&[j, -j]).expect("nonzero");
        h.add_unchecked(a, GaussianRational::real(c.clone()));
    }
    for a in enumerate_in(1, cutoff) {
        let coeff = multinomial(&a) * frac(-1, 6);
        h.add_unchecked(a, GaussianRational::real(coeff));
    }
    h
}

/// Diagonal quadratic part `sum_{j>0} lambda_j u_j u_{-j}` as `j -> lambda_j`.
pub fn h0_weights(h: &FourierPolynomial) -> Result<BTreeMap<i64, Rational>, BirkhoffError> {
    let mut w = BTreeMap::new();
    for (a, c) in h.part(2).terms() {
        let modes = a.modes();
        if modes[0] != -modes[1] || !c.im.is_zero() {
            return Err(BirkhoffError::NotDiagonal(a.clone()));
        }
        w.insert(modes[1], c.re.clone());
    }
    Ok(w)
}

/// Diagonal quadratic polynomial from weights.
pub fn diagonal(cutoff: i64, weights: &BTreeMap<i64, Rational>) -> FourierPolynomial {
    let mut p = FourierPolynomial::new(cutoff);
    for (j, l) in weights {
        if *j > 0 && *j <= cutoff {
            p.add_unchecked(FourierMultiIndex::from_modes(&[*j, -*j]).expect("nonzero"), GaussianRational::real(l.clone()));
        }
    }
    p
}

/// Solves `{H0, chi} + G = Z`: `chi_a = G_a / (i Omega(a))` off the kernel, `Z` the kernel part.
pub fn homological_solve(g: &FourierPolynomial, weights: &BTreeMap<i64, Rational>) -> (FourierPolynomial, FourierPolynomial) {
    let mut chi = FourierPolynomial::new(g.cutoff);
    let mut kernel = FourierPolynomial::new(g.cutoff);
    for (a, c) in g.terms() {
        let om = weighted_divisor(a, weights);
        if om.is_zero() {
            kernel.add_unchecked(a.clone(), c.clone());
        } else {
            // 1/(i om) = -i/om
            let f = GaussianRational::new(Rational::zero(), -om.recip());
            chi.add_unchecked(a.clone(), c * &f);
        }
    }
    (chi, kernel)
}

/// `sum_k ad^k P / k!` with `ad[P] = {P, chi}`, truncated at `max_degree`.
pub fn lie_transform(p: &FourierPolynomial, chi: &FourierPolynomial, max_degree: u32) -> Result<FourierPolynomial, BirkhoffError> {
    let mut out = p.truncate(max_degree);
    let mut term = out.clone();
    let mut k = 1i64;
    loop {
        term = term.poisson(chi)?.truncate(max_degree).scale(&GaussianRational::real(frac(1, k)));
        if term.is_zero() {
            break;
        }
        out = out.add(&term)?;
        k += 1;
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct BirkhoffStep {
    pub h_next: FourierPolynomial,
    pub chi: FourierPolynomial,
    pub normal_terms: FourierPolynomial,
    /// Normal-form indices within the guard band of the cutoff (not trusted).
    pub flagged: Vec<FourierMultiIndex>,
    /// Certified normal-form indices that are not trivially resonant.
    pub certified_nontrivial: Vec<FourierMultiIndex>,
}

impl BirkhoffStep {
    pub fn certify(&self) -> Result<(), BirkhoffError> {
        match self.certified_nontrivial.first() {
            Some(a) => Err(BirkhoffError::NonTrivialNormalTerm(a.clone())),
            None => Ok(()),
        }
    }
}

/// Normalizes the degree `k+3` part of `h_cur`; `max_degree` is the truncation and the guard band.
pub fn birkhoff_step(h_cur: &FourierPolynomial, k: u32, max_degree: u32) -> Result<BirkhoffStep, BirkhoffError> {
    let weights = h0_weights(h_cur)?;
    let g = h_cur.part(k + 3);
    let (chi, normal_terms) = homological_solve(&g, &weights);
    let h_next = lie_transform(h_cur, &chi, max_degree)?;
    let inner = h_cur.cutoff() - max_degree as i64;
    let mut flagged = Vec::new();
    let mut certified_nontrivial = Vec::new();
    for (a, _) in normal_terms.terms() {
        if a.max_abs() > inner {
            flagged.push(a.clone());
        } else if !a.is_trivially_resonant() {
            certified_nontrivial.push(a.clone());
        }
    }
    Ok(BirkhoffStep { h_next, chi, normal_terms, flagged, certified_nontrivial })
}

/// Runs steps `0..order`, truncating at degree `order + 2`.
pub fn birkhoff_normal_form(h: &FourierPolynomial, order: u32) -> Result<Vec<BirkhoffStep>, BirkhoffError> {
    let mut cur = h.clone();
    let mut steps = Vec::new();
    for k in 0..order {
        let s = birkhoff_step(&cur, k, order + 2)?;
        cur = s.h_next.clone();
        steps.push(s);
    }
    Ok(steps)
}

#[derive(Clone, Debug, Serialize)]
pub struct SimultaneousEntry {
    pub k_index: usize,
    pub degree: u32,
    pub holds: bool,
    pub residual_terms: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimultaneousReport {
    /// Degree-by-degree vanishing of `{H, K}` on the common truncation.
    pub commutation: Vec<SimultaneousEntry>,
    /// Whether the first nonquadratic part of `K` transformed by `chi` lies in the kernel of `K0`.
    pub normalized: Vec<bool>,
}

impl SimultaneousReport {
    pub fn all_ok(&self) -> bool {
        self.commutation.iter().all(|e| e.holds) && self.normalized.iter().all(|b| *b)
    }
}

/// Checks `{H, K} = 0` in every degree fully determined by the truncations, and that the
/// generator `chi` removes the range part of each `K` at the degree of `chi`.
pub fn simultaneous_check(h: &FourierPolynomial, ks: &[FourierPolynomial], chi: &FourierPolynomial) -> Result<SimultaneousReport, BirkhoffError> {
    let mut commutation = Vec::new();
    let mut normalized = Vec::new();
    let chi_deg = chi.max_degree();
    for (idx, k) in ks.iter().enumerate() {
        let top = h.max_degree().min(k.max_degree());
        let br = h.poisson(k)?;
        for d in 3..=top {
            let part = br.part(d);
            commutation.push(SimultaneousEntry { k_index: idx, degree: d, holds: part.is_zero(), residual_terms: part.len() });
        }
        if chi_deg >= 3 {
            let kw = h0_weights(k)?;
            let transformed = lie_transform(k, chi, chi_deg)?.part(chi_deg);
            normalized.push(transformed.terms().all(|(a, _)| weighted_divisor(a, &kw).is_zero()));
        }
    }
    Ok(SimultaneousReport { commutation, normalized })
}

/// Fourier form of `integral density` (degrees >= 2) with `w_j = (1+j^2) u_j`, coefficients
/// evaluated exactly at `c = t^3`.
pub fn density_to_fourier(density: &DiffSeries, t: &Rational, cutoff: i64) -> Result<FourierPolynomial, BirkhoffError> {
    let mut out = FourierPolynomial::new(cutoff);
    let vals: Vec<i64> = (-cutoff..=cutoff).filter(|j| *j != 0).collect();
    for (alpha, coeff) in density.terms() {
        let deg = alpha.degree() as usize;
        if deg < 2 {
            continue;
        }
        let q = coeff.eval_at_cube(t)?;
        if !q.is_rational() {
            return Err(BirkhoffError::IrrationalCoefficient);
        }
        let base = GaussianRational::real(q.a);
        let orders = alpha.factors();
        let total_order: u32 = orders.iter().map(|o| *o as u32).sum();
        let ipow = GaussianRational::i_pow(total_order);
        let mut tuple = vec![0i64; deg];
        let mut contrib = |tuple: &[i64]| {
            let mut f = BigInt::one();
            for (r, &j) in tuple.iter().enumerate() {
                f *= num_traits::pow(BigInt::from(j), orders[r]) * BigInt::from(1 + j * j);
            }
            let c = &(&base * &ipow).scale(&Rational::from_integer(f));
            let idx = FourierMultiIndex::from_modes(tuple).expect("nonzero");
            out.add_unchecked(idx, c.clone());
        };
        fn walk(vals: &[i64], pos: usize, sum: i64, cutoff: i64, tuple: &mut [i64], f: &mut dyn FnMut(&[i64])) {
            let deg = tuple.len();
            if pos == deg - 1 {
                let last = -sum;
                if last != 0 && last.abs() <= cutoff {
                    tuple[pos] = last;
                    f(tuple);
                }
                return;
            }
            let left = (deg - pos - 1) as i64;
            for &v in vals {
                let s = sum + v;
                if s.abs() > left * cutoff {
                    continue;
                }
                tuple[pos] = v;
                walk(vals, pos + 1, s, cutoff, tuple, f);
            }
        }
        walk(&vals, 0, 0, cutoff, &mut tuple, &mut contrib);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(m: &[i64]) -> FourierMultiIndex {
        FourierMultiIndex::from_modes(m).unwrap()
    }

    #[test]
    fn dispersion_values() {
        assert_eq!(omega(1).unwrap(), frac(5, 2));
        assert_eq!(omega(2).unwrap(), frac(16, 5));
        assert_eq!(omega(-3).unwrap(), frac(-39, 10));
        assert_eq!(omega(0), Err(BirkhoffError::ZeroMode));
    }

    #[test]
    fn divisor_values() {
        assert!(divisor(&idx(&[1, -1])).is_zero());
        assert_eq!(divisor(&idx(&[1, 2, -3])), frac(9, 5));
        assert_eq!(divisor(&idx(&[2, 2, -4])), frac(144, 85));
    }

    #[test]
    fn small_enumerations() {
        assert_eq!(enumerate_in(0, 1), vec![idx(&[-1, 1])]);
        let cubic = enumerate_in(1, 2);
        assert_eq!(cubic, vec![idx(&[-2, 1, 1]), idx(&[-1, -1, 2])]);
    }

    #[test]
    fn vandermonde_small() {
        assert_eq!(vandermonde_det(&[1, -1]).unwrap(), BigInt::zero());
        assert_eq!(vandermonde_det(&[1, 2]).unwrap(), BigInt::from(6));
        assert!(!vandermonde_det(&[1, 2, -3]).unwrap().is_zero());
        assert_eq!(vandermonde_det(&[1, 1]), Err(BirkhoffError::DuplicateIndex(1)));
        assert_eq!(vandermonde_det(&[0, 1]), Err(BirkhoffError::ZeroMode));
    }

    #[test]
    fn hamiltonian_coefficients() {
        let h = dp_hamiltonian_fourier(3, &rat(1));
        assert_eq!(h.coeff(&idx(&[1, -1])), GaussianRational::one());
        assert_eq!(h.coeff(&idx(&[1, 1, -2])), GaussianRational::real(frac(-1, 2)));
        assert_eq!(h.coeff(&idx(&[1, 2, -3])), GaussianRational::real(rat(-1)));
        assert!(h.terms().all(|(a, _)| a.momentum() == 0));
        assert!(h.is_real());
    }

    #[test]
    fn rejects_bad_terms() {
        let mut p = FourierPolynomial::new(2);
        assert!(matches!(p.add_term(idx(&[1, 1]), GaussianRational::one()), Err(BirkhoffError::NonzeroMomentum(_))));
        assert!(matches!(p.add_term(idx(&[3, -3]), GaussianRational::one()), Err(BirkhoffError::OutsideCutoff(_, 2))));
        let q = FourierPolynomial::new(3);
        assert_eq!(p.poisson(&q), Err(BirkhoffError::CutoffMismatch(2, 3)));
    }
}
