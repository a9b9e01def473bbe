//! Invariants evaluated on a zero-padded grid.
//!
//! Integrals are means over the period, so `M1 = c^(1/3)` at `u = 0`.

use std::collections::BTreeMap;

use dp_core::conserved::{gammas, m1_expansion, triangularize, QuadraticForm};
use dp_core::diffpoly::{Convention, DiffSeries};
use dp_core::RingElem;
use num_complex::Complex64;

use crate::grid::{mean, resize, Grid};
use crate::solver::{SimError, SpectralState};

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub time: f64,
    pub h: f64,
    pub m0: f64,
    pub m1: f64,
    pub gamma: BTreeMap<usize, f64>,
    pub sobolev: BTreeMap<u32, f64>,
    pub k_quadratic: BTreeMap<u32, f64>,
}

/// Evaluator for a fixed parameter and grid; work happens on a grid twice as fine.
#[derive(Clone, Debug)]
pub struct Diagnostics {
    pub c: f64,
    pub gammas: Vec<usize>,
    pub sobolev: Vec<u32>,
    pub k_quad: Vec<u32>,
    pub convention: Convention,
    fine: Grid,
}

fn ring(x: &RingElem, c: f64) -> f64 {
    x.eval(c, 53).expect("c is nonzero")
}

impl Diagnostics {
    pub fn new(c: f64, n: usize) -> Self {
        Diagnostics { c, gammas: vec![], sobolev: vec![], k_quad: vec![], convention: Convention::Printed, fine: Grid::new(2 * n) }
    }

    pub fn fine_grid(&self) -> &Grid {
        &self.fine
    }

    fn physical(&self, spec: &[Complex64]) -> Vec<f64> {
        self.fine.to_physical(&resize(spec, self.fine.len()))
    }

    /// `w = u - u_xx` on the fine grid.
    pub fn w_field(&self, s: &SpectralState) -> Vec<f64> {
        let spec: Vec<Complex64> = s.wavenumbers().map(|(j, z)| z * (1.0 + (j * j) as f64)).collect();
        self.physical(&spec)
    }

    /// `w, w_x, ..., w_k` on the fine grid.
    pub fn w_derivatives(&self, s: &SpectralState, k: usize) -> Vec<Vec<f64>> {
        (0..=k)
            .map(|d| {
                let spec: Vec<Complex64> = s
                    .wavenumbers()
                    .map(|(j, z)| z * (1.0 + (j * j) as f64) * Complex64::new(0.0, j as f64).powu(d as u32))
                    .collect();
                self.physical(&spec)
            })
            .collect()
    }

    /// Mean of `-c u^2/2 - u^3/6`, the energy of the flow being integrated.
    pub fn hamiltonian(&self, s: &SpectralState) -> f64 {
        let u = self.physical(&s.spectrum);
        mean(&u.iter().map(|v| -self.c * v * v / 2.0 - v * v * v / 6.0).collect::<Vec<_>>())
    }

    /// `(1/2) sum_j (1+j^2)/(4+j^2) |u_j|^2`.
    pub fn m0(&self, s: &SpectralState) -> f64 {
        0.5 * s.wavenumbers().map(|(j, z)| (1.0 + (j * j) as f64) / (4.0 + (j * j) as f64) * z.norm_sqr()).sum::<f64>()
    }

    fn checked_w(&self, s: &SpectralState) -> Result<Vec<f64>, SimError> {
        let w = self.w_field(s);
        let max_w = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !(max_w < self.c.abs()) {
            return Err(SimError::CubeRootDomain { time: s.time, max_w });
        }
        Ok(w)
    }

    /// Mean of `(c + w)^(1/3)`.
    pub fn m1(&self, s: &SpectralState) -> Result<f64, SimError> {
        let w = self.checked_w(s)?;
        Ok(mean(&w.iter().map(|v| (self.c + v).cbrt()).collect::<Vec<_>>()))
    }

    /// `Gamma^(0..=n_max)` from the pointwise recursion on `p = -(c+w)^(1/3)`.
    pub fn gamma_numeric(&self, s: &SpectralState, n_max: usize) -> Result<Vec<f64>, SimError> {
        Ok(self.rho_numeric(s, n_max)?.iter().map(|r| mean(r)).collect())
    }

    /// Densities `rho^(0..=n_max)` on the fine grid.
    pub fn rho_numeric(&self, s: &SpectralState, n_max: usize) -> Result<Vec<Vec<f64>>, SimError> {
        let w = self.checked_w(s)?;
        let g = &self.fine;
        let lead = self.convention.lead() as f64;
        let p: Vec<f64> = w.iter().map(|v| -(self.c + v).cbrt()).collect();
        let px = g.dx(&p);
        let pxx = g.dx(&px);
        let len = p.len();
        let mut rho: Vec<Vec<f64>> = vec![
            (0..len).map(|i| -px[i] / p[i]).collect(),
            (0..len).map(|i| -px[i] * px[i] / p[i].powi(3) + 2.0 * pxx[i] / (3.0 * p[i] * p[i]) + 1.0 / (3.0 * p[i])).collect(),
        ];
        let mut rho_x: Vec<Vec<f64>> = rho.iter().map(|r| g.dx(r)).collect();
        while rho.len() <= n_max {
            let n = rho.len() - 2;
            let rxx = g.dx(&rho_x[n]);
            let rp: Vec<f64> = (0..len).map(|i| rho[n + 1][i] * p[i]).collect();
            let rp_x = g.dx(&rp);
            let next: Vec<f64> = (0..len)
                .map(|i| {
                    let mut acc = rho[n][i] - rxx[i];
                    let mut pair = 0.0;
                    for k1 in 0..=n + 1 {
                        pair += rho[k1][i] * rho[n + 1 - k1][i];
                    }
                    acc -= 3.0 * p[i] * pair;
                    for k1 in 0..=n {
                        for k2 in 0..=n - k1 {
                            acc -= rho[k1][i] * rho[k2][i] * rho[n - k1 - k2][i];
                        }
                    }
                    acc -= 3.0 * rp_x[i];
                    for k1 in 0..=n {
                        acc -= 3.0 * rho[k1][i] * rho_x[n - k1][i];
                    }
                    acc / (lead * p[i] * p[i])
                })
                .collect();
            rho_x.push(g.dx(&next));
            rho.push(next);
        }
        rho.truncate(n_max + 1);
        Ok(rho)
    }

    /// Mean of a truncated symbolic density evaluated pointwise.
    pub fn density_mean(&self, s: &SpectralState, density: &DiffSeries) -> Result<f64, SimError> {
        let top = density.terms().filter_map(|(a, _)| a.top()).max().unwrap_or(0);
        let derivs = self.w_derivatives(s, top);
        let vals = density.eval_grid(&derivs, self.c).map_err(|e| SimError::Unsupported(e.to_string()))?;
        Ok(mean(&vals))
    }

    /// `sum_j |j|^(2(n-1)) (1+j^2)^2 |u_j|^2`, the diagonal part of `K_n`.
    pub fn k_quadratic(&self, s: &SpectralState, n: u32) -> f64 {
        s.wavenumbers()
            .map(|(j, z)| {
                let j2 = (j * j) as f64;
                j2.powi(n as i32 - 1) * (1.0 + j2).powi(2) * z.norm_sqr()
            })
            .sum()
    }

    pub fn sample(&self, s: &SpectralState) -> Result<Sample, SimError> {
        let gamma = match self.gammas.iter().max() {
            Some(&top) => {
                let vals = self.gamma_numeric(s, top)?;
                self.gammas.iter().map(|&n| (n, vals[n])).collect()
            }
            None => BTreeMap::new(),
        };
        Ok(Sample {
            time: s.time,
            h: self.hamiltonian(s),
            m0: self.m0(s),
            m1: self.m1(s)?,
            gamma,
            sobolev: self.sobolev.iter().map(|&k| (k, s.sobolev_norm(k as f64))).collect(),
            k_quadratic: self.k_quad.iter().map(|&n| (n, self.k_quadratic(s, n))).collect(),
        })
    }
}

/// `K_n` as a numeric combination `a M1 + b Gamma^(1) + constant` whose quadratic part is
/// `integral (d^(n-1) w)^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct KFunctional {
    pub n: u32,
    pub m1_weight: f64,
    pub gamma1_weight: f64,
    pub constant: f64,
    pub quadratic: QuadraticForm,
}

impl KFunctional {
    /// Available for `n = 1` (normalized `M1`) and `n = 2` (`F_1`); the next level has a
    /// vanishing leading quadratic coefficient and cannot be normalized.
    pub fn build(n: u32, c: f64) -> Result<Self, SimError> {
        let m1 = m1_expansion(2);
        let m2 = m1.quadratic.get(0);
        let m2_inv = m2.invert().map_err(|e| SimError::Unsupported(e.to_string()))?;
        match n {
            1 => {
                let mut quadratic = QuadraticForm::new();
                quadratic.add_at(0, &RingElem::one());
                Ok(KFunctional { n, m1_weight: ring(&m2_inv, c), gamma1_weight: 0.0, constant: -ring(&(&m1.constant * &m2_inv), c), quadratic })
            }
            2 => {
                let gs = gammas(1, 2, Convention::Printed).map_err(|e| SimError::Unsupported(e.to_string()))?;
                let f1 = triangularize(0, &gs, &m1).map_err(|e| SimError::Unsupported(e.to_string()))?.remove(0);
                let a = gs[1].quadratic.get(1).invert().map_err(|e| SimError::Unsupported(e.to_string()))?;
                let b = -&(&(&gs[1].quadratic.get(0) * &m2_inv) * &a);
                Ok(KFunctional { n, m1_weight: ring(&b, c), gamma1_weight: ring(&a, c), constant: -ring(&f1.constant, c), quadratic: f1.quadratic })
            }
            _ => Err(SimError::Unsupported(format!("K_{} needs F_{}, whose leading quadratic coefficient vanishes", n, 2 * n - 3))),
        }
    }

    /// Value minus its constant part.
    pub fn value(&self, d: &Diagnostics, s: &SpectralState) -> Result<f64, SimError> {
        let m1 = d.m1(s)?;
        let g1 = if self.gamma1_weight != 0.0 { d.gamma_numeric(s, 1)?[1] } else { 0.0 };
        Ok(self.m1_weight * m1 + self.gamma1_weight * g1 + self.constant)
    }

    pub fn quadratic_value(&self, c: f64, s: &SpectralState) -> f64 {
        s.wavenumbers().filter(|(j, _)| *j != 0).map(|(j, z)| ring(&self.quadratic.fourier_weight(j), c) * z.norm_sqr()).sum()
    }

    /// `K_n(u) - K_n^(0)(u)`: cubic and higher contributions.
    pub fn gap(&self, d: &Diagnostics, s: &SpectralState) -> Result<f64, SimError> {
        Ok(self.value(d, s)? - self.quadratic_value(d.c, s))
    }
}
