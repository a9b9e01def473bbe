//! Periodic grid on `[0, 2pi)` with FFT transforms.
//!
//! Spectra are stored in FFT order and normalized so that `u(x) = sum_j u_j e^{ijx}`;
//! the Nyquist slot is never populated.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Clone)]
pub struct Grid {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Grid({})", self.n)
    }
}

impl Grid {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Grid { n, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Signed wavenumber of FFT slot `k`; the Nyquist slot maps to `+n/2`.
    pub fn wavenumber(&self, k: usize) -> i64 {
        wavenumber(k, self.n)
    }

    pub fn slot(&self, j: i64) -> usize {
        j.rem_euclid(self.n as i64) as usize
    }

    pub fn to_physical(&self, spec: &[Complex64]) -> Vec<f64> {
        let mut buf = spec.to_vec();
        self.inv.process(&mut buf);
        buf.into_iter().map(|z| z.re).collect()
    }

    pub fn to_spectral(&self, vals: &[f64]) -> Vec<Complex64> {
        let scale = 1.0 / self.n as f64;
        let mut buf: Vec<Complex64> = vals.iter().map(|&v| Complex64::new(v * scale, 0.0)).collect();
        self.fwd.process(&mut buf);
        buf
    }

    /// Applies the multiplier `sym(j)` to every slot except Nyquist.
    pub fn apply(&self, spec: &mut [Complex64], sym: impl Fn(i64) -> Complex64) {
        for (k, z) in spec.iter_mut().enumerate() {
            *z = if 2 * k == self.n { Complex64::new(0.0, 0.0) } else { *z * sym(self.wavenumber(k)) };
        }
    }

    /// Spectral derivative of a grid function.
    pub fn dx(&self, vals: &[f64]) -> Vec<f64> {
        let mut s = self.to_spectral(vals);
        self.apply(&mut s, |j| Complex64::new(0.0, j as f64));
        self.to_physical(&s)
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| 2.0 * std::f64::consts::PI * i as f64 / self.n as f64).collect()
    }
}

pub fn wavenumber(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Copies modes `|j| < n/2` of a length-`n` spectrum into a length-`m` one (`m >= n`), or truncates.
pub fn resize(spec: &[Complex64], m: usize) -> Vec<Complex64> {
    let n = spec.len();
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    let half = (n.min(m) / 2) as i64;
    for (k, z) in spec.iter().enumerate() {
        let j = wavenumber(k, n);
        if j.abs() < half {
            out[j.rem_euclid(m as i64) as usize] = *z;
        }
    }
    out
}

pub fn mean(vals: &[f64]) -> f64 {
    vals.iter().sum::<f64>() / vals.len() as f64
}
