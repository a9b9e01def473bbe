use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::config::{dt_max, ConfigError, InitSpec, SimConfig};
use crate::grid::Grid;
use crate::mollifier::profile;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("sup |u| = {sup} reached the ceiling {ceiling} at t = {time}")]
    BlowUpDetected { time: f64, sup: f64, ceiling: f64 },
    #[error("|w| = {max_w} >= |c| at t = {time}; cube root leaves its domain")]
    CubeRootDomain { time: f64, max_w: f64 },
    #[error("dt {dt} exceeds dt_max {dt_max}")]
    DtTooLarge { dt: f64, dt_max: f64 },
    #[error("state grid {state} does not match solver grid {solver}")]
    GridMismatch { state: usize, solver: usize },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Unsupported(String),
}

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// `omega(j) = j (4 + j^2) / (1 + j^2)`.
pub fn dispersion(j: i64) -> f64 {
    let j = j as f64;
    j * (4.0 + j * j) / (1.0 + j * j)
}

/// Real zero-mean field on `N` points, stored as `u_j` for `|j| < N/2` in FFT order.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralState {
    pub n_modes: usize,
    pub spectrum: Vec<Complex64>,
    pub time: f64,
}

impl SpectralState {
    pub fn zero(n: usize) -> Self {
        SpectralState { n_modes: n, spectrum: vec![ZERO; n], time: 0.0 }
    }

    /// Field `sum_j (z_j e^{ijx} + conj(z_j) e^{-ijx})` over the listed positive modes.
    pub fn from_modes(n: usize, modes: &[(i64, Complex64)]) -> Result<Self, SimError> {
        let mut s = Self::zero(n);
        for &(j, z) in modes {
            if j <= 0 || j as usize >= n / 2 {
                return Err(ConfigError::Invalid(format!("mode {} outside 1..{}", j, n / 2)).into());
            }
            s.set_mode(j, z);
        }
        Ok(s)
    }

    /// Random field on modes `1..=modes` with weight `<j>^-3`, rescaled to `||u||_{H^2} = amplitude`.
    pub fn random(n: usize, amplitude: f64, seed: u64, modes: usize) -> Result<Self, SimError> {
        if modes == 0 || modes >= n / 2 {
            return Err(ConfigError::Invalid(format!("init_modes {} outside the grid", modes)).into());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = Self::zero(n);
        for j in 1..=modes as i64 {
            let r: f64 = rng.gen_range(0.5..1.5);
            let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let w = (1.0 + (j * j) as f64).powf(-1.5);
            s.set_mode(j, Complex64::from_polar(r * w, th));
        }
        let norm = s.sobolev_norm(2.0);
        if norm > 0.0 {
            s.scale(amplitude / norm);
        }
        Ok(s)
    }

    pub fn from_config(cfg: &SimConfig) -> Result<Self, SimError> {
        match &cfg.init {
            InitSpec::Modes(ms) => Self::from_modes(cfg.grid, ms),
            InitSpec::Random { amplitude, seed, modes } => Self::random(cfg.grid, *amplitude, *seed, *modes),
        }
    }

    fn slot(&self, j: i64) -> usize {
        j.rem_euclid(self.n_modes as i64) as usize
    }

    pub fn mode(&self, j: i64) -> Complex64 {
        if 2 * j.unsigned_abs() as usize >= self.n_modes {
            return ZERO;
        }
        self.spectrum[self.slot(j)]
    }

    /// Sets `u_j` and `u_{-j} = conj(u_j)`.
    pub fn set_mode(&mut self, j: i64, z: Complex64) {
        let (a, b) = (self.slot(j), self.slot(-j));
        self.spectrum[a] = z;
        self.spectrum[b] = z.conj();
    }

    pub fn scale(&mut self, f: f64) {
        for z in &mut self.spectrum {
            *z *= f;
        }
    }

    pub fn wavenumbers(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let n = self.n_modes;
        self.spectrum.iter().enumerate().map(move |(k, z)| (crate::grid::wavenumber(k, n), *z))
    }

    /// `(sum_j (1+j^2)^s |u_j|^2)^(1/2)`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.wavenumbers().map(|(j, z)| (1.0 + (j * j) as f64).powf(s) * z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Zero mean, zero Nyquist and exact Hermitian symmetry.
    pub fn enforce(&mut self) {
        let n = self.n_modes;
        self.spectrum[0] = ZERO;
        self.spectrum[n / 2] = ZERO;
        for k in 1..n / 2 {
            let avg = (self.spectrum[k] + self.spectrum[n - k].conj()) * 0.5;
            self.spectrum[k] = avg;
            self.spectrum[n - k] = avg.conj();
        }
    }

    /// Largest `|Im u_0|`, `|u_0|` and `|u_j - conj(u_{-j})|`.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.n_modes;
        let mut d = self.spectrum[0].norm();
        for k in 1..n / 2 {
            d = d.max((self.spectrum[k] - self.spectrum[n - k].conj()).norm());
        }
        d
    }

    pub fn distance(&self, o: &Self, s: f64) -> f64 {
        let mut diff = self.clone();
        for (a, b) in diff.spectrum.iter_mut().zip(&o.spectrum) {
            *a -= b;
        }
        diff.sobolev_norm(s)
    }
}

/// Right-hand sides and the RK4 stepper for a fixed grid and parameter.
#[derive(Clone, Debug)]
pub struct Solver {
    pub c: f64,
    pub dealias: bool,
    pub mollifier_eps: Option<f64>,
    pub blowup_ceiling: f64,
    grid: Grid,
    keep: Vec<bool>,
}

impl Solver {
    pub fn new(c: f64, n: usize, dealias: bool) -> Self {
        let grid = Grid::new(n);
        let kmax = (n / 3) as i64;
        let keep = (0..n).map(|k| {
            let j = grid.wavenumber(k);
            2 * k != n && (!dealias || j.abs() <= kmax)
        });
        Solver { c, dealias, mollifier_eps: None, blowup_ceiling: c.abs() / 2.0, keep: keep.collect(), grid }
    }

    pub fn from_config(cfg: &SimConfig) -> Self {
        let mut s = Self::new(cfg.c, cfg.grid, cfg.dealias);
        s.mollifier_eps = cfg.mollifier_eps;
        s.blowup_ceiling = cfg.blowup_ceiling;
        s
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn mask(&self, spec: &mut [Complex64]) {
        for (z, k) in spec.iter_mut().zip(&self.keep) {
            if !k {
                *z = ZERO;
            }
        }
    }

    fn check(&self, s: &SpectralState) -> Result<(), SimError> {
        if s.n_modes != self.grid.len() {
            return Err(SimError::GridMismatch { state: s.n_modes, solver: self.grid.len() });
        }
        Ok(())
    }

    /// `du_j/dt = i omega(j) FFT(-c u - u^2/2)_j`.
    pub fn dp_rhs(&self, spec: &[Complex64]) -> Vec<Complex64> {
        let g = &self.grid;
        let u = g.to_physical(spec);
        let grad: Vec<f64> = u.iter().map(|&v| -self.c * v - 0.5 * v * v).collect();
        let mut out = g.to_spectral(&grad);
        g.apply(&mut out, |j| Complex64::new(0.0, dispersion(j)));
        self.mask(&mut out);
        out
    }

    /// Term-by-term mollified map:
    /// `-c J^2 u_x - J(Ju (Ju)_x) - (3/2) dx D^-2 u^2 - 3c dx D^-2 u`.
    pub fn mollified_rhs(&self, spec: &[Complex64], eps: f64) -> Vec<Complex64> {
        let g = &self.grid;
        let jm = |j: i64| profile(eps * j as f64);
        let mut v = spec.to_vec();
        g.apply(&mut v, |j| Complex64::new(jm(j), 0.0));
        let mut vx = v.clone();
        g.apply(&mut vx, |j| Complex64::new(0.0, j as f64));
        let (vp, vxp) = (g.to_physical(&v), g.to_physical(&vx));
        let prod: Vec<f64> = vp.iter().zip(&vxp).map(|(a, b)| a * b).collect();
        let mut burgers = g.to_spectral(&prod);
        g.apply(&mut burgers, |j| Complex64::new(-jm(j), 0.0));
        let u = g.to_physical(spec);
        let mut sq = g.to_spectral(&u.iter().map(|x| x * x).collect::<Vec<_>>());
        g.apply(&mut sq, |j| Complex64::new(0.0, -1.5 * j as f64 / (1.0 + (j * j) as f64)));
        let mut out = spec.to_vec();
        let c = self.c;
        g.apply(&mut out, |j| {
            let jf = j as f64;
            Complex64::new(0.0, -c * jm(j) * jm(j) * jf - 3.0 * c * jf / (1.0 + jf * jf))
        });
        for ((o, b), q) in out.iter_mut().zip(&burgers).zip(&sq) {
            *o += b + q;
        }
        // mean of (Ju)(Ju)_x is an exact derivative
        out[0] = ZERO;
        self.mask(&mut out);
        out
    }

    pub fn rhs(&self, spec: &[Complex64]) -> Vec<Complex64> {
        match self.mollifier_eps {
            Some(e) => self.mollified_rhs(spec, e),
            None => self.dp_rhs(spec),
        }
    }

    /// One classical RK4 step of size `dt` (negative allowed), then symmetry, mask and guard.
    pub fn step(&self, s: &SpectralState, dt: f64) -> Result<SpectralState, SimError> {
        self.check(s)?;
        let limit = dt_max(self.c, self.grid.len());
        if dt.abs() > limit * (1.0 + 1e-12) {
            return Err(SimError::DtTooLarge { dt, dt_max: limit });
        }
        let axpy = |y: &[Complex64], k: &[Complex64], h: f64| -> Vec<Complex64> { y.iter().zip(k).map(|(a, b)| a + b * h).collect() };
        let y = &s.spectrum;
        let k1 = self.rhs(y);
        let k2 = self.rhs(&axpy(y, &k1, dt / 2.0));
        let k3 = self.rhs(&axpy(y, &k2, dt / 2.0));
        let k4 = self.rhs(&axpy(y, &k3, dt));
        let spectrum: Vec<Complex64> = (0..y.len()).map(|i| y[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0)).collect();
        let mut next = SpectralState { n_modes: s.n_modes, spectrum, time: s.time + dt };
        self.mask(&mut next.spectrum);
        next.enforce();
        let sup = self.sup_norm(&next);
        if !(sup < self.blowup_ceiling) {
            return Err(SimError::BlowUpDetected { time: next.time, sup, ceiling: self.blowup_ceiling });
        }
        Ok(next)
    }

    pub fn sup_norm(&self, s: &SpectralState) -> f64 {
        self.grid.to_physical(&s.spectrum).iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Projects a state onto the retained modes.
    pub fn project(&self, s: &SpectralState) -> SpectralState {
        let mut out = s.clone();
        self.mask(&mut out.spectrum);
        out.enforce();
        out
    }
}
