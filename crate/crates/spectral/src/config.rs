//! Flat `key = value` run configuration.

use std::collections::BTreeMap;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("bad value for `{key}`: {value:?}")]
    BadValue { key: String, value: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("{0}")]
    Invalid(String),
}

/// Initial data: an explicit list of positive modes, or a seeded random field.
#[derive(Clone, Debug, PartialEq)]
pub enum InitSpec {
    Modes(Vec<(i64, Complex64)>),
    Random { amplitude: f64, seed: u64, modes: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub c: f64,
    pub grid: usize,
    pub dt: f64,
    pub t_end: f64,
    pub dealias: bool,
    pub mollifier_eps: Option<f64>,
    pub init: InitSpec,
    pub gammas: Vec<usize>,
    pub sobolev: Vec<u32>,
    pub k_quad: Vec<u32>,
    pub sample_every: usize,
    /// Abort once `sup |u|` reaches this; defaults to `|c|/2`.
    pub blowup_ceiling: f64,
}

impl SimConfig {
    /// Defaults for everything but the parameter, grid, step and horizon.
    pub fn new(c: f64, grid: usize, dt: f64, t_end: f64) -> Self {
        SimConfig {
            c,
            grid,
            dt,
            t_end,
            dealias: true,
            mollifier_eps: None,
            init: InitSpec::Random { amplitude: 1e-2, seed: 0, modes: 8 },
            gammas: vec![1, 3],
            sobolev: vec![2],
            k_quad: vec![1, 2],
            sample_every: 100,
            blowup_ceiling: c.abs() / 2.0,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.c.is_finite() && self.c != 0.0) {
            return Err(ConfigError::Invalid("c must be finite and nonzero".into()));
        }
        if self.grid < 8 || !self.grid.is_power_of_two() {
            return Err(ConfigError::Invalid(format!("grid {} is not a power of two >= 8", self.grid)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(ConfigError::Invalid("dt must be positive".into()));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(ConfigError::Invalid("t_end must be non-negative".into()));
        }
        if let Some(e) = self.mollifier_eps {
            if !(e > 0.0 && e <= 1.0) {
                return Err(ConfigError::Invalid(format!("mollifier_eps {} outside (0, 1]", e)));
            }
        }
        if self.sample_every == 0 {
            return Err(ConfigError::Invalid("sample_every must be positive".into()));
        }
        if !(self.blowup_ceiling > 0.0) {
            return Err(ConfigError::Invalid("blowup_ceiling must be positive".into()));
        }
        let dt_max = dt_max(self.c, self.grid);
        if self.dt > dt_max {
            return Err(ConfigError::Invalid(format!("dt {} exceeds dt_max {}", self.dt, dt_max)));
        }
        match &self.init {
            InitSpec::Modes(ms) => {
                for (j, _) in ms {
                    if *j as usize >= self.grid / 2 {
                        return Err(ConfigError::Invalid(format!("init mode {} outside the grid", j)));
                    }
                }
            }
            InitSpec::Random { amplitude, modes, .. } => {
                if !(amplitude.is_finite() && *amplitude >= 0.0) {
                    return Err(ConfigError::Invalid("amplitude must be non-negative".into()));
                }
                if *modes == 0 || *modes >= self.grid / 2 {
                    return Err(ConfigError::Invalid(format!("init_modes {} outside the grid", modes)));
                }
            }
        }
        Ok(())
    }
}

/// Step-size ceiling `0.5 / (|c| omega(N/2))`.
pub fn dt_max(c: f64, grid: usize) -> f64 {
    0.5 / (c.abs() * crate::solver::dispersion((grid / 2) as i64))
}

const KEYS: &[&str] = &[
    "c",
    "grid",
    "dt",
    "t_end",
    "amplitude",
    "seed",
    "dealias",
    "mollifier_eps",
    "gammas",
    "sobolev",
    "k_quad",
    "init",
    "init_modes",
    "sample_every",
    "blowup_ceiling",
];

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| ConfigError::BadValue { key: key.into(), value: v.into() })
}

fn list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>, ConfigError> {
    if v.is_empty() {
        return Ok(vec![]);
    }
    v.split(',').map(|s| num(key, s.trim())).collect()
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<SimConfig, ConfigError> {
    let mut get = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(ConfigError::UnknownKey { line: i + 1, key: k.into() });
        }
        if get.insert(k.to_string(), v.to_string()).is_some() {
            return Err(ConfigError::DuplicateKey { line: i + 1, key: k.into() });
        }
    }
    let req = |k: &'static str| get.get(k).ok_or(ConfigError::Missing(k));
    let c: f64 = num("c", req("c")?)?;
    let mut cfg = SimConfig::new(c, num("grid", req("grid")?)?, num("dt", req("dt")?)?, num("t_end", req("t_end")?)?);
    if let Some(v) = get.get("dealias") {
        cfg.dealias = match v.as_str() {
            "true" | "1" | "yes" => true,
            "false" | "0" | "no" => false,
            _ => return Err(ConfigError::BadValue { key: "dealias".into(), value: v.clone() }),
        };
    }
    if let Some(v) = get.get("mollifier_eps") {
        cfg.mollifier_eps = if v == "none" { None } else { Some(num("mollifier_eps", v)?) };
    }
    if let Some(v) = get.get("gammas") {
        cfg.gammas = list("gammas", v)?;
    }
    for (key, slot) in [("sobolev", &mut cfg.sobolev), ("k_quad", &mut cfg.k_quad)] {
        if let Some(v) = get.get(key) {
            *slot = list(key, v)?;
        }
    }
    if let Some(v) = get.get("sample_every") {
        cfg.sample_every = num("sample_every", v)?;
    }
    if let Some(v) = get.get("blowup_ceiling") {
        cfg.blowup_ceiling = num("blowup_ceiling", v)?;
    }
    cfg.init = match get.get("init") {
        Some(v) if v != "random" => {
            for k in ["amplitude", "seed", "init_modes"] {
                if get.contains_key(k) {
                    return Err(ConfigError::Invalid(format!("`{}` conflicts with an explicit mode list", k)));
                }
            }
            InitSpec::Modes(parse_init_modes(v)?)
        }
        _ => InitSpec::Random {
            amplitude: get.get("amplitude").map(|v| num("amplitude", v)).transpose()?.unwrap_or(1e-2),
            seed: get.get("seed").map(|v| num("seed", v)).transpose()?.unwrap_or(0),
            modes: get.get("init_modes").map(|v| num("init_modes", v)).transpose()?.unwrap_or(8),
        },
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Parses `"1:0.005+0.0i, 2:0.002-0.001i"`; indices are positive and distinct.
pub fn parse_init_modes(text: &str) -> Result<Vec<(i64, Complex64)>, ConfigError> {
    let bad = |v: &str| ConfigError::BadValue { key: "init".into(), value: v.into() };
    let mut out: Vec<(i64, Complex64)> = Vec::new();
    for item in text.split(',') {
        let item = item.trim();
        let (j, z) = item.split_once(':').ok_or_else(|| bad(item))?;
        let j: i64 = j.trim().parse().map_err(|_| bad(item))?;
        if j <= 0 {
            return Err(ConfigError::Invalid(format!("init mode index {} must be positive", j)));
        }
        if out.iter().any(|(k, _)| *k == j) {
            return Err(ConfigError::Invalid(format!("init mode {} listed twice", j)));
        }
        let z = parse_complex(z.trim()).ok_or_else(|| bad(item))?;
        out.push((j, z));
    }
    Ok(out)
}

/// `a`, `a+bi`, `a-bi` or `bi`, with finite parts.
fn parse_complex(s: &str) -> Option<Complex64> {
    let z = if let Some(body) = s.strip_suffix('i') {
        let bytes = body.as_bytes();
        let split = (1..bytes.len()).rev().find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
        match split {
            Some(k) => Complex64::new(body[..k].parse().ok()?, body[k..].trim_start_matches('+').parse().ok()?),
            None => Complex64::new(0.0, body.parse().ok()?),
        }
    } else {
        Complex64::new(s.parse().ok()?, 0.0)
    };
    (z.re.is_finite() && z.im.is_finite()).then_some(z)
}
