use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::config::SimConfig;
use crate::diagnostics::{Diagnostics, Sample};
use crate::solver::{SimError, Solver, SpectralState};

/// Sampled invariants; every sequence has one entry per sample time.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiagnosticsSeries {
    pub times: Vec<f64>,
    pub h: Vec<f64>,
    pub m0: Vec<f64>,
    pub m1: Vec<f64>,
    pub gamma: BTreeMap<usize, Vec<f64>>,
    pub sobolev: BTreeMap<u32, Vec<f64>>,
    pub k_quadratic: BTreeMap<u32, Vec<f64>>,
}

impl DiagnosticsSeries {
    pub fn push(&mut self, s: Sample) {
        self.times.push(s.time);
        self.h.push(s.h);
        self.m0.push(s.m0);
        self.m1.push(s.m1);
        for (k, v) in s.gamma {
            self.gamma.entry(k).or_default().push(v);
        }
        for (k, v) in s.sobolev {
            self.sobolev.entry(k).or_default().push(v);
        }
        for (k, v) in s.k_quadratic {
            self.k_quadratic.entry(k).or_default().push(v);
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Columns `t,H,M0,M1,gamma_n...,H<s>_norm...,K<n>_quad...`.
    pub fn to_csv(&self) -> String {
        let mut head = vec!["t".to_string(), "H".into(), "M0".into(), "M1".into()];
        head.extend(self.gamma.keys().map(|n| format!("gamma_{}", n)));
        head.extend(self.sobolev.keys().map(|s| format!("H{}_norm", s)));
        head.extend(self.k_quadratic.keys().map(|n| format!("K{}_quad", n)));
        let mut out = head.join(",");
        out.push('\n');
        for i in 0..self.len() {
            let mut row = vec![self.times[i], self.h[i], self.m0[i], self.m1[i]];
            row.extend(self.gamma.values().map(|v| v[i]));
            row.extend(self.sobolev.values().map(|v| v[i]));
            row.extend(self.k_quadratic.values().map(|v| v[i]));
            let cells: Vec<String> = row.iter().map(|x| format!("{:.17e}", x)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

/// `max_t |q(t) - q(0)| / |q(0)|`.
pub fn relative_drift(q: &[f64]) -> f64 {
    let q0 = q.first().copied().unwrap_or(0.0);
    let d = q.iter().fold(0.0f64, |m, v| m.max((v - q0).abs()));
    if q0 == 0.0 {
        d
    } else {
        d / q0.abs()
    }
}

pub fn diagnostics_for(cfg: &SimConfig) -> Diagnostics {
    let mut d = Diagnostics::new(cfg.c, cfg.grid);
    d.gammas = cfg.gammas.clone();
    d.sobolev = cfg.sobolev.clone();
    d.k_quad = cfg.k_quad.clone();
    d
}

/// Integrates to `t_end` in equal steps no larger than `dt`, sampling every
/// `sample_every` steps and at the end. Returns the series and the final state.
pub fn run(cfg: &SimConfig, initial: &SpectralState, sample_every: usize) -> Result<(DiagnosticsSeries, SpectralState), SimError> {
    cfg.validate()?;
    let solver = Solver::from_config(cfg);
    let diag = diagnostics_for(cfg);
    let steps = (cfg.t_end / cfg.dt - 1e-9).ceil().max(0.0) as usize;
    let dt = if steps == 0 { cfg.dt } else { cfg.t_end / steps as f64 };
    let mut state = solver.project(initial);
    let mut series = DiagnosticsSeries::default();
    series.push(diag.sample(&state)?);
    for k in 1..=steps {
        state = solver.step(&state, dt)?;
        if k % sample_every.max(1) == 0 || k == steps {
            series.push(diag.sample(&state)?);
        }
    }
    Ok((series, state))
}
