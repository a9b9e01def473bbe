use std::path::PathBuf;

use clap::Args;
use dp_spectral::grid::mean;
use dp_spectral::run::diagnostics_for;
use dp_spectral::{parse_config, run, InitSpec, SimConfig, Solver, SpectralState};
use serde::Serialize;
use tracing::info;

use crate::error::CliError;
use crate::manifest::{sibling, Outputs};

#[derive(Args, Clone, Debug, Serialize)]
pub struct SimulateArgs {
    /// Flat `key = value` config file.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
    /// Largest accepted drift of any sampled invariant.
    #[arg(long, default_value_t = 1e-8)]
    pub drift_tol: f64,
}

pub fn load_config(path: &PathBuf) -> Result<(Vec<u8>, SimConfig), CliError> {
    let bytes = std::fs::read(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| CliError::Usage(format!("{}: not UTF-8", path.display())))?;
    let cfg = parse_config(&text).map_err(|e| CliError::Usage(format!("{}: {}", path.display(), e)))?;
    cfg.validate().map_err(|e| CliError::Usage(format!("{}: {}", path.display(), e)))?;
    Ok((bytes, cfg))
}

pub fn seed_of(cfg: &SimConfig) -> Option<u64> {
    match cfg.init {
        InitSpec::Random { seed, .. } => Some(seed),
        InitSpec::Modes(_) => None,
    }
}

struct DriftRow {
    name: String,
    initial: f64,
    change: f64,
    scale: f64,
}

impl DriftRow {
    fn new(name: String, q: &[f64], scale: f64) -> Self {
        let initial = q[0];
        let change = q.iter().fold(0.0f64, |m, v| m.max((v - initial).abs()));
        DriftRow { name, initial, change, scale }
    }

    fn drift(&self) -> f64 {
        if self.scale == 0.0 {
            self.change
        } else {
            self.change / self.scale
        }
    }
}

pub fn cmd_simulate(args: &SimulateArgs, outs: &mut Outputs) -> Result<(), CliError> {
    let (_, cfg) = load_config(&args.config)?;
    let init = SpectralState::from_config(&cfg)?;
    info!(event = "simulate_start", grid = cfg.grid, dt = cfg.dt, t_end = cfg.t_end);
    let (series, last) = run(&cfg, &init, cfg.sample_every)?;
    outs.write(&args.out, series.to_csv().as_bytes())?;
    info!(event = "simulate_done", samples = series.len(), time = last.time);

    // Gamma^(n) may vanish identically; its drift is measured against the size of its density.
    let diag = diagnostics_for(&cfg);
    let start = Solver::from_config(&cfg).project(&init);
    let top = cfg.gammas.iter().copied().max().unwrap_or(0);
    let rho = if cfg.gammas.is_empty() { vec![] } else { diag.rho_numeric(&start, top)? };
    let mut rows = vec![
        DriftRow::new("H".into(), &series.h, series.h[0].abs()),
        DriftRow::new("M0".into(), &series.m0, series.m0[0].abs()),
        DriftRow::new("M1".into(), &series.m1, series.m1[0].abs()),
    ];
    for (n, q) in &series.gamma {
        let density = mean(&rho[*n].iter().map(|v| v.abs()).collect::<Vec<_>>());
        rows.push(DriftRow::new(format!("gamma_{}", n), q, density.max(q[0].abs())));
    }

    let mut text = String::from("quantity,initial,max_change,scale,drift,pass\n");
    let mut failed = Vec::new();
    println!("{:<10}{:>26}{:>12}{:>12}", "quantity", "initial", "drift", "status");
    for r in &rows {
        let d = r.drift();
        let pass = d <= args.drift_tol;
        if !pass {
            failed.push(r.name.clone());
        }
        text.push_str(&format!("{},{:.17e},{:.6e},{:.6e},{:.6e},{}\n", r.name, r.initial, r.change, r.scale, d, pass));
        println!("{:<10}{:>26.17e}{:>12.3e}{:>12}", r.name, r.initial, d, if pass { "ok" } else { "DRIFT" });
    }
    outs.write(&sibling(&args.out, ".drift.csv"), text.as_bytes())?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(format!("drift above {:e} in {}", args.drift_tol, failed.join(", "))))
    }
}
