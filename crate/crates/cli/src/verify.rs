use std::path::PathBuf;

use clap::Args;
use dp_core::conserved::{closed_form_c, compute_sn, gammas, quad_consistency, LinearCoeffTable};
use dp_core::{Convention, RingElem};
use serde::Serialize;
use tracing::info;

use crate::error::CliError;
use crate::manifest::{sibling, Outputs};

#[derive(Args, Clone, Debug, Serialize)]
pub struct VerifyArgs {
    /// Linear coefficients `c_0..=c_M` compared with the closed form.
    #[arg(long, default_value_t = 20)]
    pub max_m: usize,
    /// Levels for the `S_n`, parity and quadratic-relation checks.
    #[arg(long, default_value_t = 15)]
    pub max_n: usize,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
    /// Adds 1 to `c_m` before comparing (exercises the failure path).
    #[arg(long, hide = true)]
    pub inject_corruption: Option<usize>,
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Usage(e.to_string())
}

fn to_bytes(w: csv::Writer<Vec<u8>>) -> Vec<u8> {
    w.into_inner().expect("in-memory csv")
}

pub fn cmd_verify(args: &VerifyArgs, outs: &mut Outputs) -> Result<(), CliError> {
    info!(event = "verify_start", max_m = args.max_m, max_n = args.max_n);
    let mut table = LinearCoeffTable::from_recursion(args.max_m.max(1), Convention::Printed).map_err(|e| CliError::Check(e.to_string()))?;
    table.c.truncate(args.max_m + 1);
    if let Some(m) = args.inject_corruption {
        if let Some(c) = table.c.get_mut(m) {
            *c = &*c + &RingElem::one();
        }
    }

    let mut failures = Vec::new();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["m", "c_m_recursion", "c_m_closed_form", "equal"]).map_err(csv_err)?;
    for (m, c) in table.c.iter().enumerate() {
        let closed = closed_form_c(m as u32);
        let equal = *c == closed;
        if !equal {
            failures.push(format!("c_{}", m));
        }
        w.write_record([m.to_string(), c.to_string(), closed.to_string(), equal.to_string()]).map_err(csv_err)?;
    }
    outs.write(&args.out, &to_bytes(w))?;

    // S_n and the quadratic relation need c_0..=c_{max_n + 1} regardless of --max-m.
    let mut long = LinearCoeffTable::from_recursion(args.max_n + 2, Convention::Printed).map_err(|e| CliError::Check(e.to_string()))?;
    if let Some(m) = args.inject_corruption {
        if let Some(c) = long.c.get_mut(m) {
            *c = &*c + &RingElem::one();
        }
    }
    let gs = gammas(args.max_n, 2, Convention::Printed).map_err(|e| CliError::Check(e.to_string()))?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["check", "n", "value", "pass"]).map_err(csv_err)?;
    let mut row = |w: &mut csv::Writer<Vec<u8>>, check: &str, n: usize, value: String, pass: bool| -> Result<(), CliError> {
        if !pass {
            failures.push(format!("{} n={}", check, n));
        }
        w.write_record([check.to_string(), n.to_string(), value, pass.to_string()]).map_err(csv_err)
    };
    for n in (1..=args.max_n).step_by(2) {
        match compute_sn(&long, n) {
            Ok(s) => row(&mut w, "S_n_nonzero", n, s.to_string(), true)?,
            Err(e) => row(&mut w, "S_n_nonzero", n, e.to_string(), false)?,
        }
    }
    for n in (0..=args.max_n).step_by(2) {
        row(&mut w, "even_quadratic_zero", n, gs[n].quadratic.to_string(), gs[n].quadratic.is_zero())?;
    }
    for n in (1..=args.max_n.saturating_sub(2)).step_by(2) {
        match quad_consistency(n, &long, &gs) {
            Ok(ok) => row(&mut w, "top_quadratic_relation", n + 2, gs[n + 2].quadratic.get((n as u32 + 3) / 2).to_string(), ok)?,
            Err(e) => row(&mut w, "top_quadratic_relation", n + 2, e.to_string(), false)?,
        }
    }
    outs.write(&sibling(&args.out, ".checks.csv"), &to_bytes(w))?;
    info!(event = "verify_done", failures = failures.len());

    if failures.is_empty() {
        println!("all {} coefficient rows and level checks pass", table.c.len());
        Ok(())
    } else {
        Err(CliError::Check(format!("mismatch in {}", failures.join(", "))))
    }
}
