use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use dp_core::birkhoff::nonresonance_scan;
use serde::Serialize;
use tracing::info;

use crate::error::CliError;
use crate::manifest::Outputs;

#[derive(Args, Clone, Debug, Serialize)]
pub struct ResonanceArgs {
    /// Scan indices with `n + 2` modes.
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub cutoff: i64,
    /// Number of `K_m` divisors reported per resonant index.
    #[arg(long, visible_alias = "m-max", default_value_t = 3)]
    pub km: u32,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

pub fn cmd_resonances(args: &ResonanceArgs, outs: &mut Outputs) -> Result<(), CliError> {
    if args.cutoff < 1 {
        return Err(CliError::Usage("--cutoff must be positive".into()));
    }
    info!(event = "scan_start", n = args.n, cutoff = args.cutoff);
    let rep = nonresonance_scan(args.n, args.cutoff, args.km);
    let mut text = String::from("alpha,divisor,trivial");
    for m in 1..=args.km {
        let _ = write!(text, ",km_{}", m);
    }
    text.push('\n');
    for r in &rep.resonant {
        text.push_str(&r.csv_row());
        text.push('\n');
    }
    outs.write(&args.out, text.as_bytes())?;
    info!(event = "scan_done", scanned = rep.scanned, resonant = rep.resonant.len());

    if rep.resonant.is_empty() {
        println!("no resonant indices among {} scanned (n = {}, cutoff = {})", rep.scanned, args.n, args.cutoff);
    } else {
        println!(
            "{} resonant indices among {} scanned: {} trivially resonant, {} nontrivial ({} with distinct |j|)",
            rep.resonant.len(),
            rep.scanned,
            rep.trivially_resonant,
            rep.nontrivial.len(),
            rep.nontrivial_distinct
        );
    }
    match rep.violations.first() {
        Some(a) => Err(CliError::Check(format!("{} is resonant for every K_m divisor up to m = {}", a, args.km))),
        None => Ok(()),
    }
}
