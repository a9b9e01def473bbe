use std::path::PathBuf;

use clap::Args;
use dp_core::birkhoff::{birkhoff_normal_form, divisor, dp_hamiltonian_fourier};
use dp_core::ring::{format_rational, parse_rational, sign};
use serde::Serialize;
use serde_json::json;
use tracing::info;

use crate::error::CliError;
use crate::manifest::Outputs;

#[derive(Args, Clone, Debug, Serialize)]
pub struct BirkhoffArgs {
    /// Number of normalization steps; step k treats degree k + 3.
    #[arg(long)]
    pub order: u32,
    #[arg(long)]
    pub cutoff: i64,
    /// Dispersion parameter as an exact rational.
    #[arg(long, default_value = "1")]
    pub c: String,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

pub fn cmd_birkhoff(args: &BirkhoffArgs, outs: &mut Outputs) -> Result<(), CliError> {
    let c = parse_rational(&args.c).map_err(|e| CliError::Usage(format!("--c: {}", e)))?;
    if args.cutoff < 1 || sign(&c) == 0 {
        return Err(CliError::Usage("--cutoff must be positive and --c nonzero".into()));
    }
    info!(event = "birkhoff_start", order = args.order, cutoff = args.cutoff);
    let h = dp_hamiltonian_fourier(args.cutoff, &c);
    let steps = birkhoff_normal_form(&h, args.order).map_err(|e| CliError::Check(e.to_string()))?;

    let mut bad = Vec::new();
    let step_json: Vec<_> = steps
        .iter()
        .enumerate()
        .map(|(k, s)| {
            bad.extend(s.certified_nontrivial.iter().map(ToString::to_string));
            let terms: Vec<_> = s
                .normal_terms
                .terms()
                .map(|(a, coeff)| {
                    json!({
                        "alpha": a.to_string(),
                        "coeff": coeff.to_string(),
                        "divisor": format_rational(&divisor(a)),
                        "trivially_resonant": a.is_trivially_resonant(),
                        "flagged": s.flagged.contains(a),
                    })
                })
                .collect();
            json!({
                "step": k,
                "degree": k as u32 + 3,
                "generator_terms": s.chi.len(),
                "normal_terms": terms,
                "flagged": s.flagged.iter().map(ToString::to_string).collect::<Vec<_>>(),
                "certified_nontrivial": s.certified_nontrivial.iter().map(ToString::to_string).collect::<Vec<_>>(),
            })
        })
        .collect();
    let doc = json!({
        "c": format_rational(&c),
        "cutoff": args.cutoff,
        "order": args.order,
        "guard_band": args.order + 2,
        "steps": step_json,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("normal form serializes");
    text.push('\n');
    outs.write(&args.out, text.as_bytes())?;
    for (k, s) in steps.iter().enumerate() {
        println!(
            "degree {}: {} normal-form terms, {} cutoff-flagged, {} certified non-trivial",
            k + 3,
            s.normal_terms.len(),
            s.flagged.len(),
            s.certified_nontrivial.len()
        );
    }
    info!(event = "birkhoff_done", steps = steps.len());
    if bad.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(format!("normal form contains non-trivially resonant terms: {}", bad.join(" "))))
    }
}
