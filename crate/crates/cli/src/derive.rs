use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use dp_core::conserved::{gammas, m1_expansion, quad_rows, triangularize, ConservedError, ConservedFunctional, QuadRow};
use dp_core::diffpoly::{rho_sequence, ClassCertificate, DiffSeries};
use dp_core::{Convention, RingElem};
use serde::Serialize;
use serde_json::json;
use tracing::info;

use crate::error::CliError;
use crate::manifest::{sibling, Outputs};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConventionArg {
    Printed,
    Lax,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Printed => Convention::Printed,
            ConventionArg::Lax => Convention::Lax,
        }
    }
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct DeriveArgs {
    /// Highest density level.
    #[arg(long)]
    pub n: usize,
    /// Truncation degree in `w`.
    #[arg(long, default_value_t = 4)]
    pub degree: u32,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
    /// Treat a degenerate triangular step as a failed check.
    #[arg(long)]
    pub triangularize: bool,
    /// Directory receiving one `rho_<n>.json` per density.
    #[arg(long)]
    #[serde(skip)]
    pub dump: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ConventionArg::Printed)]
    pub convention: ConventionArg,
}

#[derive(Serialize)]
struct FunctionalJson {
    n: usize,
    constant: RingElem,
    quadratic: Vec<QuadRow>,
    linear_coeff_top: RingElem,
    higher: DiffSeries,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate: Option<ClassCertificate>,
}

fn functional_json(f: &ConservedFunctional, certificate: Option<ClassCertificate>) -> FunctionalJson {
    FunctionalJson {
        n: f.n,
        constant: f.constant.clone(),
        quadratic: quad_rows(&f.quadratic),
        linear_coeff_top: f.linear_coeff_top.clone(),
        higher: f.higher.clone(),
        certificate,
    }
}

fn series_err(e: impl std::fmt::Display) -> CliError {
    CliError::Check(e.to_string())
}

pub fn cmd_derive(args: &DeriveArgs, outs: &mut Outputs) -> Result<(), CliError> {
    if args.degree < 2 {
        return Err(CliError::Usage("--degree must be at least 2".into()));
    }
    let conv: Convention = args.convention.into();
    info!(event = "derive_start", n = args.n, degree = args.degree);
    let seq = rho_sequence(args.n, args.degree, conv).map_err(series_err)?;
    let gs = gammas(args.n, args.degree, conv).map_err(series_err)?;
    let m1 = m1_expansion(args.degree);
    let certs: Vec<ClassCertificate> = seq.rho.iter().enumerate().map(|(n, r)| r.classify(n as u32 + 1)).collect();

    let k_max = args.n.saturating_sub(1) / 2;
    let (fs, degenerate) = if args.n == 0 {
        (vec![], None)
    } else {
        match triangularize(k_max, &gs, &m1) {
            Ok(fs) => (fs, None),
            Err(ConservedError::DegenerateLeadingCoefficient { level, coeff, partial }) => (partial, Some((level, coeff))),
            Err(e) => return Err(series_err(e)),
        }
    };

    let doc = json!({
        "degree": args.degree,
        "convention": args.convention,
        "gammas": gs.iter().zip(&certs).map(|(g, c)| functional_json(g, Some(c.clone()))).collect::<Vec<_>>(),
        "m1": functional_json(&m1, None),
        "triangular": {
            "functionals": fs.iter().map(|f| functional_json(f, None)).collect::<Vec<_>>(),
            "degenerate": degenerate.as_ref().map(|(level, coeff)| json!({"level": level, "coeff": coeff})),
        },
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("derive output serializes");
    text.push('\n');
    outs.write(&args.out, text.as_bytes())?;

    let summary = summary_table(&gs, &certs, &fs, degenerate.as_ref());
    print!("{}", summary);
    outs.write(&sibling(&args.out, ".summary.txt"), summary.as_bytes())?;

    if let Some(dir) = &args.dump {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
        for (n, r) in seq.rho.iter().enumerate() {
            let mut s = r.to_json();
            s.push('\n');
            outs.write(&dir.join(format!("rho_{}.json", n)), s.as_bytes())?;
        }
    }
    info!(event = "derive_done", functionals = gs.len(), triangular = fs.len());

    if !certs.iter().all(|c| c.in_sigma && c.affine_top) {
        return Err(CliError::Check("a density fails its class certificate".into()));
    }
    match degenerate {
        Some((level, coeff)) if args.triangularize => Err(CliError::Check(format!(
            "DegenerateLeadingCoefficient: leading quadratic coefficient of level {} is {}",
            level, coeff
        ))),
        _ => Ok(()),
    }
}

fn summary_table(
    gs: &[ConservedFunctional],
    certs: &[ClassCertificate],
    fs: &[ConservedFunctional],
    degenerate: Option<&(usize, RingElem)>,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<4}{:<10}{:<12}{:<12}{:<40}quadratic", "n", "in_sigma", "affine_top", "min_degree", "linear_top");
    for (g, c) in gs.iter().zip(certs) {
        let _ = writeln!(
            out,
            "{:<4}{:<10}{:<12}{:<12}{:<40}{}",
            g.n,
            c.in_sigma,
            c.affine_top,
            c.min_degree,
            g.linear_coeff_top.to_string(),
            g.quadratic
        );
    }
    for f in fs {
        let _ = writeln!(out, "F_{}: {}", f.n, f.quadratic);
    }
    if let Some((level, coeff)) = degenerate {
        let _ = writeln!(out, "F_{}: degenerate, leading coefficient {}", level, coeff);
    }
    out
}
