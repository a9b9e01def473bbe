//! Pseudospectral integrator for the dispersive Degasperis-Procesi equation
//! `u_t - u_xxt - c u_xxx + 4c u_x - u u_xxx - 3 u_x u_xx + 4 u u_x = 0` on the torus.

pub mod config;
pub mod diagnostics;
pub mod grid;
pub mod mollifier;
pub mod run;
pub mod solver;

pub use config::{parse_config, parse_init_modes, ConfigError, InitSpec, SimConfig};
pub use diagnostics::{Diagnostics, KFunctional, Sample};
pub use run::{run, relative_drift, DiagnosticsSeries};
pub use solver::{dispersion, SimError, Solver, SpectralState};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
