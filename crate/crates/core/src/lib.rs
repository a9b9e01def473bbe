//! Exact symbolic machinery for the dispersive Degasperis-Procesi equation
//! `u_t - u_xxt - c u_xxx + 4c u_x - u u_xxx - 3 u_x u_xx + 4 u u_x = 0`.
//!
//! - [`ring`]: coefficients in `Q(sqrt5)[c^(±1/3)]`
//! - [`diffpoly`]: truncated series in `w = u - u_xx` and its derivatives, conserved densities
//! - [`conserved`]: integrals of the densities, coefficient structure, triangular invariants
//! - [`birkhoff`]: Fourier polynomials, Poisson bracket, resonances, normal-form steps

pub mod birkhoff;
pub mod conserved;
pub mod diffpoly;
pub mod ring;

pub use diffpoly::Convention;
pub use ring::{QuadExt, Rational, RingElem};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
