//! Exact arithmetic for the SU(r) and SU(r)/Z_r Vafa-Witten partition
//! functions of K3 surfaces at prime rank, together with symbolic and
//! numeric verification of the S-duality modular transformation.
//!
//! The crate is organised in layers:
//!
//! - [`cycnum`] — exact elements of cyclotomic fields Q(zeta_N), the
//!   coefficient domain for everything else;
//! - [`qseries`] — truncated Puiseux series in `q` with cyclotomic
//!   coefficients: the discriminant cusp form, its inverse (the generating
//!   series of Euler characteristics of Hilbert schemes of points on K3),
//!   root-of-unity substitutions and sector extraction;
//! - [`lattice`] — the K3 lattice U^3 + E8(-1)^2 and finite Gauss sums
//!   ("flux sums") over H^2(S, mu_r);
//! - [`chern`] — B-field twisted Chern character arithmetic, integrality
//!   checks and virtual dimensions;
//! - [`partition`] — assembly of the partition functions Z^{SU(r)}_{c1},
//!   Z_w and Z^{SU(r)/Z_r}_{c1} by independent routes;
//! - [`sduality`] — the Delta-atom algebra carrying the tau -> -1/tau
//!   transformation, and upper half-plane evaluation.

pub mod chern;
pub mod cycnum;
pub mod error;
pub mod lattice;
pub mod partition;
pub mod qseries;
pub mod sduality;

pub use error::{Error, Result};

/// Arbitrary-precision rational, the base coefficient domain.
///
/// Values are always reduced with a positive denominator.
pub type Rational = num_rational::BigRational;
