//! Riesz-kernel equilibrium measures on balls.
//!
//! The crate evaluates Riesz kernels and their dimensional constants, the
//! radial arcsine law that solves the `s = d - 3` problem with a quadratic
//! external field, the potentials of these measures, a family of special
//! function integral identities that follow from them, and an N-particle
//! energy minimizer that recovers the same measures independently.
//!
//! Module map:
//!
//! * [`specfun`]: Gamma, hypergeometric series, elliptic integrals, `S_s`.
//! * [`quadrature`]: Gauss–Legendre, tanh-sinh, Funk–Hecke reduction.
//! * [`riesz`]: kernels, Laplacian constant, critical radius.
//! * [`measures`]: radial densities, CDFs, sampling.
//! * [`potentials`]: equilibrium potentials and their closed forms.
//! * [`identities`]: the identity verification suite.
//! * [`minimizer`]: projected gradient descent on particle systems.

pub mod error;
pub mod identities;
pub mod measures;
pub mod minimizer;
pub mod par;
pub mod potentials;
pub mod quadrature;
pub mod riesz;
pub mod specfun;

pub use error::{Error, Result};
