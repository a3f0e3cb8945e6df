//! Numerical toolkit for Krein systems, the continuous analog of orthogonal
//! polynomials on the unit circle.
//!
//! A Krein system is the canonical ODE pair
//!
//! ```text
//! P'(r,lambda)  =  i lambda P(r,lambda) - conj(A(r)) P*(r,lambda),   P(0) = 1,
//! P*'(r,lambda) = -A(r) P(r,lambda),                                 P*(0) = 1,
//! ```
//!
//! driven by a locally square-integrable coefficient `A`. The solutions play
//! the role of orthogonal polynomials for a measure on the line; the
//! coefficient is in bijection with a continuous Hermitian kernel `H` (the
//! accelerant), with a Schur function, and with the spectral measure itself.
//! This crate implements the forward and inverse maps of that dictionary and
//! the identities that certify them:
//!
//! - [`core`]: grids, sampled functions, spectral measures, trapezoid
//!   quadrature, oscillatory Fourier integrals, CSV formats.
//! - [`krein_ode`]: transfer-matrix propagation, continuous polynomials and
//!   Wall functions, lambda-derivatives, reproducing kernels, backward Schur
//!   evolution.
//! - [`accelerant`]: accelerant-to-coefficient and coefficient-to-accelerant
//!   maps, dual accelerants, the transfer-equation kernel, and accelerants
//!   built from logarithms of spectral densities.
//! - [`opuc`]: the discrete side. Szego recursion, Verblunsky parameters from
//!   Toeplitz moments, and the three discretization bridges linking discrete
//!   and continuous systems.
//! - [`spectral`]: Bernstein-Szego densities, Weyl-Titchmarsh and Schur
//!   functions, the Szego function, Szego distances, trace formulas, entropy
//!   metrics, and strong Szego asymptotics.
//! - [`zeros`]: argument-principle counting, Newton refinement, asymptotic
//!   zero charts, and Fejer-type exclusion regions for the polynomial `P`.
//! - [`scattering`]: the Dirac-operator dictionary, Schrodinger reductions
//!   with Gelfand-Levitan cross-checks, and Hankel-operator inverse
//!   scattering.
//! - [`verify`]: the acceptance suite run both by `cargo test` and by the
//!   `krein verify` subcommand.
//!
//! Every operation is pure: inputs are immutable, outputs are fresh values,
//! and lambda-grid sweeps parallelize without changing results bitwise.

pub mod accelerant;
pub mod core;
pub mod krein_ode;
pub mod opuc;
pub mod scattering;
pub mod spectral;
pub mod verify;
pub mod zeros;

pub use crate::core::{Grid1D, SampledFunction, SpectralMeasure, C64};
