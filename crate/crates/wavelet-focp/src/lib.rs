//! Numerical core for linear–quadratic optimal control of two-state,
//! one-control systems whose dynamics carry a fractional derivative of
//! Caputo type.
//!
//! The method expands states and control in a fractional-order Bernoulli
//! wavelet basis, replaces Riemann–Liouville integration by an operational
//! matrix acting on coefficient vectors, and reduces the control problem
//! to one equality-constrained quadratic program solved through its KKT
//! system.
//!
//! Module layout mirrors that pipeline:
//! - [`special_functions`]: exact-rational Bernoulli numbers/polynomials,
//!   Γ, and the regularized incomplete beta function.
//! - [`quadrature`]: Gauss–Legendre panels, closed-form Riemann–Liouville
//!   integrals of monomials, and an independent Gauss–Jacobi oracle.
//! - [`basis`]: the wavelet family, its block geometry, and fast
//!   evaluation tables.
//! - [`operational`]: Gram matrix and tensor, projection, product matrix,
//!   and the operational matrix of fractional integration.
//! - [`focp_solver`]: problem description, KKT assembly and solve,
//!   solution evaluation, and dynamics residuals.
//! - [`analysis`]: closed-form benchmark solutions, error tables,
//!   truncation bounds, and convergence sweeps.

pub mod analysis;
pub mod basis;
pub mod focp_solver;
pub mod operational;
pub mod quadrature;
pub mod special_functions;
