//! Large-`x` asymptotics of Fredholm determinants and resolvents for
//! generalized sine-kernel (GSK) integral operators acting on the real line.
//!
//! The operator is `I + γV` with
//!
//! ```text
//! γV(λ,μ) = sqrt(φ(λ)φ(μ)) / (2iπ(λ−μ)) · [e₊(λ)e₋(μ) − e₋(λ)e₊(μ)],
//! e±(λ)   = exp(±ixλ/2 ± g(λ)/2),       φ = γF,
//! ```
//!
//! where `F` is meromorphic in a strip around the axis with simple poles off
//! the axis and decays at real infinity. The crate provides
//!
//! * deterministic composite Gauss–Legendre quadrature, principal-value
//!   integrals and the regularized double integral ([`quadrature`]);
//! * built-in kernel families and pointwise kernel evaluation ([`kernels`]);
//! * the scalar Riemann–Hilbert data `ν`, `α`, `α±`, `α₁` ([`cauchy`]);
//! * location and verification of the zeros of `1+φ` ([`roots`]);
//! * the asymptotic resolvent and the two determinant expansions
//!   ([`asymptotics`]);
//! * a Nyström-discretization oracle including the truncated Wiener–Hopf
//!   determinant ([`oracle`]);
//! * configuration, comparison sweeps and CSV output ([`report`]).

pub mod asymptotics;
pub mod cauchy;
pub mod error;
pub mod kernels;
pub mod linalg;
pub mod oracle;
pub mod quadrature;
pub mod report;
pub mod roots;
pub mod special;

pub use error::GskError;
pub use num_complex;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, GskError>;
