//! Error type shared by all modules.

use num_complex::Complex64;
use thiserror::Error;

/// Everything that can go wrong while building kernels, quadrature rules or
/// evaluating the asymptotic formulas.
#[derive(Error, Debug)]
pub enum GskError {
    /// Invalid configuration (bad parameter ranges, malformed config files).
    #[error("configuration error: {0}")]
    Config(String),

    /// Evaluation outside the declared domain of validity.
    #[error("domain error: {0}")]
    Domain(String),

    /// The admissibility condition `sup_{λ∈ℝ} |φ(λ)| < 1` failed.
    #[error("kernel not admissible: sup|phi| = {max_abs} >= 1 at lambda = {at}")]
    Admissibility { max_abs: f64, at: f64 },

    /// A declared decay (tail) tolerance was violated at a cutoff endpoint.
    #[error("cutoff too small: |{quantity}({endpoint})| = {value:.3e} exceeds tail tolerance {tol:.3e}")]
    TailTooLarge {
        quantity: &'static str,
        endpoint: f64,
        value: f64,
        tol: f64,
    },

    /// `1 + φ(λ) = 0`, the logarithm in `ν` is singular.
    #[error("logarithmic singularity: 1 + phi vanishes at lambda = {at}")]
    LogSingularity { at: Complex64 },

    /// A root finder failed to deliver a usable zero of `1+φ`.
    #[error("root failure: {0}")]
    RootFailure(String),

    /// `φ'` vanishes at a located zero, so the residue data `h±` is undefined.
    #[error("degenerate root at {root}: |phi'| = {phi_prime_abs:.3e} (simple-zero hypothesis violated)")]
    DegenerateRoot { root: Complex64, phi_prime_abs: f64 },

    /// `I − A` (or a Nyström matrix) is numerically singular.
    #[error("singular linear system: {0}")]
    Singular(String),

    /// The quadrature rule cannot resolve the kernel oscillation.
    #[error("oscillation guard: rule has {actual} nodes, need at least {required} for x = {x}")]
    NyquistViolated { required: usize, actual: usize, x: f64 },

    /// The contour sum would have too many terms.
    #[error("contour sum refused: {terms} terms exceed the combinatorial guard")]
    CombinatorialGuard { terms: u128 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    Json(#[from] serde_json::Error),
}

impl GskError {
    /// Process exit code used by the CLI: 2 for configuration problems,
    /// 3 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            GskError::Config(_) | GskError::Domain(_) | GskError::Json(_) | GskError::Io(_) => 2,
            _ => 3,
        }
    }
}
