//! Numerical laboratory for Pyragas-controlled scalar delay equations.
//!
//! The object of study is the two-delay feedback system
//!
//! ```text
//! x'(t) = λ f(x(t-1)) + b⁻¹ (x(t) + x(t - p/2))
//! ```
//!
//! with odd nonlinearity `f`, normalized `f'(0) = 1`, at the Hopf points
//! λ = λ_k = (-1)^{k+1} ω_k, ω_k = (k+½)π, where branches of rapidly
//! oscillating periodic solutions of constant minimal period p_k = 2π/ω_k
//! bifurcate. The crate evaluates and root-solves the associated
//! characteristic equation, enumerates the control-induced Hopf
//! bifurcations through a two-scale frequency reduction, computes the
//! interval of control amplitudes `b` that stabilizes the rapidly
//! oscillating branch, validates the small-ε and small-δ expansions of
//! those quantities, and confirms stabilization by direct simulation with
//! Floquet analysis.
//!
//! Modules mirror the pipeline:
//!
//! * [`scaling`] — parameter vocabulary: indices k, m, j and the derived
//!   frequencies, scalings and windows.
//! * [`charpoly`] — the characteristic function ψ, its derivatives, root
//!   refinement, and the uncontrolled spectrum.
//! * [`twoscale`] — the ε-free two-scale characteristic equation: frequency
//!   branches ω±(Ω), the quadratic control relation Q, discriminant,
//!   control branches B±, domain boundaries and critical points.
//! * [`hashing`] — the affine relation re-coupling slow and fast
//!   frequencies at fixed ε, and the enumeration of control-induced Hopf
//!   points B±_{m,j}.
//! * [`spectrum`] — argument-principle counting of unstable eigenvalues,
//!   trapping checks, instability intervals, and the stabilization
//!   (Pyragas) interval.
//! * [`asymptotics`] — ε- and δ-expansions with empirical convergence-order
//!   measurement.
//! * [`dde`] — method-of-steps integration of the nonlinear system,
//!   construction of the symmetric periodic orbits, and Floquet
//!   multipliers.
//!
//! With the default `parallel` feature, embarrassingly parallel sweeps
//! (B-grids, per-resonance enumerations, monodromy columns) run on rayon;
//! disabling default features yields a fully sequential build with the
//! same API.

pub mod asymptotics;
pub mod charpoly;
pub mod dde;
pub mod hashing;
pub(crate) mod par;
pub mod scaling;
pub mod spectrum;
pub mod twoscale;

use thiserror::Error;

/// Errors produced by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates a precondition (b = 0, wrong parity, empty grid, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// The real characteristic equation has a vanishing denominator at this point.
    #[error("vanishing denominator in real eigenvalue relation at mu_R = {mu_r}")]
    VanishingDenominator { mu_r: f64 },
    /// A point lies outside the domain of the requested branch or expansion.
    #[error("outside domain: {0}")]
    OutsideDomain(String),
    /// An iterative solver failed to converge.
    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    Convergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },
    /// A Jacobian or derivative fell below the singularity threshold.
    #[error("near-singular {what} (magnitude {magnitude:.3e})")]
    NearSingular { what: &'static str, magnitude: f64 },
    /// Contour integration did not produce a near-integer winding number.
    #[error("non-integral winding number {winding} (residual {residual:.3e})")]
    NonIntegralWinding { winding: f64, residual: f64 },
    /// A grid step does not divide the delays exactly.
    #[error("step misalignment: {0}")]
    Misaligned(String),
    /// Trajectory left the overflow guard.
    #[error("trajectory blow-up at t = {t} (|x| = {x:.3e})")]
    BlowUp { t: f64, x: f64 },
}

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
