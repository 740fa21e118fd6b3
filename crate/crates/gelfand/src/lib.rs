//! Numerics for the generalized radial Gelfand problem
//! L(u) + λ e^{f(u)} = 0 with L(u) = r^{-γ} (r^α |u'|^β u')',
//! covering k-Hessian and p-Laplacian radial forms.
//!
//! The crate provides:
//! - operator parameter handling and regime classification ([`params`]),
//! - closed nonlinearity families f, g = f⁻¹ with diagnostics ([`nonlinearity`]),
//! - a shooting solver for the initial-value problem with a singular origin
//!   ([`solver`]),
//! - exact and asymptotic-seeded singular solutions plus the rescaling
//!   transform ([`singular`]),
//! - the autonomous phase-plane system and intersection counting ([`phase`]),
//! - bifurcation-diagram sweeps λ(ρ) ([`bifurcation`]).

pub mod bifurcation;
pub mod error;
mod jet;
pub mod nonlinearity;
pub mod ode;
pub mod params;
pub mod phase;
pub mod quad;
pub mod singular;
pub mod solver;

pub use error::{Error, Result};
pub use nonlinearity::{diagnose_assumptions, Family, NonlinearitySpec};
pub use params::{OperatorParams, Origin, Regime, RegimeTag};
pub use solver::{solve_ivp, RadialTrajectory};
