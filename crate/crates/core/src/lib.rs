//! Galerkin truncations of the periodic Ostrovsky equation
//!
//! ```text
//! u_t - u_xxx + ∂x⁻¹u + u u_x = 0,   x ∈ 𝕋 = ℝ/2πℤ,  ∫u = 0
//! ```
//!
//! The crate evolves the truncated system exactly in its linear part,
//! samples the finite-dimensional white-noise measure, tests its invariance
//! statistically and certifies the multiplier/resonance inequalities used
//! by the local theory by exhaustive enumeration and quadrature.
//!
//! Everything numeric is generic over [`Real`] (`f32`/`f64`); the integer
//! algebra of the resonance function additionally runs over exact
//! rationals (see [`estimates::resonance`]). The aliases at the crate root
//! fix the scalar to `f64`, which is what the statistics and the CLI use.

pub mod error;
pub mod estimates;
pub mod integrator;
pub mod io;
pub mod measure;
pub mod norms;
pub mod quadrature;
pub mod scalar;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::Real;

/// `f64` spectral state.
pub type State = spectral::SpectralState<f64>;
/// `f64` trajectory.
pub type Trajectory = integrator::Trajectory<f64>;
/// `f64` dyadic profile.
pub type DyadicProfile = norms::DyadicProfile<f64>;
/// `f64` integrator.
pub type Stepper = integrator::Stepper<f64>;
/// Exact rational used by the resonance algebra.
pub type Rational = num_rational::Ratio<i128>;
