//! Stationary distribution of a reflected Brownian motion in the upper half-plane.
//!
//! The process lives in `{ y >= 0 }` with covariance `Σ`, drift `μ` and oblique
//! reflection vectors `R± = (r±, 1)` on the two boundary half-lines. Under the
//! positive recurrence condition `μ₂ < 0`, `r₊ < μ₁/μ₂ < r₋` this crate computes
//!
//! * the boundary Laplace transforms `φ±` from a Cauchy-integral representation
//!   of the solution of a scalar Riemann boundary value problem on the real line,
//! * the bivariate transform, the boundary and interior densities (by Fourier
//!   inversion) and the vertical marginal,
//! * the angular profile at the origin and the exponential tail regimes,
//! * an Euler scheme for the reflected SDE used as an independent check.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature. File formats, the command line and parallel drivers live in the
//! companion `halfplane-rbm` crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![warn(missing_debug_implementations)]
// `!(x > 0.0)` style checks also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod asymptotics;
pub mod cauchy;
pub mod density;
mod error;
pub mod kernel;
pub mod laplace;
mod math;
pub mod model;
pub mod simulate;

pub use error::{Error, RecurrenceViolation, Result};
pub use math::GaussLegendre;

pub use num_complex::Complex64;

/// Selects one of the two boundary half-lines: `Plus` is `u > 0`, `Minus` is `u < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Plus, Side::Minus];

    /// `+1.0` for `Plus`, `-1.0` for `Minus`.
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Plus => Side::Minus,
            Side::Minus => Side::Plus,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Plus => "plus",
            Side::Minus => "minus",
        }
    }
}

pub(crate) mod prelude {
    #[allow(unused_imports)]
    pub(crate) use alloc::{vec, vec::Vec};
    #[allow(unused_imports)]
    pub(crate) use num_traits::Float;
}
