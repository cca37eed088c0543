//! Problem instances, validation, whitening and the derived angles.
//!
//! Everything downstream works on a [`WhitenedModel`], i.e. on an instance with
//! identity covariance. [`whiten`] is the only way to obtain one.

use core::f64::consts::PI;

#[allow(unused_imports)]
use crate::prelude::*;
use crate::{Error, RecurrenceViolation, Result, Side};

/// Relative tolerance on the leading principal minors of `Σ`.
const SPD_REL_TOL: f64 = 1e-12;

/// A reflected Brownian motion in the upper half-plane.
///
/// `r_plus` and `r_minus` are the first components of the reflection vectors
/// `R± = (r±, 1)` used on `{u > 0}` and `{u < 0}` respectively.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelParams {
    pub sigma: [[f64; 2]; 2],
    pub mu: [f64; 2],
    pub r_plus: f64,
    pub r_minus: f64,
}

impl ModelParams {
    /// Identity covariance instance.
    pub fn standard(mu: [f64; 2], r_plus: f64, r_minus: f64) -> Self {
        ModelParams {
            sigma: [[1.0, 0.0], [0.0, 1.0]],
            mu,
            r_plus,
            r_minus,
        }
    }

    /// `(μ₁, μ₂, r₋, r₊) = (0, -1, 1, -1)`, the case with a closed-form density.
    pub fn symmetric() -> Self {
        Self::standard([0.0, -1.0], -1.0, 1.0)
    }

    pub fn slope(&self, side: Side) -> f64 {
        match side {
            Side::Plus => self.r_plus,
            Side::Minus => self.r_minus,
        }
    }

    pub fn det_sigma(&self) -> f64 {
        self.sigma[0][0] * self.sigma[1][1] - self.sigma[0][1] * self.sigma[1][0]
    }

    /// Model seen through `u ↦ -u`: `μ₁ ↦ -μ₁` and `(r₊, r₋) ↦ (-r₋, -r₊)`.
    pub fn mirrored(&self) -> Self {
        let s = self.sigma;
        ModelParams {
            sigma: [[s[0][0], -s[0][1]], [-s[1][0], s[1][1]]],
            mu: [-self.mu[0], self.mu[1]],
            r_plus: -self.r_minus,
            r_minus: -self.r_plus,
        }
    }
}

/// Checks symmetry/positive definiteness of `Σ` and strict positive recurrence.
pub fn validate(raw: ModelParams) -> Result<ModelParams> {
    let s = raw.sigma;
    let scale = s[0][0].abs().max(s[1][1].abs()).max(s[0][1].abs()).max(1e-300);
    let finite = s.iter().flatten().all(|x| x.is_finite())
        && raw.mu.iter().all(|x| x.is_finite())
        && raw.r_plus.is_finite()
        && raw.r_minus.is_finite();
    if !finite {
        return Err(Error::NotPositiveDefinite);
    }
    if (s[0][1] - s[1][0]).abs() > SPD_REL_TOL * scale {
        return Err(Error::NotPositiveDefinite);
    }
    if s[0][0] <= SPD_REL_TOL * scale || raw.det_sigma() <= SPD_REL_TOL * scale * scale {
        return Err(Error::NotPositiveDefinite);
    }
    let [mu1, mu2] = raw.mu;
    if !(mu2 < 0.0) {
        return Err(Error::NotRecurrent(RecurrenceViolation::NonNegativeVerticalDrift));
    }
    // Whitening maps μ₁/μ₂ and r± by the same increasing affine map, so the
    // comparison may be done in the original coordinates.
    let rho = mu1 / mu2;
    if !(raw.r_plus < rho) {
        return Err(Error::NotRecurrent(RecurrenceViolation::PlusSlope));
    }
    if !(rho < raw.r_minus) {
        return Err(Error::NotRecurrent(RecurrenceViolation::MinusSlope));
    }
    Ok(raw)
}

/// Identity-covariance instance together with the map that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WhitenedModel {
    /// Whitened parameters (`sigma` is the identity).
    pub params: ModelParams,
    /// Upper-triangular `T` with `T Σ Tᵀ = I`.
    pub transform: [[f64; 2]; 2],
    pub inverse_transform: [[f64; 2]; 2],
    /// `1/√det Σ` of the original covariance.
    pub jacobian: f64,
    /// The instance as supplied.
    pub original: ModelParams,
}

impl WhitenedModel {
    pub fn mu1(&self) -> f64 {
        self.params.mu[0]
    }

    pub fn mu2(&self) -> f64 {
        self.params.mu[1]
    }

    pub fn slope(&self, side: Side) -> f64 {
        self.params.slope(side)
    }

    /// Whitened instance of the mirrored model `u ↦ -u`.
    pub fn mirrored(&self) -> WhitenedModel {
        whiten(self.params.mirrored()).expect("mirror of a valid model is valid")
    }
}

/// The unique orientation-preserving, half-plane-preserving whitening.
///
/// With `d = det Σ`,
/// `T = [[√(σ₂₂/d), -σ₁₂/√(σ₂₂ d)], [0, 1/√σ₂₂]]`. The drift maps to `Tμ`
/// and the reflection slopes to the first-over-second components of `TR±`.
pub fn whiten(params: ModelParams) -> Result<WhitenedModel> {
    let params = validate(params)?;
    let s = params.sigma;
    let d = params.det_sigma();
    let s22 = s[1][1];
    let s12 = s[0][1];
    let t = [
        [(s22 / d).sqrt(), -s12 / (s22 * d).sqrt()],
        [0.0, 1.0 / s22.sqrt()],
    ];
    let inv = [[(d / s22).sqrt(), s12 / s22.sqrt()], [0.0, s22.sqrt()]];
    let apply = |v: [f64; 2]| [t[0][0] * v[0] + t[0][1] * v[1], t[1][1] * v[1]];
    let mu = apply(params.mu);
    let slope = |r: f64| {
        let w = apply([r, 1.0]);
        w[0] / w[1]
    };
    let whitened = ModelParams {
        sigma: [[1.0, 0.0], [0.0, 1.0]],
        mu,
        r_plus: slope(params.r_plus),
        r_minus: slope(params.r_minus),
    };
    let whitened = validate(whitened)?;
    Ok(WhitenedModel {
        params: whitened,
        transform: t,
        inverse_transform: inv,
        jacobian: 1.0 / d.sqrt(),
        original: params,
    })
}

/// Angles and critical slopes of a whitened instance.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Geometry {
    pub alpha: f64,
    pub delta_plus: f64,
    pub delta_minus: f64,
    pub r_plus_star: f64,
    pub r_minus_star: f64,
}

impl Geometry {
    pub fn critical_slope(&self, side: Side) -> f64 {
        match side {
            Side::Plus => self.r_plus_star,
            Side::Minus => self.r_minus_star,
        }
    }
}

/// `α = (arctan r₋ − arctan r₊)/π`, `δ± = π/2 ∓ arctan r±`, and the critical
/// slopes `r±⋆ = ρ ∓ √(ρ²+1)` with `ρ = μ₁/μ₂`.
pub fn geometry(m: &WhitenedModel) -> Geometry {
    let p = &m.params;
    let rho = p.mu[0] / p.mu[1];
    let root = (rho * rho + 1.0).sqrt();
    // Written to avoid cancellation when |ρ| is large.
    let (r_plus_star, r_minus_star) = if rho >= 0.0 {
        let rm = rho + root;
        (-1.0 / rm, rm)
    } else {
        let rp = rho - root;
        (rp, -1.0 / rp)
    };
    Geometry {
        alpha: (p.r_minus.atan() - p.r_plus.atan()) / PI,
        delta_plus: 0.5 * PI - p.r_plus.atan(),
        delta_minus: 0.5 * PI + p.r_minus.atan(),
        r_plus_star,
        r_minus_star,
    }
}

/// Maps an original-coordinate point to the whitened plane.
///
/// Returns `(point, factor)` with `π(u, v) = factor · π̃(point)`.
pub fn map_density_point(w: &WhitenedModel, u: f64, v: f64) -> Result<([f64; 2], f64)> {
    if v < 0.0 {
        return Err(Error::NegativeHeight(v));
    }
    let t = w.transform;
    Ok(([t[0][0] * u + t[0][1] * v, t[1][1] * v], w.jacobian))
}
