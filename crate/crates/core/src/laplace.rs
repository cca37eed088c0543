//! Explicit Laplace transforms `φ±` of the boundary measures, the bivariate
//! transform `φ(x, y)` and its partial inverse in the horizontal variable.
//!
//! Writing `z = -ix` and `F` for the Cauchy integral of `log G̃`,
//!
//! ```text
//! φ₊(x) = Λ e^{iπ(1−α)} e^{F(z)} / (z + i)^{1−α}     Re x < 0
//! φ₋(x) = Λ e^{−iπ(1−α)} e^{F(z)} / (z − i)^{1−α}    Re x > 0
//! ```
//!
//! with principal powers. The unimodular factors `e^{±iπ(1−α)}` place both
//! functions on the determination for which `φ₊ = G φ₋` holds on the
//! imaginary axis with the principal logarithm of `G̃` fixed at `−∞`.

use core::f64::consts::PI;

use num_complex::Complex64;

use crate::cauchy::{CauchyQuadrature, QuadratureConfig};
use crate::kernel::{coefficient_g_complex, kernel_big_k, roots_y, LogGtildeTable};
use crate::math::{cpow, I};
use crate::model::{Geometry, WhitenedModel};
#[allow(unused_imports)]
use crate::prelude::*;
use crate::{Error, Result, Side};

/// `|Re x|` below which a point is treated as lying on the imaginary axis.
pub const AXIS_THRESHOLD: f64 = 1e-10;

/// Closed-form total masses `(φ₊(0), φ₋(0))` of the boundary measures.
///
/// They solve `φ₊ + φ₋ = −μ₂`, `r₊φ₊ + r₋φ₋ = −μ₁`.
pub fn boundary_masses(m: &WhitenedModel) -> (f64, f64) {
    let [mu1, mu2] = m.params.mu;
    let (rp, rm) = (m.params.r_plus, m.params.r_minus);
    let det = rm - rp;
    ((mu1 - mu2 * rm) / det, -(mu1 - mu2 * rp) / det)
}

#[derive(Debug, Clone)]
pub struct LateralTransformEngine {
    pub model: WhitenedModel,
    pub geometry: Geometry,
    pub lambda: Complex64,
    pub phi0_plus: f64,
    pub phi0_minus: f64,
    quad: CauchyQuadrature<LogGtildeTable>,
    cfg: QuadratureConfig,
    /// `e^{iπ(1−α)}`.
    rotation: Complex64,
}

/// Fixes `Λ` from the on-axis formula for `φ₊` at `t = 0` and checks that the
/// same constant reproduces `φ₋(0)`.
pub fn build_engine(
    m: &WhitenedModel,
    g: &Geometry,
    table: LogGtildeTable,
    cfg: &QuadratureConfig,
) -> Result<LateralTransformEngine> {
    cfg.check()?;
    let (phi0_plus, phi0_minus) = boundary_masses(m);
    let quad = CauchyQuadrature::new(table, cfg);
    let mut engine = LateralTransformEngine {
        model: *m,
        geometry: *g,
        lambda: Complex64::new(1.0, 0.0),
        phi0_plus,
        phi0_minus,
        quad,
        cfg: *cfg,
        rotation: Complex64::from_polar(1.0, PI * (1.0 - g.alpha)),
    };
    let pv0 = engine.quad.principal_value(0.0);
    let unit_plus = engine.axis_from_pv(Side::Plus, 0.0, pv0);
    engine.lambda = Complex64::new(phi0_plus, 0.0) / unit_plus;
    let minus = engine.axis_from_pv(Side::Minus, 0.0, pv0);
    let err = (minus - phi0_minus).norm() / phi0_minus;
    if !(err <= cfg.rel_tol) {
        return Err(Error::NormalizationMismatch { got: minus.re, expected: phi0_minus });
    }
    Ok(engine)
}

impl LateralTransformEngine {
    pub fn table(&self) -> &LogGtildeTable {
        self.quad.function()
    }

    pub fn quadrature(&self) -> &CauchyQuadrature<LogGtildeTable> {
        &self.quad
    }

    pub fn config(&self) -> &QuadratureConfig {
        &self.cfg
    }

    pub fn mass(&self, side: Side) -> f64 {
        match side {
            Side::Plus => self.phi0_plus,
            Side::Minus => self.phi0_minus,
        }
    }

    /// `φ_side(it)` given the principal value `(1/2iπ) p.v.∫ (log G̃(τ) − L∞)/(τ − t) dτ`.
    pub fn axis_from_pv(&self, side: Side, t: f64, pv: Complex64) -> Complex64 {
        let f = self.table().value_at(t);
        let e = 1.0 - self.geometry.alpha;
        match side {
            Side::Plus => {
                self.lambda * self.rotation * (f * 0.5 + pv).exp() / cpow(Complex64::new(t, 1.0), e)
            }
            Side::Minus => {
                self.lambda * self.rotation.conj() * (pv - f * 0.5).exp()
                    / cpow(Complex64::new(t, -1.0), e)
            }
        }
    }

    /// `φ_side(x)` given `F(z)` at `z = −ix` strictly inside the side's half-plane.
    pub fn offaxis_from_cauchy(&self, side: Side, x: Complex64, f: Complex64) -> Complex64 {
        let z = -I * x;
        let e = 1.0 - self.geometry.alpha;
        match side {
            Side::Plus => self.lambda * self.rotation * f.exp() / cpow(z + I, e),
            Side::Minus => self.lambda * self.rotation.conj() * f.exp() / cpow(z - I, e),
        }
    }

    /// Constant `A` of the large-`|x|` behaviour `φ₊(x) ~ A (−x)^{α−1}`,
    /// `φ₋(x) ~ A x^{α−1}`.
    pub fn asymptotic_constant(&self, side: Side) -> Complex64 {
        let half = Complex64::from_polar(1.0, 0.5 * PI * (1.0 - self.geometry.alpha));
        let l = self.table().limit_value * 0.5;
        match side {
            Side::Plus => self.lambda * half * l.exp(),
            Side::Minus => self.lambda * half.conj() * (-l).exp(),
        }
    }

    /// `φ_side(x)` on its closed half-plane (`Re x ≤ 0` for `+`, `Re x ≥ 0` for `−`).
    pub fn phi(&self, side: Side, x: Complex64) -> Result<Complex64> {
        if x.re.abs() < AXIS_THRESHOLD {
            let t = x.im;
            return Ok(self.axis_from_pv(side, t, self.quad.principal_value(t)));
        }
        if x.re * side.sign() > 0.0 {
            return Err(Error::WrongHalfPlane { re: x.re, im: x.im });
        }
        let f = self.quad.offaxis(-I * x)?;
        Ok(self.offaxis_from_cauchy(side, x, f))
    }

    /// `φ_side(x)` continued across the imaginary axis into the strip
    /// `0 < side·Re x < γ` through `φ₊ = G(−ix) φ₋`.
    pub fn phi_continued(&self, side: Side, x: Complex64) -> Result<Complex64> {
        if x.re * side.sign() <= 0.0 || x.re.abs() < AXIS_THRESHOLD {
            return self.phi(side, x);
        }
        let other = self.phi(side.opposite(), x)?;
        let g = coefficient_g_complex(&self.model, -I * x);
        Ok(match side {
            Side::Plus => g * other,
            Side::Minus => other / g,
        })
    }

    /// `φ(x, y) = −[k₊φ₊(x) + k₋φ₋(x)]/K(x, y)` for `x` on the imaginary axis.
    ///
    /// Near the root `y = Y⁻(x)` the numerator and `K` vanish together; there
    /// the factored form `2(φ₊ + φ₋)/(Y⁺ − y)` is used.
    pub fn phi_bivariate(&self, x: Complex64, y: Complex64) -> Result<Complex64> {
        if x.re.abs() >= AXIS_THRESHOLD {
            return Err(Error::WrongHalfPlane { re: x.re, im: x.im });
        }
        let t = x.im;
        let x = Complex64::new(0.0, t);
        let pv = self.quad.principal_value(t);
        let pp = self.axis_from_pv(Side::Plus, t, pv);
        let pm = self.axis_from_pv(Side::Minus, t, pv);
        let (y_minus, y_plus) = roots_y(&self.model, x);
        if (y_plus - y).norm() < 1e-12 * (1.0 + y.norm()) {
            return Err(Error::KernelZero);
        }
        if (y - y_minus).norm() < 1e-6 * (1.0 + y.norm()) {
            return Ok((pp + pm) * 2.0 / (y_plus - y));
        }
        let k = kernel_big_k(&self.model, x, y);
        let num = (x * self.model.params.r_plus + y) * pp + (x * self.model.params.r_minus + y) * pm;
        Ok(-num / k)
    }

    /// Fourier transform in `u` of `π(·, v)` at frequency `t`:
    /// `2(φ₊ + φ₋)(it) e^{−Y⁺(it) v}`.
    pub fn partial_transform(&self, t: f64, v: f64) -> Complex64 {
        let pv = self.quad.principal_value(t);
        self.partial_from_pv(t, v, pv)
    }

    pub fn partial_from_pv(&self, t: f64, v: f64, pv: Complex64) -> Complex64 {
        let sum = self.axis_from_pv(Side::Plus, t, pv) + self.axis_from_pv(Side::Minus, t, pv);
        let (_, y_plus) = roots_y(&self.model, Complex64::new(0.0, t));
        sum * 2.0 * (-y_plus * v).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{build_log_table, coefficient_g};
    use crate::model::{geometry, whiten, ModelParams};

    fn engine(p: ModelParams) -> LateralTransformEngine {
        let m = whiten(p).unwrap();
        let g = geometry(&m);
        let cfg = QuadratureConfig::default();
        let table = build_log_table(&m, &g, &cfg).unwrap();
        build_engine(&m, &g, table, &cfg).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn masses_examples() {
        let m = whiten(ModelParams::symmetric()).unwrap();
        assert_eq!(boundary_masses(&m), (0.5, 0.5));
        let m = whiten(ModelParams::standard([0.3, -1.2], -2.0, 0.7)).unwrap();
        let (p, q) = boundary_masses(&m);
        assert!((p + q - 1.2).abs() < 1e-14);
        assert!((-2.0 * p + 0.7 * q + 0.3).abs() < 1e-14);
    }

    #[test]
    fn symmetric_transforms() {
        let e = engine(ModelParams::symmetric());
        assert!((e.lambda - c(0.5, 0.0)).norm() < 1e-10);
        let exact = |s: Side, x: Complex64| (c(1.0, 0.0) - x * s.sign()).sqrt().inv() * 0.5;
        assert!((e.phi(Side::Plus, c(-3.0, 0.0)).unwrap() - c(0.25, 0.0)).norm() < 1e-10);
        for t in [-20.0, -1.0, 0.0, 0.4, 7.0] {
            for s in Side::BOTH {
                let x = c(0.0, t);
                assert!((e.phi(s, x).unwrap() - exact(s, x)).norm() < 1e-10);
            }
        }
        for x in [c(0.5, 2.0), c(3.0, -0.1)] {
            assert!((e.phi(Side::Minus, x).unwrap() - exact(Side::Minus, x)).norm() < 1e-10);
            assert!((e.phi(Side::Plus, -x).unwrap() - exact(Side::Plus, -x)).norm() < 1e-10);
            assert!(matches!(e.phi(Side::Plus, x), Err(Error::WrongHalfPlane { .. })));
        }
        let cont = e.phi_continued(Side::Plus, c(0.5, 1.0)).unwrap();
        assert!((cont - exact(Side::Plus, c(0.5, 1.0))).norm() < 1e-10);
        assert!((e.asymptotic_constant(Side::Plus) - c(0.5, 0.0)).norm() < 1e-10);
        assert!((e.asymptotic_constant(Side::Minus) - c(0.5, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn symmetric_bivariate_and_partial() {
        let e = engine(ModelParams::symmetric());
        assert!((e.phi_bivariate(c(0.0, 0.0), c(0.0, 0.0)).unwrap() - 1.0).norm() < 1e-12);
        assert!((e.phi_bivariate(c(0.0, 0.0), c(-1.0, 0.0)).unwrap() - 2.0 / 3.0).norm() < 1e-12);
        let x = c(0.0, 1.5);
        let y = c(-0.3, 2.0);
        let one = c(1.0, 0.0);
        let exact = ((one - x).sqrt().inv() + (one + x).sqrt().inv()) / (one + (one - x * x).sqrt() - y);
        assert!((e.phi_bivariate(x, y).unwrap() - exact).norm() < 1e-10);
        assert!((e.partial_transform(0.0, 0.7) - c(2.0 * (-1.4f64).exp(), 0.0)).norm() < 1e-12);
        let t: f64 = 2.5;
        let v = 0.3;
        let exact = ((one - I * t).sqrt().inv() + (one + I * t).sqrt().inv())
            * (-v * (1.0 + (1.0 + t * t).sqrt())).exp();
        assert!((e.partial_transform(t, v) - exact).norm() < 1e-10);
    }

    #[test]
    fn generic_model_consistency() {
        let e = engine(ModelParams::standard([0.3, -1.0], -1.5, 0.8));
        // Normalisation on both sides.
        assert!((e.phi(Side::Plus, c(0.0, 0.0)).unwrap() - e.phi0_plus).norm() < 1e-12);
        assert!((e.phi(Side::Minus, c(0.0, 0.0)).unwrap() - e.phi0_minus).norm() < 1e-9);
        assert!(e.lambda.im.abs() < 1e-10);
        for t in [-50.0, -2.0, 0.3, 9.0] {
            let x = c(0.0, t);
            let pp = e.phi(Side::Plus, x).unwrap();
            let pm = e.phi(Side::Minus, x).unwrap();
            assert!((pp - coefficient_g(&e.model, t) * pm).norm() < 1e-9 * pp.norm());
            // Hermitian symmetry.
            assert!((e.phi(Side::Plus, x.conj()).unwrap() - pp.conj()).norm() < 1e-9);
            // Off-axis values approach the on-axis formula.
            let near = e.phi(Side::Plus, c(-1e-7, t)).unwrap();
            assert!((near - pp).norm() < 1e-5 * pp.norm());
            let near = e.phi(Side::Minus, c(1e-7, t)).unwrap();
            assert!((near - pm).norm() < 1e-5 * pm.norm());
        }
        assert!((e.phi_bivariate(c(0.0, 0.0), c(0.0, 0.0)).unwrap() - 1.0).norm() < 1e-9);
        // φ(0, y) is the transform of the exponential vertical marginal.
        let y = c(-0.4, 0.0);
        let mu2 = e.model.mu2();
        let expected = (e.phi0_plus + e.phi0_minus) / -(y * 0.5 + mu2);
        assert!((e.phi_bivariate(c(0.0, 0.0), y).unwrap() - expected).norm() < 1e-9);
        // Large-|x| behaviour.
        let x = c(-1e6, 3e5);
        let ratio = e.phi(Side::Plus, x).unwrap() / cpow(-x, e.geometry.alpha - 1.0);
        assert!((ratio - e.asymptotic_constant(Side::Plus)).norm() < 1e-3);
        let x = c(2e5, -8e5);
        let ratio = e.phi(Side::Minus, x).unwrap() / cpow(x, e.geometry.alpha - 1.0);
        assert!((ratio - e.asymptotic_constant(Side::Minus)).norm() < 1e-3);
    }
}
