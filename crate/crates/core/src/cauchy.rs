//! Cauchy-type integrals `F(z) = (1/2iπ) ∫ f(τ)/(τ − z) dτ` of a boundary
//! function on the real line, and their principal-value boundary limits.
//!
//! The boundary function `f` tends to a common constant `L∞` at `±∞`, so the
//! integral over `ℝ` only exists as a symmetric limit at infinity. Splitting
//! `f = L∞ + h` with `h = O(1/τ)` gives
//!
//! ```text
//! F(z) = sgn(Im z) · L∞/2 + (1/2iπ) ∫ h(τ)/(τ − z) dτ
//! ```
//!
//! with an absolutely convergent remainder. Near-singular and singular
//! evaluations use the subtraction `h(τ) − h(Re z)` on the truncated line plus
//! the closed-form integral of `1/(τ − z)`; the two half-lines beyond the
//! truncation are mapped onto `(0, 1]` by `τ = ±T/w`.

use core::f64::consts::PI;

use num_complex::Complex64;

use crate::kernel::LogGtildeTable;
use crate::math::{graded_breakpoints, GaussLegendre, I};
#[allow(unused_imports)]
use crate::prelude::*;
use crate::{Error, Result};

/// Nodes per panel on the truncated line.
const PANEL_ORDER: usize = 8;
/// Nodes per panel on the mapped tails.
const TAIL_ORDER: usize = 20;

/// Grid, truncation and tolerances shared by every line integral.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuadratureConfig {
    /// Number of grid intervals on `[-T, T]` (rounded up to even).
    pub n_points: usize,
    /// Truncation `T` of the explicitly sampled part of the line.
    pub truncation: f64,
    /// Distances below this are treated as on the real axis: `cauchy_offaxis`
    /// refuses `|Im z| < pv_window` and the principal value switches to a
    /// derivative within `pv_window · (1 + |t|)` of the singular point.
    pub pv_window: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Accepted `|log G̃(±T) − L∞|` for a table build.
    pub tail_tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            n_points: 4096,
            truncation: 1e4,
            pv_window: 1e-9,
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            tail_tol: 1e-2,
        }
    }
}

impl QuadratureConfig {
    pub fn check(&self) -> Result<()> {
        if self.n_points < 64 {
            return Err(Error::InvalidConfig("n_points must be at least 64"));
        }
        if !(self.truncation >= 1e2) {
            return Err(Error::InvalidConfig("truncation must be at least 1e2"));
        }
        let tols = [self.pv_window, self.abs_tol, self.rel_tol, self.tail_tol];
        if tols.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::InvalidConfig("tolerances must be positive"));
        }
        Ok(())
    }
}

/// A function on the real line with a common limit at `±∞`.
pub trait BoundaryFunction {
    fn value(&self, t: f64) -> Complex64;
    fn limit(&self) -> Complex64;
    /// Increasing panel breakpoints covering `[-T, T]`, symmetric about 0 and
    /// fine enough that `value` is smooth on each panel.
    fn breakpoints(&self) -> &[f64];
}

impl BoundaryFunction for LogGtildeTable {
    fn value(&self, t: f64) -> Complex64 {
        self.value_at(t)
    }

    fn limit(&self) -> Complex64 {
        self.limit_value
    }

    fn breakpoints(&self) -> &[f64] {
        &self.grid
    }
}

impl<F: BoundaryFunction + ?Sized> BoundaryFunction for &F {
    fn value(&self, t: f64) -> Complex64 {
        (**self).value(t)
    }

    fn limit(&self) -> Complex64 {
        (**self).limit()
    }

    fn breakpoints(&self) -> &[f64] {
        (**self).breakpoints()
    }
}

/// Symmetric sinh-graded breakpoints `a sinh(ξ)` over `[-T, T]`, `n` intervals
/// (rounded up to even so that 0 is included).
pub fn sinh_breakpoints(scale: f64, truncation: f64, n: usize) -> Vec<f64> {
    let half = n.div_ceil(2).max(1);
    let xi_max = (truncation / scale).asinh();
    let step = xi_max / half as f64;
    (0..=2 * half)
        .map(|i| {
            let k = i as isize - half as isize;
            match k {
                0 => 0.0,
                k if k.unsigned_abs() == half => truncation * k.signum() as f64,
                k => scale * (k as f64 * step).sinh(),
            }
        })
        .collect()
}

/// Composite Gauss–Legendre evaluator with `h = f − L∞` cached at the nodes.
#[derive(Debug, Clone)]
pub struct CauchyQuadrature<F> {
    function: F,
    breaks: Vec<f64>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    centered: Vec<Complex64>,
    tail_w: Vec<f64>,
    tail_weights: Vec<f64>,
    tail_plus: Vec<Complex64>,
    tail_minus: Vec<Complex64>,
    gl: GaussLegendre,
    tail_gl: GaussLegendre,
    limit: Complex64,
    truncation: f64,
    pv_window: f64,
}

impl<F: BoundaryFunction> CauchyQuadrature<F> {
    pub fn new(function: F, cfg: &QuadratureConfig) -> Self {
        let gl = GaussLegendre::new(PANEL_ORDER);
        let tail_gl = GaussLegendre::new(TAIL_ORDER);
        let limit = function.limit();
        let breaks = function.breakpoints().to_vec();
        let truncation = *breaks.last().expect("at least one panel");
        let mut nodes = Vec::with_capacity(PANEL_ORDER * breaks.len());
        let mut weights = Vec::with_capacity(nodes.capacity());
        for p in breaks.windows(2) {
            for (x, w) in gl.mapped(p[0], p[1]) {
                nodes.push(x);
                weights.push(w);
            }
        }
        let centered = nodes.iter().map(|&x| function.value(x) - limit).collect();
        let mut tail_w = Vec::new();
        let mut tail_weights = Vec::new();
        for (a, b) in [(0.0, 0.3), (0.3, 1.0)] {
            for (x, w) in tail_gl.mapped(a, b) {
                tail_w.push(x);
                tail_weights.push(w);
            }
        }
        let tail_plus = tail_w
            .iter()
            .map(|&w| function.value(truncation / w) - limit)
            .collect();
        let tail_minus = tail_w
            .iter()
            .map(|&w| function.value(-truncation / w) - limit)
            .collect();
        CauchyQuadrature {
            function,
            breaks,
            nodes,
            weights,
            centered,
            tail_w,
            tail_weights,
            tail_plus,
            tail_minus,
            gl,
            tail_gl,
            limit,
            truncation,
            pv_window: cfg.pv_window,
        }
    }

    pub fn function(&self) -> &F {
        &self.function
    }

    pub fn limit(&self) -> Complex64 {
        self.limit
    }

    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    fn centered(&self, t: f64) -> Complex64 {
        self.function.value(t) - self.limit
    }

    /// `F(z)` for `Im z ≠ 0`.
    pub fn offaxis(&self, z: Complex64) -> Result<Complex64> {
        if !(z.im.abs() >= self.pv_window) {
            return Err(Error::OnRealAxis(z.im));
        }
        let total = self.integral(z);
        Ok(self.limit * (0.5 * z.im.signum()) + total / (2.0 * PI * I))
    }

    /// `(1/2iπ) p.v. ∫ f(τ)/(τ − t) dτ`, symmetric at `t` and at infinity.
    pub fn principal_value(&self, t: f64) -> Complex64 {
        self.integral(Complex64::new(t, 0.0)) / (2.0 * PI * I)
    }

    /// `∫ h(τ)/(τ − z) dτ` (principal value when `z` is real).
    fn integral(&self, z: Complex64) -> Complex64 {
        let t0 = z.re;
        let delta = z.im.abs();
        let on_axis = z.im == 0.0;
        let base_t = self.truncation;
        // Move the truncation out when the evaluation point is close to it.
        let outer = if t0.abs() < 0.5 * base_t {
            base_t
        } else {
            2.0 * t0.abs() + base_t
        };
        let sub = self.centered(t0);
        let near_window = 2.0;

        let mut total = Complex64::new(0.0, 0.0);
        let slope = if on_axis { Some(self.slope(t0)) } else { None };
        let term = |tau: f64, h: Complex64| -> Complex64 {
            let d = tau - t0;
            if on_axis {
                if d.abs() < self.pv_window * (1.0 + t0.abs()) {
                    slope.unwrap()
                } else {
                    (h - sub) / d
                }
            } else {
                (h - sub) / (Complex64::new(d, 0.0) - I * z.im)
            }
        };

        for (k, p) in self.breaks.windows(2).enumerate() {
            let (a, b) = (p[0], p[1]);
            let width = b - a;
            let dist = if t0 < a {
                a - t0
            } else if t0 > b {
                t0 - b
            } else {
                0.0
            };
            if !on_axis && delta < width && dist < near_window * width {
                total += self.refined_panel(a, b, z, sub);
                continue;
            }
            let r = k * PANEL_ORDER..(k + 1) * PANEL_ORDER;
            for ((&tau, &w), &h) in self.nodes[r.clone()]
                .iter()
                .zip(&self.weights[r.clone()])
                .zip(&self.centered[r])
            {
                total += term(tau, h) * w;
            }
        }

        if outer > base_t {
            let ext = graded_breakpoints(base_t, outer, 1.0, 0.1, f64::INFINITY);
            for side in [1.0, -1.0] {
                for p in ext.windows(2) {
                    let (a, b) = if side > 0.0 {
                        (p[0], p[1])
                    } else {
                        (-p[1], -p[0])
                    };
                    let width = b - a;
                    let dist = if t0 < a {
                        a - t0
                    } else if t0 > b {
                        t0 - b
                    } else {
                        0.0
                    };
                    if !on_axis && delta < width && dist < near_window * width {
                        total += self.refined_panel(a, b, z, sub);
                    } else {
                        total += self
                            .gl
                            .integrate_complex(a, b, |tau| term(tau, self.centered(tau)));
                    }
                }
            }
        }

        // ∫_{-T'}^{T'} dτ/(τ − z): logarithms stay on one side of their cut.
        let log_part = if on_axis {
            Complex64::new(((outer - t0) / (outer + t0)).ln(), 0.0)
        } else {
            (Complex64::new(outer, 0.0) - z).ln() - (Complex64::new(-outer, 0.0) - z).ln()
        };
        total += sub * log_part;
        total += self.tails(outer, z);
        total
    }

    /// `∫_{|τ|>T'} h(τ)/(τ − z) dτ` via `τ = ±T'/w`.
    fn tails(&self, outer: f64, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        if outer == self.truncation {
            for (((&w, &wt), &hp), &hm) in self
                .tail_w
                .iter()
                .zip(&self.tail_weights)
                .zip(&self.tail_plus)
                .zip(&self.tail_minus)
            {
                acc += hp * outer / ((Complex64::new(outer, 0.0) - z * w) * w) * wt;
                acc -= hm * outer / ((Complex64::new(outer, 0.0) + z * w) * w) * wt;
            }
        } else {
            for (a, b) in [(0.0, 0.3), (0.3, 1.0)] {
                acc += self.tail_gl.integrate_complex(a, b, |w| {
                    let hp = self.centered(outer / w);
                    let hm = self.centered(-outer / w);
                    hp * outer / ((Complex64::new(outer, 0.0) - z * w) * w)
                        - hm * outer / ((Complex64::new(outer, 0.0) + z * w) * w)
                });
            }
        }
        acc
    }

    /// Panel integral of `(h(τ) − h(t₀))/(τ − z)` with breakpoints graded
    /// geometrically towards `t₀ = Re z` down to the scale `|Im z|`.
    fn refined_panel(&self, a: f64, b: f64, z: Complex64, sub: Complex64) -> Complex64 {
        let t0 = z.re;
        let delta = z.im.abs();
        let mut pts: Vec<f64> = vec![a, b];
        if t0 > a && t0 < b {
            pts.push(t0);
        }
        let mut d = 0.25 * delta;
        while d < (b - a) + (t0 - a).abs() + (b - t0).abs() {
            for p in [t0 - d, t0 + d] {
                if p > a && p < b {
                    pts.push(p);
                }
            }
            d *= 2.0;
        }
        pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        pts.dedup();
        let mut acc = Complex64::new(0.0, 0.0);
        for p in pts.windows(2) {
            acc += self.gl.integrate_complex(p[0], p[1], |tau| {
                (self.centered(tau) - sub) / (Complex64::new(tau, 0.0) - z)
            });
        }
        acc
    }

    fn slope(&self, t: f64) -> Complex64 {
        let eta = 1e-5 * (1.0 + t.abs());
        (self.function.value(t + eta) - self.function.value(t - eta)) / (2.0 * eta)
    }
}

/// `F(z)` for the log-coefficient table (see [`CauchyQuadrature::offaxis`]).
pub fn cauchy_offaxis(
    table: &LogGtildeTable,
    z: Complex64,
    cfg: &QuadratureConfig,
) -> Result<Complex64> {
    CauchyQuadrature::new(table, cfg).offaxis(z)
}

/// `(1/2iπ) p.v. ∫ log G̃(τ)/(τ − t) dτ` for the log-coefficient table.
pub fn cauchy_pv(table: &LogGtildeTable, t: f64, cfg: &QuadratureConfig) -> Complex64 {
    CauchyQuadrature::new(table, cfg).principal_value(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Test function with explicit breakpoints.
    struct Sampled<G: Fn(f64) -> Complex64> {
        f: G,
        limit: Complex64,
        breaks: Vec<f64>,
    }

    impl<G: Fn(f64) -> Complex64> BoundaryFunction for Sampled<G> {
        fn value(&self, t: f64) -> Complex64 {
            (self.f)(t)
        }
        fn limit(&self) -> Complex64 {
            self.limit
        }
        fn breakpoints(&self) -> &[f64] {
            &self.breaks
        }
    }

    fn sampled<G: Fn(f64) -> Complex64>(f: G, limit: Complex64) -> Sampled<G> {
        Sampled { f, limit, breaks: sinh_breakpoints(0.5, 1e4, 2048) }
    }

    #[test]
    fn constant_function() {
        let c = Complex64::new(0.3, -1.1);
        let q = CauchyQuadrature::new(sampled(move |_| c, c), &QuadratureConfig::default());
        for z in [Complex64::new(0.2, 1.0), Complex64::new(-3.0, 1e-4), Complex64::new(1e6, 2.0)] {
            assert!((q.offaxis(z).unwrap() - c * 0.5).norm() < 1e-14);
            assert!((q.offaxis(z.conj()).unwrap() + c * 0.5).norm() < 1e-14);
        }
        assert!(q.principal_value(0.7).norm() < 1e-14);
        let sym = Complex64::new(0.0, -0.5 * PI);
        let q = CauchyQuadrature::new(sampled(move |_| sym, sym), &QuadratureConfig::default());
        let v = q.offaxis(I).unwrap();
        assert!((v - Complex64::new(0.0, -0.25 * PI)).norm() < 1e-14);
    }

    #[test]
    fn rejects_real_axis() {
        let q = CauchyQuadrature::new(
            sampled(|_| Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)),
            &QuadratureConfig::default(),
        );
        assert!(matches!(q.offaxis(Complex64::new(1.0, 0.0)), Err(Error::OnRealAxis(_))));
    }

    #[test]
    fn upper_analytic_function_reproduces_itself() {
        // f(τ) = 1/(τ + 2i) is analytic in the upper half-plane and vanishes at
        // infinity: F = f above the line and 0 below.
        let f = |t: f64| Complex64::new(1.0, 0.0) / Complex64::new(t, 2.0);
        let q = CauchyQuadrature::new(sampled(f, Complex64::new(0.0, 0.0)), &QuadratureConfig::default());
        for z in [
            Complex64::new(0.0, 1.0),
            Complex64::new(3.0, 0.01),
            Complex64::new(-50.0, 5.0),
            Complex64::new(0.3, 1e-6),
        ] {
            let expected = Complex64::new(1.0, 0.0) / (z + 2.0 * I);
            let got = q.offaxis(z).unwrap();
            assert!((got - expected).norm() < 1e-9, "z={z} got={got} expected={expected}");
            assert!(q.offaxis(z.conj()).unwrap().norm() < 1e-9);
        }
        // Boundary values: F₊ = f, F₋ = 0, so the principal-value term is f/2.
        for t in [-7.0, -0.2, 0.0, 1.3, 40.0] {
            let pv = q.principal_value(t);
            assert!((pv - f(t) * 0.5).norm() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn odd_hilbert_value_vanishes() {
        let f = |t: f64| Complex64::new(1.0 / (1.0 + t * t), 0.0);
        let q = CauchyQuadrature::new(sampled(f, Complex64::new(0.0, 0.0)), &QuadratureConfig::default());
        assert!(q.principal_value(0.0).norm() < 1e-13);
        // Hilbert transform of the Lorentzian: p.v.∫ 1/((1+τ²)(τ−t)) dτ = -π t/(1+t²).
        for t in [0.5, 2.0, -9.0] {
            let expected = Complex64::new(-PI * t / (1.0 + t * t), 0.0) / (2.0 * PI * I);
            assert!((q.principal_value(t) - expected).norm() < 1e-10);
        }
    }

    #[test]
    fn far_evaluation_near_truncation() {
        let f = |t: f64| Complex64::new(1.0, 0.0) / Complex64::new(t, 2.0);
        let q = CauchyQuadrature::new(sampled(f, Complex64::new(0.0, 0.0)), &QuadratureConfig::default());
        for z in [Complex64::new(9e3, 0.5), Complex64::new(-2e5, 3.0), Complex64::new(1e4, 1e-3)] {
            let expected = Complex64::new(1.0, 0.0) / (z + 2.0 * I);
            assert!((q.offaxis(z).unwrap() - expected).norm() < 1e-11 * (1.0 + 1.0 / expected.norm()));
        }
        let t = 3e4;
        assert!((q.principal_value(t) - f(t) * 0.5).norm() < 1e-10);
    }

    #[test]
    fn config_check() {
        assert!(QuadratureConfig::default().check().is_ok());
        let bad = QuadratureConfig { n_points: 10, ..Default::default() };
        assert!(bad.check().is_err());
        let bad = QuadratureConfig { truncation: 10.0, ..Default::default() };
        assert!(bad.check().is_err());
        let bad = QuadratureConfig { abs_tol: 0.0, ..Default::default() };
        assert!(bad.check().is_err());
    }
}
