//! Fourier inversion of the transforms: boundary densities `π±`, the interior
//! density `π(u, v)`, the vertical marginal and the closed form of the
//! symmetric instance.
//!
//! The interior density at height `v > 0` is
//! `π(u, v) = (1/π) Re ∫₀^∞ 2(φ₊ + φ₋)(it) e^{−Y⁺(it) v} e^{−itu} dt`; the
//! factor `e^{−Y⁺ v}` makes the integrand decay exponentially.
//!
//! The boundary densities decay only like `|t|^{α−1}` on the imaginary axis and
//! are exponentially small for large `|u|`, so they are inverted on a shifted
//! line `Re x = ±c` (with `0 < c < γ`), after subtracting the transform of
//! `A |u|^{−α} e^{−β|u|}/Γ(1 − α)` which carries the slow decay. On the
//! shifted line `φ₊ = G(−ix) φ₋` (respectively `φ₋ = φ₊/G`) continues the
//! transform across the imaginary axis.

use core::f64::consts::PI;

use num_complex::Complex64;

use crate::asymptotics::tail_report;
use crate::kernel::{coefficient_g_complex, LogGtildeTable};
use crate::laplace::LateralTransformEngine;
use crate::math::{cpow, gamma, graded_breakpoints, lagrange4, GaussLegendre, I};
#[allow(unused_imports)]
use crate::prelude::*;
use crate::{Error, Result, Side};

/// Nodes per panel of the inversion integrals.
const ORDER: usize = 8;
/// Shifted line at `c = SHIFT · γ`.
const SHIFT: f64 = 0.7;
/// Values in `[-NEGATIVE_TOL, 0)` are rounding noise and clamped to zero.
pub const NEGATIVE_TOL: f64 = 1e-8;

/// Four-point interpolation of samples on the table's sinh grid.
fn interpolate(table: &LogGtildeTable, values: &[Complex64], t: f64) -> Complex64 {
    let n = values.len() - 1;
    let half = (n / 2) as f64;
    let pos = (t / table.scale()).asinh() / table.xi_step() + half;
    let k = (pos.floor() as isize).clamp(1, n as isize - 2) as usize;
    let s = pos - k as f64;
    lagrange4([values[k - 1], values[k], values[k + 1], values[k + 2]], s)
}

/// Transform values on the line `Re x = sign · shift`.
#[derive(Debug, Clone)]
struct BoundaryLine {
    shift: f64,
    gamma: f64,
    /// `F` at `z = t − i·sign·shift` on the table grid.
    cauchy: Vec<Complex64>,
    asymptotic: Complex64,
}

/// Evaluates the inversion integrals of one engine.
#[derive(Debug, Clone)]
pub struct Inverter<'a> {
    engine: &'a LateralTransformEngine,
    pv: Vec<Complex64>,
    lines: [Option<BoundaryLine>; 2],
    gl: GaussLegendre,
}

impl<'a> Inverter<'a> {
    /// Tabulates the principal-value integral on the table grid (interior
    /// density and on-axis transforms only).
    pub fn new(engine: &'a LateralTransformEngine) -> Self {
        let table = engine.table();
        let quad = engine.quadrature();
        let n = table.grid.len() - 1;
        let half = n / 2;
        let mut pv = vec![Complex64::new(0.0, 0.0); n + 1];
        // p.v.(−t) = conj p.v.(t): G(−t) = conj G(t) and the phase of ε_α is odd
        // about its value at 0.
        for i in half..=n {
            pv[i] = quad.principal_value(table.grid[i]);
            pv[n - i] = pv[i].conj();
        }
        Inverter { engine, pv, lines: [None, None], gl: GaussLegendre::new(ORDER) }
    }

    /// Also tabulates the Cauchy integral on both shifted lines, enabling the
    /// boundary densities.
    pub fn with_boundaries(engine: &'a LateralTransformEngine) -> Result<Self> {
        let mut inv = Inverter::new(engine);
        for side in Side::BOTH {
            inv.lines[side_index(side)] = Some(inv.build_line(side, SHIFT)?);
        }
        Ok(inv)
    }

    pub fn engine(&self) -> &LateralTransformEngine {
        self.engine
    }

    /// Boundary inversion on the line `Re x = ±ratio·γ` (`0 < ratio < 1`).
    pub fn with_boundary_shift(engine: &'a LateralTransformEngine, ratio: f64) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::InvalidConfig("shift ratio must lie in (0, 1)"));
        }
        let mut inv = Inverter::new(engine);
        for side in Side::BOTH {
            inv.lines[side_index(side)] = Some(inv.build_line(side, ratio)?);
        }
        Ok(inv)
    }

    fn build_line(&self, side: Side, ratio: f64) -> Result<BoundaryLine> {
        let e = self.engine;
        let report = tail_report(&e.model, &e.geometry, side);
        let shift = ratio * report.gamma;
        let quad = e.quadrature();
        let im = -side.sign() * shift;
        let cauchy = e
            .table()
            .grid
            .iter()
            .map(|&t| quad.offaxis(Complex64::new(t, im)))
            .collect::<Result<Vec<_>>>()?;
        Ok(BoundaryLine {
            shift,
            gamma: report.gamma,
            cauchy,
            asymptotic: e.asymptotic_constant(side),
        })
    }

    /// `(1/2iπ) p.v.∫ (log G̃(τ) − L∞)/(τ − t) dτ`.
    pub fn principal_value(&self, t: f64) -> Complex64 {
        if t.abs() <= self.engine.table().truncation() {
            interpolate(self.engine.table(), &self.pv, t)
        } else {
            self.engine.quadrature().principal_value(t)
        }
    }

    /// `φ_side(it)`.
    pub fn phi_axis(&self, side: Side, t: f64) -> Complex64 {
        self.engine.axis_from_pv(side, t, self.principal_value(t))
    }

    pub fn partial_transform(&self, t: f64, v: f64) -> Complex64 {
        self.engine.partial_from_pv(t, v, self.principal_value(t))
    }

    /// `φ_side(sign·c + it)` on the side's shifted line.
    fn phi_line(&self, side: Side, line: &BoundaryLine, t: f64) -> Result<Complex64> {
        let e = self.engine;
        let table = e.table();
        let im = -side.sign() * line.shift;
        let f = if t.abs() <= table.truncation() {
            interpolate(table, &line.cauchy, t)
        } else {
            e.quadrature().offaxis(Complex64::new(t, im))?
        };
        let x = Complex64::new(side.sign() * line.shift, t);
        let other = e.offaxis_from_cauchy(side.opposite(), x, f);
        let g = coefficient_g_complex(&e.model, Complex64::new(t, im));
        Ok(match side {
            Side::Plus => g * other,
            Side::Minus => other / g,
        })
    }

    /// Shifted-line integrand with the slowly decaying part removed.
    fn remainder(&self, side: Side, line: &BoundaryLine, t: f64) -> Result<Complex64> {
        let alpha = self.engine.geometry.alpha;
        let slow = line.asymptotic * cpow(Complex64::new(1.0, -side.sign() * t), alpha - 1.0);
        Ok(self.phi_line(side, line, t)? - slow)
    }

    /// `π_side(u)` for each `u` (all of the side's sign).
    pub fn boundary_row(&self, side: Side, us: &[f64]) -> Result<Vec<f64>> {
        let line = self.lines[side_index(side)]
            .as_ref()
            .ok_or(Error::InvalidConfig("boundary lines not tabulated"))?;
        if us.is_empty() {
            return Ok(Vec::new());
        }
        for &u in us {
            if !(u * side.sign() > 0.0) {
                return Err(Error::DomainMismatch(u));
            }
        }
        let (lo, hi) = us
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), u| (lo.min(u.abs()), hi.max(u.abs())));
        let truncation = (200.0 / lo).clamp(1e3, 0.5 * self.engine.table().truncation());
        let min_width = 0.25 * (line.gamma - line.shift).min(1.0);
        let max_width = (0.5 * PI / hi).min(2.0);
        let breaks = graded_breakpoints(0.0, truncation, min_width, 0.15, max_width);
        let mut nodes = Vec::with_capacity(ORDER * breaks.len());
        for p in breaks.windows(2) {
            for (t, w) in self.gl.mapped(p[0], p[1]) {
                nodes.push((t, self.remainder(side, line, t)? * w));
            }
        }
        let r_end = self.remainder(side, line, truncation)?;
        let h = 1e-3 * truncation;
        let dr_end = (self.remainder(side, line, truncation + h)?
            - self.remainder(side, line, truncation - h)?)
            / (2.0 * h);

        let alpha = self.engine.geometry.alpha;
        let a = line.asymptotic;
        let beta = line.shift + 1.0;
        let g1 = gamma(1.0 - alpha);
        Ok(us
            .iter()
            .map(|&u| {
                let ua = u.abs();
                // Frequency of e^{−iωt}: the minus side inverts at +|u|.
                let omega = side.sign() * ua;
                let mut acc = Complex64::new(0.0, 0.0);
                for &(t, rw) in &nodes {
                    acc += rw * Complex64::from_polar(1.0, -omega * t);
                }
                let z = ua * truncation;
                if z >= 20.0 {
                    let io = I * omega;
                    acc += Complex64::from_polar(1.0, -omega * truncation) * (r_end / io + dr_end / (io * io));
                } else {
                    // Few oscillations left beyond T: integrate the t^{α−2} decay of the remainder exactly.
                    let tail = self.power_tail(z, 2.0 - alpha);
                    let tail = if omega < 0.0 { tail.conj() } else { tail };
                    acc += r_end * truncation * tail;
                }
                let singular = (a * ua.powf(-alpha) * (-beta * ua).exp() / g1).re;
                singular + (-line.shift * ua).exp() / PI * acc.re
            })
            .collect())
    }

    /// `π_side(u)`; `u` must have the side's sign.
    pub fn boundary_density(&self, side: Side, u: f64) -> Result<f64> {
        let raw = self.boundary_row(side, &[u])?[0];
        clamp(u, 0.0, raw)
    }

    /// `∫₁^∞ s^{−p} e^{−izs} ds` for `z > 0`, `p > 1`, along `s = 1 − iσ`.
    fn power_tail(&self, z: f64, p: f64) -> Complex64 {
        let end = 50.0 / z;
        let mut sum = Complex64::new(0.0, 0.0);
        let (mut a, mut b) = (0.0, 0.05f64.min(end));
        while a < end {
            for (sigma, w) in self.gl.mapped(a, b) {
                sum += cpow(Complex64::new(1.0, -sigma), -p) * ((-z * sigma).exp() * w);
            }
            a = b;
            b = (b * 1.3).min(end);
        }
        -I * Complex64::from_polar(1.0, -z) * sum
    }

    /// `π(u, 0) = 2 π_{sign u}(u)`.
    pub fn boundary_line_density(&self, u: f64) -> Result<f64> {
        if u == 0.0 {
            return Err(Error::OriginSingular);
        }
        let side = if u > 0.0 { Side::Plus } else { Side::Minus };
        Ok(2.0 * self.boundary_density(side, u)?)
    }

    /// Raw (unclamped) `π(u, v)` for each `u` at one height `v > 0`.
    pub fn interior_row(&self, v: f64, us: &[f64]) -> Result<Vec<f64>> {
        if !(v > 0.0) {
            return Err(Error::NegativeHeight(v));
        }
        if us.is_empty() {
            return Ok(Vec::new());
        }
        let e = self.engine;
        let umax = us.iter().fold(0.0f64, |m, u| m.max(u.abs()));
        // Re Y⁺(it) ≥ max(−μ₂, |t| − |μ₁|) bounds the decay of e^{−Y⁺v}.
        let truncation = 36.0 / v + e.model.mu1().abs();
        let min_width = 0.5 * e.table().scale();
        let max_width = (PI / umax.max(1e-300)).min(2.0 / v);
        let breaks = graded_breakpoints(0.0, truncation, min_width, 0.15, max_width);
        let mut nodes = Vec::with_capacity(ORDER * breaks.len());
        for p in breaks.windows(2) {
            for (t, w) in self.gl.mapped(p[0], p[1]) {
                nodes.push((t, self.partial_transform(t, v) * w));
            }
        }
        Ok(us
            .iter()
            .map(|&u| {
                let acc = nodes
                    .iter()
                    .fold(0.0, |acc, &(t, g)| acc + (g * Complex64::from_polar(1.0, -u * t)).re);
                acc / PI
            })
            .collect())
    }

    /// `π(u, v)` for `v > 0`.
    pub fn interior_density(&self, u: f64, v: f64) -> Result<f64> {
        let raw = self.interior_row(v, &[u])?[0];
        clamp(u, v, raw)
    }

    /// `∫ π(u, v) du` by quadrature of the inverted density in `u`.
    pub fn vertical_marginal_numeric(&self, v: f64) -> Result<f64> {
        let e = self.engine;
        let reach = |s: Side| 30.0 / tail_report(&e.model, &e.geometry, s).gamma;
        let mut us = Vec::new();
        let mut ws = Vec::new();
        for side in Side::BOTH {
            let breaks = graded_breakpoints(0.0, reach(side), 0.2 * v.min(1.0), 0.2, 0.5);
            for p in breaks.windows(2) {
                for (u, w) in self.gl.mapped(p[0], p[1]) {
                    us.push(side.sign() * u);
                    ws.push(w);
                }
            }
        }
        // Group by magnitude so that small |u| do not pay for the finest panels.
        let mut total = 0.0;
        let mut bound = 1.0;
        let mut remaining: Vec<usize> = (0..us.len()).collect();
        while !remaining.is_empty() {
            let (take, rest): (Vec<usize>, Vec<usize>) =
                remaining.iter().partition(|&&i| us[i].abs() <= bound);
            if !take.is_empty() {
                let row_u: Vec<f64> = take.iter().map(|&i| us[i]).collect();
                let row = self.interior_row(v, &row_u)?;
                total += take.iter().zip(&row).map(|(&i, d)| ws[i] * d).sum::<f64>();
            }
            remaining = rest;
            bound *= 2.0;
        }
        Ok(total)
    }
}

fn side_index(side: Side) -> usize {
    match side {
        Side::Plus => 0,
        Side::Minus => 1,
    }
}

fn clamp(u: f64, v: f64, value: f64) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -NEGATIVE_TOL {
        Ok(0.0)
    } else {
        Err(Error::NegativeDensity { u, v, value })
    }
}

/// Exact vertical marginal `−2μ₂ e^{2μ₂ v}` (an exponential law).
pub fn vertical_marginal(mu2: f64, v: f64) -> f64 {
    -2.0 * mu2 * (2.0 * mu2 * v).exp()
}

/// Density of the instance `Σ = I`, `μ = (0, −1)`, `r± = ∓1`:
/// `√(ρ + v)/(√π ρ) e^{−ρ−v}` with `ρ = √(u² + v²)`.
pub fn symmetric_closed_form(u: f64, v: f64) -> Result<f64> {
    if v < 0.0 {
        return Err(Error::NegativeHeight(v));
    }
    let rho = u.hypot(v);
    if rho == 0.0 {
        return Err(Error::OriginSingular);
    }
    Ok((rho + v).sqrt() / (PI.sqrt() * rho) * (-rho - v).exp())
}

/// Polar form of [`symmetric_closed_form`]:
/// `√(2/(πr)) c e^{−2rc²}` with `c = cos(θ/2 − π/4)`.
pub fn symmetric_polar(r: f64, theta: f64) -> Result<f64> {
    if r == 0.0 {
        return Err(Error::OriginSingular);
    }
    let c = (0.5 * theta - 0.25 * PI).cos();
    Ok((2.0 / (PI * r)).sqrt() * c * (-2.0 * r * c * c).exp())
}

/// Density samples on a rectangular grid (rows indexed by `v`).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub u_values: Vec<f64>,
    pub v_values: Vec<f64>,
    /// `values[j][i] = π(u_i, v_j)`.
    pub values: Vec<Vec<f64>>,
    /// Trapezoidal mass over the grid rectangle.
    pub mass_estimate: f64,
    /// Number of samples clamped from small negative values.
    pub clamped: usize,
}

/// Fills a grid; `v = 0` rows use the boundary densities (which need
/// [`Inverter::with_boundaries`]), and `(0, 0)` is reported as `NaN`.
pub fn density_grid(inv: &Inverter<'_>, u_values: &[f64], v_values: &[f64]) -> Result<DensityGrid> {
    for w in [u_values, v_values] {
        if w.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(Error::GridMismatch("grid values must be increasing"));
        }
    }
    let mut clamped = 0;
    let mut values = Vec::with_capacity(v_values.len());
    for &v in v_values {
        let raw = if v > 0.0 {
            inv.interior_row(v, u_values)?
        } else if v == 0.0 {
            let mut row = vec![f64::NAN; u_values.len()];
            for side in Side::BOTH {
                let idx: Vec<usize> = (0..u_values.len())
                    .filter(|&i| u_values[i] * side.sign() > 0.0)
                    .collect();
                let us: Vec<f64> = idx.iter().map(|&i| u_values[i]).collect();
                let b = inv.boundary_row(side, &us)?;
                for (&i, d) in idx.iter().zip(b) {
                    row[i] = 2.0 * d;
                }
            }
            row
        } else {
            return Err(Error::NegativeHeight(v));
        };
        let mut row = Vec::with_capacity(raw.len());
        for (&u, d) in u_values.iter().zip(raw) {
            if d.is_nan() {
                row.push(d);
                continue;
            }
            let c = clamp(u, v, d)?;
            if c != d {
                clamped += 1;
            }
            row.push(c);
        }
        values.push(row);
    }
    let mass_estimate = trapezoid_mass(u_values, v_values, &values);
    Ok(DensityGrid { u_values: u_values.to_vec(), v_values: v_values.to_vec(), values, mass_estimate, clamped })
}

fn trapezoid_mass(us: &[f64], vs: &[f64], values: &[Vec<f64>]) -> f64 {
    let weights = |xs: &[f64]| -> Vec<f64> {
        let n = xs.len();
        (0..n)
            .map(|i| {
                let left = if i > 0 { xs[i] - xs[i - 1] } else { 0.0 };
                let right = if i + 1 < n { xs[i + 1] - xs[i] } else { 0.0 };
                0.5 * (left + right)
            })
            .collect()
    };
    let wu = weights(us);
    let wv = weights(vs);
    let mut mass = 0.0;
    for (row, wj) in values.iter().zip(&wv) {
        for (d, wi) in row.iter().zip(&wu) {
            if d.is_finite() {
                mass += d * wi * wj;
            }
        }
    }
    mass
}
