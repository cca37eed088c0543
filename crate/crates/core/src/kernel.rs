//! The kernel `K(x, y) = ½(x² + y²) + μ₁x + μ₂y`, its roots in `y`, the jump
//! coefficient `G` of the boundary value problem on the real line, its
//! index-free correction `G̃ = ε_α G`, and a continuous logarithm of `G̃`.

use core::f64::consts::PI;

use num_complex::Complex64;

use crate::cauchy::{sinh_breakpoints, QuadratureConfig};
use crate::math::I;
use crate::model::{Geometry, WhitenedModel};
#[allow(unused_imports)]
use crate::prelude::*;
use crate::{Error, Result, Side};

/// `|t|` below which `G` is replaced by its limit at the origin.
const ORIGIN_CUTOFF: f64 = 1e-8;

/// Largest phase jump accepted between consecutive table samples.
const MAX_PHASE_STEP: f64 = 0.5 * PI;

pub fn kernel_big_k(m: &WhitenedModel, x: Complex64, y: Complex64) -> Complex64 {
    (x * x + y * y) * 0.5 + x * m.mu1() + y * m.mu2()
}

pub fn kernel_small_k(m: &WhitenedModel, side: Side, x: Complex64, y: Complex64) -> Complex64 {
    x * m.slope(side) + y
}

/// Roots `(Y⁻(x), Y⁺(x))` of `K(x, ·) = 0`, `Y± = -μ₂ ± √(μ₂² − 2μ₁x − x²)`
/// with the principal square root.
///
/// `Y⁻` is evaluated through Vieta (`Y⁻Y⁺ = x² + 2μ₁x`) so that it keeps full
/// relative accuracy near `x = 0`; `Re Y⁺ ≥ -μ₂ > 0` makes the division safe.
pub fn roots_y(m: &WhitenedModel, x: Complex64) -> (Complex64, Complex64) {
    let mu2 = m.mu2();
    let disc = discriminant(m, x);
    let y_plus = disc.sqrt() - mu2;
    let y_minus = (x * x + x * (2.0 * m.mu1())) / y_plus;
    (y_minus, y_plus)
}

fn discriminant(m: &WhitenedModel, x: Complex64) -> Complex64 {
    let mu2 = m.mu2();
    Complex64::new(mu2 * mu2, 0.0) - x * (2.0 * m.mu1()) - x * x
}

/// `G(t) = -k₋(it, Y⁻(it)) / k₊(it, Y⁻(it))` for real `t`.
///
/// Both `k±(it, Y⁻(it))` carry a common factor `t`; it is cancelled
/// analytically, so the expression stays accurate at and near `t = 0`.
pub fn coefficient_g(m: &WhitenedModel, t: f64) -> Complex64 {
    if t.abs() < ORIGIN_CUTOFF {
        return Complex64::new(g_at_origin(m), 0.0);
    }
    coefficient_g_complex(m, Complex64::new(t, 0.0))
}

/// `G(0) = -(μ₁ − r₋μ₂)/(μ₁ − r₊μ₂) > 0`.
pub fn g_at_origin(m: &WhitenedModel) -> f64 {
    let [mu1, mu2] = m.params.mu;
    -(mu1 - m.params.r_minus * mu2) / (mu1 - m.params.r_plus * mu2)
}

/// Analytic continuation of `G` off the real line (`t ↦ G(t)` with `x = it`).
///
/// Used to continue `φ₊ = G(-ix) φ₋` into `Re x > 0` (and `φ₋` into
/// `Re x < 0`); valid while the principal square root does not cross its cut.
pub fn coefficient_g_complex(m: &WhitenedModel, t: Complex64) -> Complex64 {
    let mu2 = m.mu2();
    let x = I * t;
    let s = discriminant(m, x).sqrt() - mu2;
    // k±(it, Y⁻) = t (r± i + q)
    let q = (I * (2.0 * m.mu1()) - t) / s;
    -(I * m.params.r_minus + q) / (I * m.params.r_plus + q)
}

/// `G(±∞) = -(r₋ ± i)/(r₊ ± i)`.
pub fn g_at_infinity(m: &WhitenedModel, side: Side) -> Complex64 {
    let s = side.sign();
    -(Complex64::new(m.params.r_minus, s)) / Complex64::new(m.params.r_plus, s)
}

/// `ε_α(t) = exp(i(α − 1)(2 arctan t + π))`.
pub fn eps_alpha(g: &Geometry, t: f64) -> Complex64 {
    Complex64::from_polar(1.0, eps_alpha_phase(g, t))
}

fn eps_alpha_phase(g: &Geometry, t: f64) -> f64 {
    (g.alpha - 1.0) * (2.0 * t.atan() + PI)
}

pub fn coefficient_g_tilde(m: &WhitenedModel, g: &Geometry, t: f64) -> Complex64 {
    eps_alpha(g, t) * coefficient_g(m, t)
}

/// The continuous determination of `log G̃` in closed form.
///
/// `G` never meets `(-∞, 0]`, so its principal logarithm is continuous on the
/// line; the phase of `ε_α` is added explicitly.
pub fn log_g_tilde(m: &WhitenedModel, g: &Geometry, t: f64) -> Complex64 {
    coefficient_g(m, t).ln() + I * eps_alpha_phase(g, t)
}

/// Distance from the real `t`-line to the nearest singularity of `log G̃`,
/// capped at 1 (the branch points of `ε_α`).
///
/// Candidates: the branch points `x₊`, `-x₋` of the square root, the pole
/// `p₊` of `G` and the zero `-p₋` of `G` (with `t = -ix`).
pub fn singularity_distance(m: &WhitenedModel) -> f64 {
    let [mu1, mu2] = m.params.mu;
    let norm = (mu1 * mu1 + mu2 * mu2).sqrt();
    let rp = m.params.r_plus;
    let rm = m.params.r_minus;
    let branch_plus = norm - mu1;
    let branch_minus = norm + mu1;
    let pole_plus = 2.0 * (rp * mu2 - mu1) / (1.0 + rp * rp);
    let pole_minus = 2.0 * (mu1 - rm * mu2) / (1.0 + rm * rm);
    [1.0, branch_plus, branch_minus, pole_plus, pole_minus]
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

/// Samples of the continuous determination of `log G̃` on a symmetric graded
/// grid, together with the common endpoint value `L∞ = log G̃(±∞)`.
///
/// The grid is `tᵢ = a sinh(ξᵢ)` with `ξ` uniform on `[-asinh(T/a), asinh(T/a)]`
/// and an even number of intervals, so `t = 0` is a node.
#[derive(Debug, Clone)]
pub struct LogGtildeTable {
    pub grid: Vec<f64>,
    pub values: Vec<Complex64>,
    pub limit_value: Complex64,
    scale: f64,
    xi_step: f64,
    branch_shift: Complex64,
    model: WhitenedModel,
    geometry: Geometry,
}

impl LogGtildeTable {
    pub fn truncation(&self) -> f64 {
        *self.grid.last().expect("non-empty grid")
    }

    /// Grading scale `a` of the sinh grid.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Spacing of the uniform variable `ξ`.
    pub fn xi_step(&self) -> f64 {
        self.xi_step
    }

    pub fn model(&self) -> &WhitenedModel {
        &self.model
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    /// `log G̃(t)` at any real `t`, on the same determination as the samples.
    pub fn value_at(&self, t: f64) -> Complex64 {
        log_g_tilde(&self.model, &self.geometry, t) + self.branch_shift
    }

    /// `log G̃(t) − L∞`, which decays like `1/t`.
    pub fn centered_at(&self, t: f64) -> Complex64 {
        self.value_at(t) - self.limit_value
    }

    /// Index of the sample nearest to `t` (grid is uniform in `ξ`).
    pub fn nearest_index(&self, t: f64) -> usize {
        let n = self.grid.len() - 1;
        let xi0 = (self.grid[0] / self.scale).asinh();
        let k = (((t / self.scale).asinh() - xi0) / self.xi_step).round();
        (k.max(0.0) as usize).min(n)
    }
}

/// Builds the table by unwrapping the principal argument of `G̃` outward from
/// `t = 0`, where the determination is anchored at `log G(0) + iπ(α − 1)`.
pub fn build_log_table(
    m: &WhitenedModel,
    g: &Geometry,
    cfg: &QuadratureConfig,
) -> Result<LogGtildeTable> {
    cfg.check()?;
    let half = cfg.n_points.div_ceil(2);
    let n = 2 * half;
    let scale = 0.5 * singularity_distance(m);
    let xi_max = (cfg.truncation / scale).asinh();
    let xi_step = xi_max / half as f64;
    let grid = sinh_breakpoints(scale, cfg.truncation, n);

    let samples: Vec<Complex64> = grid.iter().map(|&t| coefficient_g_tilde(m, g, t)).collect();
    let mut values = vec![Complex64::new(0.0, 0.0); n + 1];
    values[half] = Complex64::new(g_at_origin(m).ln(), PI * (g.alpha - 1.0));

    let step = |prev: Complex64, prev_sample: Complex64, sample: Complex64, at: f64| {
        let jump = (sample / prev_sample).arg();
        if jump.abs() > MAX_PHASE_STEP {
            return Err(Error::UnwrapFailure { at, jump });
        }
        Ok(Complex64::new(sample.norm().ln(), prev.im + jump))
    };
    for i in half + 1..=n {
        values[i] = step(values[i - 1], samples[i - 1], samples[i], grid[i])?;
    }
    for i in (0..half).rev() {
        values[i] = step(values[i + 1], samples[i + 1], samples[i], grid[i])?;
    }

    // Closed-form endpoint G̃(-∞) = G(-∞); pick the 2π-multiple that matches the
    // unwrapped samples, then move the whole table onto the principal endpoint.
    let endpoint = g_at_infinity(m, Side::Minus).ln();
    let turns = ((values[0].im - endpoint.im) / (2.0 * PI)).round();
    let branch_shift = Complex64::new(0.0, -2.0 * PI * turns);
    for v in values.iter_mut() {
        *v += branch_shift;
    }
    let limit_value = endpoint;

    let tail = (values[0] - limit_value)
        .norm()
        .max((values[n] - limit_value).norm());
    if tail > cfg.tail_tol {
        return Err(Error::TailMismatch(tail));
    }

    Ok(LogGtildeTable {
        grid,
        values,
        limit_value,
        scale,
        xi_step,
        branch_shift,
        model: *m,
        geometry: *g,
    })
}

/// Winding number of a sampled nonvanishing curve: total unwrapped argument
/// variation divided by `2π`.
pub fn numeric_index(samples: &[Complex64]) -> Result<f64> {
    let mut total = 0.0;
    for w in samples.windows(2) {
        if w[0].norm() == 0.0 || w[1].norm() == 0.0 {
            return Err(Error::UnwrapFailure { at: f64::NAN, jump: f64::NAN });
        }
        let jump = (w[1] / w[0]).arg();
        if jump.abs() >= MAX_PHASE_STEP {
            return Err(Error::UnwrapFailure { at: f64::NAN, jump });
        }
        total += jump;
    }
    Ok(total / (2.0 * PI))
}

/// Symmetric sinh-graded sample points reaching `±t_max`, suitable for
/// [`numeric_index`] on curves that converge at infinity.
pub fn index_grid(scale: f64, t_max: f64, n: usize) -> Vec<f64> {
    let xi_max = (t_max / scale).asinh();
    (0..=n)
        .map(|i| scale * (-xi_max + 2.0 * xi_max * i as f64 / n as f64).sinh())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{geometry, whiten, ModelParams};

    fn sym() -> (WhitenedModel, Geometry) {
        let m = whiten(ModelParams::symmetric()).unwrap();
        let g = geometry(&m);
        (m, g)
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn big_k_examples() {
        let (m, _) = sym();
        assert_eq!(kernel_big_k(&m, c(0.0, 0.0), c(0.0, 0.0)), c(0.0, 0.0));
        assert!(kernel_big_k(&m, c(0.0, 0.0), c(2.0, 0.0)).norm() < 1e-15);
        let m2 = whiten(ModelParams::standard([1.0, -1.0], -2.0, 2.0)).unwrap();
        let v = kernel_big_k(&m2, c(0.0, 1.0), c(0.0, 0.0));
        assert!((v - c(-0.5, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn small_k_examples() {
        let (m, _) = sym();
        assert_eq!(kernel_small_k(&m, Side::Plus, c(0.0, 0.0), c(3.0, 0.0)), c(3.0, 0.0));
        assert_eq!(kernel_small_k(&m, Side::Plus, c(2.0, 0.0), c(2.0, 0.0)), c(0.0, 0.0));
        assert_eq!(kernel_small_k(&m, Side::Minus, c(0.0, 1.0), c(0.0, -1.0)), c(0.0, 0.0));
    }

    #[test]
    fn roots_examples() {
        let (m, _) = sym();
        let (ym, yp) = roots_y(&m, c(0.0, 0.0));
        assert_eq!((ym, yp), (c(0.0, 0.0), c(2.0, 0.0)));
        let (ym, _) = roots_y(&m, c(0.0, 1.0));
        assert!((ym - c(1.0 - 2f64.sqrt(), 0.0)).norm() < 1e-15);
        assert!(ym.re <= 0.0);
    }

    #[test]
    fn g_examples() {
        let (m, _) = sym();
        assert_eq!(coefficient_g(&m, 0.0), c(1.0, 0.0));
        let far = coefficient_g(&m, 1e8);
        assert!((far - g_at_infinity(&m, Side::Plus)).norm() < 1e-6);
        let m2 = whiten(ModelParams::standard([0.4, -0.7], -1.3, 0.9)).unwrap();
        let v = coefficient_g(&m2, 5.0);
        assert!(v.im != 0.0);
        assert!((coefficient_g(&m2, 1e-7) - c(g_at_origin(&m2), 0.0)).norm() < 1e-6);
    }

    #[test]
    fn eps_examples() {
        let (_, g) = sym();
        assert!((eps_alpha(&g, 0.0) - c(0.0, -1.0)).norm() < 1e-15);
        assert!((eps_alpha(&g, -1e12) - c(1.0, 0.0)).norm() < 1e-10);
        let plus = Complex64::from_polar(1.0, 2.0 * PI * (g.alpha - 1.0));
        assert!((eps_alpha(&g, 1e12) - plus).norm() < 1e-10);
    }

    #[test]
    fn g_tilde_is_constant_in_symmetric_case() {
        let (m, g) = sym();
        for i in -200..=200 {
            let t = 0.37 * i as f64;
            assert!((coefficient_g_tilde(&m, &g, t) - c(0.0, -1.0)).norm() < 1e-13, "t={t}");
        }
    }

    #[test]
    fn symmetric_table_is_flat() {
        let (m, g) = sym();
        let table = build_log_table(&m, &g, &QuadratureConfig::default()).unwrap();
        for v in &table.values {
            assert!((v - c(0.0, -0.5 * PI)).norm() < 1e-13);
        }
        assert!((table.limit_value - c(0.0, -0.5 * PI)).norm() < 1e-15);
    }

    #[test]
    fn numeric_index_examples() {
        let (m, g) = sym();
        let grid = index_grid(0.5, 1e13, 8192);
        let gs: Vec<_> = grid.iter().map(|&t| coefficient_g(&m, t)).collect();
        assert!((numeric_index(&gs).unwrap() - 0.5).abs() < 1e-9);
        let es: Vec<_> = grid.iter().map(|&t| eps_alpha(&g, t)).collect();
        assert!((numeric_index(&es).unwrap() + 0.5).abs() < 1e-9);
        assert_eq!(numeric_index(&[c(2.0, 1.0); 10]).unwrap(), 0.0);
        assert!(numeric_index(&[c(1.0, 0.0), c(-1.0, 1e-3)]).is_err());
    }

    #[test]
    fn table_matches_closed_form_determination() {
        let m = whiten(ModelParams::standard([3.0, -0.2], -16.0, 1.0)).unwrap();
        let g = geometry(&m);
        let table = build_log_table(&m, &g, &QuadratureConfig::default()).unwrap();
        for (t, v) in table.grid.iter().zip(&table.values) {
            assert!((table.value_at(*t) - v).norm() < 1e-9, "t={t}");
        }
        let centre = table.values[table.grid.len() / 2];
        assert!((centre.im - PI * (g.alpha - 1.0)).abs() < 1e-12);
        assert!((table.values[0] - table.limit_value).norm() < 1e-2);
    }
}
