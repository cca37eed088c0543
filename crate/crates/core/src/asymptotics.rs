//! Leading-order behaviour of the stationary density at the corner and along
//! the two boundary half-lines.

use crate::model::{Geometry, WhitenedModel};
#[allow(unused_imports)]
use crate::prelude::*;
use crate::{Error, Result, Side};

/// Relative tolerance on `|r − r⋆|` for calling a slope critical.
pub const CRITICAL_TOL: f64 = 1e-9;

/// Angular profile `sin(δ₊ − αθ) r^{−α}` of the density near the origin, up to
/// a multiplicative constant.
pub fn origin_profile(g: &Geometry, r: f64, theta: f64) -> f64 {
    (g.delta_plus - g.alpha * theta).sin() * r.powf(-g.alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Regime {
    /// Slope below its critical value: the square-root branch point dominates.
    Subcritical,
    Critical,
    /// Slope above its critical value: a simple pole dominates.
    Supercritical,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Subcritical => "subcritical",
            Regime::Critical => "critical",
            Regime::Supercritical => "supercritical",
        }
    }
}

/// `π_side(|u|) ≍ |u|^{−κ} e^{−γ|u|}` as `|u| → ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TailReport {
    pub side: Side,
    pub regime: Regime,
    pub gamma: f64,
    pub kappa: f64,
    pub branch_point: f64,
    pub pole: f64,
    pub r_star: f64,
}

/// Classifies the tail of `π_side`.
///
/// The minus side is the plus side of the mirrored model `u ↦ −u`
/// (`μ₁ ↦ −μ₁`, `r₊ ↦ −r₋`); its regime is reported in terms of `r₋`, so
/// "subcritical" means `r₋ > r₋⋆` there.
pub fn tail_report(m: &WhitenedModel, g: &Geometry, side: Side) -> TailReport {
    let (mu1, mu2, r, r_star) = match side {
        Side::Plus => (m.mu1(), m.mu2(), m.params.r_plus, g.r_plus_star),
        Side::Minus => (-m.mu1(), m.mu2(), -m.params.r_minus, -g.r_minus_star),
    };
    let branch_point = mu1.hypot(mu2) - mu1;
    let pole = 2.0 * (r * mu2 - mu1) / (1.0 + r * r);
    let (regime, gamma, kappa) = if (r - r_star).abs() <= CRITICAL_TOL * r_star.abs().max(1.0) {
        (Regime::Critical, mu2 / r, 0.5)
    } else if r < r_star {
        (Regime::Subcritical, branch_point, 1.5)
    } else {
        (Regime::Supercritical, pole, 0.0)
    };
    TailReport {
        side,
        regime,
        gamma,
        kappa,
        branch_point,
        pole,
        r_star: g.critical_slope(side),
    }
}

/// Least-squares fit of `log π ≈ c − κ log u − γ u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailFit {
    pub gamma: f64,
    pub kappa: f64,
    pub log_prefactor: f64,
    /// Root-mean-square residual of the log-density fit.
    pub residual: f64,
}

impl TailFit {
    pub fn agrees_with(&self, report: &TailReport, gamma_rel: f64, kappa_abs: f64) -> bool {
        (self.gamma - report.gamma).abs() <= gamma_rel * report.gamma
            && (self.kappa - report.kappa).abs() <= kappa_abs
    }
}

/// Smallest accepted `u_max / u_min` for a tail fit.
pub const MIN_FIT_SPAN: f64 = 4.0;

/// Fits the tail exponents to `(u, density)` samples (`u` may be given as
/// `|u|` for the minus side). Needs at least 20 positive samples spanning a
/// ratio of [`MIN_FIT_SPAN`].
pub fn fit_tail(samples: &[(f64, f64)]) -> Result<TailFit> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(u, d)| *u > 0.0 && *d > 1e-300 && d.is_finite())
        .map(|&(u, d)| (u, d.ln()))
        .collect();
    if pts.len() < 20 {
        return Err(Error::InsufficientRange);
    }
    let (lo, hi) = pts
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &(u, _)| (lo.min(u), hi.max(u)));
    if hi / lo < MIN_FIT_SPAN {
        return Err(Error::InsufficientRange);
    }
    // Columns centred and scaled before solving the normal equations.
    let n = pts.len() as f64;
    let mean_l = pts.iter().map(|p| p.0.ln()).sum::<f64>() / n;
    let mean_u = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sll, mut slu, mut suu, mut sly, mut suy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(u, y) in &pts {
        let l = u.ln() - mean_l;
        let w = (u - mean_u) / (hi - lo);
        let y = y - mean_y;
        sll += l * l;
        slu += l * w;
        suu += w * w;
        sly += l * y;
        suy += w * y;
    }
    let det = sll * suu - slu * slu;
    if !(det.abs() > 1e-14 * sll * suu) {
        return Err(Error::InsufficientRange);
    }
    let bl = (sly * suu - suy * slu) / det;
    let bw = (sll * suy - slu * sly) / det;
    let kappa = -bl;
    let gamma = -bw / (hi - lo);
    let log_prefactor = mean_y + kappa * mean_l + gamma * mean_u;
    let ss: f64 = pts
        .iter()
        .map(|&(u, y)| {
            let r = y - (log_prefactor - kappa * u.ln() - gamma * u);
            r * r
        })
        .sum();
    Ok(TailFit { gamma, kappa, log_prefactor, residual: (ss / n).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{geometry, whiten, ModelParams};
    use core::f64::consts::PI;

    fn setup(mu: [f64; 2], rp: f64, rm: f64) -> (WhitenedModel, Geometry) {
        let m = whiten(ModelParams::standard(mu, rp, rm)).unwrap();
        let g = geometry(&m);
        (m, g)
    }

    #[test]
    fn profile_examples() {
        let (_, g) = setup([0.0, -1.0], -1.0, 1.0);
        for theta in [0.0, 0.4, 1.5, PI] {
            let expected = (0.75 * PI - 0.5 * theta).sin() / 0.3f64.sqrt();
            assert!((origin_profile(&g, 0.3, theta) - expected).abs() < 1e-14);
        }
        let (_, g) = setup([0.4, -0.8], -1.2, 0.9);
        let peak = (g.delta_plus - 0.5 * PI) / g.alpha;
        let p = origin_profile(&g, 1.0, peak);
        assert!((p - 1.0).abs() < 1e-14);
        for i in 0..=100 {
            assert!(origin_profile(&g, 1.0, PI * i as f64 / 100.0) > 0.0);
        }
    }

    #[test]
    fn tail_regimes() {
        let (m, g) = setup([0.0, -1.0], -1.0, 1.0);
        for s in Side::BOTH {
            let r = tail_report(&m, &g, s);
            assert_eq!(r.regime, Regime::Critical);
            assert!((r.gamma - 1.0).abs() < 1e-15);
            assert_eq!(r.kappa, 0.5);
            assert!((r.branch_point - r.pole).abs() < 1e-12);
        }
        let (m, g) = setup([0.0, -1.0], -3.0, 1.0);
        let r = tail_report(&m, &g, Side::Plus);
        assert_eq!((r.regime, r.gamma, r.kappa), (Regime::Subcritical, 1.0, 1.5));
        let (m, g) = setup([0.0, -1.0], -0.3, 1.0);
        let r = tail_report(&m, &g, Side::Plus);
        assert_eq!(r.regime, Regime::Supercritical);
        assert!((r.gamma - 0.6 / 1.09).abs() < 1e-14);
        assert_eq!(r.kappa, 0.0);
        assert!(r.gamma < r.branch_point);
    }

    #[test]
    fn minus_side_is_mirrored_plus_side() {
        let (m, g) = setup([0.35, -0.9], -1.7, 0.4);
        let mm = m.mirrored();
        let gm = geometry(&mm);
        let minus = tail_report(&m, &g, Side::Minus);
        let mirrored = tail_report(&mm, &gm, Side::Plus);
        assert_eq!(minus.regime, mirrored.regime);
        assert!((minus.gamma - mirrored.gamma).abs() < 1e-14);
        assert_eq!(minus.kappa, mirrored.kappa);
        assert!((minus.r_star + mirrored.r_star).abs() < 1e-14);
    }

    #[test]
    fn fit_examples() {
        let s: Vec<_> = (0..50).map(|i| {
            let u = 1.0 + 0.5 * i as f64;
            (u, 3.0 * (-2.0 * u).exp())
        }).collect();
        let f = fit_tail(&s).unwrap();
        assert!((f.gamma - 2.0).abs() < 1e-10 && f.kappa.abs() < 1e-9 && f.residual < 1e-10);
        assert!((f.log_prefactor - 3f64.ln()).abs() < 1e-9);

        let s: Vec<_> = (0..60).map(|i| {
            let u = 5.0 + 25.0 * i as f64 / 59.0;
            (u, (-u).exp() / (2.0 * (PI * u).sqrt()))
        }).collect();
        let f = fit_tail(&s).unwrap();
        assert!((f.gamma - 1.0).abs() < 1e-10 && (f.kappa - 0.5).abs() < 1e-9);

        let short: Vec<_> = (0..40).map(|i| {
            let u = 10.0 + 10.0 * i as f64 / 39.0;
            (u, (-u).exp())
        }).collect();
        assert_eq!(fit_tail(&short), Err(Error::InsufficientRange));
        assert_eq!(fit_tail(&s[..10]), Err(Error::InsufficientRange));
    }
}
