mod common;

use std::f64::consts::PI;

use halfplane_rbm_core::asymptotics::{origin_profile, tail_report, Regime};
use halfplane_rbm_core::density::symmetric_closed_form;
use halfplane_rbm_core::model::{geometry, whiten, ModelParams};
use halfplane_rbm_core::Side;
use proptest::prelude::*;

use common::recurrent_params;

/// Direction angle in `(0, π)` of the upward vector `(r, 1)`.
fn angle(r: f64) -> f64 {
    1f64.atan2(r)
}

proptest! {
    #[test]
    fn critical_vectors_are_orthogonal(p in recurrent_params()) {
        let g = geometry(&whiten(p).unwrap());
        prop_assert!((g.r_plus_star * g.r_minus_star + 1.0).abs() < 1e-12);
    }

    #[test]
    fn critical_vectors_bisect(p in recurrent_params()) {
        let m = whiten(p).unwrap();
        let g = geometry(&m);
        // Upward direction −μ, measured from the positive horizontal axis.
        let drift = (-m.mu2()).atan2(-m.mu1());
        prop_assert!((angle(g.r_minus_star) - 0.5 * drift).abs() < 1e-12);
        prop_assert!((angle(g.r_plus_star) - 0.5 * (drift + PI)).abs() < 1e-12);
    }

    #[test]
    fn regimes_meet_continuously(mu1 in -2.0f64..2.0, m2 in 0.2f64..2.0, eps in 1e-7f64..1e-4) {
        let mu2 = -m2;
        let rho = mu1 / mu2;
        let star = rho - (rho * rho + 1.0).sqrt();
        let at = |r: f64| {
            let m = whiten(ModelParams::standard([mu1, mu2], r, rho + 1.0)).unwrap();
            tail_report(&m, &geometry(&m), Side::Plus)
        };
        let crit = at(star);
        prop_assert_eq!(crit.regime, Regime::Critical);
        prop_assert!((crit.branch_point - crit.pole).abs() < 1e-10 * (1.0 + crit.pole.abs()));
        prop_assert!((crit.gamma - mu2 / star).abs() < 1e-10 * crit.gamma);
        let below = at(star - eps);
        let above = at(star + eps);
        prop_assert_eq!(below.regime, Regime::Subcritical);
        prop_assert_eq!(above.regime, Regime::Supercritical);
        for r in [below, above] {
            prop_assert!((r.gamma - crit.gamma).abs() < 1e3 * eps * (1.0 + crit.gamma));
        }
    }

    #[test]
    fn kappa_values(p in recurrent_params()) {
        let m = whiten(p).unwrap();
        let g = geometry(&m);
        for side in Side::BOTH {
            let r = tail_report(&m, &g, side);
            prop_assert!([0.0, 0.5, 1.5].contains(&r.kappa));
            prop_assert!(r.gamma > 0.0 && r.gamma <= r.branch_point * (1.0 + 1e-12));
        }
    }
}

#[test]
fn symmetric_origin_profile() {
    let g = geometry(&whiten(ModelParams::symmetric()).unwrap());
    let r = 1e-3;
    let ratios: Vec<f64> = (1..=30)
        .map(|k| {
            let th = 0.1 * k as f64;
            symmetric_closed_form(r * th.cos(), r * th.sin()).unwrap() / origin_profile(&g, r, th)
        })
        .collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    assert!(hi / lo - 1.0 < 0.01);
}
