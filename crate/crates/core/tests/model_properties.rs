mod common;

use std::f64::consts::PI;

use halfplane_rbm_core::asymptotics::{tail_report, Regime};
use halfplane_rbm_core::model::{geometry, validate, whiten, ModelParams};
use halfplane_rbm_core::Side;
use proptest::prelude::*;

use common::recurrent_params;

/// Upper-triangular `T` with positive diagonal and `TᵀT = Σ⁻¹`, by hand.
fn reverse_cholesky_of_inverse(s: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let d = s[0][0] * s[1][1] - s[0][1] * s[1][0];
    let (a, b, c) = (s[1][1] / d, -s[0][1] / d, s[0][0] / d);
    let p = a.sqrt();
    let q = b / p;
    [[p, q], [0.0, (c - q * q).sqrt()]]
}

proptest! {
    #[test]
    fn whitening_is_the_triangular_root(p in recurrent_params()) {
        let w = whiten(p).unwrap();
        let t = w.transform;
        let expected = reverse_cholesky_of_inverse(p.sigma);
        for i in 0..2 {
            for j in 0..2 {
                prop_assert!((t[i][j] - expected[i][j]).abs() < 1e-10 * (1.0 + expected[i][j].abs()));
            }
        }
        prop_assert_eq!(t[1][0], 0.0);
        prop_assert!(t[0][0] > 0.0 && t[1][1] > 0.0);
        // T Σ Tᵀ = I
        let s = p.sigma;
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = 0.0;
                for k in 0..2 {
                    for l in 0..2 {
                        acc += t[i][k] * s[k][l] * t[j][l];
                    }
                }
                let id = if i == j { 1.0 } else { 0.0 };
                prop_assert!((acc - id).abs() < 1e-10);
            }
        }
        prop_assert!((w.jacobian - 1.0 / p.det_sigma().sqrt()).abs() < 1e-12 * w.jacobian);
    }

    #[test]
    fn whitened_instance_stays_recurrent(p in recurrent_params()) {
        let w = whiten(p).unwrap();
        prop_assert_eq!(w.params.sigma, [[1.0, 0.0], [0.0, 1.0]]);
        prop_assert!(validate(w.params).is_ok());
        prop_assert!(w.params.mu[1] < 0.0);
    }

    #[test]
    fn alpha_and_angles(p in recurrent_params()) {
        let w = whiten(p).unwrap();
        let g = geometry(&w);
        prop_assert!(g.alpha > 0.0 && g.alpha < 1.0);
        prop_assert!((g.alpha - ((g.delta_plus + g.delta_minus) / PI - 1.0)).abs() < 1e-12);
        let rp = w.params.r_plus;
        prop_assert_eq!(g.delta_plus, 0.5 * PI - rp.atan());
        prop_assert!(g.delta_plus > 0.0 && g.delta_plus < PI);
        if rp.abs() > 1e-6 {
            prop_assert!((g.delta_plus.tan() * rp - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn classification_is_monotone(p in recurrent_params()) {
        let w = whiten(p).unwrap();
        let g = geometry(&w);
        let rp = w.params.r_plus;
        prop_assert_eq!(rp < g.r_plus_star, rp.atan() < g.r_plus_star.atan());
        let report = tail_report(&w, &g, Side::Plus);
        match report.regime {
            Regime::Subcritical => prop_assert!(rp < g.r_plus_star),
            Regime::Supercritical => prop_assert!(rp > g.r_plus_star),
            Regime::Critical => {}
        }
    }

    #[test]
    fn mirror_is_an_involution(p in recurrent_params()) {
        let mm = p.mirrored().mirrored();
        prop_assert_eq!(mm, p);
        prop_assert!(validate(p.mirrored()).is_ok());
        let g = geometry(&whiten(p).unwrap());
        let gm = geometry(&whiten(p.mirrored()).unwrap());
        prop_assert!((g.alpha - gm.alpha).abs() < 1e-12);
    }
}

#[test]
fn strict_recurrence_boundaries_are_rejected() {
    let p = ModelParams::standard([0.5, -1.0], -0.5, 1.0);
    assert!(validate(p).is_err());
    let p = ModelParams::standard([0.5, -1.0], -1.0, -0.5);
    assert!(validate(p).is_err());
    let p = ModelParams::standard([0.5, 0.0], -1.0, 1.0);
    assert!(validate(p).is_err());
}
