mod common;

use halfplane_rbm_core::kernel::{coefficient_g, kernel_small_k, roots_y};
use halfplane_rbm_core::laplace::boundary_masses;
use halfplane_rbm_core::model::whiten;
use halfplane_rbm_core::{Complex64, Side};
use proptest::prelude::*;

use common::{engine, moderate_params, recurrent_params};

proptest! {
    #[test]
    fn masses_solve_the_linear_system(p in recurrent_params()) {
        let m = whiten(p).unwrap();
        let (pp, pm) = boundary_masses(&m);
        let (mu1, mu2) = (m.mu1(), m.mu2());
        let scale = 1.0 + mu1.abs() + mu2.abs();
        prop_assert!(pp > 0.0 && pm > 0.0);
        prop_assert!((pp + pm + mu2).abs() < 1e-12 * scale);
        prop_assert!((m.params.r_plus * pp + m.params.r_minus * pm + mu1).abs() < 1e-12 * scale * (1.0 + m.params.r_plus.abs() + m.params.r_minus.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn boundary_relations_on_the_axis(
        p in moderate_params(),
        ts in prop::collection::vec(-100.0f64..100.0, 12),
        ys in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 12),
    ) {
        let (m, e) = engine(p);
        for (&t, &(yr, yi)) in ts.iter().zip(&ys) {
            let x = Complex64::new(0.0, t);
            let pp = e.phi(Side::Plus, x).unwrap();
            let pm = e.phi(Side::Minus, x).unwrap();
            // φ₊ = G φ₋
            prop_assert!((pp - coefficient_g(&m, t) * pm).norm() < 1e-6 * pp.norm());
            // real densities: φ(conj x) = conj φ(x)
            let ppc = e.phi(Side::Plus, x.conj()).unwrap();
            prop_assert!((ppc - pp.conj()).norm() < 1e-9 * pp.norm());
            // (φ₊ + φ₋)(y − Y⁻) = k₊φ₊ + k₋φ₋
            let y = Complex64::new(yr, yi);
            let (ym, _) = roots_y(&m, x);
            let lhs = (pp + pm) * (y - ym);
            let rhs = kernel_small_k(&m, Side::Plus, x, y) * pp + kernel_small_k(&m, Side::Minus, x, y) * pm;
            prop_assert!((lhs - rhs).norm() < 1e-6 * (1.0 + lhs.norm()));
        }
    }

    #[test]
    fn transforms_decay_like_the_index(p in moderate_params()) {
        let (_, e) = engine(p);
        let alpha = e.geometry.alpha;
        for side in Side::BOTH {
            let a = e.asymptotic_constant(side).norm();
            for k in 2..=6 {
                let t = 10f64.powi(k);
                for s in [-1.0, 1.0] {
                    let v = e.phi(side, Complex64::new(0.0, s * t)).unwrap().norm() * t.powf(1.0 - alpha);
                    prop_assert!((v / a - 1.0).abs() < 10.0 / t.sqrt() + 1e-6, "{} at t = {}", v / a, s * t);
                }
            }
        }
    }

    #[test]
    fn vertical_section_is_the_exponential_transform(p in moderate_params(), ys in prop::collection::vec(-3.0f64..0.7, 6)) {
        let (m, e) = engine(p);
        let mu2 = m.mu2();
        for y in ys {
            let y = y * -mu2;
            let v = e.phi_bivariate(Complex64::new(0.0, 0.0), Complex64::new(y, 0.0)).unwrap();
            let expected = 2.0 * mu2 / (y + 2.0 * mu2);
            prop_assert!((v.re - expected).abs() < 1e-8 * expected.abs() && v.im.abs() < 1e-8);
        }
    }
}
