mod common;

use halfplane_rbm_core::cauchy::{CauchyQuadrature, QuadratureConfig};
use halfplane_rbm_core::kernel::build_log_table;
use halfplane_rbm_core::model::{geometry, whiten};
use halfplane_rbm_core::Complex64;
use proptest::prelude::*;

use common::moderate_params;

fn quadrature(
    p: halfplane_rbm_core::model::ModelParams,
    cfg: &QuadratureConfig,
) -> CauchyQuadrature<halfplane_rbm_core::kernel::LogGtildeTable> {
    let m = whiten(p).unwrap();
    let g = geometry(&m);
    CauchyQuadrature::new(build_log_table(&m, &g, cfg).unwrap(), cfg)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn plemelj_jump_and_sum(p in moderate_params(), ts in prop::collection::vec(-30.0f64..30.0, 5)) {
        let q = quadrature(p, &QuadratureConfig::default());
        for t in ts {
            let jump = |d: f64| {
                q.offaxis(Complex64::new(t, d)).unwrap() - q.offaxis(Complex64::new(t, -d)).unwrap()
            };
            let sum = |d: f64| {
                q.offaxis(Complex64::new(t, d)).unwrap() + q.offaxis(Complex64::new(t, -d)).unwrap()
            };
            let (d1, d2) = (1e-3, 5e-4);
            let j = jump(d2) * 2.0 - jump(d1);
            let s = sum(d2) * 2.0 - sum(d1);
            let f = q.function().value_at(t);
            prop_assert!((j - f).norm() < 1e-4, "jump {} vs {}", j, f);
            prop_assert!((s - q.principal_value(t) * 2.0).norm() < 1e-4);
        }
    }

    #[test]
    fn bounded_along_rays(p in moderate_params()) {
        let q = quadrature(p, &QuadratureConfig::default());
        let sup = q.function().values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for angle in [0.05f64, 0.5, 1.5, 2.6, 3.1, -0.05, -1.5, -3.1] {
            for k in 0..=12 {
                let r = 10f64.powf(k as f64 * 0.5);
                let z = Complex64::from_polar(r, angle);
                let f = q.offaxis(z).unwrap();
                prop_assert!(f.norm().is_finite() && f.norm() < 2.0 * sup + 1.0, "|F({})| = {}", z, f.norm());
            }
        }
    }

    #[test]
    fn grid_refinement_converges(p in moderate_params(), ts in prop::collection::vec(-50.0f64..50.0, 4)) {
        let base = QuadratureConfig::default();
        let fine = QuadratureConfig { n_points: 2 * base.n_points, ..base };
        let (a, b) = (quadrature(p, &base), quadrature(p, &fine));
        for t in ts {
            let (x, y) = (a.principal_value(t), b.principal_value(t));
            prop_assert!((x - y).norm() <= base.rel_tol * y.norm().max(1.0), "{} vs {}", x, y);
            let z = Complex64::new(t, 0.7);
            let (x, y) = (a.offaxis(z).unwrap(), b.offaxis(z).unwrap());
            prop_assert!((x - y).norm() <= base.rel_tol * y.norm().max(1.0));
        }
    }
}
