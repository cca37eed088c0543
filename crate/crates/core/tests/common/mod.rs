#![allow(dead_code)]

use halfplane_rbm_core::cauchy::QuadratureConfig;
use halfplane_rbm_core::kernel::build_log_table;
use halfplane_rbm_core::laplace::{build_engine, LateralTransformEngine};
use halfplane_rbm_core::model::{geometry, whiten, ModelParams, WhitenedModel};
use proptest::prelude::*;

/// Recurrent instances with a general covariance: `r± = ρ ∓ gap±` around
/// `ρ = μ₁/μ₂`.
pub fn recurrent_params() -> impl Strategy<Value = ModelParams> {
    (0.2f64..3.0, 0.2f64..3.0, -0.9f64..0.9, -2.0f64..2.0, 0.2f64..2.0, 0.05f64..3.0, 0.05f64..3.0).prop_map(
        |(s11, s22, corr, mu1, m2, gp, gm)| {
            let s12 = corr * (s11 * s22).sqrt();
            let rho = mu1 / -m2;
            ModelParams {
                sigma: [[s11, s12], [s12, s22]],
                mu: [mu1, -m2],
                r_plus: rho - gp,
                r_minus: rho + gm,
            }
        },
    )
}

/// Identity-covariance instances kept away from degenerate corners, for the
/// tests that build a full transform engine.
pub fn moderate_params() -> impl Strategy<Value = ModelParams> {
    (-0.8f64..0.8, 0.4f64..1.5, 0.2f64..2.0, 0.2f64..2.0).prop_map(|(mu1, m2, gp, gm)| {
        let rho = mu1 / -m2;
        ModelParams::standard([mu1, -m2], rho - gp, rho + gm)
    })
}

pub fn engine(p: ModelParams) -> (WhitenedModel, LateralTransformEngine) {
    let m = whiten(p).unwrap();
    let g = geometry(&m);
    let cfg = QuadratureConfig::default();
    let table = build_log_table(&m, &g, &cfg).unwrap();
    (m, build_engine(&m, &g, table, &cfg).unwrap())
}
