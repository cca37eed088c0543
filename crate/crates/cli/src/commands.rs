//! The commands. Each one turns an [`Invocation`] into an [`Outputs`] set and
//! a short human-readable summary; nothing here touches the output directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use halfplane_rbm_core::asymptotics::{fit_tail, origin_profile, tail_report, Regime, TailReport};
use halfplane_rbm_core::cauchy::QuadratureConfig;
use halfplane_rbm_core::density::{density_grid, symmetric_closed_form, vertical_marginal, Inverter};
use halfplane_rbm_core::kernel::{
    build_log_table, coefficient_g, coefficient_g_tilde, g_at_infinity, g_at_origin, index_grid,
    numeric_index,
};
use halfplane_rbm_core::laplace::{boundary_masses, build_engine, LateralTransformEngine};
use halfplane_rbm_core::model::{geometry, whiten, Geometry, ModelParams, WhitenedModel};
use halfplane_rbm_core::simulate::{self, analytic_estimate, HistogramSpec, SimConfig, SimResult};
use halfplane_rbm_core::{Complex64, Side};

use crate::output::{pair, Outputs};
use crate::settings::{read_object, AxisSpec, GridSpec, Resolver};
use crate::InputError;

/// A fully resolved command: replaying it needs nothing else but its input files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Invocation {
    Check {
        model: PathBuf,
    },
    Curves {
        model: PathBuf,
        grid: GridSpec,
        quad: QuadratureConfig,
    },
    Transform {
        model: PathBuf,
        grid: GridSpec,
        real_grid: Option<GridSpec>,
        points: Option<PathBuf>,
        quad: QuadratureConfig,
    },
    Density {
        model: PathBuf,
        grid: GridSpec,
        quad: QuadratureConfig,
    },
    Tails {
        model: PathBuf,
        theta_grid: GridSpec,
        fit: Option<GridSpec>,
        profile_radius: Option<f64>,
        quad: QuadratureConfig,
    },
    Simulate {
        model: PathBuf,
        sim: PathBuf,
        config: SimConfig,
        chains: usize,
    },
    Compare {
        result: PathBuf,
        model: PathBuf,
        quad: QuadratureConfig,
    },
}

impl Invocation {
    pub fn name(&self) -> &'static str {
        match self {
            Invocation::Check { .. } => "check",
            Invocation::Curves { .. } => "curves",
            Invocation::Transform { .. } => "transform",
            Invocation::Density { .. } => "density",
            Invocation::Tails { .. } => "tails",
            Invocation::Simulate { .. } => "simulate",
            Invocation::Compare { .. } => "compare",
        }
    }

    pub fn inputs(&self) -> Vec<PathBuf> {
        match self {
            Invocation::Check { model }
            | Invocation::Curves { model, .. }
            | Invocation::Density { model, .. }
            | Invocation::Tails { model, .. } => vec![model.clone()],
            Invocation::Transform { model, points, .. } => {
                let mut v = vec![model.clone()];
                v.extend(points.clone());
                v
            }
            Invocation::Simulate { model, sim, .. } => vec![model.clone(), sim.clone()],
            Invocation::Compare { result, model, .. } => vec![result.clone(), model.clone()],
        }
    }
}

#[derive(Debug)]
pub struct Outcome {
    pub outputs: Outputs,
    pub summary: String,
}

pub fn execute(inv: &Invocation) -> anyhow::Result<Outcome> {
    match inv {
        Invocation::Check { model } => check(model),
        Invocation::Curves { model, grid, quad } => curves(model, grid, quad),
        Invocation::Transform { model, grid, real_grid, points, quad } => {
            transform(model, grid, real_grid.as_ref(), points.as_deref(), quad)
        }
        Invocation::Density { model, grid, quad } => density(model, grid, quad),
        Invocation::Tails { model, theta_grid, fit, profile_radius, quad } => {
            tails(model, theta_grid, fit.as_ref(), *profile_radius, quad)
        }
        Invocation::Simulate { model, config, chains, .. } => simulate(model, config, *chains),
        Invocation::Compare { result, model, quad } => compare(result, model, quad),
    }
}

// ---------------------------------------------------------------------------
// Inputs and settings

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    #[serde(default = "identity")]
    sigma: [[f64; 2]; 2],
    mu: [f64; 2],
    r_plus: f64,
    r_minus: f64,
}

fn identity() -> [[f64; 2]; 2] {
    [[1.0, 0.0], [0.0, 1.0]]
}

/// Reads a model file; `sigma` defaults to the identity.
pub fn load_model(path: &Path) -> anyhow::Result<ModelParams> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let f: ModelFile = serde_json::from_str(&text)
        .map_err(|e| InputError::Model { path: path.display().to_string(), reason: e.to_string() })?;
    Ok(ModelParams { sigma: f.sigma, mu: f.mu, r_plus: f.r_plus, r_minus: f.r_minus })
}

fn load_whitened(path: &Path) -> anyhow::Result<(WhitenedModel, Geometry)> {
    let m = whiten(load_model(path)?)?;
    Ok((m, geometry(&m)))
}

pub fn resolve_quad(
    r: &mut Resolver,
    quad_points: Option<usize>,
    truncation: Option<f64>,
) -> anyhow::Result<QuadratureConfig> {
    let d = QuadratureConfig::default();
    let cfg = QuadratureConfig {
        n_points: r.pick("quad_points", quad_points, d.n_points)?,
        truncation: r.pick("truncation", truncation, d.truncation)?,
        ..d
    };
    cfg.check()?;
    Ok(cfg)
}

/// Keys accepted in a simulation file.
pub const SIM_KEYS: &[&str] =
    &["step_size", "steps", "burn_in", "seed", "strip_width", "batches", "chains", "histogram"];

/// Histogram as given in a simulation file: explicit edges or uniform bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HistogramFile {
    Edges { u_edges: Vec<f64>, v_edges: Vec<f64> },
    Uniform { u_min: f64, u_max: f64, nu: usize, v_max: f64, nv: usize },
}

impl HistogramFile {
    pub fn spec(&self) -> HistogramSpec {
        match self {
            HistogramFile::Edges { u_edges, v_edges } => {
                HistogramSpec { u_edges: u_edges.clone(), v_edges: v_edges.clone() }
            }
            HistogramFile::Uniform { u_min, u_max, nu, v_max, nv } => {
                HistogramSpec::uniform(*u_min, *u_max, *nu, *v_max, *nv)
            }
        }
    }
}

/// Command-line overrides of the simulation file.
#[derive(Debug, Clone, Copy, Default)]
pub struct SimFlags {
    pub seed: Option<u64>,
    pub chains: Option<usize>,
    pub steps: Option<u64>,
    pub step_size: Option<f64>,
}

/// Merges flags, the simulation file and the config file into a [`SimConfig`]
/// and a chain count.
pub fn resolve_simulation(
    r: Resolver,
    sim: &Path,
    flags: SimFlags,
) -> anyhow::Result<(SimConfig, usize, Resolver)> {
    let map = read_object(sim)?;
    if let Some(k) = map.keys().find(|k| !SIM_KEYS.contains(&k.as_str())) {
        return Err(InputError::UnknownKey(k.clone()).into());
    }
    let mut r = r.with_input(map);
    let step_size = r.pick("step_size", flags.step_size, 1e-3)?;
    let n_steps = r.pick("steps", flags.steps, 1_000_000u64)?;
    let seed = r.pick("seed", flags.seed, 0u64)?;
    let chains = r.pick("chains", flags.chains, 1usize)?;
    let histogram = r.pick(
        "histogram",
        None,
        HistogramFile::Uniform { u_min: -4.0, u_max: 4.0, nu: 8, v_max: 4.0, nv: 4 },
    )?;
    let mut cfg = SimConfig::new(step_size, n_steps, seed, histogram.spec());
    cfg.burn_in = r.pick("burn_in", None, cfg.burn_in)?;
    cfg.strip_width = r.pick("strip_width", None, cfg.strip_width)?;
    cfg.batches = r.pick("batches", None, cfg.batches)?;
    cfg.check()?;
    if chains == 0 {
        return Err(InputError::Value("chain count").into());
    }
    Ok((cfg, chains, r))
}

fn engine_for(m: &WhitenedModel, g: &Geometry, quad: &QuadratureConfig) -> anyhow::Result<LateralTransformEngine> {
    let table = build_log_table(m, g, quad)?;
    Ok(build_engine(m, g, table, quad)?)
}

/// Whether the whitened instance is the one with a closed-form density.
fn is_symmetric(m: &WhitenedModel) -> bool {
    let p = &m.params;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12;
    close(p.mu[0], 0.0) && close(p.mu[1], -1.0) && close(p.r_plus, -1.0) && close(p.r_minus, 1.0)
}

fn doubly_critical(reports: &[TailReport; 2]) -> bool {
    reports.iter().all(|r| r.regime == Regime::Critical)
}

fn max_finite(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    values.into_iter().filter(|x| x.is_finite()).fold(None, |m, x| Some(m.map_or(x, |m: f64| m.max(x))))
}

// ---------------------------------------------------------------------------
// check

#[derive(Serialize)]
struct SidePair<T> {
    plus: T,
    minus: T,
}

#[derive(Serialize)]
struct CheckReport {
    recurrent: bool,
    original: ModelParams,
    whitened: ModelParams,
    transform: [[f64; 2]; 2],
    jacobian: f64,
    alpha: f64,
    delta_plus: f64,
    delta_minus: f64,
    r_plus_star: f64,
    r_minus_star: f64,
    regimes: SidePair<Regime>,
    masses: SidePair<f64>,
    notes: Vec<String>,
}

fn check(model: &Path) -> anyhow::Result<Outcome> {
    let (m, g) = load_whitened(model)?;
    let reports = Side::BOTH.map(|s| tail_report(&m, &g, s));
    let (p0, m0) = boundary_masses(&m);
    let mut notes = Vec::new();
    if doubly_critical(&reports) {
        notes.push("doubly critical: both reflection slopes equal their critical values".to_string());
    }
    if is_symmetric(&m) {
        notes.push("closed-form density available".to_string());
    }
    let report = CheckReport {
        recurrent: true,
        original: m.original,
        whitened: m.params,
        transform: m.transform,
        jacobian: m.jacobian,
        alpha: g.alpha,
        delta_plus: g.delta_plus,
        delta_minus: g.delta_minus,
        r_plus_star: g.r_plus_star,
        r_minus_star: g.r_minus_star,
        regimes: SidePair { plus: reports[0].regime, minus: reports[1].regime },
        masses: SidePair { plus: p0, minus: m0 },
        notes,
    };
    // `+ 0.0` turns a negative zero into zero for printing.
    let t = m.transform.map(|row| row.map(|x| x + 0.0));
    let mut s = String::new();
    writeln!(s, "positive recurrent: mu2 < 0, r_plus < mu1/mu2 < r_minus")?;
    writeln!(s, "whitening T = [[{}, {}], [{}, {}]]", t[0][0], t[0][1], t[1][0], t[1][1])?;
    writeln!(s, "alpha = {}", g.alpha)?;
    writeln!(s, "delta+ = {}, delta- = {}", g.delta_plus, g.delta_minus)?;
    writeln!(s, "r+* = {}, r-* = {}", g.r_plus_star, g.r_minus_star)?;
    writeln!(s, "tail regimes: plus {}, minus {}", reports[0].regime.as_str(), reports[1].regime.as_str())?;
    write!(s, "boundary masses: phi+(0) = {p0}, phi-(0) = {m0}")?;
    for n in &report.notes {
        write!(s, "\nnote: {n}")?;
    }
    let mut outputs = Outputs::new();
    outputs.json("check.json", &report)?;
    Ok(Outcome { outputs, summary: s })
}

// ---------------------------------------------------------------------------
// curves

#[derive(Serialize)]
struct CurveRow {
    t: f64,
    g_re: f64,
    g_im: f64,
    g_tilde_re: f64,
    g_tilde_im: f64,
    log_g_tilde_re: f64,
    log_g_tilde_im: f64,
}

#[derive(Serialize)]
struct CurvesReport {
    g_origin: f64,
    g_plus_infinity: [f64; 2],
    g_minus_infinity: [f64; 2],
    log_g_tilde_limit: [f64; 2],
    index: f64,
    one_minus_alpha: f64,
}

fn curves(model: &Path, grid: &GridSpec, quad: &QuadratureConfig) -> anyhow::Result<Outcome> {
    let (m, g) = load_whitened(model)?;
    let ts = grid.axes(1)?[0].values();
    let table = build_log_table(&m, &g, quad)?;
    let rows: Vec<CurveRow> = ts
        .iter()
        .map(|&t| {
            let gv = coefficient_g(&m, t);
            let gt = coefficient_g_tilde(&m, &g, t);
            let lg = table.value_at(t);
            CurveRow {
                t,
                g_re: gv.re,
                g_im: gv.im,
                g_tilde_re: gt.re,
                g_tilde_im: gt.im,
                log_g_tilde_re: lg.re,
                log_g_tilde_im: lg.im,
            }
        })
        .collect();
    let samples: Vec<Complex64> =
        index_grid(table.scale(), 1e13, 8192).iter().map(|&t| coefficient_g(&m, t)).collect();
    let report = CurvesReport {
        g_origin: g_at_origin(&m),
        g_plus_infinity: pair(g_at_infinity(&m, Side::Plus)),
        g_minus_infinity: pair(g_at_infinity(&m, Side::Minus)),
        log_g_tilde_limit: pair(table.limit_value),
        index: numeric_index(&samples)?,
        one_minus_alpha: 1.0 - g.alpha,
    };
    let summary = format!("{} curve samples; index of G = {}", rows.len(), report.index);
    let mut outputs = Outputs::new();
    outputs.csv("curves.csv", &rows)?;
    outputs.json("curves.json", &report)?;
    Ok(Outcome { outputs, summary })
}

// ---------------------------------------------------------------------------
// transform

#[derive(Serialize)]
struct AxisRow {
    t: f64,
    phi_plus_re: f64,
    phi_plus_im: f64,
    phi_minus_re: f64,
    phi_minus_im: f64,
    g_re: f64,
    g_im: f64,
    bvp_residual: f64,
    oracle_error: Option<f64>,
}

#[derive(Serialize)]
struct RealRow {
    x: f64,
    phi_plus: Option<f64>,
    phi_minus: Option<f64>,
    oracle_error: Option<f64>,
}

#[derive(Deserialize)]
struct PointIn {
    t: f64,
    y_re: f64,
    y_im: f64,
}

#[derive(Serialize)]
struct PointRow {
    t: f64,
    y_re: f64,
    y_im: f64,
    phi_re: f64,
    phi_im: f64,
}

#[derive(Serialize)]
struct TransformReport {
    lambda: [f64; 2],
    masses: SidePair<f64>,
    phi_origin: [f64; 2],
    asymptotic_constants: SidePair<[f64; 2]>,
    max_bvp_residual: Option<f64>,
    max_oracle_error: Option<f64>,
}

/// `1/(2√(1 ∓ x))`, the transforms of the closed-form instance.
fn symmetric_phi(side: Side, x: Complex64) -> Complex64 {
    0.5 / (1.0 - side.sign() * x).sqrt()
}

fn transform(
    model: &Path,
    grid: &GridSpec,
    real_grid: Option<&GridSpec>,
    points: Option<&Path>,
    quad: &QuadratureConfig,
) -> anyhow::Result<Outcome> {
    let (m, g) = load_whitened(model)?;
    let ts = grid.axes(1)?[0].values();
    let xs = match real_grid {
        Some(rg) => rg.axes(1)?[0].values(),
        None => Vec::new(),
    };
    let pts: Vec<PointIn> = match points {
        Some(p) => {
            let mut rdr = csv::Reader::from_path(p).with_context(|| format!("reading {}", p.display()))?;
            rdr.deserialize().collect::<Result<_, _>>().with_context(|| format!("parsing {}", p.display()))?
        }
        None => Vec::new(),
    };
    let engine = engine_for(&m, &g, quad)?;
    let oracle = is_symmetric(&m);

    let axis: Vec<AxisRow> = ts
        .par_iter()
        .map(|&t| {
            let pv = engine.quadrature().principal_value(t);
            let pp = engine.axis_from_pv(Side::Plus, t, pv);
            let pm = engine.axis_from_pv(Side::Minus, t, pv);
            let gv = coefficient_g(&m, t);
            let x = Complex64::new(0.0, t);
            let oracle_error = oracle.then(|| {
                let ep = (pp - symmetric_phi(Side::Plus, x)).norm() / symmetric_phi(Side::Plus, x).norm();
                let em = (pm - symmetric_phi(Side::Minus, x)).norm() / symmetric_phi(Side::Minus, x).norm();
                ep.max(em)
            });
            AxisRow {
                t,
                phi_plus_re: pp.re,
                phi_plus_im: pp.im,
                phi_minus_re: pm.re,
                phi_minus_im: pm.im,
                g_re: gv.re,
                g_im: gv.im,
                bvp_residual: (pp - gv * pm).norm() / pp.norm(),
                oracle_error,
            }
        })
        .collect();

    let real: Vec<RealRow> = xs
        .par_iter()
        .map(|&x| -> anyhow::Result<RealRow> {
            let z = Complex64::new(x, 0.0);
            let mut row = RealRow { x, phi_plus: None, phi_minus: None, oracle_error: None };
            let mut err: Option<f64> = None;
            for side in Side::BOTH {
                if x * side.sign() > 0.0 {
                    continue;
                }
                let v = engine.phi(side, z)?;
                if oracle {
                    let e = symmetric_phi(side, z);
                    let rel = (v - e).norm() / e.norm();
                    err = Some(err.map_or(rel, |m| m.max(rel)));
                }
                match side {
                    Side::Plus => row.phi_plus = Some(v.re),
                    Side::Minus => row.phi_minus = Some(v.re),
                }
            }
            row.oracle_error = err;
            Ok(row)
        })
        .collect::<anyhow::Result<_>>()?;

    let point_rows: Vec<PointRow> = pts
        .par_iter()
        .map(|p| -> anyhow::Result<PointRow> {
            let v = engine.phi_bivariate(Complex64::new(0.0, p.t), Complex64::new(p.y_re, p.y_im))?;
            Ok(PointRow { t: p.t, y_re: p.y_re, y_im: p.y_im, phi_re: v.re, phi_im: v.im })
        })
        .collect::<anyhow::Result<_>>()?;

    let origin = engine.phi_bivariate(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))?;
    let report = TransformReport {
        lambda: pair(engine.lambda),
        masses: SidePair { plus: engine.phi0_plus, minus: engine.phi0_minus },
        phi_origin: pair(origin),
        asymptotic_constants: SidePair {
            plus: pair(engine.asymptotic_constant(Side::Plus)),
            minus: pair(engine.asymptotic_constant(Side::Minus)),
        },
        max_bvp_residual: max_finite(axis.iter().map(|r| r.bvp_residual)),
        max_oracle_error: max_finite(
            axis.iter().filter_map(|r| r.oracle_error).chain(real.iter().filter_map(|r| r.oracle_error)),
        ),
    };
    let mut summary = format!(
        "{} axis points, {} real points, {} bivariate points; phi(0,0) = {}",
        axis.len(),
        real.len(),
        point_rows.len(),
        origin.re
    );
    if let Some(e) = report.max_oracle_error {
        write!(summary, "; max relative error against the closed form = {e:e}")?;
    }
    let mut outputs = Outputs::new();
    outputs.csv("axis.csv", &axis)?;
    if real_grid.is_some() {
        outputs.csv("real.csv", &real)?;
    }
    if points.is_some() {
        outputs.csv("points.csv", &point_rows)?;
    }
    outputs.json("transform.json", &report)?;
    Ok(Outcome { outputs, summary })
}

// ---------------------------------------------------------------------------
// density

#[derive(Serialize)]
struct DensityRow {
    u: f64,
    v: f64,
    density: f64,
    oracle: Option<f64>,
}

#[derive(Serialize)]
struct MarginalRow {
    v: f64,
    marginal_grid: f64,
    marginal_exact: f64,
}

#[derive(Serialize)]
struct DensityReport {
    grid: GridSpec,
    mass_estimate: f64,
    clamped: usize,
    undefined_points: usize,
    max_oracle_error: Option<f64>,
}

fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2).zip(ys.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}

fn density(model: &Path, grid: &GridSpec, quad: &QuadratureConfig) -> anyhow::Result<Outcome> {
    let (m, g) = load_whitened(model)?;
    let axes = grid.axes(2)?;
    let (us, vs) = (axes[0].values(), axes[1].values());
    if vs.iter().any(|&v| v < 0.0) {
        return Err(InputError::Value("grid: heights must be non-negative").into());
    }
    let engine = engine_for(&m, &g, quad)?;
    let inv = if vs.contains(&0.0) { Inverter::with_boundaries(&engine)? } else { Inverter::new(&engine) };
    let t = m.transform;
    let oracle = is_symmetric(&m);

    // One row per height: a fixed original v is a fixed whitened height.
    let rows: Vec<(Vec<f64>, usize)> = vs
        .par_iter()
        .map(|&v| -> anyhow::Result<(Vec<f64>, usize)> {
            let wu: Vec<f64> = us.iter().map(|&u| t[0][0] * u + t[0][1] * v).collect();
            let wv = t[1][1] * v;
            let d = density_grid(&inv, &wu, &[wv])?;
            let row = d.values[0].iter().map(|x| x * m.jacobian).collect();
            Ok((row, d.clamped))
        })
        .collect::<anyhow::Result<_>>()?;

    let mut table = Vec::with_capacity(us.len() * vs.len());
    let mut max_err: Option<f64> = None;
    for (&v, (row, _)) in vs.iter().zip(&rows) {
        for (&u, &d) in us.iter().zip(row) {
            let exact = if oracle && (u, v) != (0.0, 0.0) {
                let wu = t[0][0] * u + t[0][1] * v;
                Some(m.jacobian * symmetric_closed_form(wu, t[1][1] * v)?)
            } else {
                None
            };
            if let Some(e) = exact {
                if d.is_finite() {
                    let err = (d - e).abs();
                    max_err = Some(max_err.map_or(err, |m| m.max(err)));
                }
            }
            table.push(DensityRow { u, v, density: d, oracle: exact });
        }
    }
    let marginal: Vec<MarginalRow> = vs
        .iter()
        .zip(&rows)
        .map(|(&v, (row, _))| MarginalRow {
            v,
            marginal_grid: trapezoid(&us, row),
            marginal_exact: t[1][1] * vertical_marginal(m.mu2(), t[1][1] * v),
        })
        .collect();
    let finite_rows: Vec<f64> = rows
        .iter()
        .map(|(row, _)| {
            let clean: Vec<f64> = row.iter().map(|x| if x.is_finite() { *x } else { 0.0 }).collect();
            trapezoid(&us, &clean)
        })
        .collect();
    let report = DensityReport {
        grid: grid.clone(),
        mass_estimate: trapezoid(&vs, &finite_rows),
        clamped: rows.iter().map(|r| r.1).sum(),
        undefined_points: table.iter().filter(|r| !r.density.is_finite()).count(),
        max_oracle_error: max_err,
    };
    let mut summary = format!(
        "{}x{} density grid; mass on grid = {}",
        us.len(),
        vs.len(),
        report.mass_estimate
    );
    if let Some(e) = max_err {
        write!(summary, "; max absolute error against the closed form = {e:e}")?;
    }
    let mut outputs = Outputs::new();
    outputs.csv("density.csv", &table)?;
    outputs.csv("marginal.csv", &marginal)?;
    outputs.json("density.json", &report)?;
    Ok(Outcome { outputs, summary })
}

// ---------------------------------------------------------------------------
// tails

#[derive(Serialize)]
struct FitReport {
    range: AxisSpec,
    gamma: f64,
    kappa: f64,
    log_prefactor: f64,
    residual: f64,
    gamma_relative_error: f64,
    kappa_error: f64,
}

#[derive(Serialize)]
struct TailsReport {
    alpha: f64,
    delta_plus: f64,
    doubly_critical: bool,
    plus: TailReport,
    minus: TailReport,
    fits: Option<SidePair<FitReport>>,
}

#[derive(Serialize)]
struct ProfileRow {
    theta: f64,
    profile: f64,
    density: Option<f64>,
    ratio: Option<f64>,
}

fn tails(
    model: &Path,
    theta_grid: &GridSpec,
    fit: Option<&GridSpec>,
    profile_radius: Option<f64>,
    quad: &QuadratureConfig,
) -> anyhow::Result<Outcome> {
    let (m, g) = load_whitened(model)?;
    let thetas = theta_grid.axes(1)?[0].values();
    if thetas.iter().any(|&th| !(th > 0.0 && th < std::f64::consts::PI)) {
        return Err(InputError::Value("theta grid: angles must lie in (0, pi)").into());
    }
    if let Some(r) = profile_radius {
        if r.is_nan() || r <= 0.0 {
            return Err(InputError::Value("profile radius").into());
        }
    }
    let fit_axis = match fit {
        Some(f) => Some(f.axes(1)?[0]),
        None => None,
    };
    if fit_axis.is_some_and(|a| a.min <= 0.0) {
        return Err(InputError::Value("fit range: distances must be positive").into());
    }
    let reports = Side::BOTH.map(|s| tail_report(&m, &g, s));

    let engine = if fit_axis.is_some() || profile_radius.is_some() {
        Some(engine_for(&m, &g, quad)?)
    } else {
        None
    };
    let fits = match (fit_axis, &engine) {
        (Some(axis), Some(e)) => {
            let inv = Inverter::with_boundaries(e)?;
            let us = axis.values();
            let one = |side: Side, report: &TailReport| -> anyhow::Result<FitReport> {
                let signed: Vec<f64> = us.iter().map(|u| side.sign() * u).collect();
                let d = inv.boundary_row(side, &signed)?;
                let samples: Vec<(f64, f64)> = us.iter().copied().zip(d).collect();
                let f = fit_tail(&samples)?;
                Ok(FitReport {
                    range: axis,
                    gamma: f.gamma,
                    kappa: f.kappa,
                    log_prefactor: f.log_prefactor,
                    residual: f.residual,
                    gamma_relative_error: (f.gamma - report.gamma).abs() / report.gamma,
                    kappa_error: (f.kappa - report.kappa).abs(),
                })
            };
            Some(SidePair { plus: one(Side::Plus, &reports[0])?, minus: one(Side::Minus, &reports[1])? })
        }
        _ => None,
    };

    let profile: Vec<ProfileRow> = match (profile_radius, &engine) {
        (Some(r), Some(e)) => {
            let inv = Inverter::new(e);
            thetas
                .par_iter()
                .map(|&th| -> anyhow::Result<ProfileRow> {
                    let d = inv.interior_density(r * th.cos(), r * th.sin())?;
                    let p = origin_profile(&g, r, th);
                    Ok(ProfileRow { theta: th, profile: origin_profile(&g, 1.0, th), density: Some(d), ratio: Some(d / p) })
                })
                .collect::<anyhow::Result<_>>()?
        }
        _ => thetas
            .iter()
            .map(|&th| ProfileRow { theta: th, profile: origin_profile(&g, 1.0, th), density: None, ratio: None })
            .collect(),
    };

    let report = TailsReport {
        alpha: g.alpha,
        delta_plus: g.delta_plus,
        doubly_critical: doubly_critical(&reports),
        plus: reports[0],
        minus: reports[1],
        fits,
    };
    let mut summary = String::new();
    for r in &reports {
        writeln!(
            summary,
            "{}: {} gamma = {} kappa = {}",
            r.side.as_str(),
            r.regime.as_str(),
            r.gamma,
            r.kappa
        )?;
    }
    if let Some(f) = &report.fits {
        writeln!(summary, "fit plus: gamma = {} kappa = {}", f.plus.gamma, f.plus.kappa)?;
        writeln!(summary, "fit minus: gamma = {} kappa = {}", f.minus.gamma, f.minus.kappa)?;
    }
    let ratios: Vec<f64> = profile.iter().filter_map(|p| p.ratio).collect();
    if let (Some(hi), Some(lo)) = (max_finite(ratios.iter().copied()), max_finite(ratios.iter().map(|x| -x))) {
        writeln!(summary, "profile ratio spread: {}", hi / -lo - 1.0)?;
    }
    let mut outputs = Outputs::new();
    outputs.json("tails.json", &report)?;
    outputs.csv("profile.csv", &profile)?;
    Ok(Outcome { outputs, summary: summary.trim_end().to_string() })
}

// ---------------------------------------------------------------------------
// simulate

#[derive(Serialize)]
struct CellRow {
    u_lo: f64,
    u_hi: f64,
    v_lo: f64,
    v_hi: f64,
    count: u64,
    density: f64,
    se: f64,
}

#[derive(Serialize)]
struct BinRow {
    lo: f64,
    hi: f64,
    density: f64,
    se: Option<f64>,
}

#[derive(Serialize)]
struct BoundaryRow {
    u_lo: f64,
    u_hi: f64,
    plus: f64,
    minus: f64,
}

#[derive(Serialize)]
struct SimSummary {
    chains: usize,
    seeds: Vec<u64>,
    n_effective: u64,
    elapsed: f64,
    local_time_rates: SidePair<f64>,
    masses: SidePair<f64>,
    outside_fraction: f64,
}

/// Runs `chains` independent chains with seeds `seed, seed + 1, …` and merges
/// them in chain order.
pub fn run_chains(m: &WhitenedModel, cfg: &SimConfig, chains: usize) -> anyhow::Result<SimResult> {
    let results: Vec<SimResult> = (0..chains)
        .into_par_iter()
        .map(|i| {
            let mut c = cfg.clone();
            c.seed = cfg.seed.wrapping_add(i as u64);
            simulate::run(m, &c)
        })
        .collect::<Result<_, _>>()?;
    let mut iter = results.into_iter();
    let mut merged = iter.next().ok_or(InputError::Value("chain count"))?;
    for r in iter {
        merged.merge(&r)?;
    }
    Ok(merged)
}

fn simulate(model: &Path, cfg: &SimConfig, chains: usize) -> anyhow::Result<Outcome> {
    let (m, _) = load_whitened(model)?;
    let result = run_chains(&m, cfg, chains)?;
    let est = result.estimate();
    let spec = &result.histogram;
    let nu = spec.nu();
    let mut cells = Vec::with_capacity(est.interior.len());
    for (j, v) in spec.v_edges.windows(2).enumerate() {
        for (i, u) in spec.u_edges.windows(2).enumerate() {
            let c = j * nu + i;
            cells.push(CellRow {
                u_lo: u[0],
                u_hi: u[1],
                v_lo: v[0],
                v_hi: v[1],
                count: result.counts[c],
                density: est.interior[c],
                se: est.interior_se[c],
            });
        }
    }
    let marginal: Vec<BinRow> = spec
        .v_edges
        .windows(2)
        .enumerate()
        .map(|(j, v)| BinRow { lo: v[0], hi: v[1], density: est.marginal[j], se: Some(est.marginal_se[j]) })
        .collect();
    let boundary: Vec<BoundaryRow> = spec
        .u_edges
        .windows(2)
        .enumerate()
        .map(|(i, u)| BoundaryRow { u_lo: u[0], u_hi: u[1], plus: est.boundary[0][i], minus: est.boundary[1][i] })
        .collect();
    let rates = result.local_time_rates();
    let (p0, m0) = boundary_masses(&m);
    let summary = SimSummary {
        chains,
        seeds: (0..chains).map(|i| cfg.seed.wrapping_add(i as u64)).collect(),
        n_effective: result.n_effective,
        elapsed: result.elapsed(),
        local_time_rates: SidePair { plus: rates[0], minus: rates[1] },
        masses: SidePair { plus: p0, minus: m0 },
        outside_fraction: result.outside_fraction(),
    };
    let text = format!(
        "{} recorded states; local-time rates {} / {} (masses {} / {})",
        result.n_effective, rates[0], rates[1], p0, m0
    );
    let mut outputs = Outputs::new();
    outputs.json("result.json", &result)?;
    outputs.csv("histogram.csv", &cells)?;
    outputs.csv("marginal.csv", &marginal)?;
    outputs.csv("boundary.csv", &boundary)?;
    outputs.json("summary.json", &summary)?;
    Ok(Outcome { outputs, summary: text })
}

// ---------------------------------------------------------------------------
// compare

#[derive(Serialize)]
struct CompareCell {
    u_lo: f64,
    u_hi: f64,
    v_lo: f64,
    v_hi: f64,
    empirical: f64,
    se: f64,
    analytic: f64,
    flagged: bool,
}

#[derive(Serialize)]
struct CompareReport {
    discrepancy: simulate::Discrepancy,
    local_time_rates: SidePair<f64>,
    masses: SidePair<f64>,
    rate_relative_error: SidePair<f64>,
    outside_fraction: f64,
}

fn compare(result: &Path, model: &Path, quad: &QuadratureConfig) -> anyhow::Result<Outcome> {
    let text = fs::read_to_string(result).with_context(|| format!("reading {}", result.display()))?;
    let sim: SimResult =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", result.display()))?;
    let (m, g) = load_whitened(model)?;
    let engine = engine_for(&m, &g, quad)?;
    let inv = Inverter::with_boundaries(&engine)?;
    let empirical = sim.estimate();
    let analytic = analytic_estimate(&inv, &sim.histogram)?;
    let d = simulate::compare(&empirical, &analytic)?;

    let spec = &sim.histogram;
    let nu = spec.nu();
    let mut cells = Vec::new();
    for (j, v) in spec.v_edges.windows(2).enumerate() {
        for (i, u) in spec.u_edges.windows(2).enumerate() {
            let c = j * nu + i;
            let diff = (empirical.interior[c] - analytic.interior[c]).abs();
            let se = empirical.interior_se[c].max(empirical.resolution[c]);
            cells.push(CompareCell {
                u_lo: u[0],
                u_hi: u[1],
                v_lo: v[0],
                v_hi: v[1],
                empirical: empirical.interior[c],
                se: empirical.interior_se[c],
                analytic: analytic.interior[c],
                flagged: diff > 3.0 * se && diff > 1e-12,
            });
        }
    }
    let marginal: Vec<CompareBin> = spec
        .v_edges
        .windows(2)
        .enumerate()
        .map(|(j, v)| CompareBin { lo: v[0], hi: v[1], empirical: empirical.marginal[j], analytic: analytic.marginal[j] })
        .collect();
    let rates = sim.local_time_rates();
    let (p0, m0) = (engine.phi0_plus, engine.phi0_minus);
    let report = CompareReport {
        discrepancy: d.clone(),
        local_time_rates: SidePair { plus: rates[0], minus: rates[1] },
        masses: SidePair { plus: p0, minus: m0 },
        rate_relative_error: SidePair { plus: (rates[0] - p0).abs() / p0, minus: (rates[1] - m0).abs() / m0 },
        outside_fraction: sim.outside_fraction(),
    };
    let summary = format!(
        "interior L1 = {}, marginal sup = {}, flagged cells = {}, local-time errors {} / {}",
        d.interior_l1,
        d.marginal_sup,
        d.flagged_cells,
        report.rate_relative_error.plus,
        report.rate_relative_error.minus
    );
    let mut outputs = Outputs::new();
    outputs.json("compare.json", &report)?;
    outputs.csv("compare_cells.csv", &cells)?;
    outputs.csv("compare_marginal.csv", &marginal)?;
    Ok(Outcome { outputs, summary })
}

#[derive(Serialize)]
struct CompareBin {
    lo: f64,
    hi: f64,
    empirical: f64,
    analytic: f64,
}
