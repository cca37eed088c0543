//! Euler scheme for the reflected process and histogram estimators of its
//! stationary law, for validation of the analytic pipeline.
//!
//! Each step proposes `X + μh + √h ξ`; a proposal below the axis is pushed
//! back along `R± = (r±, 1)` by its depth, the side being chosen from the
//! proposal's first coordinate. The accumulated pushes per unit time estimate
//! the local-time rates, whose expectations are the boundary masses `φ±(0)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::density::Inverter;
use crate::math::GaussLegendre;
use crate::model::WhitenedModel;
#[allow(unused_imports)]
use crate::prelude::*;
use crate::{Error, Result, Side};

/// Bin edges of the histograms.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HistogramSpec {
    pub u_edges: Vec<f64>,
    pub v_edges: Vec<f64>,
}

impl HistogramSpec {
    /// `nu × nv` equal bins over `[u_min, u_max] × [0, v_max]`.
    pub fn uniform(u_min: f64, u_max: f64, nu: usize, v_max: f64, nv: usize) -> Self {
        let edges = |a: f64, b: f64, n: usize| (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
        HistogramSpec { u_edges: edges(u_min, u_max, nu), v_edges: edges(0.0, v_max, nv) }
    }

    pub fn nu(&self) -> usize {
        self.u_edges.len() - 1
    }

    pub fn nv(&self) -> usize {
        self.v_edges.len() - 1
    }

    fn check(&self) -> Result<()> {
        for e in [&self.u_edges, &self.v_edges] {
            if e.len() < 2 || e.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::InvalidConfig("histogram edges must be increasing"));
            }
        }
        if self.v_edges[0] != 0.0 {
            return Err(Error::InvalidConfig("vertical edges must start at 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimConfig {
    pub step_size: f64,
    pub n_steps: u64,
    pub burn_in: u64,
    pub seed: u64,
    pub strip_width: f64,
    pub histogram: HistogramSpec,
    /// Number of consecutive batches used for standard errors.
    pub batches: usize,
}

impl SimConfig {
    /// Burn-in of 10% and a strip of width `6√h`.
    ///
    /// Projection leaves an atom of mass `O(√h)` on the axis (the discrete chain
    /// sits about `0.58√h` below the continuous one), which biases the strip
    /// estimate of `π(u, 0)` by roughly `0.58√h/ε`.
    pub fn new(step_size: f64, n_steps: u64, seed: u64, histogram: HistogramSpec) -> Self {
        SimConfig {
            step_size,
            n_steps,
            burn_in: n_steps / 10,
            seed,
            strip_width: 6.0 * step_size.sqrt(),
            histogram,
            batches: 20,
        }
    }

    pub fn check(&self) -> Result<()> {
        if !(self.step_size > 0.0 && self.step_size <= 0.01) {
            return Err(Error::InvalidConfig("step size must lie in (0, 0.01]"));
        }
        if self.burn_in >= self.n_steps {
            return Err(Error::InvalidConfig("burn-in must be shorter than the run"));
        }
        if !(self.strip_width >= self.step_size.sqrt()) {
            return Err(Error::InvalidConfig("strip width must be at least sqrt(step size)"));
        }
        if self.batches < 2 || (self.n_steps - self.burn_in) < self.batches as u64 {
            return Err(Error::InvalidConfig("need at least two non-empty batches"));
        }
        self.histogram.check()
    }
}

/// Raw counts of one or more chains.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimResult {
    pub histogram: HistogramSpec,
    pub step_size: f64,
    pub strip_width: f64,
    /// Recorded (post burn-in) states.
    pub n_effective: u64,
    /// `counts[j * nu + i]` for the cell `(u_i, v_j)`.
    pub counts: Vec<u64>,
    /// Per-batch cell counts, in chain order.
    pub batch_counts: Vec<Vec<u64>>,
    pub batch_sizes: Vec<u64>,
    /// Vertical histogram over all `u`.
    pub marginal_counts: Vec<u64>,
    pub batch_marginal: Vec<Vec<u64>>,
    /// Strip occupation `y < ε` per `u` bin, split by the sign of `u`.
    pub boundary_counts: [Vec<u64>; 2],
    /// Total push magnitudes per side.
    pub pushes: [f64; 2],
}

/// One Euler step; returns the new state and the pushes `[plus, minus]`.
pub fn step<R: Rng + ?Sized>(state: [f64; 2], m: &WhitenedModel, h: f64, rng: &mut R) -> ([f64; 2], [f64; 2]) {
    let sh = h.sqrt();
    let dx: f64 = rng.sample(StandardNormal);
    let dy: f64 = rng.sample(StandardNormal);
    let proposal = [state[0] + m.mu1() * h + sh * dx, state[1] + m.mu2() * h + sh * dy];
    reflect(proposal, m)
}

/// Projection of a proposal onto the closed half-plane along `R±`.
pub fn reflect(proposal: [f64; 2], m: &WhitenedModel) -> ([f64; 2], [f64; 2]) {
    let [x, y] = proposal;
    if y >= 0.0 {
        return (proposal, [0.0, 0.0]);
    }
    let push = -y;
    // x = 0 exactly goes to the plus side.
    let side = if x >= 0.0 { Side::Plus } else { Side::Minus };
    let new = [x + push * m.slope(side), 0.0];
    match side {
        Side::Plus => (new, [push, 0.0]),
        Side::Minus => (new, [0.0, push]),
    }
}

fn bin(edges: &[f64], x: f64) -> Option<usize> {
    if x < edges[0] || x >= edges[edges.len() - 1] {
        return None;
    }
    Some(edges.partition_point(|&e| e <= x) - 1)
}

/// Runs one chain from `(0, 1)`; deterministic in `cfg.seed`.
pub fn run(m: &WhitenedModel, cfg: &SimConfig) -> Result<SimResult> {
    cfg.check()?;
    let spec = &cfg.histogram;
    let (nu, nv) = (spec.nu(), spec.nv());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let h = cfg.step_size;
    let mut state = [0.0, 1.0];
    for _ in 0..cfg.burn_in {
        state = step(state, m, h, &mut rng).0;
    }
    let recorded = cfg.n_steps - cfg.burn_in;
    let nb = cfg.batches as u64;
    let mut counts = vec![0u64; nu * nv];
    let mut marginal = vec![0u64; nv];
    let mut boundary = [vec![0u64; nu], vec![0u64; nu]];
    let mut batch_counts = Vec::with_capacity(cfg.batches);
    let mut batch_marginal = Vec::with_capacity(cfg.batches);
    let mut batch_sizes = Vec::with_capacity(cfg.batches);
    let mut pushes = [0.0, 0.0];
    for b in 0..nb {
        let len = recorded * (b + 1) / nb - recorded * b / nb;
        let mut cells = vec![0u64; nu * nv];
        let mut marg = vec![0u64; nv];
        for _ in 0..len {
            let (next, p) = step(state, m, h, &mut rng);
            state = next;
            pushes[0] += p[0];
            pushes[1] += p[1];
            let [x, y] = state;
            let bu = bin(&spec.u_edges, x);
            if let Some(j) = bin(&spec.v_edges, y) {
                marg[j] += 1;
                if let Some(i) = bu {
                    cells[j * nu + i] += 1;
                }
            }
            if y < cfg.strip_width {
                if let Some(i) = bu {
                    boundary[if x >= 0.0 { 0 } else { 1 }][i] += 1;
                }
            }
        }
        for (c, b) in counts.iter_mut().zip(&cells) {
            *c += b;
        }
        for (c, b) in marginal.iter_mut().zip(&marg) {
            *c += b;
        }
        batch_counts.push(cells);
        batch_marginal.push(marg);
        batch_sizes.push(len);
    }
    Ok(SimResult {
        histogram: spec.clone(),
        step_size: h,
        strip_width: cfg.strip_width,
        n_effective: recorded,
        counts,
        batch_counts,
        batch_sizes,
        marginal_counts: marginal,
        batch_marginal,
        boundary_counts: boundary,
        pushes,
    })
}

impl SimResult {
    /// Appends another chain's counts (same histogram, step and strip).
    pub fn merge(&mut self, other: &SimResult) -> Result<()> {
        if self.histogram != other.histogram
            || self.step_size != other.step_size
            || self.strip_width != other.strip_width
        {
            return Err(Error::GridMismatch("chains use different settings"));
        }
        self.n_effective += other.n_effective;
        add(&mut self.counts, &other.counts);
        add(&mut self.marginal_counts, &other.marginal_counts);
        for s in 0..2 {
            add(&mut self.boundary_counts[s], &other.boundary_counts[s]);
            self.pushes[s] += other.pushes[s];
        }
        self.batch_counts.extend(other.batch_counts.iter().cloned());
        self.batch_marginal.extend(other.batch_marginal.iter().cloned());
        self.batch_sizes.extend(other.batch_sizes.iter().copied());
        Ok(())
    }

    /// Simulated time after burn-in.
    pub fn elapsed(&self) -> f64 {
        self.n_effective as f64 * self.step_size
    }

    /// Local-time rates `ℓ±(T)/T`, estimates of `φ±(0)`.
    pub fn local_time_rates(&self) -> [f64; 2] {
        let t = self.elapsed();
        [self.pushes[0] / t, self.pushes[1] / t]
    }

    /// Fraction of recorded states outside the 2D histogram.
    pub fn outside_fraction(&self) -> f64 {
        let inside: u64 = self.counts.iter().sum();
        1.0 - inside as f64 / self.n_effective as f64
    }

    /// Density estimates with batch-means standard errors.
    pub fn estimate(&self) -> Estimate {
        let spec = &self.histogram;
        let (nu, nv) = (spec.nu(), spec.nv());
        let areas = cell_areas(spec);
        let vw: Vec<f64> = spec.v_edges.windows(2).map(|w| w[1] - w[0]).collect();
        let n = self.n_effective as f64;
        let interior = self.counts.iter().zip(&areas).map(|(&c, a)| c as f64 / (n * a)).collect();
        let interior_se = batch_se(&self.batch_counts, &self.batch_sizes, &areas);
        let marginal = self.marginal_counts.iter().zip(&vw).map(|(&c, w)| c as f64 / (n * w)).collect();
        let marginal_se = batch_se(&self.batch_marginal, &self.batch_sizes, &vw);
        let uw: Vec<f64> = spec.u_edges.windows(2).map(|w| w[1] - w[0]).collect();
        let boundary = [0, 1].map(|s| {
            self.boundary_counts[s]
                .iter()
                .zip(&uw)
                .map(|(&c, w)| c as f64 / (n * w * self.strip_width))
                .collect()
        });
        let resolution = areas.iter().map(|a| 1.0 / (n * a)).collect();
        debug_assert_eq!(areas.len(), nu * nv);
        Estimate {
            histogram: spec.clone(),
            interior,
            interior_se,
            resolution,
            marginal,
            marginal_se,
            boundary,
        }
    }
}

fn add(a: &mut [u64], b: &[u64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

fn cell_areas(spec: &HistogramSpec) -> Vec<f64> {
    let mut areas = Vec::with_capacity(spec.nu() * spec.nv());
    for v in spec.v_edges.windows(2) {
        for u in spec.u_edges.windows(2) {
            areas.push((u[1] - u[0]) * (v[1] - v[0]));
        }
    }
    areas
}

/// Standard error of the mean of per-batch densities.
fn batch_se(batches: &[Vec<u64>], sizes: &[u64], widths: &[f64]) -> Vec<f64> {
    let k = batches.len() as f64;
    (0..widths.len())
        .map(|c| {
            let d: Vec<f64> = batches
                .iter()
                .zip(sizes)
                .map(|(b, &n)| b[c] as f64 / (n as f64 * widths[c]))
                .collect();
            let mean = d.iter().sum::<f64>() / k;
            let var = d.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0);
            (var / k).sqrt()
        })
        .collect()
}

/// Binned densities on a histogram: interior cell averages, boundary-line
/// bin averages of `π(u, 0)` per side, and the vertical marginal.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub histogram: HistogramSpec,
    pub interior: Vec<f64>,
    pub interior_se: Vec<f64>,
    /// Density of a single count in each cell (zero for exact references).
    pub resolution: Vec<f64>,
    pub marginal: Vec<f64>,
    pub marginal_se: Vec<f64>,
    pub boundary: [Vec<f64>; 2],
}

/// Exact bin averages computed from the analytic densities (4×4 Gauss points
/// per cell). `inv` needs boundary lines for the boundary bins.
pub fn analytic_estimate(inv: &Inverter<'_>, spec: &HistogramSpec) -> Result<Estimate> {
    spec.check()?;
    let gl = GaussLegendre::new(4);
    let (nu, nv) = (spec.nu(), spec.nv());
    let mut interior = vec![0.0; nu * nv];
    let mut u_nodes = Vec::new();
    for (i, w) in spec.u_edges.windows(2).enumerate() {
        for (u, wu) in gl.mapped(w[0], w[1]) {
            u_nodes.push((i, u, wu / (w[1] - w[0])));
        }
    }
    let us: Vec<f64> = u_nodes.iter().map(|n| n.1).collect();
    let mut marginal = vec![0.0; nv];
    let mu2 = inv.engine().model.mu2();
    for (j, w) in spec.v_edges.windows(2).enumerate() {
        let height = w[1] - w[0];
        for (v, wv) in gl.mapped(w[0], w[1]) {
            let row = inv.interior_row(v, &us)?;
            for (&(i, _, wu), d) in u_nodes.iter().zip(row) {
                interior[j * nu + i] += d * wu * wv / height;
            }
        }
        // ∫ of −2μ₂e^{2μ₂v} over the bin.
        marginal[j] = ((2.0 * mu2 * w[0]).exp() - (2.0 * mu2 * w[1]).exp()) / height;
    }
    let mut boundary = [vec![0.0; nu], vec![0.0; nu]];
    for side in Side::BOTH {
        let s = if side == Side::Plus { 0 } else { 1 };
        for (i, w) in spec.u_edges.windows(2).enumerate() {
            let (a, b) = if side == Side::Plus {
                (w[0].max(0.0), w[1].max(0.0))
            } else {
                (w[0].min(0.0), w[1].min(0.0))
            };
            if b <= a {
                continue;
            }
            let nodes: Vec<(f64, f64)> = gl.mapped(a, b).collect();
            let us: Vec<f64> = nodes.iter().map(|n| n.0).collect();
            let vals = inv.boundary_row(side, &us)?;
            let integral: f64 = nodes.iter().zip(vals).map(|(n, d)| 2.0 * d * n.1).sum();
            boundary[s][i] = integral / (w[1] - w[0]);
        }
    }
    Ok(Estimate {
        histogram: spec.clone(),
        interior,
        interior_se: vec![0.0; nu * nv],
        resolution: vec![0.0; nu * nv],
        marginal,
        marginal_se: vec![0.0; nv],
        boundary,
    })
}

/// Distances between two binned estimates.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Discrepancy {
    pub interior_sup: f64,
    pub interior_l1: f64,
    pub boundary_sup: f64,
    pub boundary_l1: f64,
    pub marginal_sup: f64,
    pub marginal_l1: f64,
    /// Interior cells differing by more than three standard errors.
    pub flagged_cells: usize,
}

pub fn compare(a: &Estimate, b: &Estimate) -> Result<Discrepancy> {
    if a.histogram != b.histogram {
        return Err(Error::GridMismatch("estimates use different histograms"));
    }
    let areas = cell_areas(&a.histogram);
    let mut d = Discrepancy {
        interior_sup: 0.0,
        interior_l1: 0.0,
        boundary_sup: 0.0,
        boundary_l1: 0.0,
        marginal_sup: 0.0,
        marginal_l1: 0.0,
        flagged_cells: 0,
    };
    for (c, area) in areas.iter().enumerate() {
        let diff = (a.interior[c] - b.interior[c]).abs();
        d.interior_sup = d.interior_sup.max(diff);
        d.interior_l1 += diff * area;
        let se = a.interior_se[c].hypot(b.interior_se[c]).max(a.resolution[c].max(b.resolution[c]));
        if diff > 3.0 * se && diff > 1e-12 {
            d.flagged_cells += 1;
        }
    }
    let uw: Vec<f64> = a.histogram.u_edges.windows(2).map(|w| w[1] - w[0]).collect();
    for s in 0..2 {
        for (i, w) in uw.iter().enumerate() {
            let diff = (a.boundary[s][i] - b.boundary[s][i]).abs();
            d.boundary_sup = d.boundary_sup.max(diff);
            d.boundary_l1 += diff * w;
        }
    }
    for (j, w) in a.histogram.v_edges.windows(2).enumerate() {
        let diff = (a.marginal[j] - b.marginal[j]).abs();
        d.marginal_sup = d.marginal_sup.max(diff);
        d.marginal_l1 += diff * (w[1] - w[0]);
    }
    Ok(d)
}
