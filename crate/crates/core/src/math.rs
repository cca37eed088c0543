use core::f64::consts::PI;

use num_complex::Complex64;

#[allow(unused_imports)]
use crate::prelude::*;

pub(crate) const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `n`-point rule by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    pub fn integrate_complex<F: FnMut(f64) -> Complex64>(
        &self,
        a: f64,
        b: f64,
        mut f: F,
    ) -> Complex64 {
        self.mapped(a, b)
            .fold(Complex64::new(0.0, 0.0), |acc, (x, w)| acc + f(x) * w)
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Breakpoints `a = b₀ < b₁ < … = b` whose widths grow geometrically away from
/// the origin: widths never exceed `ratio * |t|` nor `max_width`, and are at
/// least `min_width`.
pub(crate) fn graded_breakpoints(
    start: f64,
    end: f64,
    min_width: f64,
    ratio: f64,
    max_width: f64,
) -> Vec<f64> {
    debug_assert!(start >= 0.0 && end > start);
    let mut out = vec![start];
    let mut t = start;
    while t < end {
        let w = (ratio * t).clamp(min_width, max_width.max(min_width));
        t = (t + w).min(end);
        out.push(t);
    }
    out
}

/// Principal-branch complex power with a real exponent.
pub(crate) fn cpow(z: Complex64, e: f64) -> Complex64 {
    if z.re == 0.0 && z.im == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::from_polar(z.norm().powf(e), z.arg() * e)
}

pub(crate) fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Four-point Lagrange interpolation on a uniform grid with spacing 1 at
/// offsets -1, 0, 1, 2; `s ∈ [0, 1]`.
pub(crate) fn lagrange4(p: [Complex64; 4], s: f64) -> Complex64 {
    let l0 = -s * (s - 1.0) * (s - 2.0) / 6.0;
    let l1 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
    let l2 = -(s + 1.0) * s * (s - 2.0) / 2.0;
    let l3 = (s + 1.0) * s * (s - 1.0) / 6.0;
    p[0] * l0 + p[1] * l1 + p[2] * l2 + p[3] * l3
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        for n in [1usize, 2, 5, 8, 16] {
            let gl = GaussLegendre::new(n);
            for deg in 0..(2 * n) {
                let got = gl.integrate(-1.0, 1.0, |x| x.powi(deg as i32));
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((got - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
            let wsum: f64 = gl.weights.iter().sum();
            assert!((wsum - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn gauss_legendre_on_interval() {
        let gl = GaussLegendre::new(12);
        let got = gl.integrate(0.0, PI, |x| x.sin());
        assert!((got - 2.0).abs() < 1e-13);
    }

    #[test]
    fn graded_breakpoints_cover_range() {
        let b = graded_breakpoints(0.0, 100.0, 0.01, 0.2, 5.0);
        assert_eq!(b[0], 0.0);
        assert_eq!(*b.last().unwrap(), 100.0);
        for w in b.windows(2) {
            assert!(w[1] > w[0]);
            assert!(w[1] - w[0] <= 5.0 + 1e-12);
        }
    }

    #[test]
    fn lagrange_reproduces_cubics() {
        let f = |x: f64| Complex64::new(x * x * x - 2.0 * x + 1.0, 0.5 * x * x);
        let p = [f(-1.0), f(0.0), f(1.0), f(2.0)];
        for s in [0.0, 0.3, 0.77, 1.0] {
            assert!((lagrange4(p, s) - f(s)).norm() < 1e-13);
        }
    }
}
