//! Adaptive Gauss–Legendre quadrature over piecewise smooth integrands.
//!
//! Each interval is integrated with an n-point Gauss–Legendre rule and with
//! the same rule on its two halves; the difference is the error estimate. The
//! interval with the largest estimate is bisected until the global estimate
//! meets the tolerance. Known breakpoints (discontinuities of the integrand
//! or its derivatives) are passed in so that no interval ever straddles one,
//! which makes piecewise-polynomial integrands exact on the first pass.

use std::collections::BinaryHeap;
use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Nodes and weights of the n-point rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
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
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Rule applied on `[a, b]`, also returning ∑|f| weights for roundoff control.
    pub fn apply<F: FnMut(f64) -> f64>(&self, f: &mut F, a: f64, b: f64) -> (f64, f64) {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut sum = 0.0;
        let mut abs = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let v = f(c + h * x);
            sum += w * v;
            abs += w * v.abs();
        }
        (sum * h, abs * h.abs())
    }
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
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

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
    pub order: usize,
}

impl Default for QuadSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 0.0,
            max_intervals: 4000,
            order: 10,
        }
    }
}

impl QuadSettings {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    /// ∫|f| estimate.
    pub abs_value: f64,
    pub intervals: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    abs: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Adaptive integrator holding a precomputed rule.
#[derive(Debug, Clone)]
pub struct Integrator {
    rule: GaussLegendre,
    settings: QuadSettings,
}

impl Integrator {
    pub fn new(settings: QuadSettings) -> Self {
        Self {
            rule: GaussLegendre::new(settings.order),
            settings,
        }
    }

    pub fn settings(&self) -> &QuadSettings {
        &self.settings
    }

    fn segment<F: FnMut(f64) -> f64>(&self, f: &mut F, a: f64, b: f64) -> Segment {
        let (coarse, _) = self.rule.apply(f, a, b);
        let m = 0.5 * (a + b);
        let (l, la) = self.rule.apply(f, a, m);
        let (r, ra) = self.rule.apply(f, m, b);
        Segment {
            a,
            b,
            value: l + r,
            abs: la + ra,
            error: (coarse - (l + r)).abs(),
        }
    }

    /// ∫_a^b f.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<QuadResult> {
        self.integrate_with_breaks(f, &[a, b])
    }

    /// Integral over `[points[0], points[last]]`, splitting at every point.
    /// Points must be nondecreasing; zero-width subintervals are skipped.
    pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(
        &self,
        mut f: F,
        points: &[f64],
    ) -> Result<QuadResult> {
        let mut heap = BinaryHeap::new();
        for w in points.windows(2) {
            if w[1] > w[0] {
                heap.push(self.segment(&mut f, w[0], w[1]));
            }
        }
        if heap.is_empty() {
            return Ok(QuadResult {
                value: 0.0,
                error: 0.0,
                abs_value: 0.0,
                intervals: 0,
            });
        }
        let s = &self.settings;
        loop {
            let (value, error, abs) = heap.iter().fold((0.0, 0.0, 0.0), |acc, g| {
                (acc.0 + g.value, acc.1 + g.error, acc.2 + g.abs)
            });
            let target = s.abs_tol.max(s.rel_tol * value.abs());
            let roundoff = 50.0 * f64::EPSILON * abs;
            if error <= target || error <= roundoff {
                return Ok(QuadResult {
                    value,
                    error,
                    abs_value: abs,
                    intervals: heap.len(),
                });
            }
            if heap.len() >= s.max_intervals {
                return Err(Error::QuadratureFailure {
                    tol: target,
                    estimate: value,
                    error,
                });
            }
            let worst = heap.pop().expect("nonempty heap");
            let m = 0.5 * (worst.a + worst.b);
            if !(m > worst.a && m < worst.b) {
                // interval cannot be split further in floating point
                return Err(Error::QuadratureFailure {
                    tol: target,
                    estimate: value,
                    error,
                });
            }
            heap.push(self.segment(&mut f, worst.a, m));
            heap.push(self.segment(&mut f, m, worst.b));
        }
    }
}
