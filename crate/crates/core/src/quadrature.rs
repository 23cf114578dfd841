//! Composite Gauss–Legendre rules and shifted Legendre polynomials.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;

/// A Gauss–Legendre rule mapped to the unit interval `[0, 1]`.
#[derive(Debug, Clone)]
pub struct UnitRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl UnitRule {
    pub fn new(points: usize) -> Self {
        let rule = GaussLegendre::new(NonZeroUsize::new(points.max(1)).unwrap());
        let (nodes, weights) = rule
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w))
            .unzip();
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `int_a^b f` using `panels` equal panels.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, panels: usize, mut f: F) -> f64 {
        let h = (b - a) / panels as f64;
        let mut total = 0.0;
        for p in 0..panels {
            let x0 = a + p as f64 * h;
            let mut s = 0.0;
            for (t, w) in self.nodes.iter().zip(&self.weights) {
                s += w * f(x0 + t * h);
            }
            total += s * h;
        }
        total
    }

    pub fn integrate_complex<F: FnMut(f64) -> Complex64>(
        &self,
        a: f64,
        b: f64,
        panels: usize,
        mut f: F,
    ) -> Complex64 {
        let h = (b - a) / panels as f64;
        let mut total = Complex64::new(0.0, 0.0);
        for p in 0..panels {
            let x0 = a + p as f64 * h;
            let mut s = Complex64::new(0.0, 0.0);
            for (t, w) in self.nodes.iter().zip(&self.weights) {
                s += f(x0 + t * h) * *w;
            }
            total += s * h;
        }
        total
    }

    /// Nodes and weights of the composite rule over `[a, b]`.
    pub fn composite(&self, a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
        let h = (b - a) / panels as f64;
        let mut xs = Vec::with_capacity(panels * self.len());
        let mut ws = Vec::with_capacity(panels * self.len());
        for p in 0..panels {
            let x0 = a + p as f64 * h;
            for (t, w) in self.nodes.iter().zip(&self.weights) {
                xs.push(x0 + t * h);
                ws.push(w * h);
            }
        }
        (xs, ws)
    }
}

/// Values `P~_0(t), ..., P~_degree(t)` of the shifted Legendre polynomials
/// `P~_i(t) = P_i(2t - 1)`.
pub fn shifted_legendre(degree: usize, t: f64) -> Vec<f64> {
    let x = 2.0 * t - 1.0;
    let mut out = Vec::with_capacity(degree + 1);
    out.push(1.0);
    if degree >= 1 {
        out.push(x);
    }
    for n in 1..degree {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0) * x * out[n] - nf * out[n - 1]) / (nf + 1.0);
        out.push(next);
    }
    out
}
