//! Gauss–Legendre rules on the reference panel `[-1, 1]`, barycentric
//! interpolation through their nodes, and a small adaptive integrator.

use std::num::NonZeroUsize;
use std::ops::{Add, Mul};
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;

/// Nodes per panel on every grid.
pub const FINE: usize = 16;
/// Nodes of the embedded lower-order rule used for error estimates.
pub const COARSE: usize = 8;

/// A Gauss–Legendre rule with nodes sorted in increasing order.
#[derive(Debug)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    bary: Vec<f64>,
}

impl Rule {
    fn new(n: usize) -> Self {
        let gl = GaussLegendre::new(NonZeroUsize::new(n).expect("rule order must be positive"));
        let mut pairs: Vec<(f64, f64)> = gl.as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let nodes: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let weights: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        // Barycentric weights of Gauss–Legendre points: (-1)^j sqrt((1 - x_j^2) w_j).
        let bary = nodes
            .iter()
            .zip(&weights)
            .enumerate()
            .map(|(j, (x, w))| {
                let s = ((1.0 - x * x) * w).sqrt();
                if j % 2 == 0 {
                    s
                } else {
                    -s
                }
            })
            .collect();
        Rule { nodes, weights, bary }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Lagrange basis through the nodes, evaluated at `s`.
    pub fn basis(&self, s: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.nodes.len());
        for (j, &x) in self.nodes.iter().enumerate() {
            if s == x {
                out.iter_mut().for_each(|o| *o = 0.0);
                out[j] = 1.0;
                return;
            }
        }
        let mut total = 0.0;
        for ((o, &x), &l) in out.iter_mut().zip(&self.nodes).zip(&self.bary) {
            *o = l / (s - x);
            total += *o;
        }
        out.iter_mut().for_each(|o| *o /= total);
    }

    /// Value at `s` of the polynomial interpolating `values` at the nodes.
    pub fn interp<T>(&self, values: &[T], s: f64) -> T
    where
        T: Copy + Add<Output = T> + Mul<f64, Output = T>,
    {
        let mut basis = [0.0; 64];
        let b = &mut basis[..self.nodes.len()];
        self.basis(s, b);
        let mut acc = values[0] * b[0];
        for (v, &c) in values.iter().zip(b.iter()).skip(1) {
            acc = acc + *v * c;
        }
        acc
    }
}

static FINE_RULE: OnceLock<Rule> = OnceLock::new();
static COARSE_RULE: OnceLock<Rule> = OnceLock::new();
static EMBED: OnceLock<Vec<[f64; FINE]>> = OnceLock::new();

pub fn fine() -> &'static Rule {
    FINE_RULE.get_or_init(|| Rule::new(FINE))
}

pub fn coarse() -> &'static Rule {
    COARSE_RULE.get_or_init(|| Rule::new(COARSE))
}

/// Rows map fine-node values to their interpolant at each coarse node.
pub fn embedding() -> &'static [[f64; FINE]] {
    EMBED.get_or_init(|| {
        let f = fine();
        coarse()
            .nodes
            .iter()
            .map(|&s| {
                let mut row = [0.0; FINE];
                f.basis(s, &mut row);
                row
            })
            .collect()
    })
}

/// Fixed-order Gauss–Legendre sum of `f` over `[a, b]`.
pub fn gauss<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> f64 {
    let r = fine();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    r.nodes
        .iter()
        .zip(&r.weights)
        .map(|(&s, &w)| w * f(mid + half * s))
        .sum::<f64>()
        * half
}

/// Adaptive bisection on `[a, b]` until each accepted piece agrees with its
/// halves to within its share of `tol`. Returns `(value, error estimate)`.
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> (f64, f64) {
        let m = 0.5 * (a + b);
        let left = gauss(f, a, m);
        let right = gauss(f, m, b);
        let err = (left + right - whole).abs();
        if err <= tol || depth >= 40 || (b - a) <= 1e-14 * (a.abs() + b.abs()) {
            return (left + right, err);
        }
        let (l, el) = rec(f, a, m, left, 0.5 * tol, depth + 1);
        let (r, er) = rec(f, m, b, right, 0.5 * tol, depth + 1);
        (l + r, el + er)
    }
    if a == b {
        return (0.0, 0.0);
    }
    let whole = gauss(f, a, b);
    rec(f, a, b, whole, tol, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn rules_integrate_polynomials_exactly() {
        let r = fine();
        let s: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(30)).sum();
        assert!((s - 2.0 / 31.0).abs() < 1e-14);
        let c = coarse();
        let s: f64 = c.nodes.iter().zip(&c.weights).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn interpolation_reproduces_degree_15() {
        let r = fine();
        let p = |x: f64| 3.0 * x.powi(15) - x.powi(7) + 0.5;
        let vals: Vec<f64> = r.nodes.iter().map(|&x| p(x)).collect();
        for s in [-1.0, -0.3, 0.77, 1.0, 1.2] {
            assert!((r.interp(&vals, s) - p(s)).abs() < 1e-11);
        }
        let cv: Vec<Complex64> = r.nodes.iter().map(|&x| Complex64::new(x, x * x)).collect();
        let z = r.interp(&cv, 0.25);
        assert!((z - Complex64::new(0.25, 0.0625)).norm() < 1e-13);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let f = |x: f64| 1.0 / (1e-4 + x * x);
        let (v, _) = adaptive(&f, -1.0, 1.0, 1e-12);
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((v - exact).abs() < 1e-9 * exact);
    }
}
