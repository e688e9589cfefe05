//! Finite-resolution measurements: acceptance profiles, smearing of densities,
//! and the sub-normalized kernel profile `J(zeta)` with its supremum `S_f`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::density::{DensityFn, Integrand, Tail};
use crate::grid::{AxisMap, Domain, Grid};
use crate::params::MinLengthParams;
use crate::quad;
use crate::tail::MAX_ORDER;
use crate::{Error, Result};

/// Half-width of the Gaussian window in units of `sigma`.
const GAUSS_WINDOW: f64 = 10.0;

/// Squared acceptance profile `|f|^2`, normalized to unit area.
#[derive(Clone, Debug, PartialEq)]
pub enum AcceptanceFn {
    Gaussian { sigma: f64 },
    /// Piecewise linear through `(points[i], values[i])`, zero outside.
    Tabulated { points: Vec<f64>, values: Vec<f64> },
}

pub fn gaussian_acceptance(sigma: f64) -> Result<AcceptanceFn> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
    }
    Ok(AcceptanceFn::Gaussian { sigma })
}

impl AcceptanceFn {
    /// Piecewise-linear profile rescaled to unit area.
    pub fn tabulated(points: Vec<f64>, values: Vec<f64>) -> Result<AcceptanceFn> {
        if points.len() < 2 || points.len() != values.len() {
            return Err(Error::InvalidParameter("profile needs matching points and values".into()));
        }
        if points.windows(2).any(|w| !(w[0] < w[1])) || values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter("profile points must increase and values be nonnegative".into()));
        }
        let area: f64 = points.windows(2).zip(values.windows(2)).map(|(p, v)| 0.5 * (p[1] - p[0]) * (v[0] + v[1])).sum();
        if !(area > 0.0) {
            return Err(Error::InvalidParameter("profile has zero area".into()));
        }
        Ok(AcceptanceFn::Tabulated { points, values: values.iter().map(|v| v / area).collect() })
    }

    /// `|f(y)|^2`.
    pub fn kernel(&self, y: f64) -> f64 {
        match self {
            AcceptanceFn::Gaussian { sigma } => {
                let z = y / sigma;
                (-0.5 * z * z).exp() / (sigma * (2.0 * PI).sqrt())
            }
            AcceptanceFn::Tabulated { points, values } => {
                if y < points[0] || y > points[points.len() - 1] {
                    return 0.0;
                }
                let i = points.partition_point(|p| *p <= y).clamp(1, points.len() - 1);
                let t = (y - points[i - 1]) / (points[i] - points[i - 1]);
                values[i - 1] + t * (values[i] - values[i - 1])
            }
        }
    }

    /// Interval outside of which the kernel is zero or negligible.
    pub fn support(&self) -> (f64, f64) {
        match self {
            AcceptanceFn::Gaussian { sigma } => (-GAUSS_WINDOW * sigma, GAUSS_WINDOW * sigma),
            AcceptanceFn::Tabulated { points, .. } => (points[0], points[points.len() - 1]),
        }
    }

    /// Standard deviation of the kernel.
    pub fn width(&self) -> f64 {
        match self {
            AcceptanceFn::Gaussian { sigma } => *sigma,
            AcceptanceFn::Tabulated { .. } => {
                let m = self.moments(2);
                (m[2] - m[1] * m[1]).max(0.0).sqrt()
            }
        }
    }

    /// Points where the kernel is not smooth.
    fn kinks(&self) -> &[f64] {
        match self {
            AcceptanceFn::Gaussian { .. } => &[],
            AcceptanceFn::Tabulated { points, .. } => points,
        }
    }

    /// Whether `|f|^2` is even and nonincreasing in `|y|`.
    pub fn is_symmetric_unimodal(&self) -> bool {
        match self {
            AcceptanceFn::Gaussian { .. } => true,
            AcceptanceFn::Tabulated { points, values } => {
                let n = points.len();
                let even = (0..n).all(|i| {
                    (points[i] + points[n - 1 - i]).abs() <= 1e-12 * points[n - 1].abs()
                        && (values[i] - values[n - 1 - i]).abs() <= 1e-12 * values[i].abs().max(1e-300)
                });
                let mono = points.windows(2).zip(values.windows(2)).all(|(p, v)| if p[0] >= 0.0 { v[1] <= v[0] } else { true });
                even && mono
            }
        }
    }

    /// `int |f(y)|^2 y^k dy` for `k = 0..=n`.
    pub fn moments(&self, n: usize) -> Vec<f64> {
        match self {
            AcceptanceFn::Gaussian { sigma } => {
                let mut m = vec![0.0; n + 1];
                m[0] = 1.0;
                for k in (2..=n).step_by(2) {
                    m[k] = m[k - 2] * (k - 1) as f64 * sigma * sigma;
                }
                m
            }
            AcceptanceFn::Tabulated { points, .. } => (0..=n)
                .map(|k| points.windows(2).map(|w| quad::gauss(|y| self.kernel(y) * y.powi(k as i32), w[0], w[1])).sum())
                .collect(),
        }
    }

    /// `int |f(y)|^2 y^k exp(-i omega y) dy` for `k = 0..=n`.
    pub fn twisted_moments(&self, omega: f64, n: usize) -> Vec<Complex64> {
        match self {
            AcceptanceFn::Gaussian { sigma } => {
                let s2 = sigma * sigma;
                let mut m = vec![Complex64::new(0.0, 0.0); n + 1];
                m[0] = Complex64::new((-0.5 * omega * omega * s2).exp(), 0.0);
                // E[y g(y)] = sigma^2 E[g'(y)] with g = y^k exp(-i omega y)
                for k in 0..n {
                    let prev = if k > 0 { m[k - 1] * (k as f64) } else { Complex64::new(0.0, 0.0) };
                    m[k + 1] = (prev - Complex64::new(0.0, omega) * m[k]) * s2;
                }
                m
            }
            AcceptanceFn::Tabulated { points, .. } => (0..=n)
                .map(|k| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for w in points.windows(2) {
                        let pieces = ((omega.abs() * (w[1] - w[0]) / 4.0).ceil() as usize).max(1);
                        for i in 0..pieces {
                            let a = w[0] + (w[1] - w[0]) * i as f64 / pieces as f64;
                            let b = w[0] + (w[1] - w[0]) * (i + 1) as f64 / pieces as f64;
                            let re = quad::gauss(|y| self.kernel(y) * y.powi(k as i32) * (omega * y).cos(), a, b);
                            let im = quad::gauss(|y| -self.kernel(y) * y.powi(k as i32) * (omega * y).sin(), a, b);
                            acc += Complex64::new(re, im);
                        }
                    }
                    acc
                })
                .collect(),
        }
    }
}

/// Sorted input panels with physical bounds, for windowed quadrature.
struct Source<'a> {
    density: &'a DensityFn,
    bounds: Vec<(f64, f64)>,
}

impl<'a> Source<'a> {
    fn new(density: &'a DensityFn) -> Self {
        let g = density.grid();
        let bounds = (0..g.panels().len()).map(|p| g.panel_bounds(p)).collect();
        Source { density, bounds }
    }

    /// `int K(z - t) p(t) dt` over the kernel window.
    fn smeared_at(&self, acc: &AcceptanceFn, z: f64) -> f64 {
        let (ylo, yhi) = acc.support();
        let (a, b) = (z - yhi, z - ylo);
        let piece = 0.5 * acc.width();
        let kinks: Vec<f64> = acc.kinks().iter().map(|p| z - p).collect();
        let g = self.density.grid();
        let vals = self.density.values();
        let rule = quad::fine();
        let mut total = 0.0;
        let first = self.bounds.partition_point(|(_, pb)| *pb <= a);
        for p in first..self.bounds.len() {
            let (pa, pb) = self.bounds[p];
            if pa >= b {
                break;
            }
            let base = p * quad::FINE;
            if kinks.is_empty() && pa >= a && pb <= b && pb - pa <= piece {
                for k in 0..quad::FINE {
                    total += g.weights()[base + k] * acc.kernel(z - g.nodes()[base + k]) * vals[base + k];
                }
                continue;
            }
            let (lo, hi) = (pa.max(a), pb.min(b));
            total += pieces(lo, hi, piece, &kinks, |t| acc.kernel(z - t) * self.density.eval(t), rule);
        }
        if let Some(tail) = self.density.tail() {
            let s = tail.start;
            let step = piece.min(PI / (2.0 * tail.model.omega));
            let f = |t: f64| acc.kernel(z - t) * tail.model.eval(t);
            if b > s {
                total += pieces(a.max(s), b, step, &kinks, f, rule);
            }
            if a < -s {
                total += pieces(a, b.min(-s), step, &kinks, f, rule);
            }
        }
        total
    }
}

/// Gauss rule on pieces of `[lo, hi]` no wider than `width`, split at `kinks`.
fn pieces<F: Fn(f64) -> f64>(lo: f64, hi: f64, width: f64, kinks: &[f64], f: F, rule: &quad::Rule) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let mut cuts = vec![lo];
    cuts.extend(kinks.iter().copied().filter(|k| *k > lo && *k < hi));
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let n = ((w[1] - w[0]) / width).ceil().max(1.0) as usize;
        let h = (w[1] - w[0]) / n as f64;
        for i in 0..n {
            let a = w[0] + h * i as f64;
            let half = 0.5 * h;
            let mid = a + half;
            total += rule.nodes.iter().zip(&rule.weights).map(|(&s, &wt)| wt * half * f(mid + half * s)).sum::<f64>();
        }
    }
    total
}

/// `int |f(z - t)|^2 p(t) dt` at the nodes of `out_grid`. A tail of the input
/// is carried over as its smeared asymptotic model beyond a finite output grid.
pub fn smear(density: &DensityFn, f: &AcceptanceFn, out_grid: Arc<Grid>) -> Result<DensityFn> {
    let src = Source::new(density);
    let values: Vec<f64> = out_grid.nodes().par_iter().map(|&z| src.smeared_at(f, z).max(0.0)).collect();
    let tail = match density.tail() {
        Some(t) if out_grid.map() == AxisMap::Identity => {
            let mu = f.moments(MAX_ORDER);
            let tw = f.twisted_moments(t.model.omega, MAX_ORDER);
            Some(Tail { start: out_grid.reference_interval().1, model: t.model.smeared(&mu, &tw) })
        }
        _ => None,
    };
    let out = DensityFn::new(out_grid, values, tail)?;
    let m_in = density.mass()?.value;
    let m_out = out.mass()?.value;
    let defect = (m_out - m_in).abs();
    if defect > 1e-6 {
        return Err(Error::MassLoss(defect));
    }
    Ok(out)
}

/// Output grid for smearing a wavenumber density: tangent-mapped over the
/// whole line when `beta > 0`, otherwise the input support widened by the window.
pub fn zeta_grid(u: &DensityFn, f: &AcceptanceFn, params: MinLengthParams, n_span: usize) -> Grid {
    if params.is_deformed() {
        let rate = params.sqrt_beta().min(1.0 / f.width());
        Grid::tangent(Domain::Zeta, rate, n_span)
    } else {
        let (lo, hi) = u.grid().extent();
        let (ylo, yhi) = f.support();
        Grid::graded(Domain::Zeta, AxisMap::Identity, lo + ylo, hi + yhi, n_span)
    }
}

/// Output grid for smearing a position density: uniform panels no narrower
/// than one oscillation period, over `[-L_W, L_W]`.
pub fn xi_grid(w: &DensityFn, g: &AcceptanceFn) -> Grid {
    let (_, l) = w.grid().extent();
    let period = w.tail().map_or(l / 64.0, |t| 2.0 * PI / t.model.omega);
    let width = period.max(0.5 * g.width());
    let (_, yhi) = g.support();
    let lw = (l + yhi).max(2.0 * yhi);
    let n = (2.0 * lw / width).ceil() as usize;
    Grid::uniform(Domain::Xi, -lw, lw, n)
}

/// Smeared wavenumber density on a ζ-grid refined until its entropy settles.
pub fn smear_k(u: &DensityFn, f: &AcceptanceFn, params: MinLengthParams) -> Result<DensityFn> {
    let mut n = 64;
    let mut prev: Option<(DensityFn, f64)> = None;
    while n <= 4096 {
        let out = smear(u, f, Arc::new(zeta_grid(u, f, params, n)))?;
        let h = out.integral(Integrand::NegLog)?.value;
        if let Some((_, hp)) = &prev {
            if (h - hp).abs() < 1e-10 {
                return Ok(out);
            }
        }
        prev = Some((out, h));
        n *= 2;
    }
    Err(Error::Resolution("smeared wavenumber density did not settle".into()))
}

/// Smeared position density on a ξ-grid.
pub fn smear_x(w: &DensityFn, g: &AcceptanceFn) -> Result<DensityFn> {
    smear(w, g, Arc::new(xi_grid(w, g)))
}

/// `J(zeta) = int |f(zeta - k)|^2 / (1 + beta k^2) dk` at a point.
pub fn j_value(f: &AcceptanceFn, params: MinLengthParams, zeta: f64) -> f64 {
    if !params.is_deformed() {
        return 1.0;
    }
    let beta = params.beta();
    let (ylo, yhi) = f.support();
    let g = |k: f64| f.kernel(zeta - k) / (1.0 + beta * k * k);
    let mut cuts: Vec<f64> = f.kinks().iter().map(|p| zeta - p).collect();
    cuts.push(zeta - yhi);
    cuts.push(zeta - ylo);
    // the Lorentzian peak sits at k = 0
    if zeta - yhi < 0.0 && 0.0 < zeta - ylo {
        cuts.push(0.0);
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.windows(2).map(|w| quad::adaptive(&g, w[0], w[1], 1e-15).0).sum::<f64>().min(1.0)
}

/// [`j_value`] at every node of a grid.
pub fn j_profile(f: &AcceptanceFn, params: MinLengthParams, zeta_grid: &Grid) -> Vec<f64> {
    zeta_grid.nodes().par_iter().map(|&z| j_value(f, params, z)).collect()
}

/// `S_f = sup_zeta J(zeta)`. For an even unimodal profile the supremum is at
/// `zeta = 0`; otherwise a scan is refined by golden-section search.
pub fn s_f(f: &AcceptanceFn, params: MinLengthParams) -> f64 {
    if !params.is_deformed() {
        return 1.0;
    }
    if f.is_symmetric_unimodal() {
        return j_value(f, params, 0.0);
    }
    let (ylo, yhi) = f.support();
    let reach = (yhi - ylo) + 6.0 * f.width();
    let n = 400;
    let z = |i: usize| -reach + 2.0 * reach * i as f64 / n as f64;
    let (best, _) = (0..=n)
        .map(|i| (i, j_value(f, params, z(i))))
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let (mut a, mut b) = (z(best.saturating_sub(1)), z((best + 1).min(n)));
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (j_value(f, params, c), j_value(f, params, d));
    while (b - a) > 1e-8 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = j_value(f, params, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = j_value(f, params, d);
        }
    }
    let edge = j_value(f, params, z(best));
    fc.max(fd).max(edge)
}

/// `sqrt(pi / (2 sigma^2 beta))`, an upper bound on `S_f` for Gaussian profiles.
pub fn s_f_gaussian_bound(sigma: f64, beta: f64) -> Result<f64> {
    if !(sigma > 0.0 && beta > 0.0) {
        return Err(Error::InvalidParameter(format!("need sigma, beta > 0, got {sigma}, {beta}")));
    }
    Ok((PI / (2.0 * sigma * sigma * beta)).sqrt())
}
