//! Tabulated probability densities.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::grid::{Domain, Grid, Integral};
use crate::quad;
use crate::tail::{tail_integral, Laurent};
use crate::{Error, Result};

/// Normalization tolerance of a density.
pub const NORM_TOL: f64 = 1e-8;

/// Pointwise integrands `F(t, p)` of density functionals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Integrand {
    /// `p`
    Mass,
    /// `t^n p`
    Moment(u32),
    /// `p^a`
    Power(f64),
    /// `-p ln p`, with `0 ln 0 = 0`
    NegLog,
    /// `p ln(1 + beta t^2)`
    LogWeight(f64),
    /// `p [ln(1 + beta t^2) - beta t^2]`
    LinearResidual(f64),
}

impl Integrand {
    pub fn apply(&self, t: f64, p: f64) -> f64 {
        match *self {
            Integrand::Mass => p,
            Integrand::Moment(n) => t.powi(n as i32) * p,
            Integrand::Power(a) => {
                if p <= 0.0 {
                    0.0
                } else {
                    p.powf(a)
                }
            }
            Integrand::NegLog => {
                if p < 1e-300 {
                    0.0
                } else {
                    -p * p.ln()
                }
            }
            Integrand::LogWeight(beta) => p * (beta * t * t).ln_1p(),
            Integrand::LinearResidual(beta) => p * ln1p_minus_x(beta * t * t),
        }
    }

    /// Decay exponent of `F(t, p(t))` when the density falls like `|t|^-n`.
    pub fn decay(&self, n: f64) -> f64 {
        match *self {
            Integrand::Mass | Integrand::NegLog | Integrand::LogWeight(_) => n,
            Integrand::Moment(m) => n - m as f64,
            Integrand::Power(a) => a * n,
            Integrand::LinearResidual(_) => n - 2.0,
        }
    }

    /// Whether `F` carries an extra logarithmic factor at large `|t|`.
    pub fn has_log(&self) -> bool {
        matches!(self, Integrand::NegLog | Integrand::LogWeight(_))
    }
}

/// `int F(t, model(t)) dt` over a finite `[a, b]` inside the tail, on panels
/// of half an oscillation period.
fn finite_tail_piece(model: &Laurent, f: Integrand, a: f64, b: f64) -> Integral {
    if b <= a {
        return Integral::default();
    }
    let step = if model.omega > 0.0 { PI / model.omega } else { b - a };
    let n = ((b - a) / step).ceil().clamp(1.0, 1e6) as usize;
    let h = (b - a) / n as f64;
    let g = |t: f64| f.apply(t, model.eval(t));
    let (mut value, mut error) = (0.0, 0.0);
    let rule = |r: &quad::Rule, lo: f64, hi: f64| -> f64 {
        let (half, mid) = (0.5 * (hi - lo), 0.5 * (hi + lo));
        r.nodes.iter().zip(&r.weights).map(|(&x, &w)| w * g(mid + half * x)).sum::<f64>() * half
    };
    for i in 0..n {
        let (lo, hi) = (a + i as f64 * h, if i + 1 == n { b } else { a + (i + 1) as f64 * h });
        let fine = rule(quad::fine(), lo, hi);
        value += fine;
        error += (fine - rule(quad::coarse(), lo, hi)).abs();
    }
    Integral::new(value, error)
}

/// `ln(1 + y) - y` without cancellation for small `y`.
pub fn ln1p_minus_x(y: f64) -> f64 {
    if y.abs() < 1e-2 {
        let mut term = -y * y / 2.0;
        let mut sum = term;
        let mut k = 2.0;
        while term.abs() > 1e-18 * sum.abs() {
            term *= -y * k / (k + 1.0);
            sum += term;
            k += 1.0;
        }
        sum
    } else {
        y.ln_1p() - y
    }
}

/// Asymptotic model of a density beyond `|t| >= start`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tail {
    pub start: f64,
    pub model: Laurent,
}

/// A density tabulated at the nodes of a grid, with an optional asymptotic tail
/// outside the grid's extent.
#[derive(Clone, Debug)]
pub struct DensityFn {
    grid: Arc<Grid>,
    values: Vec<f64>,
    tail: Option<Tail>,
    tail_mass_bound: f64,
}

impl DensityFn {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>, tail: Option<Tail>) -> Result<DensityFn> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter("values and grid differ in length".into()));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("density value {v} is not a nonnegative number")));
        }
        let mut d = DensityFn { grid, values, tail, tail_mass_bound: 0.0 };
        d.tail_mass_bound = d.outside_mass()?;
        Ok(d)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn grid_arc(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn domain(&self) -> Domain {
        self.grid.domain()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tail(&self) -> Option<&Tail> {
        self.tail.as_ref()
    }

    /// Mass carried outside the tabulated nodes: the asymptotic tail, or the
    /// extrapolated remainder at graded ends.
    pub fn tail_mass_bound(&self) -> f64 {
        self.tail_mass_bound
    }

    fn outside_mass(&self) -> Result<f64> {
        let mut m = 0.0;
        if let Some(t) = &self.tail {
            for side in [-1.0, 1.0] {
                m += tail_integral(&t.model, t.start, side, Integrand::Mass, None)
                    .map_err(|_| Error::Divergence { what: "tail mass".into(), partial: f64::INFINITY })?
                    .value;
            }
        }
        if self.grid.is_graded() {
            let all = self.integral(Integrand::Mass)?.value;
            let nodes: f64 = self.grid.weights().iter().zip(&self.values).map(|(w, v)| w * v).sum();
            m += (all - nodes).max(0.0);
        }
        Ok(m)
    }

    /// Value at `t`, interpolated inside the grid and from the tail outside.
    pub fn eval(&self, t: f64) -> f64 {
        if let Some(tail) = &self.tail {
            if t.abs() >= tail.start {
                return tail.model.eval(t);
            }
        }
        let (lo, hi) = self.grid.extent();
        if t < lo || t > hi {
            return 0.0;
        }
        self.grid.interpolate(&self.values, t).max(0.0)
    }

    /// `int F(t, p(t)) dt` over the whole line.
    pub fn integral(&self, f: Integrand) -> Result<Integral> {
        self.integral_range(f, f64::NEG_INFINITY, f64::INFINITY)
    }

    /// `int F(t, p(t)) dt` over `[a, b]`.
    pub fn integral_range(&self, f: Integrand, a: f64, b: f64) -> Result<Integral> {
        if b <= a {
            return Ok(Integral::default());
        }
        let div = |partial: f64| match f {
            Integrand::Moment(order) => Error::MomentDivergence { order, partial },
            _ => Error::Divergence { what: format!("{f:?}"), partial },
        };
        let inner = self.grid.integrate_range(&self.values, |t, p| f.apply(t, p.max(0.0)), a, b);
        let mut total = inner.map_err(|d| div(d.partial))?;
        if let Some(tail) = &self.tail {
            let s = tail.start;
            // upper tail [s, inf) intersected with [a, b]
            if b > s {
                let lo = a.max(s);
                let part = if b.is_infinite() && lo == s {
                    tail_integral(&tail.model, s, 1.0, f, None)
                } else if b.is_infinite() {
                    let whole = tail_integral(&tail.model, s, 1.0, f, None);
                    let head = tail_integral(&tail.model, s, 1.0, f, Some(lo)).map_err(|d| div(d.partial))?;
                    whole.map(|w| Integral::new(w.value - head.value, w.error + head.error))
                } else {
                    Ok(finite_tail_piece(&tail.model, f, lo, b))
                };
                total = total + part.map_err(|d| div(total.value + d.partial))?;
            }
            if a < -s {
                let hi = b.min(-s);
                let part = if a.is_infinite() && hi == -s {
                    tail_integral(&tail.model, s, -1.0, f, None)
                } else if a.is_infinite() {
                    let whole = tail_integral(&tail.model, s, -1.0, f, None);
                    let head = tail_integral(&tail.model, s, -1.0, f, Some(hi)).map_err(|d| div(d.partial))?;
                    whole.map(|w| Integral::new(w.value - head.value, w.error + head.error))
                } else {
                    Ok(finite_tail_piece(&tail.model, f, a, hi))
                };
                total = total + part.map_err(|d| div(total.value + d.partial))?;
            }
        }
        Ok(total)
    }

    /// Total mass including the tail.
    pub fn mass(&self) -> Result<Integral> {
        self.integral(Integrand::Mass)
    }

    /// Fails unless the mass is within [`NORM_TOL`] of one.
    pub fn check_normalized(&self) -> Result<()> {
        let m = self.mass()?;
        if (m.value - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { mass: m.value });
        }
        Ok(())
    }

    /// Pointwise convex combination of densities on the same grid.
    pub fn mixture(parts: &[(f64, &DensityFn)]) -> Result<DensityFn> {
        let first = parts.first().ok_or_else(|| Error::InvalidParameter("empty mixture".into()))?.1;
        let mut values = vec![0.0; first.values.len()];
        let mut tail: Option<Tail> = None;
        for (wt, d) in parts {
            if !Arc::ptr_eq(&d.grid, &first.grid) && d.grid.nodes() != first.grid.nodes() {
                return Err(Error::InvalidParameter("mixture components live on different grids".into()));
            }
            for (v, x) in values.iter_mut().zip(&d.values) {
                *v += wt * x;
            }
            if let Some(t) = &d.tail {
                match &mut tail {
                    None => {
                        let mut m = Laurent::zero(t.model.omega);
                        m.add_scaled(&t.model, *wt);
                        tail = Some(Tail { start: t.start, model: m });
                    }
                    Some(acc) => acc.model.add_scaled(&t.model, *wt),
                }
            }
        }
        DensityFn::new(first.grid.clone(), values, tail)
    }
}

/// `int t^n p(t) dt` with an error estimate.
pub fn moment(density: &DensityFn, n: u32) -> Result<Integral> {
    if n == 0 {
        return Err(Error::InvalidParameter("moment order must be positive".into()));
    }
    density.integral(Integrand::Moment(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::AxisMap;
    use std::f64::consts::PI;

    #[test]
    fn uniform_second_moment() {
        let g = Arc::new(Grid::graded(Domain::Q, AxisMap::Identity, -PI / 2.0, PI / 2.0, 8));
        let d = DensityFn::new(g.clone(), vec![1.0 / PI; g.len()], None).unwrap();
        let m2 = moment(&d, 2).unwrap();
        assert!((m2.value - PI * PI / 12.0).abs() < 1e-13);
        assert!(moment(&d, 1).unwrap().value.abs() < 1e-14);
        d.check_normalized().unwrap();
    }

    #[test]
    fn cauchy_second_moment_diverges() {
        let g = Arc::new(Grid::tangent(Domain::K, 1.0, 16));
        let vals = g.nodes().iter().map(|k| 1.0 / (PI * (1.0 + k * k))).collect();
        let d = DensityFn::new(g, vals, None).unwrap();
        assert!(matches!(moment(&d, 2), Err(Error::MomentDivergence { order: 2, .. })));
        assert!(d.tail_mass_bound() < 1e-14);
    }

    #[test]
    fn ln1p_minus_x_small_and_large() {
        for y in [1e-8f64, 3e-3, 0.0099, 0.5, 7.0] {
            let exact = if y > 1e-3 { y.ln_1p() - y } else { -y * y / 2.0 + y.powi(3) / 3.0 - y.powi(4) / 4.0 };
            assert!((ln1p_minus_x(y) - exact).abs() < 1e-12 * exact.abs(), "{y}");
        }
    }
}
