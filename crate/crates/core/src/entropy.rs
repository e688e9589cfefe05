//! Shannon, Rényi and Tsallis entropies of densities and binned distributions.
//!
//! Binned distributions carry the mass beyond their outermost edges as a
//! continuation: further bins of width `delta_max` out to infinity. Their
//! contributions are bounded rather than enumerated, and every discrete
//! entropy returned here is a lower bound on the entropy of the fully
//! continued binning.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Open01};

use crate::density::{DensityFn, Integrand};
use crate::grid::{Integral, Loc};
use crate::quad;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EntropyKind {
    Shannon,
    Renyi(f64),
    Tsallis(f64),
}

/// Entropy in nats with an error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyValue {
    pub value: f64,
    pub kind: EntropyKind,
    pub differential: bool,
    pub est_error: f64,
}

/// `-int p ln p`.
pub fn diff_shannon(density: &DensityFn) -> Result<EntropyValue> {
    density.check_normalized()?;
    let i = density.integral(Integrand::NegLog)?;
    Ok(EntropyValue { value: i.value, kind: EntropyKind::Shannon, differential: true, est_error: i.error })
}

/// `int p^a` with its error estimate.
pub fn power_integral(density: &DensityFn, a: f64) -> Result<Integral> {
    if !(a > 0.0) {
        return Err(Error::InvalidParameter(format!("order must be positive, got {a}")));
    }
    density.integral(Integrand::Power(a))
}

/// `(int p^a)^(1/a)`; exactly 1 for `a == 1`.
pub fn alpha_norm(density: &DensityFn, alpha: f64) -> Result<f64> {
    density.check_normalized()?;
    if alpha == 1.0 {
        return Ok(1.0);
    }
    Ok(power_integral(density, alpha)?.value.powf(1.0 / alpha))
}

/// `ln(int p^a) / (1 - a)`.
pub fn diff_renyi(density: &DensityFn, alpha: f64) -> Result<EntropyValue> {
    if alpha == 1.0 {
        return diff_shannon(density);
    }
    density.check_normalized()?;
    let i = power_integral(density, alpha)?;
    Ok(EntropyValue {
        value: i.value.ln() / (1.0 - alpha),
        kind: EntropyKind::Renyi(alpha),
        differential: true,
        est_error: i.error / (i.value * (1.0 - alpha).abs()),
    })
}

/// Mass beyond the outermost edge on one side and the functionals needed to
/// bound its contribution.
#[derive(Clone, Debug, PartialEq)]
pub struct Continuation {
    pub mass: f64,
    /// `int -p ln p` over the continued range, when finite.
    pub neg_log: Option<f64>,
    /// `(a, int p^a)` over the continued range.
    pub powers: Vec<(f64, f64)>,
}

/// Probabilities of consecutive intervals.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteDist {
    edges: Vec<f64>,
    probs: Vec<f64>,
    errors: Vec<f64>,
    delta_max: f64,
    continuation: Vec<Continuation>,
}

impl DiscreteDist {
    /// A plain finite distribution with unit bin widths.
    pub fn from_probs(probs: Vec<f64>) -> Result<DiscreteDist> {
        if probs.is_empty() || probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::Binning("probabilities must be finite and nonnegative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized { mass: total });
        }
        let edges = (0..=probs.len()).map(|i| i as f64).collect();
        let errors = vec![0.0; probs.len()];
        Ok(DiscreteDist { edges, probs, errors, delta_max: 1.0, continuation: Vec::new() })
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn delta_max(&self) -> f64 {
        self.delta_max
    }

    pub fn continuation(&self) -> &[Continuation] {
        &self.continuation
    }

    /// Explicit plus continued mass.
    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum::<f64>() + self.continuation.iter().map(|c| c.mass).sum::<f64>()
    }

    /// Bounds `(lower, upper)` on `sum_j p_j^a` over the continued bins.
    fn continued_power_sum(&self, a: f64) -> (f64, f64) {
        let d = self.delta_max;
        let mut lo = 0.0;
        let mut hi = 0.0;
        for c in &self.continuation {
            let direct = c.powers.iter().find(|(b, _)| *b == a).map(|(_, v)| d.powf(a - 1.0) * v);
            let whole = c.mass.powf(a);
            if a > 1.0 {
                // (int p)^a <= d^(a-1) int p^a per bin; sum p_j^a <= (sum p_j)^a
                hi += direct.map_or(whole, |v| v.min(whole));
            } else {
                // reverse inequalities for a < 1
                lo += direct.map_or(whole, |v| v.max(whole));
                hi = f64::INFINITY;
            }
        }
        (lo, hi)
    }

    /// `sum p_j^a` bounded in the direction that makes the entropies lower
    /// bounds: from above for `a > 1`, from below for `a < 1`.
    pub fn power_sum(&self, a: f64) -> Integral {
        let explicit: f64 = self.probs.iter().map(|p| p.powf(a)).sum();
        let err: f64 = self
            .probs
            .iter()
            .zip(&self.errors)
            .map(|(p, e)| if *p > 0.0 { (a * p.powf(a - 1.0) * e).min(p.powf(a)) } else { 0.0 })
            .sum();
        let (lo, hi) = self.continued_power_sum(a);
        let tail = if a > 1.0 { hi } else { lo };
        Integral::new(explicit + tail, err)
    }
}

/// Uniform edges of width at most `delta` covering `[lo, hi]`.
pub fn uniform_edges(lo: f64, hi: f64, delta: f64) -> Result<Vec<f64>> {
    if !(lo < hi && delta > 0.0 && lo.is_finite() && hi.is_finite()) {
        return Err(Error::Binning(format!("bad range [{lo}, {hi}] or width {delta}")));
    }
    let n = ((hi - lo) / delta).ceil().max(1.0) as usize;
    Ok((0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect())
}

/// Interval probabilities of a density, with the mass outside the edges kept
/// as a continuation. Power functionals are prepared for `orders`.
pub fn bin_density_with_orders(density: &DensityFn, edges: &[f64], orders: &[f64]) -> Result<DiscreteDist> {
    if edges.len() < 2 {
        return Err(Error::Binning("need at least two edges".into()));
    }
    if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Binning("edges must be finite and strictly increasing".into()));
    }
    density.check_normalized()?;
    let mut probs = Vec::with_capacity(edges.len() - 1);
    let mut errors = Vec::with_capacity(edges.len() - 1);
    for w in edges.windows(2) {
        let i = density.integral_range(Integrand::Mass, w[0], w[1])?;
        probs.push(i.value.max(0.0));
        errors.push(i.error);
    }
    let delta_max = edges.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let mut continuation = Vec::new();
    let first = edges[0];
    let last = edges[edges.len() - 1];
    for (a, b) in [(f64::NEG_INFINITY, first), (last, f64::INFINITY)] {
        let mass = density.integral_range(Integrand::Mass, a, b)?.value;
        if mass <= 1e-300 {
            continue;
        }
        let neg_log = density.integral_range(Integrand::NegLog, a, b).ok().map(|i| i.value);
        let powers = orders
            .iter()
            .filter(|&&o| o != 1.0)
            .filter_map(|&o| density.integral_range(Integrand::Power(o), a, b).ok().map(|i| (o, i.value)))
            .collect();
        continuation.push(Continuation { mass, neg_log, powers });
    }
    Ok(DiscreteDist { edges: edges.to_vec(), probs, errors, delta_max, continuation })
}

/// [`bin_density_with_orders`] without power functionals.
pub fn bin_density(density: &DensityFn, edges: &[f64]) -> Result<DiscreteDist> {
    bin_density_with_orders(density, edges, &[])
}

fn discrete_shannon(dist: &DiscreteDist) -> EntropyValue {
    let mut value = 0.0;
    let mut err = 0.0;
    for (p, e) in dist.probs.iter().zip(&dist.errors) {
        if *p > 1e-300 {
            value -= p * p.ln();
            err += (p.ln() + 1.0).abs() * e;
        }
    }
    for c in &dist.continuation {
        // per bin: -p ln p >= int(-w ln w) - p ln delta; in total also >= -eps ln eps
        let jensen = c.neg_log.map_or(0.0, |h| h - c.mass * dist.delta_max.ln());
        value += jensen.max(-c.mass * c.mass.ln());
    }
    EntropyValue { value: value.max(0.0), kind: EntropyKind::Shannon, differential: false, est_error: err }
}

/// `ln(sum p^a) / (1 - a)`; Shannon at `a == 1`.
pub fn discrete_renyi(dist: &DiscreteDist, alpha: f64) -> EntropyValue {
    if alpha == 1.0 {
        return discrete_shannon(dist);
    }
    let s = dist.power_sum(alpha);
    EntropyValue {
        value: (s.value.ln() / (1.0 - alpha)).max(0.0),
        kind: EntropyKind::Renyi(alpha),
        differential: false,
        est_error: s.error / (s.value * (1.0 - alpha).abs()),
    }
}

/// `(sum p^a - 1) / (1 - a)`; Shannon at `a == 1`.
pub fn discrete_tsallis(dist: &DiscreteDist, alpha: f64) -> EntropyValue {
    if alpha == 1.0 {
        return discrete_shannon(dist);
    }
    let s = dist.power_sum(alpha);
    EntropyValue {
        value: ((s.value - 1.0) / (1.0 - alpha)).max(0.0),
        kind: EntropyKind::Tsallis(alpha),
        differential: false,
        est_error: s.error / (1.0 - alpha).abs(),
    }
}

/// `(sum p^a)^(1/a)`, bounded from above for `a > 1` and from below for `a < 1`.
pub fn discrete_norm(dist: &DiscreteDist, alpha: f64) -> Integral {
    if alpha == 1.0 {
        return Integral::new(dist.total_mass(), dist.errors.iter().sum());
    }
    let s = dist.power_sum(alpha);
    let v = s.value.powf(1.0 / alpha);
    Integral::new(v, v * s.error / (alpha * s.value))
}

/// Deformed logarithm `(y^(1 - nu) - 1) / (1 - nu)`, `ln y` at `nu == 1`.
pub fn alpha_log(y: f64, nu: f64) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha_log needs y > 0, got {y}")));
    }
    let e = 1.0 - nu;
    let l = y.ln();
    if (e * l).abs() < 1e-8 {
        // series keeps the limit nu -> 1 smooth
        return Ok(l * (1.0 + 0.5 * e * l + e * e * l * l / 6.0));
    }
    Ok((e * l).exp_m1() / e)
}

/// Importance-sampled `-E[ln p]` with its standard error. The proposal is
/// piecewise uniform over grid panels in the reference coordinate, with a
/// Pareto component for an asymptotic tail.
pub fn mc_diff_shannon(density: &DensityFn, n_samples: usize, seed: u64) -> Result<EntropyValue> {
    if n_samples < 2 {
        return Err(Error::Sampling("need at least two samples".into()));
    }
    let grid = density.grid();
    let fine = quad::fine();
    let n_panels = grid.panels().len();
    let mut masses: Vec<f64> = (0..n_panels)
        .map(|p| {
            let r = p * quad::FINE..(p + 1) * quad::FINE;
            grid.weights()[r.clone()].iter().zip(&density.values()[r]).map(|(w, v)| w * v).sum::<f64>()
        })
        .collect();
    let total: f64 = masses.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Sampling("density has no mass on its grid".into()));
    }
    let floor = 1e-6 * total / n_panels as f64;
    for m in &mut masses {
        *m = m.max(0.0) + floor;
    }
    let sum: f64 = masses.iter().sum();
    let mut cdf = Vec::with_capacity(n_panels);
    let mut acc = 0.0;
    for m in &masses {
        acc += m / sum;
        cdf.push(acc);
    }
    let tail = density.tail();
    let tau = if tail.is_some() { density.tail_mass_bound().clamp(1e-4, 0.5) } else { 0.0 };
    const SHAPE: f64 = 1.5;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut uniform = || -> f64 { Open01.sample(&mut rng) };
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for _ in 0..n_samples {
        let (p, g) = if tau > 0.0 && uniform() < tau {
            let t = tail.expect("tail present");
            let side = if uniform() < 0.5 { -1.0 } else { 1.0 };
            let y = t.start * uniform().powf(-1.0 / SHAPE);
            let g = tau * 0.5 * SHAPE * t.start.powf(SHAPE) * y.powf(-SHAPE - 1.0);
            (t.model.eval(side * y), g)
        } else {
            let u = uniform();
            let k = cdf.partition_point(|c| *c < u).min(n_panels - 1);
            let s = 2.0 * uniform() - 1.0;
            let panel = &grid.panels()[k];
            let (_, jac) = grid.point(panel.loc(s));
            let vals = &density.values()[k * quad::FINE..(k + 1) * quad::FINE];
            let p = fine.interp(vals, s).max(0.0);
            let g = (1.0 - tau) * (masses[k] / sum) / (panel.ref_len() * jac);
            (p, g)
        };
        let y = if p > 1e-300 { -(p / g) * p.ln() } else { 0.0 };
        s1 += y;
        s2 += y * y;
    }
    let n = n_samples as f64;
    let mean = s1 / n;
    let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok(EntropyValue {
        value: mean,
        kind: EntropyKind::Shannon,
        differential: true,
        est_error: (var / n).sqrt(),
    })
}

/// Density value at a reference point of its grid.
pub fn eval_at(density: &DensityFn, loc: Loc) -> f64 {
    density.grid().interpolate_loc(density.values(), loc).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{AxisMap, Domain, Grid};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn uniform(lo: f64, hi: f64) -> DensityFn {
        let g = Arc::new(Grid::graded(Domain::Q, AxisMap::Identity, lo, hi, 8));
        DensityFn::new(g.clone(), vec![1.0 / (hi - lo); g.len()], None).unwrap()
    }

    fn cauchy() -> DensityFn {
        let g = Arc::new(Grid::tangent(Domain::K, 1.0, 32));
        let v = g.nodes().iter().map(|k| 1.0 / (PI * (1.0 + k * k))).collect();
        DensityFn::new(g, v, None).unwrap()
    }

    #[test]
    fn shannon_of_uniform_and_cauchy() {
        let u = diff_shannon(&uniform(-PI / 2.0, PI / 2.0)).unwrap();
        assert!((u.value - PI.ln()).abs() < 1e-13);
        let c = diff_shannon(&cauchy()).unwrap();
        assert!((c.value - (4.0 * PI).ln()).abs() < 1e-11, "{}", c.value);
    }

    #[test]
    fn norms_and_renyi() {
        let u = uniform(0.0, 2.0);
        assert!((alpha_norm(&u, 2.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-14);
        assert_eq!(alpha_norm(&u, 1.0).unwrap(), 1.0);
        for a in [0.6, 2.0, 3.5] {
            assert!((diff_renyi(&u, a).unwrap().value - 2f64.ln()).abs() < 1e-13);
        }
        let c = cauchy();
        // int (pi(1+k^2))^{-2} dk = 1 / (2 pi)
        assert!((diff_renyi(&c, 2.0).unwrap().value - (2.0 * PI).ln()).abs() < 1e-12);
        let h = diff_shannon(&c).unwrap().value;
        let below = diff_renyi(&c, 1.0 - 1e-4).unwrap().value;
        let above = diff_renyi(&c, 1.0 + 1e-4).unwrap().value;
        // first-order terms cancel in the symmetric mean
        assert!((0.5 * (below + above) - h).abs() < 1e-6);
        assert!(below > h && h > above && below - above < 1e-3);
        assert!(diff_renyi(&c, 0.45).is_err());
    }

    #[test]
    fn non_normalized_rejected() {
        let g = Arc::new(Grid::graded(Domain::Q, AxisMap::Identity, 0.0, 1.0, 4));
        let d = DensityFn::new(g.clone(), vec![2.0; g.len()], None).unwrap();
        assert!(matches!(diff_shannon(&d), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn binning_examples() {
        let u = uniform(0.0, 1.0);
        let d = bin_density(&u, &[0.0, 0.25, 0.5, 0.75, 1.0]).unwrap();
        for p in d.probs() {
            assert!((p - 0.25).abs() < 1e-14);
        }
        assert!(d.continuation().is_empty());
        let d = bin_density(&u, &[-5.0, 5.0]).unwrap();
        assert!((d.probs()[0] - 1.0).abs() < 1e-14);
        let c = bin_density(&cauchy(), &[-1.0, 0.0, 1.0]).unwrap();
        assert!((c.probs()[0] - 0.25).abs() < 1e-13);
        assert!((c.total_mass() - 1.0).abs() < 1e-12);
        assert!(bin_density(&u, &[0.0]).is_err());
        assert!(bin_density(&u, &[0.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn discrete_examples() {
        let eight = DiscreteDist::from_probs(vec![0.125; 8]).unwrap();
        for a in [0.5, 1.0, 2.0, 3.0] {
            assert!((discrete_renyi(&eight, a).value - 8f64.ln()).abs() < 1e-14);
        }
        let point = DiscreteDist::from_probs(vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(discrete_renyi(&point, 2.0).value, 0.0);
        assert_eq!(discrete_tsallis(&point, 2.0).value, 0.0);
        let two = DiscreteDist::from_probs(vec![0.75, 0.25]).unwrap();
        assert!((discrete_renyi(&two, 2.0).value + (5.0f64 / 8.0).ln()).abs() < 1e-15);
        let n = 5.0;
        let flat = DiscreteDist::from_probs(vec![1.0 / n; 5]).unwrap();
        assert!((discrete_tsallis(&flat, 2.0).value - (1.0 - 1.0 / n)).abs() < 1e-15);
    }

    #[test]
    fn alpha_log_values() {
        assert_eq!(alpha_log(1.0, 2.3).unwrap(), 0.0);
        assert!((alpha_log(2.0, 2.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((alpha_log(3.0, 1.0).unwrap() - 3f64.ln()).abs() < 1e-15);
        let l = alpha_log(3.0, 1.0 + 1e-12).unwrap();
        assert!((l - 3f64.ln()).abs() < 1e-11);
        assert!(alpha_log(0.0, 1.0).is_err());
    }

    #[test]
    fn continuation_bounds_hold_for_cauchy() {
        let c = cauchy();
        let d = bin_density_with_orders(&c, &uniform_edges(-3.0, 3.0, 0.5).unwrap(), &[2.0, 0.75]).unwrap();
        assert_eq!(d.continuation().len(), 2);
        // brute force: the same bins continued out to |k| = K, plus the sums over
        // the remaining bins approximated by integrals of p_j = delta / (pi k^2)
        let (delta, big) = (0.5, 1.0e6);
        let mut edges = vec![];
        let mut e = -big;
        while e < big + 0.25 {
            edges.push(e);
            e += delta;
        }
        let cdf = |k: f64| 0.5 + k.atan() / PI;
        let probs: Vec<f64> = edges.windows(2).map(|w| cdf(w[1]) - cdf(w[0])).collect();
        let c0 = delta / PI;
        let shannon = probs.iter().map(|p| -p * p.ln()).sum::<f64>()
            + 2.0 / delta * (-c0 * c0.ln() / big + 2.0 * c0 * (big.ln() + 1.0) / big);
        let power = |a: f64| {
            probs.iter().map(|p| p.powf(a)).sum::<f64>()
                + 2.0 / delta * c0.powf(a) * big.powf(1.0 - 2.0 * a) / (2.0 * a - 1.0)
        };
        let renyi = |a: f64| power(a).ln() / (1.0 - a);
        assert!(discrete_renyi(&d, 1.0).value <= shannon + 1e-9);
        assert!(discrete_renyi(&d, 2.0).value <= renyi(2.0) + 1e-9);
        assert!(discrete_renyi(&d, 0.75).value <= renyi(0.75) + 1e-9);
        assert!(renyi(0.75) - discrete_renyi(&d, 0.75).value < 0.2);
        assert!(shannon - discrete_renyi(&d, 1.0).value < 0.05);
        // binning lemma: H(p) >= H(u) - ln delta
        let h = diff_shannon(&c).unwrap().value;
        assert!(discrete_renyi(&d, 1.0).value >= h - 0.5f64.ln() - 1e-10);
    }

    #[test]
    fn monte_carlo_agrees_with_quadrature() {
        let c = cauchy();
        let mc = mc_diff_shannon(&c, 200_000, 3).unwrap();
        assert!((mc.value - (4.0 * PI).ln()).abs() < 4.0 * mc.est_error, "{:?}", mc);
        let u = uniform(-PI / 2.0, PI / 2.0);
        let mc = mc_diff_shannon(&u, 10_000, 4).unwrap();
        assert!((mc.value - PI.ln()).abs() < 4.0 * mc.est_error.max(1e-12));
        assert!(mc.est_error < 1e-4);
    }
}
