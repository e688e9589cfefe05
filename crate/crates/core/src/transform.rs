//! Representation changes: the deformed wavenumber map, the `q <-> x` Fourier
//! pair and the pushforward of densities to physical wavenumber space.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::density::{DensityFn, Integrand, Tail};
use crate::grid::{AxisMap, Domain, Grid, Loc};
use crate::params::MinLengthParams;
use crate::quad;
use crate::special::expint;
use crate::state::{EdgeJets, MixedState, PureState};
use crate::tail::{tail_integral, Laurent};
use crate::{Error, Result};

/// `k = tan(sqrt(beta) q) / sqrt(beta)`, or `k = q` when `beta == 0`.
pub fn k_of_q(q: f64, params: MinLengthParams) -> Result<f64> {
    if !(q.abs() < params.q0()) {
        return Err(Error::Domain { q, q0: params.q0() });
    }
    if !params.is_deformed() {
        return Ok(q);
    }
    let r = params.sqrt_beta();
    Ok((r * q).tan() / r)
}

/// Inverse of [`k_of_q`].
pub fn q_of_k(k: f64, params: MinLengthParams) -> f64 {
    if !params.is_deformed() {
        return k;
    }
    let r = params.sqrt_beta();
    (r * k).atan() / r
}

/// Large-`|x|` form `psi ~ exp(i h x) sum a_n x^-n + exp(-i h x) sum b_n x^-n`
/// obtained by repeated integration by parts at the support ends.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveAsymptote {
    pub h: f64,
    /// `a[n]` multiplies `exp(i h x) x^-n`; `a[0] = 0`.
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
}

impl WaveAsymptote {
    pub fn from_jets(h: f64, jets: &EdgeJets) -> WaveAsymptote {
        let c = 1.0 / (2.0 * PI).sqrt();
        let i = Complex64::new(0.0, 1.0);
        let k = jets.hi.len().min(jets.lo.len());
        let mut a = vec![Complex64::new(0.0, 0.0); k + 1];
        let mut b = vec![Complex64::new(0.0, 0.0); k + 1];
        for n in 0..k {
            // (-1)^n [e^{ihx} phi^(n)(h) - e^{-ihx} phi^(n)(-h)] / (i x)^{n+1}
            let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
            let inv = i.powi(n as i32 + 1).inv();
            a[n + 1] = jets.hi[n] * inv * (sign * c);
            b[n + 1] = -jets.lo[n] * inv * (sign * c);
        }
        WaveAsymptote { h, a, b }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let inv = 1.0 / x;
        let mut pa = Complex64::new(0.0, 0.0);
        let mut pb = Complex64::new(0.0, 0.0);
        let mut pw = 1.0;
        for (an, bn) in self.a.iter().zip(&self.b) {
            pa += an * pw;
            pb += bn * pw;
            pw *= inv;
        }
        Complex64::cis(self.h * x) * pa + Complex64::cis(-self.h * x) * pb
    }

    /// `|psi|^2` as a tail model.
    pub fn density(&self) -> Laurent {
        Laurent::from_wave(self.h, &self.a, &self.b)
    }
}

/// Position wave function on a uniform X-grid over `[-L, L]` plus its
/// asymptotic continuation beyond `L`.
#[derive(Clone, Debug)]
pub struct XWave {
    pub grid: Arc<Grid>,
    pub values: Vec<Complex64>,
    pub asymptote: Option<WaveAsymptote>,
}

/// Uniform X-grid on `[-L, L]`, `L = n_periods * pi / h`, one period of
/// `exp(2 i h x)` per panel.
pub fn x_grid(h: f64, n_periods: usize) -> Grid {
    let period = PI / h;
    let l = n_periods as f64 * period;
    Grid::uniform(Domain::X, -l, l, 2 * n_periods)
}

/// Nodes and weighted amplitudes of a Q quadrature fine enough for
/// `exp(i q x)` with `|x| <= x_max`.
fn q_quadrature(state: &PureState, x_max: f64) -> (Vec<f64>, Vec<Complex64>) {
    let g = state.grid();
    let rule = quad::fine();
    let amps = state.amplitudes();
    let h = state.half_width();
    let mut qs = Vec::new();
    let mut ws = Vec::new();
    for (p, panel) in g.panels().iter().enumerate() {
        let len = panel.ref_len();
        if len < 1e-18 * h {
            continue;
        }
        let vals = &amps[p * quad::FINE..(p + 1) * quad::FINE];
        let m = ((0.5 * len * x_max / 8.0).ceil() as usize).max(1);
        if m == 1 {
            for k in 0..quad::FINE {
                qs.push(g.nodes()[p * quad::FINE + k]);
                ws.push(vals[k] * g.weights()[p * quad::FINE + k]);
            }
            continue;
        }
        let (lo, hi) = g.reference_interval();
        for i in 0..m {
            let s0 = -1.0 + 2.0 * i as f64 / m as f64;
            let s1 = -1.0 + 2.0 * (i + 1) as f64 / m as f64;
            let half = 0.5 * (s1 - s0);
            let mid = 0.5 * (s1 + s0);
            for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                let s = mid + half * x;
                let (q, jac) = g.map().point(panel.loc(s), lo, hi);
                qs.push(q);
                ws.push(rule.interp(vals, s) * (w * half * 0.5 * len * jac));
            }
        }
    }
    (qs, ws)
}

/// `psi(x) = (2 pi)^{-1/2} int exp(i q x) phi(q) dq` at the given points.
pub fn fourier_at(state: &PureState, xs: &[f64]) -> Vec<Complex64> {
    let x_max = xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let (qs, ws) = q_quadrature(state, x_max);
    let c = 1.0 / (2.0 * PI).sqrt();
    xs.par_iter()
        .map(|&x| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (q, w) in qs.iter().zip(&ws) {
                acc += w * Complex64::cis(q * x);
            }
            acc * c
        })
        .collect()
}

/// [`fourier_at`] on the nodes of an X-grid.
pub fn fourier_q_to_x(state: &PureState, x_grid: &Grid) -> Vec<Complex64> {
    fourier_at(state, x_grid.nodes())
}

/// Position wave function on an X-grid long enough that the asymptotic form
/// matches direct quadrature beyond it.
pub fn position_wave(state: &PureState) -> Result<XWave> {
    position_wave_from(state, 32)
}

fn position_wave_from(state: &PureState, start_periods: usize) -> Result<XWave> {
    let h = state.half_width();
    let asym = WaveAsymptote::from_jets(h, &state.edge_jets());
    let model = asym.density();
    let mut n = start_periods;
    while n <= 1024 {
        let grid = Arc::new(x_grid(h, n));
        let values = fourier_q_to_x(state, &grid);
        let l = grid.reference_interval().1;
        let probes: Vec<f64> = [1.0, 1.13, 1.37, 1.61, 1.99]
            .iter()
            .flat_map(|f| [f * l, -f * l])
            .collect();
        let direct = fourier_at(state, &probes);
        let mut ok = true;
        for (x, d) in probes.iter().zip(&direct) {
            let m = asym.eval(*x);
            let dw = (d.norm_sqr() - m.norm_sqr()).abs();
            if dw > 1e-11 / l + 1e-7 * m.norm_sqr() {
                ok = false;
            }
        }
        if ok {
            let w: Vec<f64> = values.iter().map(|z| z.norm_sqr()).collect();
            let inner = grid.integrate(&w, |_, p| p).map(|i| i.value).unwrap_or(f64::NAN);
            let mut tail = 0.0;
            for side in [-1.0, 1.0] {
                tail += tail_integral(&model, l, side, Integrand::Mass, None).map(|i| i.value).unwrap_or(f64::NAN);
            }
            let norm = state.norm_sq();
            if (inner + tail - norm).abs() < 1e-9 * norm {
                return Ok(XWave { grid, values, asymptote: Some(asym) });
            }
        }
        n *= 2;
    }
    Err(Error::Resolution(format!("{}: position tail not reached within 1024 periods", state.label())))
}

/// `phi(q) = (2 pi)^{-1/2} int exp(-i q x) psi(x) dx` at the nodes of `q_grid`,
/// including the asymptotic tail of `psi` in closed form.
pub fn fourier_x_to_q(psi: &XWave, params: MinLengthParams, q_grid: Arc<Grid>) -> Result<PureState> {
    let c = 1.0 / (2.0 * PI).sqrt();
    let xg = &psi.grid;
    let l = xg.reference_interval().1;
    let h = psi.asymptote.as_ref().map(|a| a.h);
    let amps: Vec<Complex64> = q_grid
        .nodes()
        .par_iter()
        .zip(q_grid.locs())
        .map(|(&q, &loc)| {
            let mut acc = Complex64::new(0.0, 0.0);
            for ((x, w), z) in xg.nodes().iter().zip(xg.weights()).zip(&psi.values) {
                acc += z * Complex64::cis(-q * x) * *w;
            }
            if let Some(a) = &psi.asymptote {
                // offsets h - q and -h - q, exact near the ends
                let h = h.unwrap_or(a.h);
                let (up, down) = match loc {
                    Loc::FromHi(d) if (2.0 * h - d) > 0.0 => (d, d - 2.0 * h),
                    Loc::FromLo(d) => (2.0 * h - d, -d),
                    _ => (h - q, -h - q),
                };
                acc += tail_transform(a, up, down, l);
            }
            acc * c
        })
        .collect();
    PureState::new(q_grid, amps, params, None, "fourier_x_to_q")
}

/// `int_{|x| > L} exp(-i q x) psi_asym(x) dx` given `up = h - q`, `down = -h - q`.
fn tail_transform(a: &WaveAsymptote, up: f64, down: f64, l: f64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    // int_L^inf e^{i kappa x} x^-n dx + int_{-inf}^{-L} e^{i kappa x} x^-n dx
    let both = |kappa: f64, n: u32| -> Complex64 {
        let scale = l.powi(1 - n as i32);
        let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        (expint(n, -i * kappa * l) + expint(n, i * kappa * l) * sign) * scale
    };
    let mut acc = Complex64::new(0.0, 0.0);
    for n in 1..a.a.len() {
        if a.a[n] != Complex64::new(0.0, 0.0) {
            acc += a.a[n] * both(up, n as u32);
        }
        if a.b[n] != Complex64::new(0.0, 0.0) {
            acc += a.b[n] * both(down, n as u32);
        }
    }
    acc
}

/// `u(k) = v(q(k)) / (1 + beta k^2)` on the image of the Q-grid.
pub fn density_q_to_k(v: &DensityFn, params: MinLengthParams) -> Result<DensityFn> {
    if v.domain() != Domain::Q {
        return Err(Error::InvalidParameter("pushforward needs a Q density".into()));
    }
    let map = if params.is_deformed() { AxisMap::Tangent { rate: params.sqrt_beta() } } else { AxisMap::Identity };
    if params.is_deformed() {
        let (_, hi) = v.grid().reference_interval();
        if (hi - params.q0()).abs() > 1e-12 * hi {
            return Err(Error::InvalidParameter("Q density does not span (-q0, q0)".into()));
        }
    }
    let grid = Arc::new(v.grid().remapped(Domain::K, map));
    let values = v.values().iter().zip(grid.jacobians()).map(|(p, j)| p / j).collect();
    DensityFn::new(grid, values, None)
}

/// `v(q) = sum_i lambda_i |phi_i(q)|^2` on the finest component grid.
pub fn q_density(state: &MixedState) -> Result<DensityFn> {
    let comps = state.components();
    let finest = comps.iter().max_by_key(|(_, s)| s.grid().len()).expect("nonempty mixture").1.grid().clone();
    let mut values = vec![0.0; finest.len()];
    for (lambda, s) in comps {
        if Arc::ptr_eq(s.grid(), &finest) || s.grid().nodes() == finest.nodes() {
            for (v, a) in values.iter_mut().zip(s.amplitudes()) {
                *v += lambda * a.norm_sqr();
            }
        } else {
            for (v, l) in values.iter_mut().zip(finest.locs()) {
                *v += lambda * s.amplitude_at(*l).norm_sqr();
            }
        }
    }
    DensityFn::new(finest, values, None)
}

/// Position waves of every component on one common X-grid.
pub fn position_waves(state: &MixedState) -> Result<Vec<XWave>> {
    let mut waves: Vec<XWave> = state
        .components()
        .par_iter()
        .map(|(_, s)| position_wave(s))
        .collect::<Result<_>>()?;
    let longest = waves.iter().max_by_key(|w| w.grid.len()).expect("nonempty").grid.clone();
    for (w, (_, s)) in waves.iter_mut().zip(state.components()) {
        if w.grid.len() != longest.len() {
            w.values = fourier_q_to_x(s, &longest);
            w.grid = longest.clone();
        }
    }
    Ok(waves)
}

/// `w(x) = sum_i lambda_i |psi_i(x)|^2` with its tail; negligible tails are dropped.
pub fn x_density(state: &MixedState, waves: &[XWave]) -> Result<DensityFn> {
    let grid = waves[0].grid.clone();
    let l = grid.reference_interval().1;
    let mut values = vec![0.0; grid.len()];
    let mut model = Laurent::zero(2.0 * state.half_width());
    for ((lambda, _), w) in state.components().iter().zip(waves) {
        for (v, z) in values.iter_mut().zip(&w.values) {
            *v += lambda * z.norm_sqr();
        }
        if let Some(a) = &w.asymptote {
            model.add_scaled(&a.density(), *lambda);
        }
    }
    let mut tail_mass = 0.0;
    for side in [-1.0, 1.0] {
        tail_mass += tail_integral(&model, l, side, Integrand::Mass, None).map(|i| i.value).unwrap_or(f64::INFINITY);
    }
    let tail = if tail_mass > 1e-18 { Some(Tail { start: l, model }) } else { None };
    DensityFn::new(grid, values, tail)
}

/// The three densities of a state: auxiliary `v(q)`, position `w(x)` and
/// physical wavenumber `u(k)`.
#[derive(Clone, Debug)]
pub struct RepresentationBundle {
    pub v_q: DensityFn,
    pub w_x: DensityFn,
    pub u_k: DensityFn,
    pub source: MixedState,
    pub waves: Vec<XWave>,
}

pub fn bundle(state: &MixedState) -> Result<RepresentationBundle> {
    let v_q = q_density(state)?;
    let u_k = density_q_to_k(&v_q, state.params())?;
    let waves = position_waves(state)?;
    let w_x = x_density(state, &waves)?;
    Ok(RepresentationBundle { v_q, w_x, u_k, source: state.clone(), waves })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::make_params;
    use crate::state::{catalog_state, CatalogName};

    #[test]
    fn wavenumber_map_values() {
        let p = make_params(1.0).unwrap();
        assert!((k_of_q(PI / 4.0, p).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(k_of_q(0.0, p).unwrap(), 0.0);
        let p4 = make_params(0.25).unwrap();
        assert!((k_of_q(PI / 3.0, p4).unwrap() - 2.0 * (PI / 6.0).tan()).abs() < 1e-14);
        assert!(k_of_q(PI / 2.0, p).is_err());
        assert!((q_of_k(1.0, p) - PI / 4.0).abs() < 1e-15);
        assert!((q_of_k(1e6, p) - (PI / 2.0 - 1e-6)).abs() < 1e-15);
        assert_eq!(q_of_k(3.0, make_params(0.0).unwrap()), 3.0);
    }

    #[test]
    fn uniform_state_gives_sinc_and_cauchy() {
        let p = make_params(1.0).unwrap();
        let s = catalog_state(CatalogName::UniformQ, p, &[], None).unwrap();
        let b = bundle(&MixedState::pure(s)).unwrap();
        // w(x) = sin^2(h x) / (pi h x^2), w(0) = h / pi
        let h = PI / 2.0;
        for (x, w) in b.w_x.grid().nodes().iter().zip(b.w_x.values()).step_by(37) {
            let exact = if *x == 0.0 { h / PI } else { (h * x).sin().powi(2) / (PI * h * x * x) };
            assert!((w - exact).abs() < 1e-13, "{x}: {w} vs {exact}");
        }
        for (k, u) in b.u_k.grid().nodes().iter().zip(b.u_k.values()) {
            let exact = 1.0 / (PI * (1.0 + k * k));
            assert!((u - exact).abs() <= 1e-12 * exact, "{k}");
        }
        assert!((b.w_x.mass().unwrap().value - 1.0).abs() < 1e-10);
        assert!((b.u_k.mass().unwrap().value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn round_trip_through_position_space() {
        let p = make_params(1.0).unwrap();
        for name in CatalogName::ALL {
            let s = catalog_state(name, p, &[], Some(11)).unwrap();
            let x = position_wave(&s).unwrap();
            let back = fourier_x_to_q(&x, p, s.grid().clone()).unwrap();
            let diff: Vec<f64> =
                s.amplitudes().iter().zip(back.amplitudes()).map(|(a, b)| (a - b).norm_sqr()).collect();
            let err = s.grid().integrate(&diff, |_, v| v).unwrap().value.sqrt();
            assert!(err < 1e-6, "{name}: {err}");
        }
    }
}
