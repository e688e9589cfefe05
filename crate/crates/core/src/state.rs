//! Auxiliary-wavenumber states and the reference catalog.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::grid::{AxisMap, Domain, Grid, Loc, GRADE_DEPTH};
use crate::params::MinLengthParams;
use crate::quad::{self, FINE};
use crate::{Error, Result};

/// Derivatives `phi^(n)` at `-h` (`lo`) and `+h` (`hi`), `n = 0, 1, ...`.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeJets {
    pub lo: Vec<Complex64>,
    pub hi: Vec<Complex64>,
}

impl EdgeJets {
    fn scaled(&self, s: f64) -> EdgeJets {
        EdgeJets {
            lo: self.lo.iter().map(|z| z * s).collect(),
            hi: self.hi.iter().map(|z| z * s).collect(),
        }
    }
}

/// Amplitude table `phi(q)` on a Q-grid over `(-h, h)`; `h = q0` when `beta > 0`.
#[derive(Clone, Debug)]
pub struct PureState {
    grid: Arc<Grid>,
    amplitudes: Vec<Complex64>,
    params: MinLengthParams,
    half_width: f64,
    jets: Option<EdgeJets>,
    label: String,
}

impl PureState {
    /// Wraps an amplitude table. The grid must be a Q-grid whose reference
    /// interval is `(-q0, q0)`, or any symmetric finite interval when `beta == 0`.
    pub fn new(
        grid: Arc<Grid>,
        amplitudes: Vec<Complex64>,
        params: MinLengthParams,
        jets: Option<EdgeJets>,
        label: impl Into<String>,
    ) -> Result<PureState> {
        if grid.domain() != Domain::Q || grid.map() != AxisMap::Identity {
            return Err(Error::InvalidParameter("amplitudes must live on a Q-grid".into()));
        }
        if amplitudes.len() != grid.len() {
            return Err(Error::InvalidParameter("amplitudes and grid differ in length".into()));
        }
        let (lo, hi) = grid.reference_interval();
        if (lo + hi).abs() > 1e-12 * hi.abs() {
            return Err(Error::InvalidParameter("Q-grid must be symmetric".into()));
        }
        if params.is_deformed() && (hi - params.q0()).abs() > 1e-12 * params.q0() {
            return Err(Error::InvalidParameter("Q-grid must span (-q0, q0)".into()));
        }
        Ok(PureState { grid, amplitudes, params, half_width: hi, jets, label: label.into() })
    }

    /// Samples `f` on a graded Q-grid with `n_span` interior panels.
    pub fn from_fn<F: Fn(Loc) -> Complex64>(
        params: MinLengthParams,
        half_width: f64,
        n_span: usize,
        f: F,
        jets: Option<EdgeJets>,
        label: impl Into<String>,
    ) -> Result<PureState> {
        let grid = Arc::new(Grid::graded(Domain::Q, AxisMap::Identity, -half_width, half_width, n_span));
        let amps = grid.locs().iter().map(|&l| f(l)).collect();
        PureState::new(grid, amps, params, jets, label)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }
    pub fn params(&self) -> MinLengthParams {
        self.params
    }
    /// Half-width `h` of the support `(-h, h)`.
    pub fn half_width(&self) -> f64 {
        self.half_width
    }
    pub fn jets(&self) -> Option<&EdgeJets> {
        self.jets.as_ref()
    }
    pub fn label(&self) -> &str {
        &self.label
    }

    /// `int |phi|^2 dq`.
    pub fn norm_sq(&self) -> f64 {
        let p: Vec<f64> = self.amplitudes.iter().map(|a| a.norm_sqr()).collect();
        self.grid.integrate(&p, |_, v| v).map(|i| i.value).unwrap_or(f64::NAN)
    }

    /// Interpolated amplitude at a reference point; zero outside `(-h, h)`.
    pub fn amplitude_at(&self, loc: Loc) -> Complex64 {
        let outside = match loc {
            Loc::At(t) => t.abs() >= self.half_width,
            Loc::FromLo(d) | Loc::FromHi(d) => d <= 0.0,
        };
        if outside {
            return Complex64::new(0.0, 0.0);
        }
        let (p, s) = self.grid.find(loc);
        quad::fine().interp(&self.amplitudes[p * FINE..(p + 1) * FINE], s)
    }

    /// Edge derivatives, from the analytic jets when present and otherwise by
    /// polynomial extrapolation of the tabulated amplitudes.
    pub fn edge_jets(&self) -> EdgeJets {
        if let Some(j) = &self.jets {
            return j.clone();
        }
        numeric_jets(self)
    }

    fn scaled(&self, s: f64) -> PureState {
        PureState {
            grid: self.grid.clone(),
            amplitudes: self.amplitudes.iter().map(|a| a * s).collect(),
            params: self.params,
            half_width: self.half_width,
            jets: self.jets.as_ref().map(|j| j.scaled(s)),
            label: self.label.clone(),
        }
    }

    /// The state multiplied by `exp(i q a)`; the position density becomes `w(x + a)`.
    pub fn with_phase(&self, a: f64) -> PureState {
        let h = self.half_width;
        let amps = self
            .grid
            .locs()
            .iter()
            .zip(&self.amplitudes)
            .map(|(l, z)| {
                let q = match *l {
                    Loc::At(t) => t,
                    Loc::FromLo(d) => -h + d,
                    Loc::FromHi(d) => h - d,
                };
                z * Complex64::cis(q * a)
            })
            .collect();
        // Leibniz rule for the edge derivatives
        let shift = |jet: &[Complex64], q: f64| -> Vec<Complex64> {
            let ia = Complex64::new(0.0, a);
            (0..jet.len())
                .map(|n| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    let mut binom = 1.0;
                    for k in 0..=n {
                        if k > 0 {
                            binom *= (n - k + 1) as f64 / k as f64;
                        }
                        acc += jet[k] * ia.powi((n - k) as i32) * binom;
                    }
                    acc * Complex64::cis(q * a)
                })
                .collect()
        };
        let jets = self.jets.as_ref().map(|j| EdgeJets { lo: shift(&j.lo, -h), hi: shift(&j.hi, h) });
        PureState {
            grid: self.grid.clone(),
            amplitudes: amps,
            params: self.params,
            half_width: h,
            jets,
            label: format!("{}*exp(iq{a})", self.label),
        }
    }
}

/// Degree-4 polynomial fit in the distance to each end, through one node from
/// each of the graded panels nearest the end.
fn numeric_jets(state: &PureState) -> EdgeJets {
    let g = &state.grid;
    let locs = g.locs();
    let n_panels = g.panels().len();
    let pick = |upper: bool| -> Vec<Complex64> {
        // middle node of the graded panels one to five steps in from the outermost
        let mut pts: Vec<(f64, Complex64)> = Vec::new();
        for j in 1..=5 {
            let panel = if upper { n_panels - GRADE_DEPTH + j } else { GRADE_DEPTH - 1 - j };
            let idx = panel * FINE + FINE / 2;
            let d = match locs[idx] {
                Loc::FromLo(d) | Loc::FromHi(d) => d,
                Loc::At(t) => state.half_width - t.abs(),
            };
            pts.push((d, state.amplitudes[idx]));
        }
        // Newton divided differences in d, then expand to monomials
        let k = pts.len();
        let mut coef: Vec<Complex64> = pts.iter().map(|p| p.1).collect();
        for level in 1..k {
            for i in (level..k).rev() {
                coef[i] = (coef[i] - coef[i - 1]) / (pts[i].0 - pts[i - level].0);
            }
        }
        let mut mono = vec![Complex64::new(0.0, 0.0); k];
        for i in (0..k).rev() {
            // mono = mono * (d - d_i) + coef[i]
            let di = pts[i].0;
            let mut next = vec![Complex64::new(0.0, 0.0); k];
            for (m, &c) in mono.iter().enumerate() {
                if m + 1 < k {
                    next[m + 1] += c;
                }
                next[m] -= c * di;
            }
            next[0] += coef[i];
            mono = next;
        }
        // d/dq = -d/dd at the upper end, +d/dd at the lower end
        let mut fact = 1.0;
        (0..k)
            .map(|m| {
                if m > 0 {
                    fact *= m as f64;
                }
                let sign = if upper && m % 2 == 1 { -1.0 } else { 1.0 };
                mono[m] * fact * sign
            })
            .collect()
    };
    let hi = pick(true);
    let lo = pick(false);
    EdgeJets { lo, hi }
}

/// Scales a state to unit norm.
pub fn normalize(state: &PureState) -> Result<PureState> {
    let n2 = state.norm_sq();
    if !(n2 > 0.0) || !n2.is_finite() {
        return Err(Error::DegenerateState);
    }
    Ok(state.scaled(1.0 / n2.sqrt()))
}

/// Finite convex combination of pure states sharing parameters and support.
#[derive(Clone, Debug)]
pub struct MixedState {
    components: Vec<(f64, PureState)>,
}

impl MixedState {
    pub fn new(components: Vec<(f64, PureState)>) -> Result<MixedState> {
        let first = components.first().ok_or_else(|| Error::InvalidParameter("empty mixture".into()))?;
        let (params, h) = (first.1.params, first.1.half_width);
        let mut total = 0.0;
        for (w, s) in &components {
            if !(*w > 0.0 && *w <= 1.0) {
                return Err(Error::InvalidParameter(format!("mixture weight {w} outside (0, 1]")));
            }
            if s.params != params || (s.half_width - h).abs() > 1e-12 * h {
                return Err(Error::InvalidParameter("mixture components must share parameters and support".into()));
            }
            total += w;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("mixture weights sum to {total}")));
        }
        Ok(MixedState { components })
    }

    pub fn pure(state: PureState) -> MixedState {
        MixedState { components: vec![(1.0, state)] }
    }

    pub fn components(&self) -> &[(f64, PureState)] {
        &self.components
    }

    pub fn params(&self) -> MinLengthParams {
        self.components[0].1.params
    }

    pub fn half_width(&self) -> f64 {
        self.components[0].1.half_width
    }

    pub fn label(&self) -> String {
        if self.components.len() == 1 {
            return self.components[0].1.label.clone();
        }
        self.components
            .iter()
            .map(|(w, s)| format!("{w}*{}", s.label))
            .collect::<Vec<_>>()
            .join("+")
    }
}

impl From<PureState> for MixedState {
    fn from(s: PureState) -> Self {
        MixedState::pure(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CatalogName {
    UniformQ,
    RaisedCosineQ,
    TruncatedGaussianQ,
    RandomFourierQ,
}

impl CatalogName {
    pub const ALL: [CatalogName; 4] =
        [CatalogName::UniformQ, CatalogName::RaisedCosineQ, CatalogName::TruncatedGaussianQ, CatalogName::RandomFourierQ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CatalogName::UniformQ => "uniform_q",
            CatalogName::RaisedCosineQ => "raised_cosine_q",
            CatalogName::TruncatedGaussianQ => "truncated_gaussian_q",
            CatalogName::RandomFourierQ => "random_fourier_q",
        }
    }
}

impl fmt::Display for CatalogName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CatalogName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CatalogName::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::UnknownState(s.to_string()))
    }
}

/// Number of edge derivatives supplied analytically by the catalog.
const JET_ORDER: usize = 7;

/// Reference states.
///
/// * `uniform_q`: constant amplitude.
/// * `raised_cosine_q`: `cos(pi q / (2 h))`.
/// * `truncated_gaussian_q`: `exp(-q^2 / (4 s^2))` cut at `+-h`; `shape_args[0] = s`
///   (default 1).
/// * `random_fourier_q`: `sum_{n <= m} c_n sin(n pi (q + h) / (2 h))` with complex
///   standard normal `c_n` drawn from ChaCha8 seeded by `seed`; `shape_args[0] = m`
///   (default 6).
///
/// The support half-width is `h = q0` when `beta > 0`. When `beta == 0` it is the
/// last shape argument after the ones above (default `pi/2`, or `12 s` for the
/// truncated Gaussian).
pub fn catalog_state(
    name: CatalogName,
    params: MinLengthParams,
    shape_args: &[f64],
    seed: Option<u64>,
) -> Result<PureState> {
    if let Some(a) = shape_args.iter().find(|a| !(**a > 0.0) || !a.is_finite()) {
        return Err(Error::InvalidParameter(format!("shape parameter must be positive, got {a}")));
    }
    let width_arg = |idx: usize, default: f64| -> f64 {
        if params.is_deformed() {
            params.q0()
        } else {
            shape_args.get(idx).copied().unwrap_or(default)
        }
    };
    match name {
        CatalogName::UniformQ => {
            let h = width_arg(0, FRAC_PI_2);
            let jets = EdgeJets { lo: unit_jet(), hi: unit_jet() };
            build(params, h, |_| Complex64::new(1.0, 0.0), jets, name.as_str().to_string())
        }
        CatalogName::RaisedCosineQ => {
            let h = width_arg(0, FRAC_PI_2);
            let a = PI / (2.0 * h);
            let f = move |l: Loc| {
                Complex64::new(
                    match l {
                        Loc::At(t) => (a * t).cos(),
                        Loc::FromLo(d) | Loc::FromHi(d) => (a * d).sin(),
                    },
                    0.0,
                )
            };
            // phi^(n)(+h) = a^n cos((n+1) pi/2), phi^(n)(-h) = a^n cos((n-1) pi/2)
            let jet = |shift: i64| -> Vec<Complex64> {
                (0..JET_ORDER)
                    .map(|n| Complex64::new(a.powi(n as i32) * quarter_cos(n as i64 + shift), 0.0))
                    .collect()
            };
            let jets = EdgeJets { lo: jet(-1), hi: jet(1) };
            build(params, h, f, jets, name.as_str().to_string())
        }
        CatalogName::TruncatedGaussianQ => {
            let s = shape_args.first().copied().unwrap_or(1.0);
            let h = width_arg(1, 12.0 * s);
            let f = move |l: Loc| {
                let q = match l {
                    Loc::At(t) => t,
                    Loc::FromLo(d) => -h + d,
                    Loc::FromHi(d) => h - d,
                };
                Complex64::new((-q * q / (4.0 * s * s)).exp(), 0.0)
            };
            let jet_at = |q: f64| -> Vec<Complex64> {
                // d^n/dq^n exp(-y^2), y = q / (2 s): (-1)^n H_n(y) exp(-y^2) / (2 s)^n
                let y = q / (2.0 * s);
                let e = (-y * y).exp();
                let mut hm = 1.0;
                let mut hn = 2.0 * y;
                (0..JET_ORDER)
                    .map(|n| {
                        let hval = if n == 0 { 1.0 } else { hn };
                        if n >= 1 {
                            let next = 2.0 * y * hn - 2.0 * n as f64 * hm;
                            hm = hn;
                            hn = next;
                        }
                        let sign = if n % 2 == 1 { -1.0 } else { 1.0 };
                        Complex64::new(sign * hval * e / (2.0 * s).powi(n as i32), 0.0)
                    })
                    .collect()
            };
            let jets = EdgeJets { lo: jet_at(-h), hi: jet_at(h) };
            build(params, h, f, jets, format!("{}(s={s})", name.as_str()))
        }
        CatalogName::RandomFourierQ => {
            let seed = seed.ok_or_else(|| Error::InvalidParameter("random_fourier_q requires a seed".into()))?;
            let m = shape_args.first().copied().unwrap_or(6.0);
            if m.fract() != 0.0 || !(1.0..=64.0).contains(&m) {
                return Err(Error::InvalidParameter(format!("mode count must be an integer in [1, 64], got {m}")));
            }
            let m = m as usize;
            let h = width_arg(1, FRAC_PI_2);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let coef: Vec<Complex64> = (0..m)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(re, im)
                })
                .collect();
            let c2 = coef.clone();
            let f = move |l: Loc| {
                c2.iter()
                    .enumerate()
                    .map(|(i, c)| {
                        let n = (i + 1) as f64;
                        let b = n * PI / (2.0 * h);
                        let s = match l {
                            Loc::At(t) => (b * (t + h)).sin(),
                            Loc::FromLo(d) => (b * d).sin(),
                            Loc::FromHi(d) => {
                                let sign = if (i + 1) % 2 == 1 { 1.0 } else { -1.0 };
                                sign * (b * d).sin()
                            }
                        };
                        c * s
                    })
                    .sum()
            };
            // d^k/dq^k sin(b (q + h)) = b^k sin(b (q + h) + k pi/2)
            let jet = |upper: bool| -> Vec<Complex64> {
                (0..JET_ORDER)
                    .map(|k| {
                        coef.iter()
                            .enumerate()
                            .map(|(i, c)| {
                                let b = (i + 1) as f64 * PI / (2.0 * h);
                                let parity = if upper && (i + 1) % 2 == 1 { -1.0 } else { 1.0 };
                                c * (parity * b.powi(k as i32) * quarter_sin(k as i64))
                            })
                            .sum()
                    })
                    .collect()
            };
            let jets = EdgeJets { lo: jet(false), hi: jet(true) };
            build(params, h, f, jets, format!("{}(m={m},seed={seed})", name.as_str()))
        }
    }
}

fn unit_jet() -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); JET_ORDER];
    v[0] = Complex64::new(1.0, 0.0);
    v
}

/// `cos(k pi / 2)` exactly.
fn quarter_cos(k: i64) -> f64 {
    match k.rem_euclid(4) {
        0 => 1.0,
        2 => -1.0,
        _ => 0.0,
    }
}

/// `sin(k pi / 2)` exactly.
fn quarter_sin(k: i64) -> f64 {
    match k.rem_euclid(4) {
        1 => 1.0,
        3 => -1.0,
        _ => 0.0,
    }
}

/// Samples at increasing resolution until the auxiliary entropy settles.
fn build<F: Fn(Loc) -> Complex64>(
    params: MinLengthParams,
    h: f64,
    f: F,
    jets: EdgeJets,
    label: String,
) -> Result<PureState> {
    let entropy = |s: &PureState| -> f64 {
        let v: Vec<f64> = s.amplitudes.iter().map(|a| a.norm_sqr()).collect();
        s.grid
            .integrate(&v, |_, p| if p < 1e-300 { 0.0 } else { -p * p.ln() })
            .map(|i| i.value)
            .unwrap_or(f64::NAN)
    };
    // interpolant against the exact amplitude between nodes, as a bound on the mass error
    let resolved = |s: &PureState| -> bool {
        let mut defect = 0.0;
        for (p, panel) in s.grid.panels().iter().enumerate() {
            let (a, b) = s.grid.panel_bounds(p);
            let amp = s.amplitudes[p * FINE..(p + 1) * FINE].iter().map(|z| z.norm()).fold(0.0, f64::max);
            let miss = [-0.97, -0.5, 0.03, 0.61, 0.99]
                .iter()
                .map(|&x| (s.amplitude_at(panel.loc(x)) - f(panel.loc(x))).norm())
                .fold(0.0, f64::max);
            defect += (2.0 * amp * miss + miss * miss) * (b - a);
        }
        defect < 1e-13 * s.norm_sq()
    };
    let make = |n: usize| -> Result<Option<PureState>> {
        let raw = PureState::from_fn(params, h, n, &f, Some(jets.clone()), label.clone())?;
        if resolved(&raw) {
            Ok(Some(normalize(&raw)?))
        } else {
            Ok(None)
        }
    };
    let mut n = 16;
    let mut prev: Option<(PureState, f64)> = None;
    while n <= 4096 {
        if let Some(next) = make(n)? {
            let next_h = entropy(&next);
            if let Some((p, ph)) = prev {
                if (next_h - ph).abs() < 1e-11 {
                    return Ok(p);
                }
            }
            prev = Some((next, next_h));
        }
        n *= 2;
    }
    Err(Error::Resolution(format!("{label}: auxiliary entropy did not settle")))
}
