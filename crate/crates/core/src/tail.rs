//! Asymptotic tails of position-space densities.
//!
//! Beyond the tabulated range a density is modelled as
//! `w(x) = sum_n m_n x^-n + Re(exp(i omega x) sum_n c_n x^-n)`. Functionals of
//! the tail are integrated numerically over a few hundred periods and then in
//! a logarithmic variable with the oscillation averaged out, plus the leading
//! boundary correction of that averaging.

use num_complex::Complex64;

use crate::density::Integrand;
use crate::grid::{Divergent, Integral};
use crate::quad;

/// Highest power of `1/x` kept in a tail model.
pub const MAX_ORDER: usize = 24;

#[derive(Clone, Debug, PartialEq)]
pub struct Laurent {
    pub omega: f64,
    /// `mean[n]` multiplies `x^-n`.
    pub mean: Vec<f64>,
    /// `osc[n]` multiplies `exp(i omega x) x^-n`.
    pub osc: Vec<Complex64>,
}

impl Laurent {
    pub fn zero(omega: f64) -> Laurent {
        Laurent { omega, mean: vec![0.0; MAX_ORDER + 1], osc: vec![Complex64::new(0.0, 0.0); MAX_ORDER + 1] }
    }

    /// `|psi|^2` for `psi = exp(i h x) sum a_n x^-n + exp(-i h x) sum b_n x^-n`.
    pub fn from_wave(h: f64, a: &[Complex64], b: &[Complex64]) -> Laurent {
        let mut out = Laurent::zero(2.0 * h);
        for (j, aj) in a.iter().enumerate() {
            for (l, al) in a.iter().enumerate() {
                if j + l <= MAX_ORDER {
                    out.mean[j + l] += (aj * al.conj()).re;
                }
            }
        }
        for (j, bj) in b.iter().enumerate() {
            for (l, bl) in b.iter().enumerate() {
                if j + l <= MAX_ORDER {
                    out.mean[j + l] += (bj * bl.conj()).re;
                }
            }
            for (l, al) in a.iter().enumerate() {
                if j + l <= MAX_ORDER {
                    out.osc[j + l] += al * bj.conj() * 2.0;
                }
            }
        }
        out
    }

    pub fn add_scaled(&mut self, other: &Laurent, s: f64) {
        for (m, o) in self.mean.iter_mut().zip(&other.mean) {
            *m += s * o;
        }
        for (c, o) in self.osc.iter_mut().zip(&other.osc) {
            *c += o * s;
        }
    }

    /// Slowly varying envelope `M(x)` and complex amplitude `C(x)`.
    pub fn parts(&self, x: f64) -> (f64, Complex64) {
        let inv = 1.0 / x;
        let mut m = 0.0;
        let mut c = Complex64::new(0.0, 0.0);
        let mut pw = 1.0;
        for n in 0..self.mean.len() {
            m += self.mean[n] * pw;
            c += self.osc[n] * pw;
            pw *= inv;
        }
        (m, c)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (m, c) = self.parts(x);
        (m + (c * Complex64::cis(self.omega * x)).re).max(0.0)
    }

    /// Non-oscillating part only.
    pub fn eval_mean(&self, x: f64) -> f64 {
        self.parts(x).0.max(0.0)
    }

    /// Smallest `n` with a nonzero coefficient.
    pub fn leading_order(&self) -> Option<usize> {
        (0..self.mean.len()).find(|&n| self.mean[n] != 0.0 || self.osc[n] != Complex64::new(0.0, 0.0))
    }

    /// Whether the oscillating part matters relative to the envelope at `|x| >= x0`.
    pub fn oscillates(&self, x0: f64) -> bool {
        let (m, c) = self.parts(x0);
        let (m2, c2) = self.parts(2.0 * x0);
        c.norm() > 1e-16 * m.abs() || c2.norm() > 1e-16 * m2.abs()
    }

    /// Drop the oscillating part.
    pub fn without_oscillation(&self) -> Laurent {
        Laurent { omega: self.omega, mean: self.mean.clone(), osc: vec![Complex64::new(0.0, 0.0); self.osc.len()] }
    }

    /// Model of `int K(y) w(x - y) dy` for a kernel with moments
    /// `mu[k] = int K y^k` and twisted moments `tw[k] = int K y^k exp(-i omega y)`.
    pub fn smeared(&self, mu: &[f64], tw: &[Complex64]) -> Laurent {
        let mut out = Laurent::zero(self.omega);
        for n in 1..=MAX_ORDER {
            let (m, c) = (self.mean[n], self.osc[n]);
            if m == 0.0 && c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let mut binom = 1.0; // C(n + k - 1, k)
            for k in 0..=(MAX_ORDER - n) {
                if k > 0 {
                    binom *= (n + k - 1) as f64 / k as f64;
                }
                if k < mu.len() {
                    out.mean[n + k] += m * binom * mu[k];
                }
                if k < tw.len() {
                    out.osc[n + k] += c * binom * tw[k];
                }
            }
        }
        out
    }
}

/// Phase average `(1/pi) int_0^pi F(M + R cos t) dt` and, when `upto` is given,
/// the partial integral `int_0^upto (F - average) dt`. The substitution
/// `t = pi (1 - s^4)` flattens the cusp at `t = pi` that appears when `M = R`.
fn phase_average<F: Fn(f64) -> f64>(f: &F, m: f64, r: f64, upto: Option<f64>) -> (f64, f64) {
    let pi = std::f64::consts::PI;
    let rule = quad::fine();
    let integrate = |s0: f64, s1: f64| -> f64 {
        let mut acc = 0.0;
        let pieces = 3;
        for i in 0..pieces {
            let a = s0 + (s1 - s0) * i as f64 / pieces as f64;
            let b = s0 + (s1 - s0) * (i + 1) as f64 / pieces as f64;
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                let s = mid + half * x;
                let t = pi * (1.0 - s.powi(4));
                acc += w * half * 4.0 * pi * s.powi(3) * f(m + r * t.cos());
            }
        }
        acc
    };
    let avg = integrate(0.0, 1.0) / pi;
    let partial = match upto {
        None => 0.0,
        Some(a) => {
            let a = a.clamp(0.0, pi);
            let sa = ((pi - a) / pi).max(0.0).powf(0.25);
            integrate(sa, 1.0) - avg * a
        }
    };
    (avg, partial)
}

/// `int F(x, w(x)) dx` over `side * x in [start, end)` with `end` infinite by default.
pub fn tail_integral(
    model: &Laurent,
    start: f64,
    side: f64,
    integrand: Integrand,
    end: Option<f64>,
) -> Result<Integral, Divergent> {
    assert!(start > 0.0);
    let period = 2.0 * std::f64::consts::PI / model.omega;
    let oscill = model.oscillates(start);
    let eval = |y: f64| -> f64 {
        let x = side * y;
        let w = if oscill { model.eval(x) } else { model.eval_mean(x) };
        integrand.apply(x, w)
    };
    // position of the oscillation minima in y = side * x
    let anchor = oscill.then(|| {
        let (_, c) = model.parts(side * start);
        (side * (std::f64::consts::PI - c.arg()) / model.omega).rem_euclid(period)
    });
    if let Some(e) = end {
        let e = e.abs();
        if e <= start {
            return Ok(Integral::default());
        }
        let width = if oscill { 0.5 * period } else { f64::INFINITY };
        return Ok(near_part(&eval, start, e, width, anchor));
    }

    let Some(n0) = model.leading_order() else {
        return Ok(Integral::default());
    };
    let p = integrand.decay(n0 as f64);

    let mut total = Integral::default();
    let mut y1 = start;
    if oscill {
        let max_panels = 20_000.0;
        y1 = (64.0 * start).min(start + max_panels * 0.5 * period);
        total = total + near_part(&eval, start, y1, 0.5 * period, anchor);
    }
    if p <= 1.0 {
        return Err(Divergent { partial: total.value });
    }

    let averaged = |y: f64| -> f64 {
        let x = side * y;
        let (m, c) = model.parts(x);
        if oscill {
            phase_average(&|w: f64| integrand.apply(x, w.max(0.0)), m, c.norm(), None).0
        } else {
            integrand.apply(x, m.max(0.0))
        }
    };

    // far part in s = ln(y / y1)
    let ds = (8.0 / (p - 1.0)).min(2.0);
    let s_stop = (40.0 / (p - 1.0)).min(600.0);
    let mut s = 0.0;
    let mut far = Integral::default();
    let fine = quad::fine();
    let coarse = quad::coarse();
    while s < s_stop {
        let (a, b) = (s, (s + ds).min(s_stop));
        let g = |u: f64| {
            let y = y1 * u.exp();
            y * averaged(y)
        };
        let sum = |rule: &quad::Rule| -> f64 {
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            rule.nodes.iter().zip(&rule.weights).map(|(&x, &w)| w * half * g(mid + half * x)).sum()
        };
        let hi = sum(fine);
        let lo = sum(coarse);
        far = far + Integral::new(hi, (hi - lo).abs());
        s = b;
    }
    // leading-order remainder past the last panel
    let y_end = y1 * s_stop.exp();
    let f_end = averaged(y_end);
    let mut rem = f_end * y_end / (p - 1.0);
    if integrand.has_log() && y_end.ln() > 0.0 {
        rem *= 1.0 + 1.0 / ((p - 1.0) * y_end.ln());
    }
    far = far + Integral::new(rem, 1e-2 * rem.abs());
    total = total + far;

    if oscill {
        let x1 = side * y1;
        let (m, c) = model.parts(x1);
        let theta = (model.omega * x1 + c.arg()).rem_euclid(2.0 * std::f64::consts::PI);
        let theta = if theta > std::f64::consts::PI { theta - 2.0 * std::f64::consts::PI } else { theta };
        let f = |w: f64| integrand.apply(x1, w.max(0.0));
        let (_, part) = phase_average(&f, m, c.norm(), Some(theta.abs()));
        let antider = theta.signum() * part;
        // phase decreases along the tail when side < 0
        let corr = -side * antider / model.omega;
        total = total + Integral::new(corr, 0.05 * corr.abs() + 1e-3 * far.value.abs() / (model.omega * y1).powi(2));
    }
    Ok(total)
}

/// Composite rule over `[y0, y1]` with panels no wider than `width` and no
/// wider than a quarter of their distance from the origin. With an `anchor`
/// the panels are aligned to the minima `anchor + k * 2 width` of the
/// oscillation, and the quarter next to each minimum uses `y = y_min + d s^4`
/// to absorb the cusp of `F` at a vanishing density.
fn near_part<F: Fn(f64) -> f64>(f: &F, y0: f64, y1: f64, width: f64, anchor: Option<f64>) -> Integral {
    let fine = quad::fine();
    let coarse = quad::coarse();
    let plain = |a: f64, b: f64| -> (f64, f64) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let hi: f64 = fine.nodes.iter().zip(&fine.weights).map(|(&x, &w)| w * half * f(mid + half * x)).sum();
        let lo: f64 = coarse.nodes.iter().zip(&coarse.weights).map(|(&x, &w)| w * half * f(mid + half * x)).sum();
        (hi, lo)
    };
    // y = m + dir * d * s^4 for s in [0, 1]
    let clustered = |m: f64, d: f64, dir: f64| -> (f64, f64) {
        let g = |s: f64| 4.0 * d * s.powi(3) * f(m + dir * d * s.powi(4));
        let hi: f64 = fine.nodes.iter().zip(&fine.weights).map(|(&x, &w)| 0.5 * w * g(0.5 + 0.5 * x)).sum();
        let lo: f64 = coarse.nodes.iter().zip(&coarse.weights).map(|(&x, &w)| 0.5 * w * g(0.5 + 0.5 * x)).sum();
        (hi, lo)
    };
    let mut total = Integral::default();
    let mut a = y0;
    let mut k = anchor.map(|y| ((y0 - y) / width).floor() as i64 + 1);
    while a < y1 {
        let (b, min_at) = match (anchor, k) {
            (Some(y), Some(kk)) if width <= 0.25 * a => {
                let b = (y + kk as f64 * width).min(y1);
                // even k is a minimum
                let hi_min = kk.rem_euclid(2) == 0 && b < y1;
                let lo_min = kk.rem_euclid(2) == 1 && (a - (y + (kk - 1) as f64 * width)).abs() <= 1e-12 * a;
                k = Some(kk + 1);
                (b, if lo_min { Some(a) } else if hi_min { Some(b) } else { None })
            }
            _ => {
                let b = (a + width.min(0.25 * a)).min(y1);
                if let (Some(y), Some(_)) = (anchor, k) {
                    k = Some(((b - y) / width).floor() as i64 + 1);
                }
                (b, None)
            }
        };
        let (hi, lo) = match min_at {
            None => plain(a, b),
            Some(m) => {
                let d = 0.25 * (b - a);
                if m == a {
                    let (h1, l1) = clustered(a, d, 1.0);
                    let (h2, l2) = plain(a + d, b);
                    (h1 + h2, l1 + l2)
                } else {
                    let (h1, l1) = clustered(b, d, -1.0);
                    let (h2, l2) = plain(a, b - d);
                    (h1 + h2, l1 + l2)
                }
            }
        };
        total = total + Integral::new(hi, (hi - lo).abs());
        a = b;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sinc_model(h: f64) -> Laurent {
        // uniform amplitude on (-h, h): w(x) = sin^2(h x) / (pi h x^2)
        let mut m = Laurent::zero(2.0 * h);
        m.mean[2] = 1.0 / (2.0 * PI * h);
        m.osc[2] = Complex64::new(-1.0 / (2.0 * PI * h), 0.0);
        m
    }

    #[test]
    fn sinc_model_matches_closed_form() {
        let h = 1.3;
        let m = sinc_model(h);
        for x in [10.0, -37.2, 500.1] {
            let exact = (h * x).sin().powi(2) / (PI * h * x * x);
            assert!((m.eval(x) - exact).abs() < 1e-15);
        }
    }

    #[test]
    fn sinc_tail_mass_and_power() {
        let h = PI / 2.0;
        let m = sinc_model(h);
        let l = 64.0;
        // int_L^inf sin^2(hx)/(pi h x^2) dx, oracle by brute-force quadrature plus
        // the averaged remainder
        let brute = {
            let f = |x: f64| (h * x).sin().powi(2) / (PI * h * x * x);
            let mut acc = 0.0;
            let mut a = l;
            while a < 2.0e5 {
                acc += quad::gauss(f, a, a + 1.0);
                a += 1.0;
            }
            acc + 1.0 / (2.0 * PI * h * 2.0e5)
        };
        let got = tail_integral(&m, l, 1.0, Integrand::Mass, None).unwrap();
        assert!((got.value - brute).abs() < 1e-10, "{} vs {}", got.value, brute);
        let neg = tail_integral(&m, l, -1.0, Integrand::Mass, None).unwrap();
        assert!((neg.value - brute).abs() < 1e-10);
        // power 0.8: integrand ~ x^-1.6, closed-form average of |sin|^1.6 enters
        let g = 0.8;
        let got = tail_integral(&m, l, 1.0, Integrand::Power(g), None).unwrap();
        let brute = {
            let f = |x: f64| ((h * x).sin().powi(2) / (PI * h * x * x)).powf(g);
            let mut acc = 0.0;
            let mut a = l;
            let top = 4.0e4;
            while a < top {
                acc += quad::adaptive(&f, a, a + 2.0, 1e-16).0;
                a += 2.0;
            }
            // remainder with the exact mean of |sin|^{2g}
            let avg = phase_mean_sin_pow(2.0 * g);
            acc + avg * (PI * h).powf(-g) * top.powf(1.0 - 2.0 * g) / (2.0 * g - 1.0)
        };
        assert!((got.value - brute).abs() < 1e-7 * brute, "{} vs {}", got.value, brute);
    }

    fn phase_mean_sin_pow(a: f64) -> f64 {
        let f = |t: f64| t.sin().abs().powf(a);
        quad::adaptive(&f, 0.0, PI, 1e-15).0 / PI
    }

    #[test]
    fn divergent_moment_detected() {
        let m = sinc_model(1.0);
        assert!(tail_integral(&m, 50.0, 1.0, Integrand::Moment(1), None).is_err());
        assert!(tail_integral(&m, 50.0, 1.0, Integrand::Power(0.5), None).is_err());
    }

    #[test]
    fn smearing_preserves_mass_of_power_tail() {
        // mean-only x^-4 tail smeared by a Gaussian: moments mu_0 = 1, mu_2 = s^2
        let mut m = Laurent::zero(1.0);
        m.mean[4] = 1.0;
        let s: f64 = 0.7;
        let mu = [1.0, 0.0, s * s, 0.0, 3.0 * s.powi(4)];
        let out = m.smeared(&mu, &[]);
        assert!((out.mean[4] - 1.0).abs() < 1e-15);
        assert!((out.mean[6] - 10.0 * s * s).abs() < 1e-14);
    }
}
