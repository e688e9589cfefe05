//! Generalized exponential integrals of complex argument.

use num_complex::Complex64;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `E_n(z) = int_1^inf exp(-z t) t^{-n} dt` for integer `n >= 1` and
/// `|arg z| < pi`. Power series near the origin, continued fraction elsewhere.
pub fn expint(n: u32, z: Complex64) -> Complex64 {
    assert!(n >= 1, "expint order must be positive");
    if z == Complex64::new(0.0, 0.0) {
        assert!(n > 1, "E_1 diverges at the origin");
        return Complex64::new(1.0 / (n as f64 - 1.0), 0.0);
    }
    if z.norm() < 2.0 {
        series(n, z)
    } else {
        continued_fraction(n, z)
    }
}

fn series(n: u32, z: Complex64) -> Complex64 {
    let nm1 = n as i64 - 1;
    let mut digamma = -EULER_GAMMA;
    for k in 1..n {
        digamma += 1.0 / k as f64;
    }
    let mut sum = if nm1 != 0 {
        Complex64::new(1.0 / nm1 as f64, 0.0)
    } else {
        -z.ln() + digamma
    };
    // term = (-z)^m / m!
    let mut term = Complex64::new(1.0, 0.0);
    for m in 1..200i64 {
        term *= -z / m as f64;
        let add = if m == nm1 {
            term * (-z.ln() + digamma)
        } else {
            -term / (m - nm1) as f64
        };
        sum += add;
        if add.norm() < 1e-17 * sum.norm() {
            break;
        }
    }
    sum
}

fn continued_fraction(n: u32, z: Complex64) -> Complex64 {
    let tiny = 1e-300;
    let nf = n as f64;
    let mut b = z + nf;
    let mut c = Complex64::new(1.0 / tiny, 0.0);
    let mut d = b.inv();
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (nf - 1.0 + i as f64);
        b += 2.0;
        d = (d * an + b).inv();
        c = b + c.inv() * an;
        let del = c * d;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            break;
        }
    }
    h * (-z).exp()
}
