//! Minimal-length parameters and conjugate entropic orders.

use std::f64::consts::FRAC_PI_2;

use crate::{Error, Result};

/// Deformation parameter `beta` and the half-width `q0` of the auxiliary
/// wavenumber interval. `q0` is `f64::INFINITY` when `beta == 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinLengthParams {
    beta: f64,
    q0: f64,
}

pub fn make_params(beta: f64) -> Result<MinLengthParams> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::InvalidParameter(format!("beta must be finite and >= 0, got {beta}")));
    }
    let q0 = if beta == 0.0 { f64::INFINITY } else { FRAC_PI_2 / beta.sqrt() };
    Ok(MinLengthParams { beta, q0 })
}

impl MinLengthParams {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn q0(&self) -> f64 {
        self.q0
    }

    pub fn sqrt_beta(&self) -> f64 {
        self.beta.sqrt()
    }

    /// False in the undeformed limit `beta == 0`.
    pub fn is_deformed(&self) -> bool {
        self.beta > 0.0
    }
}

/// Entropic orders with `1/alpha + 1/gamma = 2`, or the degenerate pair (1, 1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrderPair {
    alpha: f64,
    gamma: f64,
}

impl OrderPair {
    pub fn new(alpha: f64, gamma: f64) -> Result<OrderPair> {
        if alpha == 1.0 && gamma == 1.0 {
            return Ok(OrderPair { alpha, gamma });
        }
        let ok = alpha.is_finite()
            && alpha > 1.0
            && gamma > 0.5
            && gamma < 1.0
            && (1.0 / alpha + 1.0 / gamma - 2.0).abs() <= 1e-12;
        if ok {
            Ok(OrderPair { alpha, gamma })
        } else {
            Err(Error::NonConjugate { alpha, gamma })
        }
    }

    pub fn degenerate() -> OrderPair {
        OrderPair { alpha: 1.0, gamma: 1.0 }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn is_degenerate(&self) -> bool {
        self.alpha == 1.0
    }

    /// `max(alpha, gamma)`, the order of the deformed logarithm in the Tsallis bound.
    pub fn nu(&self) -> f64 {
        self.alpha.max(self.gamma)
    }
}

/// Conjugate partner `gamma = alpha / (2 alpha - 1)`.
pub fn conjugate_order(alpha: f64) -> Result<OrderPair> {
    if alpha == 1.0 {
        return Ok(OrderPair::degenerate());
    }
    if !(alpha.is_finite() && alpha > 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must exceed 1, got {alpha}")));
    }
    OrderPair::new(alpha, alpha / (2.0 * alpha - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn q0_values() {
        assert_eq!(make_params(1.0).unwrap().q0(), FRAC_PI_2);
        assert!((make_params(0.25).unwrap().q0() - PI).abs() < 1e-15);
        assert!(make_params(0.0).unwrap().q0().is_infinite());
        assert!(make_params(-1.0).is_err());
        assert!(make_params(f64::NAN).is_err());
    }

    #[test]
    fn conjugates() {
        let p = conjugate_order(1.5).unwrap();
        assert!((p.gamma() - 0.75).abs() < 1e-15);
        let p = conjugate_order(2.0).unwrap();
        assert!((p.gamma() - 2.0 / 3.0).abs() < 1e-15);
        let p = conjugate_order(1.0 + 1e-9).unwrap();
        assert!((p.gamma() - 1.0).abs() < 1e-8);
        assert!(conjugate_order(0.9).is_err());
        assert!(OrderPair::new(2.0, 0.7).is_err());
        assert!(conjugate_order(1.0).unwrap().is_degenerate());
    }
}
