//! Model parameters for the stochastic Burgers equation
//!
//! The equation lives on (0,1) with zero Dirichlet boundary conditions,
//! diffusion operator `A = c0 * Laplacian`, nonlinearity `F(w) = c1 * w * dw/dx`,
//! and additive noise whose covariance is diagonal in the sine eigenbasis.
//! The regularity indices `beta` (noise), `gamma` (solution), and `eps`
//! (initial-condition surplus) drive every convergence-rate formula in the
//! harness.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent `r` of the interpolation space `H_r`, the domain of `(-A)^r`.
///
/// Negative exponents are permitted (dual-scale norms).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SobolevIndex(pub f64);

impl SobolevIndex {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<f64> for SobolevIndex {
    fn from(r: f64) -> Self {
        SobolevIndex(r)
    }
}

/// Scalar model parameters.
///
/// Invariants enforced by [`ModelParams::new`]:
/// `c0 > 0`, `horizon > 0`, `eps > 0`, `beta > -1/4`, and
/// `1/4 < gamma < min(1, 1/2 + beta)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Diffusion scale; the eigenvalue of mode `n` is `-c0 * pi^2 * n^2`.
    pub c0: f64,
    /// Nonlinearity scale in `F(w) = c1 * w * dw/dx`.
    pub c1: f64,
    /// Final time `T` of the simulation interval `[0, T]`.
    pub horizon: f64,
    /// Noise regularity: the covariance factor is Hilbert-Schmidt into `H_beta`.
    pub beta: f64,
    /// Solution regularity index; errors are measured in `H_gamma`.
    pub gamma: f64,
    /// Initial-condition surplus: the initial state lies in `H_{gamma+eps}`.
    pub eps: f64,
}

impl ModelParams {
    pub fn new(c0: f64, c1: f64, horizon: f64, beta: f64, gamma: f64, eps: f64) -> Result<Self> {
        let p = ModelParams {
            c0,
            c1,
            horizon,
            beta,
            gamma,
            eps,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("c0", self.c0),
            ("c1", self.c1),
            ("horizon", self.horizon),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("eps", self.eps),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite")));
            }
        }
        if self.c0 <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "c0 must be positive, got {}",
                self.c0
            )));
        }
        if self.horizon <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if self.eps <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "eps must be positive, got {}",
                self.eps
            )));
        }
        if self.beta <= -0.25 {
            return Err(Error::InvalidParameter(format!(
                "beta must exceed -1/4, got {}",
                self.beta
            )));
        }
        let gamma_cap = 1.0f64.min(0.5 + self.beta);
        if !(self.gamma > 0.25 && self.gamma < gamma_cap) {
            return Err(Error::InvalidParameter(format!(
                "gamma must lie in (1/4, {gamma_cap}), got {}",
                self.gamma
            )));
        }
        Ok(())
    }

    /// Default setup used throughout the verification harness:
    /// unit diffusion, `F(w) = -w w'`, horizon 1, `beta = 1/2`, `gamma = 0.3`,
    /// `eps = 1/2`.
    pub fn standard() -> Self {
        ModelParams {
            c0: 1.0,
            c1: -1.0,
            horizon: 1.0,
            beta: 0.5,
            gamma: 0.3,
            eps: 0.5,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_standard_parameters() {
        ModelParams::standard().validate().unwrap();
    }

    #[test]
    fn rejects_nonpositive_c0() {
        assert!(ModelParams::new(0.0, 1.0, 1.0, 0.5, 0.3, 0.5).is_err());
        assert!(ModelParams::new(-1.0, 1.0, 1.0, 0.5, 0.3, 0.5).is_err());
    }

    #[test]
    fn rejects_gamma_outside_window() {
        // gamma must exceed 1/4.
        assert!(ModelParams::new(1.0, -1.0, 1.0, 0.5, 0.25, 0.5).is_err());
        // gamma must stay below 1/2 + beta.
        assert!(ModelParams::new(1.0, -1.0, 1.0, -0.1, 0.45, 0.5).is_err());
        // gamma must stay below 1.
        assert!(ModelParams::new(1.0, -1.0, 1.0, 2.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn rejects_shallow_beta() {
        assert!(ModelParams::new(1.0, -1.0, 1.0, -0.25, 0.3, 0.5).is_err());
    }
}
