//! Sine eigenbasis representation of states on (0,1) with zero Dirichlet
//! boundary conditions.
//!
//! Everything in this crate works in coefficients against the orthonormal
//! basis `e_n(x) = sqrt(2) sin(n pi x)`, `n >= 1`, which diagonalizes the
//! diffusion operator with eigenvalues `mu_n = -c0 pi^2 n^2`. The fractional
//! space `H_r` then carries the weighted l2 norm with weights `|mu_n|^{2r}`,
//! the semigroup acts coefficient-wise by `exp(mu_n t)`, and the Galerkin
//! projection keeps an index prefix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{ModelParams, SobolevIndex};
use crate::series::{pi_power_sum, SeriesEnclosure};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const PI: f64 = std::f64::consts::PI;

/// Finite coefficient vector `(a_1, ..., a_M)` in the sine eigenbasis.
///
/// Coefficients beyond the stored length are implicitly zero, and two vectors
/// compare equal iff they agree after zero-padding.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralVector {
    coeffs: Vec<f64>,
}

impl SpectralVector {
    /// Wraps raw coefficients; rejects non-finite entries.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidParameter(
                "spectral coefficients must be finite".into(),
            ));
        }
        Ok(SpectralVector { coeffs })
    }

    pub fn zeros(len: usize) -> Self {
        SpectralVector {
            coeffs: vec![0.0; len],
        }
    }

    /// The basis vector `e_n` (1-based), stored with length `n`.
    pub fn unit_mode(n: usize) -> Self {
        assert!(n >= 1, "mode indices are 1-based");
        let mut coeffs = vec![0.0; n];
        coeffs[n - 1] = 1.0;
        SpectralVector { coeffs }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of mode `n` (1-based); zero beyond the stored length.
    pub fn coeff(&self, n: usize) -> f64 {
        assert!(n >= 1, "mode indices are 1-based");
        self.coeffs.get(n - 1).copied().unwrap_or(0.0)
    }

    /// Plain `H = L^2` norm (Parseval).
    pub fn h_norm(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|a| a * a)
            .sum::<f64>()
            .sqrt()
    }

    /// Fractional norm `|| (-A)^r . ||_H = (sum |mu_n|^{2r} a_n^2)^{1/2}`.
    pub fn hr_norm(&self, r: impl Into<SobolevIndex>, params: &ModelParams) -> f64 {
        let r = r.into().value();
        if r == 0.0 {
            return self.h_norm();
        }
        let mut sum = 0.0;
        for (i, a) in self.coeffs.iter().enumerate() {
            let n = (i + 1) as f64;
            let weight = (params.c0 * PI * PI * n * n).powf(2.0 * r);
            sum += weight * a * a;
        }
        sum.sqrt()
    }

    /// Semigroup action `a_n -> exp(mu_n t) a_n`; identity at `t = 0`.
    ///
    /// Underflow of the decay factor flushes to zero, which is the exact limit.
    pub fn semigroup(&self, t: f64, params: &ModelParams) -> Result<SpectralVector> {
        if !(t >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "semigroup time must be nonnegative, got {t}"
            )));
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let mu = eigenvalue_unchecked(i + 1, params);
                (mu * t).exp() * a
            })
            .collect();
        Ok(SpectralVector { coeffs })
    }

    /// Galerkin projection onto modes `1..=n_keep`; idempotent.
    pub fn project(&self, n_keep: usize) -> SpectralVector {
        let mut coeffs = self.coeffs.clone();
        coeffs.truncate(n_keep);
        SpectralVector { coeffs }
    }

    /// Projection in place, zero-filling instead of shrinking the buffer.
    pub fn truncate_modes(&mut self, n_keep: usize) {
        for a in self.coeffs.iter_mut().skip(n_keep) {
            *a = 0.0;
        }
    }

    /// Coefficients of the weak derivative in the cosine system
    /// `sqrt(2) cos(n pi x)`: term-wise, `d_n = n pi a_n`.
    pub fn derivative_cosine_coeffs(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| (i + 1) as f64 * PI * a)
            .collect()
    }

    /// Point evaluation `v(x) = sum a_n sqrt(2) sin(n pi x)`.
    pub fn value_at(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| a * SQRT_2 * ((i + 1) as f64 * PI * x).sin())
            .sum()
    }

    /// Point evaluation of the derivative, `v'(x) = sum a_n n pi sqrt(2) cos(n pi x)`.
    pub fn derivative_at(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let np = (i + 1) as f64 * PI;
                a * np * SQRT_2 * (np * x).cos()
            })
            .sum()
    }

    /// Sampled sup of `|v|` over `points` uniform interior points.
    ///
    /// This is a sampled (non-certified) sup; callers pass at least `4M + 1`
    /// points so the highest stored mode is resolved with margin.
    pub fn sampled_sup(&self, points: usize) -> f64 {
        let mut sup: f64 = 0.0;
        for j in 1..=points {
            let x = j as f64 / (points + 1) as f64;
            sup = sup.max(self.value_at(x).abs());
        }
        sup
    }

    /// Sampled sup of `|v'|`, same grid convention as [`Self::sampled_sup`].
    pub fn sampled_derivative_sup(&self, points: usize) -> f64 {
        let mut sup: f64 = 0.0;
        for j in 0..=points + 1 {
            let x = j as f64 / (points + 1) as f64;
            sup = sup.max(self.derivative_at(x).abs());
        }
        sup
    }

    /// Euclidean distance after zero-padding, i.e. the `H` norm of the difference.
    pub fn h_distance(&self, other: &SpectralVector) -> f64 {
        let longest = self.len().max(other.len());
        let mut sum = 0.0;
        for n in 1..=longest {
            let d = self.coeff(n) - other.coeff(n);
            sum += d * d;
        }
        sum.sqrt()
    }

    /// `H_r` distance after zero-padding.
    pub fn hr_distance(
        &self,
        other: &SpectralVector,
        r: impl Into<SobolevIndex>,
        params: &ModelParams,
    ) -> f64 {
        let r = r.into().value();
        let longest = self.len().max(other.len());
        let mut sum = 0.0;
        for n in 1..=longest {
            let d = self.coeff(n) - other.coeff(n);
            let weight = (params.c0 * PI * PI * (n * n) as f64).powf(2.0 * r);
            sum += weight * d * d;
        }
        sum.sqrt()
    }

    /// Zero-pads (or truncates) to exactly `len` coefficients.
    pub fn padded_to(&self, len: usize) -> SpectralVector {
        let coeffs = (1..=len).map(|n| self.coeff(n)).collect();
        SpectralVector { coeffs }
    }

    /// Linear combination `self + scale * other`, zero-padding the shorter.
    pub fn add_scaled(&self, other: &SpectralVector, scale: f64) -> SpectralVector {
        let longest = self.len().max(other.len());
        let coeffs = (1..=longest)
            .map(|n| self.coeff(n) + scale * other.coeff(n))
            .collect();
        SpectralVector { coeffs }
    }

    pub fn scale(&self, factor: f64) -> SpectralVector {
        SpectralVector {
            coeffs: self.coeffs.iter().map(|a| factor * a).collect(),
        }
    }
}

impl PartialEq for SpectralVector {
    fn eq(&self, other: &Self) -> bool {
        let longest = self.len().max(other.len());
        (1..=longest).all(|n| self.coeff(n) == other.coeff(n))
    }
}

/// Eigenvalue `mu_n = -c0 pi^2 n^2` of the diffusion operator; `n >= 1`.
pub fn eigenvalue(n: usize, params: &ModelParams) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "eigenvalue index must be at least 1".into(),
        ));
    }
    params.validate()?;
    Ok(eigenvalue_unchecked(n, params))
}

#[inline]
pub(crate) fn eigenvalue_unchecked(n: usize, params: &ModelParams) -> f64 {
    let nf = n as f64;
    -params.c0 * PI * PI * nf * nf
}

/// Closed-form constants of the eigenbasis, all certified.
#[derive(Clone, Copy, Debug)]
pub struct BasisConstants {
    /// Certified enclosure of `sum_n |mu_n|^{-2 rho}`.
    pub eig_sum: SeriesEnclosure,
    /// `sup_n ||d e_n/dx||_H |mu_n|^{-rho}`, attained at `n = 1` for `rho >= 1/2`.
    pub deriv_ratio: f64,
    /// `sup_n ||e_n||_inf = sqrt(2)`.
    pub basis_sup: f64,
}

/// Evaluates the eigenvalue-ladder constants for `rho >= 1/2` and asserts the
/// closed-form bounds `eig_sum <= c0^{-2 rho} / 6` and `deriv_ratio <= c0^{-rho}`.
pub fn basis_constants(rho: f64, params: &ModelParams) -> Result<BasisConstants> {
    if !(rho >= 0.5) {
        return Err(Error::InvalidParameter(format!(
            "basis constants require rho >= 1/2 (sum may diverge or the bound fails), got {rho}"
        )));
    }
    params.validate()?;

    // sum |mu_n|^{-2 rho} = c0^{-2 rho} * sum (pi n)^{-4 rho}; exponent 4*rho >= 2.
    let eig_sum = pi_power_sum(4.0 * rho).scale(params.c0.powf(-2.0 * rho));

    // ||d e_n/dx||_H |mu_n|^{-rho} = c0^{-rho} (pi n)^{1 - 2 rho}, decreasing in n.
    let deriv_ratio = params.c0.powf(-rho) * PI.powf(1.0 - 2.0 * rho);

    let bound = params.c0.powf(-2.0 * rho) / 6.0;
    if eig_sum.upper() > bound * (1.0 + 1e-12) {
        return Err(Error::Degenerate(format!(
            "eigenvalue sum {} exceeds its closed-form bound {}",
            eig_sum.upper(),
            bound
        )));
    }
    if deriv_ratio > params.c0.powf(-rho) * (1.0 + 1e-12) {
        return Err(Error::Degenerate(format!(
            "derivative ratio {deriv_ratio} exceeds its closed-form bound"
        )));
    }

    Ok(BasisConstants {
        eig_sum,
        deriv_ratio,
        basis_sup: SQRT_2,
    })
}

/// Certified sup-norm bound `||v||_inf <= |3 c0|^{-1/2} ||v||_{H_{1/2}}`.
pub fn linf_bound(v: &SpectralVector, params: &ModelParams) -> f64 {
    (3.0 * params.c0).powf(-0.5) * v.hr_norm(0.5, params)
}

/// Certified sup-norm bound on the derivative,
/// `||v'||_inf <= sqrt(2) c0^{-alpha - 1/2} ||v||_{H_{alpha + 1/2}} (sum (pi n)^{-4 alpha})^{1/2}`,
/// valid for `alpha > 1/4`.
pub fn dinf_bound(v: &SpectralVector, alpha: f64, params: &ModelParams) -> Result<f64> {
    if !(alpha > 0.25) {
        return Err(Error::InvalidParameter(format!(
            "derivative sup bound requires alpha > 1/4, got {alpha}"
        )));
    }
    let series = pi_power_sum(4.0 * alpha);
    Ok(SQRT_2
        * params.c0.powf(-alpha - 0.5)
        * v.hr_norm(alpha + 0.5, params)
        * series.upper().sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ModelParams {
        ModelParams::standard()
    }

    #[test]
    fn eigenvalue_formula() {
        let p = params();
        assert!((eigenvalue(1, &p).unwrap() + PI * PI).abs() < 1e-12);
        let mut p2 = p;
        p2.c0 = 2.0;
        assert!((eigenvalue(3, &p2).unwrap() + 2.0 * PI * PI * 9.0).abs() < 1e-9);
        assert!(eigenvalue(0, &p).is_err());
        let mut bad = p;
        bad.c0 = 0.0;
        assert!(eigenvalue(1, &bad).is_err());
    }

    #[test]
    fn hr_norm_examples() {
        let p = params();
        let e1 = SpectralVector::unit_mode(1);
        assert!((e1.hr_norm(0.5, &p) - PI).abs() < 1e-12);

        let v = SpectralVector::new(vec![1.0, 1.0]).unwrap();
        assert!((v.hr_norm(0.0, &p) - SQRT_2).abs() < 1e-12);

        // 2 e_3 in H_{-1}: 2 |mu_3|^{-1} = 2 / (9 pi^2), cross-checked against
        // a 40-digit evaluation of the defining sum.
        let v = SpectralVector::new(vec![0.0, 0.0, 2.0]).unwrap();
        assert!((v.hr_norm(-1.0, &p) - 0.022515818587186171).abs() < 1e-15);
    }

    #[test]
    fn semigroup_examples() {
        let p = params();
        let v = SpectralVector::new(vec![0.3, -0.7, 0.1]).unwrap();
        assert_eq!(v.semigroup(0.0, &p).unwrap(), v);

        let e1 = SpectralVector::unit_mode(1);
        let moved = e1.semigroup(1.0, &p).unwrap();
        assert!((moved.coeff(1) - (-PI * PI).exp()).abs() < 1e-12);

        // Deep decay underflows to zero without producing NaN.
        let e5 = SpectralVector::unit_mode(5);
        let far = e5.semigroup(1e3, &p).unwrap();
        assert!(far.coeff(5).is_finite());
        assert!(far.coeff(5).abs() < 1e-300);

        assert!(e1.semigroup(-0.1, &p).is_err());
    }

    #[test]
    fn projection_examples() {
        let v = SpectralVector::new(vec![1.0, 1.0, 1.0]).unwrap();
        let kept = v.project(2);
        assert_eq!(kept, SpectralVector::new(vec![1.0, 1.0]).unwrap());
        assert_eq!(v.project(0), SpectralVector::zeros(0));
        // Idempotent.
        assert_eq!(kept.project(2), kept);
    }

    #[test]
    fn zero_padded_equality() {
        let a = SpectralVector::new(vec![1.0, 0.0]).unwrap();
        let b = SpectralVector::new(vec![1.0]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn derivative_coefs() {
        let e1 = SpectralVector::unit_mode(1);
        let d = e1.derivative_cosine_coeffs();
        assert_eq!(d.len(), 1);
        assert!((d[0] - PI).abs() < 1e-12);

        assert!(SpectralVector::zeros(4)
            .derivative_cosine_coeffs()
            .iter()
            .all(|x| *x == 0.0));
    }

    #[test]
    fn derivative_norm_identity() {
        // ||v'||_H = c0^{-1/2} ||v||_{H_{1/2}} exactly.
        let p = params();
        let v = SpectralVector::new(vec![0.4, -1.2, 0.05, 2.0]).unwrap();
        let deriv_norm: f64 = v
            .derivative_cosine_coeffs()
            .iter()
            .map(|d| d * d)
            .sum::<f64>()
            .sqrt();
        let rhs = p.c0.powf(-0.5) * v.hr_norm(0.5, &p);
        assert!((deriv_norm - rhs).abs() <= 1e-12 * rhs.max(1.0));
    }

    #[test]
    fn basis_constant_values() {
        let p = params();
        let c = basis_constants(0.5, &p).unwrap();
        assert!((c.eig_sum.estimate() - 1.0 / 6.0).abs() < 1e-12);
        assert!((c.deriv_ratio - 1.0).abs() < 1e-12);
        assert!((c.basis_sup - SQRT_2).abs() == 0.0);

        assert!(basis_constants(0.49, &p).is_err());

        // rho = 1 collapses to 1/90, rho = 2 to 1/9450.
        let c1 = basis_constants(1.0, &p).unwrap();
        assert!((c1.eig_sum.estimate() - 1.0 / 90.0).abs() < 1e-13);
        let c2 = basis_constants(2.0, &p).unwrap();
        assert!((c2.eig_sum.estimate() - 1.0 / 9450.0).abs() < 1e-14);
    }

    #[test]
    fn sup_bounds_on_single_mode() {
        let p = params();
        let e1 = SpectralVector::unit_mode(1);
        let bound = linf_bound(&e1, &p);
        assert!((bound - PI / 3.0f64.sqrt()).abs() < 1e-12);
        // True sup of sqrt(2) sin(pi x) is sqrt(2).
        assert!(SQRT_2 <= bound);
        assert!(linf_bound(&SpectralVector::zeros(3), &p) == 0.0);

        let dbound = dinf_bound(&e1, 0.5, &p).unwrap();
        // Analytic sup of |e_1'| is pi sqrt(2).
        assert!(PI * SQRT_2 <= dbound);
        assert!(dinf_bound(&e1, 0.25, &p).is_err());
        assert!(dinf_bound(&SpectralVector::zeros(2), 0.5, &p).unwrap() == 0.0);
    }
}
