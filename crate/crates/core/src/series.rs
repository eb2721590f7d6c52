//! Certified evaluation of the spectral series `sum_{n>=1} n^{-s}`, `s > 1`.
//!
//! Several closed-form constants in this crate are infinite series over the
//! eigenvalue ladder. Inequality checkers need *certified upper bounds* on
//! them, not floating-point estimates, so each sum is evaluated as a compensated
//! partial sum plus a tail enclosure. The tail of a completely monotone term
//! `f(x) = x^{-s}` satisfies the Euler-Maclaurin identity
//!
//! ```text
//! sum_{n>=a} f(n) = int_a^inf f + f(a)/2 - f'(a)/12 + R,
//! |R| <= |f'''(a)| / 720,
//! ```
//!
//! and with `a ~ 2*10^4` the remainder bound sits far below 1e-12 for every
//! exponent used here, so the enclosure width is dominated by rounding.

/// Number of explicitly summed terms before switching to the tail formula.
const PARTIAL_TERMS: usize = 20_000;

/// Two-sided enclosure of a convergent series of positive terms.
#[derive(Clone, Copy, Debug)]
pub struct SeriesEnclosure {
    pub lower: f64,
    pub upper: f64,
}

impl SeriesEnclosure {
    /// Certified upper bound, the value inequality checkers must use.
    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// Midpoint estimate for reporting.
    pub fn estimate(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub(crate) fn scale(self, factor: f64) -> SeriesEnclosure {
        debug_assert!(factor > 0.0);
        // One rounding per endpoint; widen by a few ulps to stay certified.
        let lo = self.lower * factor;
        let hi = self.upper * factor;
        SeriesEnclosure {
            lower: lo - 4.0 * f64::EPSILON * lo.abs(),
            upper: hi + 4.0 * f64::EPSILON * hi.abs(),
        }
    }
}

/// Enclosure of `sum_{n=1}^inf n^{-s}` for `s > 1`.
///
/// Panics if `s <= 1` (the series diverges); callers validate exponents first.
pub fn power_sum(s: f64) -> SeriesEnclosure {
    assert!(s > 1.0, "power_sum requires exponent > 1, got {s}");

    // Compensated summation, smallest terms first.
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for n in (1..=PARTIAL_TERMS).rev() {
        let term = (n as f64).powf(-s);
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }

    let a = (PARTIAL_TERMS + 1) as f64;
    let integral = a.powf(1.0 - s) / (s - 1.0);
    let half_term = 0.5 * a.powf(-s);
    let derivative_correction = s * a.powf(-s - 1.0) / 12.0;
    let tail = integral + half_term + derivative_correction;
    let remainder = s * (s + 1.0) * (s + 2.0) * a.powf(-s - 3.0) / 720.0;

    // Rounding slack: ~2 ulp per compensated partial sum plus the tail terms.
    let slack = 8.0 * f64::EPSILON * (sum + tail) + remainder;
    SeriesEnclosure {
        lower: sum + tail - slack,
        upper: sum + tail + slack,
    }
}

/// Enclosure of `sum_{n=1}^inf (pi * n)^{-s} = pi^{-s} * power_sum(s)` for `s > 1`.
pub fn pi_power_sum(s: f64) -> SeriesEnclosure {
    power_sum(s).scale(std::f64::consts::PI.powf(-s))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_closed_forms() {
        // zeta(2) = pi^2/6, zeta(4) = pi^4/90, zeta(8) = pi^8/9450.
        let z2 = power_sum(2.0);
        let pi = std::f64::consts::PI;
        assert!((z2.estimate() - pi * pi / 6.0).abs() < 1e-12);
        assert!(z2.width() < 1e-12);

        let z4 = power_sum(4.0);
        assert!((z4.estimate() - pi.powi(4) / 90.0).abs() < 1e-12);

        let z8 = power_sum(8.0);
        assert!((z8.estimate() - pi.powi(8) / 9450.0).abs() < 1e-13);
    }

    #[test]
    fn enclosure_brackets_truth() {
        let pi = std::f64::consts::PI;
        let truth = pi * pi / 6.0;
        let z2 = power_sum(2.0);
        assert!(z2.lower <= truth && truth <= z2.upper);
    }

    #[test]
    fn slow_series_still_tight() {
        // s = 1.2: very slow convergence; the tail formula carries the load.
        // zeta(1.2) = 5.59158244..., reference from a 40-digit evaluation.
        let z = power_sum(1.2);
        assert!((z.estimate() - 5.591582441177750).abs() < 1e-10);
        assert!(z.width() < 1e-10);
    }

    #[test]
    fn pi_weighted_sum() {
        // sum (pi n)^{-2} = 1/6 exactly.
        let s = pi_power_sum(2.0);
        assert!((s.estimate() - 1.0 / 6.0).abs() < 1e-13);
    }

    #[test]
    #[should_panic]
    fn rejects_divergent_exponent() {
        power_sum(1.0);
    }
}
