//! Dealiased pseudo-spectral evaluation of the quadratic nonlinearity.
//!
//! `F(v) = c1 v v' = (c1/2) (v^2)'` maps an `N`-mode sine polynomial into a
//! `2N`-mode one. The fast path goes through physical space: inverse sine
//! transform onto a uniform grid, pointwise square, forward cosine transform
//! of the square, then term-wise differentiation of the cosine series. A
//! closed grid of `M + 1` points with `M >= 2N + 1` already avoids aliasing
//! of the exact degree-`2N` square; we use the smallest power of two
//! `M >= 4N` (grid size `M + 1 >= 4N + 1`) for headroom and FFT efficiency.
//!
//! Both half transforms are realized as one complex FFT of length `2M` on an
//! odd (sine) respectively even (cosine) extension.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::Result;
use crate::params::ModelParams;
use crate::spectral::SpectralVector;

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const PI: f64 = std::f64::consts::PI;

/// Number of grid subdivisions used to dealias a quadratic of `n_modes` modes.
pub fn grid_subdivisions(n_modes: usize) -> usize {
    (4 * n_modes.max(1)).next_power_of_two()
}

struct Plan {
    subdivisions: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl Plan {
    fn new(subdivisions: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(2 * subdivisions);
        Plan { subdivisions, fft }
    }

    /// Cosine coefficients `c_1..=c_max_mode` of `v^2` for `v` given by sine
    /// coefficients `coeffs` (orthonormal basis `sqrt(2) sin(n pi x)`).
    fn square_cosine_coeffs(&self, coeffs: &[f64], max_mode: usize, out: &mut Vec<f64>) {
        let m = self.subdivisions;
        debug_assert!(coeffs.len() < m);
        debug_assert!(max_mode < m);

        let mut buf = vec![Complex::new(0.0, 0.0); 2 * m];
        for (i, a) in coeffs.iter().enumerate() {
            let scaled = SQRT_2 * a;
            buf[i + 1].re = scaled;
            buf[2 * m - (i + 1)].re = -scaled;
        }
        self.fft.process(&mut buf);

        // buf[j].im = -2 * v(j / m); square in place into a fresh even extension.
        let mut sq = vec![Complex::new(0.0, 0.0); 2 * m];
        for j in 1..m {
            let value = -0.5 * buf[j].im;
            let w = value * value;
            sq[j].re = w;
            sq[2 * m - j].re = w;
        }
        self.fft.process(&mut sq);

        out.clear();
        out.extend((1..=max_mode).map(|k| sq[k].re / m as f64));
    }
}

thread_local! {
    static PLAN_CACHE: RefCell<HashMap<usize, Rc<Plan>>> = RefCell::new(HashMap::new());
}

fn with_plan<R>(subdivisions: usize, f: impl FnOnce(&Plan) -> R) -> R {
    let plan = PLAN_CACHE.with(|cache| {
        cache
            .borrow_mut()
            .entry(subdivisions)
            .or_insert_with(|| Rc::new(Plan::new(subdivisions)))
            .clone()
    });
    f(&plan)
}

/// Transform-based evaluation of `F(v) = c1 v v'`, identical in contract to
/// the exact convolution path; output holds all `2N` modes.
pub fn eval_f_fast(v: &SpectralVector, params: &ModelParams) -> Result<SpectralVector> {
    params.validate()?;
    let n = v.len();
    if n == 0 {
        return Ok(SpectralVector::zeros(0));
    }
    let mut out = Vec::new();
    with_plan(grid_subdivisions(n), |plan| {
        plan.square_cosine_coeffs(v.coeffs(), 2 * n, &mut out)
    });
    differentiate_half_square(&mut out, params.c1);
    SpectralVector::new(out)
}

/// In-place step from cosine coefficients of `v^2` to sine coefficients of
/// `(c1/2) (v^2)'` in the orthonormal basis.
fn differentiate_half_square(cosine: &mut [f64], c1: f64) {
    for (i, c) in cosine.iter_mut().enumerate() {
        let mode = (i + 1) as f64;
        *c *= -c1 * mode * PI / (2.0 * SQRT_2);
    }
}

/// Hot-loop variant for the solver: writes `F(v)` truncated to `keep` modes
/// into `out` without allocating the full `2N` result.
pub(crate) fn burgers_rhs_truncated(coeffs: &[f64], c1: f64, keep: usize, out: &mut Vec<f64>) {
    let n = coeffs.len();
    if n == 0 {
        out.clear();
        return;
    }
    let max_mode = keep.min(2 * n);
    with_plan(grid_subdivisions(n), |plan| {
        plan.square_cosine_coeffs(coeffs, max_mode, out)
    });
    differentiate_half_square(out, c1);
    out.resize(keep, 0.0);
}
