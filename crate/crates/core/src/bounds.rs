//! Post-hoc a priori bound checkers for simulated trajectories.
//!
//! Each checker evaluates the explicit right-hand side of a proved pathwise
//! estimate — using only certified constants and realized path quantities —
//! and asserts it against the trajectory at every grid time. These are
//! proved inequalities: on a correctly integrated path a certified report
//! must pass, and a failure indicates an implementation bug in a norm or a
//! constant, not a statistical fluke.
//!
//! Where an estimate involves a supremum with no closed form, the checker
//! either substitutes the realized trajectory quantity that the supremum
//! dominates (`certified-outer` mode) or samples the supremum and labels the
//! whole report estimated. The two modes are never mixed silently.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::NoisePathSet;
use crate::nonlinearity::{
    coercivity_bracket, eval_f_direct, growth_constant, GrowthItem,
};
use crate::params::ModelParams;
use crate::rng::NoiseStreams;
use crate::solver::{SolverConfig, Trajectory};
use crate::spectral::SpectralVector;

/// How a reported constant was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstantProvenance {
    ClosedForm,
    DerivedCertified,
    Estimated,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportedConstant {
    pub name: String,
    pub value: f64,
    pub provenance: ConstantProvenance,
}

/// Outcome of one bound check over a whole trajectory.
///
/// `lhs`/`rhs` are taken at the grid time with the smallest margin;
/// `pass` requires `lhs <= rhs + 1e-9 * max(1, |rhs|)` at *every* grid time.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound_name: String,
    pub parameters: BTreeMap<String, f64>,
    pub constants: Vec<ReportedConstant>,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
}

const PASS_TOLERANCE: f64 = 1e-9;

fn assemble_report(
    name: &str,
    parameters: BTreeMap<String, f64>,
    constants: Vec<ReportedConstant>,
    sides: impl Iterator<Item = (f64, f64)>,
) -> BoundReport {
    let mut worst: Option<(f64, f64, f64)> = None;
    let mut pass = true;
    for (lhs, rhs) in sides {
        let slack = rhs - lhs;
        if slack < -PASS_TOLERANCE * rhs.abs().max(1.0) {
            pass = false;
        }
        if worst.map_or(true, |(_, _, s)| slack < s) {
            worst = Some((lhs, rhs, slack));
        }
    }
    let (lhs, rhs, slack) = worst.expect("at least one grid time");
    BoundReport {
        bound_name: name.to_string(),
        parameters,
        constants,
        lhs,
        rhs,
        slack,
        pass,
    }
}

/// RHS of the Gronwall-type energy bound at one grid time.
///
/// `noise_h_now` is `||O_t||_H`, `xi_h` is `||xi||_H`, and `noise_sup_half_sq`
/// is the grid sup of `||O||_{H_{1/2}}^2`. Monotone in each input.
pub fn gronwall_rhs(
    noise_h_now: f64,
    xi_h: f64,
    noise_sup_half_sq: f64,
    horizon: f64,
    params: &ModelParams,
) -> f64 {
    let bracket = coercivity_bracket(params);
    let c = 3.0 * params.c1 * params.c1 / (8.0 * params.c0) * bracket * bracket;
    let load = c * (1.0 + noise_sup_half_sq).powi(2) * horizon;
    noise_h_now + (xi_h * xi_h + load).sqrt() * (0.5 * load).exp()
}

/// Checks the pathwise energy bound `||X_t||_H <= RHS(t)` with the certified
/// `iota = 1/2` embedding constants.
///
/// The noise sup and the initial norm are taken from the *unprojected* data;
/// the RHS is monotone in both, so the bound stays valid and the report is
/// identical across coupled Galerkin resolutions.
pub fn gronwall_bound(
    traj: &Trajectory,
    noise: &NoisePathSet,
    config: &SolverConfig,
    iota: f64,
) -> Result<BoundReport> {
    if iota != 0.5 {
        return Err(Error::InvalidParameter(format!(
            "energy bound supports only iota = 1/2 (certified embedding constants), got {iota}"
        )));
    }
    let params = &config.params;
    let xi_h = config.initial.h_norm();
    let sup_half_sq = noise.sup_hr_norm(0.5, noise.modes(), params).powi(2);
    let bracket = coercivity_bracket(params);

    let sides = traj.times.iter().enumerate().map(|(k, _)| {
        let o_now = noise.spectral_state(k, noise.modes()).h_norm();
        let lhs = traj.states[k].h_norm();
        let rhs = gronwall_rhs(o_now, xi_h, sup_half_sq, params.horizon, params);
        (lhs, rhs)
    });

    Ok(assemble_report(
        "energy_gronwall",
        BTreeMap::from([
            ("iota".to_string(), iota),
            ("horizon".to_string(), params.horizon),
        ]),
        vec![
            ReportedConstant {
                name: "embedding_bracket".into(),
                value: bracket,
                provenance: ConstantProvenance::DerivedCertified,
            },
            ReportedConstant {
                name: "noise_sup_half_sq".into(),
                value: sup_half_sq,
                provenance: ConstantProvenance::DerivedCertified,
            },
        ],
        sides,
    ))
}

/// RHS of the low-regularity bootstrap bound at one grid time. Monotone in
/// each sup input.
pub fn bootstrap_rho_rhs(
    xi_rho: f64,
    noise_rho_now: f64,
    sup_x_h_sq: f64,
    rho: f64,
    alpha1: f64,
    growth: f64,
    horizon: f64,
) -> f64 {
    let power = 1.0 - alpha1 - rho;
    xi_rho + noise_rho_now + horizon.powf(power) / power * growth * (1.0 + sup_x_h_sq)
}

/// Checks the `H_rho` bootstrap bound with the certified dual-norm growth
/// constant; valid for `rho in [0, 1/4)` and `alpha1 in (3/4, 1 - rho)`.
pub fn bootstrap_rho_bound(
    traj: &Trajectory,
    noise: &NoisePathSet,
    config: &SolverConfig,
    rho: f64,
    alpha1: f64,
) -> Result<BoundReport> {
    if !(0.0..0.25).contains(&rho) {
        return Err(Error::InvalidParameter(format!(
            "bootstrap rho bound requires rho in [0, 1/4), got {rho}"
        )));
    }
    if !(alpha1 > 0.75 && alpha1 < 1.0 - rho) {
        return Err(Error::InvalidParameter(format!(
            "bootstrap rho bound requires alpha1 in (3/4, {}), got {alpha1}",
            1.0 - rho
        )));
    }
    let params = &config.params;
    let n = config.modes;
    let growth = growth_constant(alpha1, GrowthItem::DualNorm, params)?;
    let xi_rho = config.initial.project(n).hr_norm(rho, params);
    let sup_x_h_sq = traj.sup_hr_norm(0.0, params).powi(2);

    let sides = traj.times.iter().enumerate().map(|(k, _)| {
        let o_rho = noise.spectral_state(k, n).hr_norm(rho, params);
        let lhs = traj.states[k].hr_norm(rho, params);
        let rhs = bootstrap_rho_rhs(
            xi_rho,
            o_rho,
            sup_x_h_sq,
            rho,
            alpha1,
            growth.bound,
            params.horizon,
        );
        (lhs, rhs)
    });

    Ok(assemble_report(
        "bootstrap_rho",
        BTreeMap::from([("rho".to_string(), rho), ("alpha1".to_string(), alpha1)]),
        vec![
            ReportedConstant {
                name: "dual_norm_growth".into(),
                value: growth.bound,
                provenance: ConstantProvenance::DerivedCertified,
            },
            ReportedConstant {
                name: "sup_x_h_sq".into(),
                value: sup_x_h_sq,
                provenance: ConstantProvenance::DerivedCertified,
            },
        ],
        sides,
    ))
}

/// Operating mode of [`bootstrap_top_bound`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopBoundMode {
    /// Only the outermost layer is checked, with the certified `H_{1/2}`
    /// growth constant and the realized `sup ||X||_{H_{1/2}}` substituted for
    /// the inner bracket it dominates. Fully certified, slightly weaker.
    CertifiedOuter,
    /// Full three-layer assembly; the middle-layer constant has no closed
    /// form and is estimated by sampling, so the whole report is estimated.
    Estimated { samples: usize },
}

/// Checks the top-regularity bound `||X_t||_{H_kappa} <= RHS` for
/// `kappa in [1/2, 1)`.
pub fn bootstrap_top_bound(
    traj: &Trajectory,
    noise: &NoisePathSet,
    config: &SolverConfig,
    kappa: f64,
    mode: TopBoundMode,
) -> Result<BoundReport> {
    if !(0.5..1.0).contains(&kappa) {
        return Err(Error::InvalidParameter(format!(
            "top bound requires kappa in [1/2, 1), got {kappa}"
        )));
    }
    let params = &config.params;
    let n = config.modes;
    let half_growth = growth_constant(0.0, GrowthItem::HalfNorm, params)?;
    let xi_kappa = config.initial.project(n).hr_norm(kappa, params);
    let sup_o_kappa = noise.sup_hr_norm(kappa, n, params);
    let outer_power = 1.0 - kappa;

    match mode {
        TopBoundMode::CertifiedOuter => {
            let sup_x_half_sq = traj.sup_hr_norm(0.5, params).powi(2);
            let rhs = xi_kappa
                + sup_o_kappa
                + params.horizon.powf(outer_power) / outer_power
                    * half_growth.bound
                    * (1.0 + sup_x_half_sq);
            let sides = traj
                .states
                .iter()
                .map(|s| (s.hr_norm(kappa, params), rhs));
            Ok(assemble_report(
                "bootstrap_top_certified_outer",
                BTreeMap::from([("kappa".to_string(), kappa), ("mode".to_string(), 0.0)]),
                vec![
                    ReportedConstant {
                        name: "half_norm_growth".into(),
                        value: half_growth.bound,
                        provenance: ConstantProvenance::ClosedForm,
                    },
                    ReportedConstant {
                        name: "sup_x_half_sq".into(),
                        value: sup_x_half_sq,
                        provenance: ConstantProvenance::DerivedCertified,
                    },
                ],
                sides,
            ))
        }
        TopBoundMode::Estimated { samples } => {
            let alpha2 = 0.3;
            let alpha1 = 0.76; // must satisfy 3/4 < alpha1 < (2 + alpha2)/3
            let rho = (1.0 - alpha2) / 3.0;
            let middle_constant = estimate_middle_growth(alpha2, samples, params)?;
            let dual_growth = growth_constant(alpha1, GrowthItem::DualNorm, params)?;

            let sup_x_h_sq = traj.sup_hr_norm(0.0, params).powi(2);
            let xi_p = config.initial.project(n);
            let inner = 1.0
                + xi_p.hr_norm(rho, params)
                + noise.sup_hr_norm(rho, n, params)
                + params.horizon.powf(1.0 - alpha1 - rho) / (1.0 - alpha1 - rho)
                    * dual_growth.bound
                    * (1.0 + sup_x_h_sq);
            let middle = 1.0
                + xi_p.hr_norm(0.5, params)
                + noise.sup_hr_norm(0.5, n, params)
                + params.horizon.powf(0.5 - alpha2) / (0.5 - alpha2)
                    * middle_constant
                    * inner
                    * inner;
            let rhs = xi_kappa
                + sup_o_kappa
                + params.horizon.powf(outer_power) / outer_power
                    * half_growth.bound
                    * middle
                    * middle;

            let sides = traj
                .states
                .iter()
                .map(|s| (s.hr_norm(kappa, params), rhs));
            Ok(assemble_report(
                "bootstrap_top_estimated",
                BTreeMap::from([
                    ("kappa".to_string(), kappa),
                    ("alpha1".to_string(), alpha1),
                    ("alpha2".to_string(), alpha2),
                    ("mode".to_string(), 1.0),
                ]),
                vec![
                    ReportedConstant {
                        name: "half_norm_growth".into(),
                        value: half_growth.bound,
                        provenance: ConstantProvenance::ClosedForm,
                    },
                    ReportedConstant {
                        name: "middle_layer_growth".into(),
                        value: middle_constant,
                        provenance: ConstantProvenance::Estimated,
                    },
                    ReportedConstant {
                        name: "dual_norm_growth".into(),
                        value: dual_growth.bound,
                        provenance: ConstantProvenance::DerivedCertified,
                    },
                ],
                sides,
            ))
        }
    }
}

/// Sampled estimate of `sup_v ||F(v)||_{H_{-alpha2}} / (1 + ||v||_{H_{(1-alpha2)/3}}^2)`,
/// explicitly non-certified. Deterministic for a fixed sample count.
pub fn estimate_middle_growth(alpha2: f64, samples: usize, params: &ModelParams) -> Result<f64> {
    if !(alpha2 > 0.25 && alpha2 < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "middle-layer exponent must lie in (1/4, 1/2), got {alpha2}"
        )));
    }
    let rho = (1.0 - alpha2) / 3.0;
    let streams = NoiseStreams::new(0x6d69_6464_6c65);
    let sizes = [16usize, 32, 64, 128];
    let mut worst: f64 = 0.0;
    for i in 0..samples {
        let n = sizes[i % sizes.len()];
        let coeffs: Vec<f64> = (0..n)
            .map(|j| streams.normal(i as u64, j as u64) / (j + 1) as f64)
            .collect();
        let v = SpectralVector::new(coeffs)?;
        let f = eval_f_direct(&v, params)?;
        let ratio = f.hr_norm(-alpha2, params) / (1.0 + v.hr_norm(rho, params).powi(2));
        worst = worst.max(ratio);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{sample_convolution, uniform_grid, NoiseSpec};
    use crate::solver::{solve, Integrator};

    fn default_run() -> (Trajectory, NoisePathSet, SolverConfig) {
        let params = ModelParams::standard();
        let spec = NoiseSpec::power_law(params.beta, 0.05, 32, &params).unwrap();
        let noise = sample_convolution(&spec, &uniform_grid(1.0, 256), 11, &params).unwrap();
        let config = SolverConfig {
            modes: 16,
            steps: 256,
            integrator: Integrator::ExpEuler,
            initial: SpectralVector::new(vec![0.5, -0.25, 0.125, 0.0625]).unwrap(),
            params,
        };
        let traj = solve(&config, &noise).unwrap();
        (traj, noise, config)
    }

    #[test]
    fn gronwall_passes_on_default_run() {
        let (traj, noise, config) = default_run();
        let report = gronwall_bound(&traj, &noise, &config, 0.5).unwrap();
        assert!(report.pass, "slack {}", report.slack);
        assert!(gronwall_bound(&traj, &noise, &config, 0.4).is_err());
    }

    #[test]
    fn gronwall_zero_data() {
        let params = ModelParams::standard();
        let spec = NoiseSpec::from_amps(params.beta, vec![0.0; 8]).unwrap();
        let noise = sample_convolution(&spec, &uniform_grid(1.0, 32), 0, &params).unwrap();
        let config = SolverConfig {
            modes: 8,
            steps: 32,
            integrator: Integrator::ExpEuler,
            initial: SpectralVector::zeros(8),
            params,
        };
        let traj = solve(&config, &noise).unwrap();
        let report = gronwall_bound(&traj, &noise, &config, 0.5).unwrap();
        assert!(report.pass && report.lhs == 0.0);
    }

    #[test]
    fn rho_bootstrap_passes_and_validates() {
        let (traj, noise, config) = default_run();
        let report = bootstrap_rho_bound(&traj, &noise, &config, 0.0, 0.8).unwrap();
        assert!(report.pass, "slack {}", report.slack);

        assert!(bootstrap_rho_bound(&traj, &noise, &config, 0.3, 0.8).is_err());
        assert!(bootstrap_rho_bound(&traj, &noise, &config, 0.0, 0.7).is_err());
        assert!(bootstrap_rho_bound(&traj, &noise, &config, 0.2, 0.9).is_err());
    }

    #[test]
    fn top_bound_modes() {
        let (traj, noise, config) = default_run();
        let certified =
            bootstrap_top_bound(&traj, &noise, &config, 0.9, TopBoundMode::CertifiedOuter)
                .unwrap();
        assert!(certified.pass, "slack {}", certified.slack);
        assert!(certified
            .constants
            .iter()
            .all(|c| c.provenance != ConstantProvenance::Estimated));

        let estimated = bootstrap_top_bound(
            &traj,
            &noise,
            &config,
            0.9,
            TopBoundMode::Estimated { samples: 200 },
        )
        .unwrap();
        assert!(estimated
            .constants
            .iter()
            .any(|c| c.provenance == ConstantProvenance::Estimated));

        assert!(
            bootstrap_top_bound(&traj, &noise, &config, 0.4, TopBoundMode::CertifiedOuter)
                .is_err()
        );
        assert!(
            bootstrap_top_bound(&traj, &noise, &config, 1.0, TopBoundMode::CertifiedOuter)
                .is_err()
        );
    }

    #[test]
    fn linear_case_reduces_cleanly() {
        // c1 = 0: the RHS collapses to the xi and noise terms.
        let mut params = ModelParams::standard();
        params.c1 = 0.0;
        let spec = NoiseSpec::power_law(params.beta, 0.05, 8, &params).unwrap();
        let noise = sample_convolution(&spec, &uniform_grid(1.0, 64), 3, &params).unwrap();
        let config = SolverConfig {
            modes: 8,
            steps: 64,
            integrator: Integrator::ExpEuler,
            initial: SpectralVector::new(vec![1.0]).unwrap(),
            params,
        };
        let traj = solve(&config, &noise).unwrap();
        let report =
            bootstrap_top_bound(&traj, &noise, &config, 0.5, TopBoundMode::CertifiedOuter)
                .unwrap();
        assert!(report.pass);
        let g = gronwall_bound(&traj, &noise, &config, 0.5).unwrap();
        assert!(g.pass);
        // With zero nonlinearity the Gronwall RHS at t = 0 is at least ||xi||.
        assert!(g.rhs >= 1.0);
    }

    #[test]
    fn rhs_formulas_are_monotone() {
        let params = ModelParams::standard();
        let base = gronwall_rhs(0.3, 1.0, 2.0, 1.0, &params);
        assert!(gronwall_rhs(0.4, 1.0, 2.0, 1.0, &params) > base);
        assert!(gronwall_rhs(0.3, 1.5, 2.0, 1.0, &params) > base);
        assert!(gronwall_rhs(0.3, 1.0, 2.5, 1.0, &params) > base);

        let b = bootstrap_rho_rhs(1.0, 0.5, 4.0, 0.0, 0.8, 0.84, 1.0);
        assert!(bootstrap_rho_rhs(1.0, 0.5, 5.0, 0.0, 0.8, 0.84, 1.0) > b);
        assert!(bootstrap_rho_rhs(1.2, 0.5, 4.0, 0.0, 0.8, 0.84, 1.0) > b);
    }

    #[test]
    fn gronwall_rhs_is_resolution_invariant() {
        // Coupled runs at different N share xi, horizon, and the full-path
        // noise sups, so the report RHS must agree exactly.
        let params = ModelParams::standard();
        let spec = NoiseSpec::power_law(params.beta, 0.05, 32, &params).unwrap();
        let noise = sample_convolution(&spec, &uniform_grid(1.0, 128), 9, &params).unwrap();
        let xi = SpectralVector::new(vec![0.5, -0.25, 0.125, 0.0625]).unwrap();
        let mut reports = Vec::new();
        for n in [8usize, 16, 32] {
            let config = SolverConfig {
                modes: n,
                steps: 128,
                integrator: Integrator::ExpEuler,
                initial: xi.clone(),
                params,
            };
            let traj = solve(&config, &noise).unwrap();
            let report = gronwall_bound(&traj, &noise, &config, 0.5).unwrap();
            assert!(report.pass);
            reports.push(report);
        }
        // Compare the RHS evaluated at t = 0 via the formula inputs.
        let r0: Vec<f64> = reports
            .iter()
            .map(|r| {
                r.constants
                    .iter()
                    .find(|c| c.name == "noise_sup_half_sq")
                    .unwrap()
                    .value
            })
            .collect();
        assert_eq!(r0[0], r0[1]);
        assert_eq!(r0[1], r0[2]);
    }
}
