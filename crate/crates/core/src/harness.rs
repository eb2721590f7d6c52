//! Reproducible Monte-Carlo experiment drivers: noise-tail and Galerkin
//! convergence rates, the sup-moment check, bound sweeps, and the
//! deterministic self-test.
//!
//! Reproducibility contract: path `i` of a run with root seed `s` always uses
//! seed `child_seed(s, i)`, workers never share mutable state, and every
//! cross-path aggregate is a fixed-order pairwise reduction — so persisted
//! outputs are byte-identical across re-runs and thread counts.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    bootstrap_rho_bound, bootstrap_top_bound, gronwall_bound, BoundReport, TopBoundMode,
};
use crate::error::{Error, Result};
use crate::noise::{
    moment_bound_check, pairwise_sum, sample_convolution, uniform_grid, MomentCheckReport,
    NoisePathSet, NoiseSpec,
};
use crate::params::ModelParams;
use crate::rng::NoiseStreams;
use crate::solver::{solve, Integrator, SolverConfig, Trajectory};
use crate::spectral::SpectralVector;

/// Fitted power-law decay. `slope` is positive for decaying errors.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub stderr: f64,
    /// Intercept of the log2-log2 regression, i.e. the empirical log2 of the
    /// rate constant.
    pub intercept: f64,
}

/// Ordinary least squares of `log2(error)` on `log2(n)`.
///
/// Requires at least four points and strictly positive errors.
pub fn fit_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 4 {
        return Err(Error::Degenerate(format!(
            "slope fit needs at least 4 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|(n, e)| !(*n > 0.0) || !(*e > 0.0)) {
        return Err(Error::Degenerate(
            "slope fit requires positive resolutions and errors".into(),
        ));
    }
    let xs: Vec<f64> = points.iter().map(|(n, _)| n.log2()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, e)| e.log2()).collect();
    let m = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / m;
    let y_mean = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("all resolutions coincide".into()));
    }
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - x_mean) * (y - y_mean))
        .sum();
    let b1 = sxy / sxx;
    let b0 = y_mean - b1 * x_mean;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (b0 + b1 * x)).powi(2))
        .sum();
    let stderr = if points.len() > 2 {
        (ssr / (m - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(SlopeFit {
        slope: -b1,
        stderr,
        intercept: b0,
    })
}

/// Initial condition for solver-based experiments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    Zero,
    /// `xi_n = scale * n^{-(2(gamma+eps) + 1/2 + 0.05)}`: lies in
    /// `H_{gamma+eps}` with a small margin, so the initial-condition tail
    /// decays just above its theoretical branch of the rate threshold.
    PowerLaw { scale: f64 },
    /// Explicit coefficients.
    Coeffs { coeffs: Vec<f64> },
}

impl InitialCondition {
    pub fn materialize(&self, modes: usize, params: &ModelParams) -> Result<SpectralVector> {
        match self {
            InitialCondition::Zero => Ok(SpectralVector::zeros(modes)),
            InitialCondition::PowerLaw { scale } => {
                let exponent = 2.0 * (params.gamma + params.eps) + 0.5 + 0.05;
                let coeffs = (1..=modes)
                    .map(|n| scale * (n as f64).powf(-exponent))
                    .collect();
                SpectralVector::new(coeffs)
            }
            InitialCondition::Coeffs { coeffs } => SpectralVector::new(coeffs.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSettings {
    /// Decay margin of the default amplitude law.
    pub delta: f64,
    /// Number of simulated noise modes.
    pub modes: usize,
    /// Explicit amplitudes override the power law when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amps: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Galerkin dimension for single-resolution runs.
    pub modes: usize,
    /// Uniform time steps.
    pub steps: usize,
    pub integrator: Integrator,
    pub initial: InitialCondition,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentSettings {
    pub alpha: f64,
    pub p: f64,
    pub n_keep: usize,
}

fn default_tolerance() -> f64 {
    0.3
}

/// Full experiment description; serializes losslessly to JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub experiment: String,
    pub params: ModelParams,
    pub noise: NoiseSettings,
    pub solver: SolverSettings,
    /// Galerkin / truncation resolutions for rate experiments.
    #[serde(default)]
    pub ladder: Vec<usize>,
    /// Reference resolution for the Galerkin rate experiment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<usize>,
    pub paths: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moment: Option<MomentSettings>,
    /// Slack subtracted from the rate threshold before the pass decision;
    /// accounts for pre-asymptotic curvature and Monte-Carlo noise at desk
    /// scale, and is recorded in every report.
    #[serde(default = "default_tolerance")]
    pub slope_tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: RunConfig = serde_json::from_str(text)
            .map_err(|e| Error::InvalidConfig(format!("config parse failure: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate().map_err(reclassify)?;
        if self.paths == 0 {
            return Err(Error::InvalidConfig("path count must be positive".into()));
        }
        if self.noise.modes == 0 {
            return Err(Error::InvalidConfig("noise needs at least one mode".into()));
        }
        if let Some(a) = &self.noise.amps {
            if a.len() != self.noise.modes {
                return Err(Error::InvalidConfig(format!(
                    "explicit amplitudes carry {} modes, config declares {}",
                    a.len(),
                    self.noise.modes
                )));
            }
        }
        if !self.ladder.is_empty() {
            if self.ladder.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidConfig(
                    "resolution ladder must be strictly increasing".into(),
                ));
            }
            if *self.ladder.last().unwrap() > self.noise.modes {
                return Err(Error::InvalidConfig(
                    "largest ladder resolution exceeds the noise resolution".into(),
                ));
            }
        }
        if let Some(m) = &self.moment {
            if !(m.p * m.alpha > 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "moment check requires p * alpha > 1, got p = {}, alpha = {}",
                    m.p, m.alpha
                )));
            }
        }
        Ok(())
    }

    pub fn noise_spec(&self) -> Result<NoiseSpec> {
        match &self.noise.amps {
            Some(amps) => NoiseSpec::from_amps(self.params.beta, amps.clone()),
            None => NoiseSpec::power_law(
                self.params.beta,
                self.noise.delta,
                self.noise.modes,
                &self.params,
            ),
        }
    }

    pub fn time_grid(&self) -> Vec<f64> {
        uniform_grid(self.params.horizon, self.solver.steps)
    }

    fn solver_config(&self, modes: usize) -> Result<SolverConfig> {
        Ok(SolverConfig {
            modes,
            steps: self.solver.steps,
            integrator: self.solver.integrator,
            initial: self.solver.initial.materialize(modes, &self.params)?,
            params: self.params,
        })
    }

    pub fn path_seed(&self, index: usize) -> u64 {
        NoiseStreams::child_seed(self.seed, index as u64)
    }
}

fn reclassify(e: Error) -> Error {
    match e {
        Error::InvalidParameter(msg) => Error::InvalidConfig(msg),
        other => other,
    }
}

/// Built-in defaults for each CLI experiment.
pub fn default_config(experiment: &str) -> Result<RunConfig> {
    let params = ModelParams::standard();
    let base_solver = SolverSettings {
        modes: 64,
        steps: 1024,
        integrator: Integrator::ExpEuler,
        initial: InitialCondition::PowerLaw { scale: 1.0 },
    };
    let config = match experiment {
        "simulate" => RunConfig {
            experiment: experiment.into(),
            params,
            noise: NoiseSettings {
                delta: 0.05,
                modes: 128,
                amps: None,
            },
            solver: base_solver,
            ladder: vec![],
            reference: None,
            paths: 1,
            seed: 42,
            moment: None,
            slope_tolerance: default_tolerance(),
            out_dir: None,
        },
        "check-bounds" => RunConfig {
            experiment: experiment.into(),
            params,
            noise: NoiseSettings {
                delta: 0.05,
                modes: 128,
                amps: None,
            },
            solver: base_solver,
            ladder: vec![],
            reference: None,
            paths: 100,
            seed: 42,
            moment: None,
            slope_tolerance: default_tolerance(),
            out_dir: None,
        },
        "rates-noise" => RunConfig {
            experiment: experiment.into(),
            params,
            noise: NoiseSettings {
                delta: 0.05,
                modes: 1024,
                amps: None,
            },
            solver: SolverSettings {
                steps: 256,
                ..base_solver
            },
            ladder: vec![16, 32, 64, 128, 256],
            reference: None,
            paths: 512,
            seed: 42,
            moment: None,
            slope_tolerance: default_tolerance(),
            out_dir: None,
        },
        "rates-galerkin" => RunConfig {
            experiment: experiment.into(),
            params,
            noise: NoiseSettings {
                delta: 0.05,
                modes: 512,
                amps: None,
            },
            solver: SolverSettings {
                steps: 4096,
                ..base_solver
            },
            ladder: vec![8, 16, 32, 64],
            reference: Some(512),
            paths: 64,
            seed: 42,
            moment: None,
            slope_tolerance: default_tolerance(),
            out_dir: None,
        },
        "moments" => RunConfig {
            experiment: experiment.into(),
            params,
            noise: NoiseSettings {
                delta: 0.05,
                modes: 64,
                amps: None,
            },
            solver: SolverSettings {
                steps: 256,
                ..base_solver
            },
            ladder: vec![],
            reference: None,
            paths: 1000,
            seed: 42,
            moment: Some(MomentSettings {
                alpha: 0.2,
                p: 6.0,
                n_keep: 64,
            }),
            slope_tolerance: default_tolerance(),
            out_dir: None,
        },
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown experiment '{other}'"
            )))
        }
    };
    Ok(config)
}

/// Per-resolution statistics of a rate experiment.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LevelStats {
    pub resolution: usize,
    pub mean_error: f64,
    pub median_error: f64,
    /// Per-path sup-in-time errors, in path order.
    pub errors: Vec<f64>,
}

/// Result of a convergence-rate experiment.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RateReport {
    pub experiment: String,
    pub levels: Vec<LevelStats>,
    /// Fit of the path-averaged errors; absent when the data is degenerate
    /// (some level has no error mass to fit).
    pub fit: Option<SlopeFit>,
    pub per_path_slopes: Vec<f64>,
    pub threshold: f64,
    pub threshold_provenance: String,
    pub tolerance: f64,
    pub degenerate: bool,
    pub pass: bool,
}

fn mean(values: &[f64]) -> f64 {
    pairwise_sum(values) / values.len() as f64
}

fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite errors"));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

fn build_rate_report(
    experiment: &str,
    ladder: &[usize],
    per_path_errors: &[Vec<f64>],
    threshold: f64,
    threshold_provenance: &str,
    tolerance: f64,
) -> RateReport {
    let levels: Vec<LevelStats> = ladder
        .iter()
        .enumerate()
        .map(|(j, &n)| {
            let errors: Vec<f64> = per_path_errors.iter().map(|row| row[j]).collect();
            LevelStats {
                resolution: n,
                mean_error: mean(&errors),
                median_error: median(&errors),
                errors,
            }
        })
        .collect();

    let points: Vec<(f64, f64)> = levels
        .iter()
        .map(|l| (l.resolution as f64, l.mean_error))
        .collect();
    let fit = fit_slope(&points).ok();
    let per_path_slopes: Vec<f64> = per_path_errors
        .iter()
        .filter_map(|row| {
            let pts: Vec<(f64, f64)> = ladder
                .iter()
                .zip(row)
                .map(|(&n, &e)| (n as f64, e))
                .collect();
            fit_slope(&pts).ok().map(|f| f.slope)
        })
        .collect();
    let degenerate = fit.is_none();
    let pass = fit
        .as_ref()
        .map(|f| f.slope >= threshold - tolerance)
        .unwrap_or(false);
    RateReport {
        experiment: experiment.to_string(),
        levels,
        fit,
        per_path_slopes,
        threshold,
        threshold_provenance: threshold_provenance.to_string(),
        tolerance,
        degenerate,
        pass,
    }
}

/// Truncation-tail decay of the stochastic convolution: for each path and
/// each ladder resolution `n`, the sup-in-time `H_gamma` norm of the modes
/// above `n`; averaged over paths and fitted against the theoretical
/// threshold `1 + 2(beta - gamma)`.
pub fn run_noise_tail_rate(config: &RunConfig) -> Result<RateReport> {
    config.validate()?;
    if config.ladder.len() < 4 {
        return Err(Error::InvalidConfig(
            "rate ladder needs at least 4 resolutions".into(),
        ));
    }
    if *config.ladder.last().unwrap() >= config.noise.modes {
        return Err(Error::InvalidConfig(
            "tail experiment needs noise modes beyond the largest cut".into(),
        ));
    }
    let spec = config.noise_spec()?;
    let grid = config.time_grid();
    let params = config.params;

    let per_path_errors: Vec<Vec<f64>> = (0..config.paths)
        .into_par_iter()
        .map(|i| {
            let path = sample_convolution(&spec, &grid, config.path_seed(i), &params)
                .expect("validated configuration");
            config
                .ladder
                .iter()
                .map(|&n| {
                    path.tail_sup_norm(n, params.gamma, &params)
                        .expect("ladder below noise resolution")
                })
                .collect()
        })
        .collect();

    let threshold = 1.0 + 2.0 * (params.beta - params.gamma);
    Ok(build_rate_report(
        "rates-noise",
        &config.ladder,
        &per_path_errors,
        threshold,
        "1 + 2(beta - gamma)",
        config.slope_tolerance,
    ))
}

/// Spatial Galerkin error against a common fine reference: for each path,
/// all resolutions and the reference share one coupled noise sample, and the
/// error is the sup-in-time `H_gamma` distance. The fitted decay is compared
/// with `min(2 eps, 1 + 2(beta - gamma), 2(1 - gamma - nu))` where
/// `nu = (2 - 4 min(gamma, 1/2)) / 3`.
pub fn run_galerkin_rate(config: &RunConfig) -> Result<RateReport> {
    config.validate()?;
    if config.ladder.len() < 4 {
        return Err(Error::InvalidConfig(
            "rate ladder needs at least 4 resolutions".into(),
        ));
    }
    let reference = config.reference.ok_or_else(|| {
        Error::InvalidConfig("galerkin rate experiment needs a reference resolution".into())
    })?;
    let top = *config.ladder.last().unwrap();
    if reference < 4 * top {
        return Err(Error::InvalidConfig(format!(
            "reference resolution {reference} must be at least 4x the largest ladder entry {top}"
        )));
    }
    if reference > config.noise.modes {
        return Err(Error::InvalidConfig(
            "reference resolution exceeds the noise resolution".into(),
        ));
    }
    let spec = config.noise_spec()?;
    let grid = config.time_grid();
    let params = config.params;
    let ref_solver = config.solver_config(reference)?;
    let ladder_solvers: Vec<SolverConfig> = config
        .ladder
        .iter()
        .map(|&n| config.solver_config(n))
        .collect::<Result<_>>()?;

    let per_path_errors: Vec<Vec<f64>> = (0..config.paths)
        .into_par_iter()
        .map(|i| -> Result<Vec<f64>> {
            let path = sample_convolution(&spec, &grid, config.path_seed(i), &params)?;
            let reference_traj = solve(&ref_solver, &path)?;
            ladder_solvers
                .iter()
                .map(|solver_cfg| {
                    let traj = solve(solver_cfg, &path)?;
                    let err = traj
                        .states
                        .iter()
                        .zip(&reference_traj.states)
                        .map(|(a, b)| a.hr_distance(b, params.gamma, &params))
                        .fold(0.0f64, f64::max);
                    Ok(err)
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let nu = (2.0 - 4.0 * params.gamma.min(0.5)) / 3.0;
    let threshold = (2.0 * params.eps)
        .min(1.0 + 2.0 * (params.beta - params.gamma))
        .min(2.0 * (1.0 - params.gamma - nu));
    Ok(build_rate_report(
        "rates-galerkin",
        &config.ladder,
        &per_path_errors,
        threshold,
        "min(2 eps, 1 + 2(beta - gamma), 2(1 - gamma - nu)), nu = (2 - 4 min(gamma, 1/2))/3",
        config.slope_tolerance,
    ))
}

/// Drives the sup-moment check over the configured number of paths
/// (at least 1000).
pub fn run_moment_check(config: &RunConfig) -> Result<MomentCheckReport> {
    config.validate()?;
    let m = config.moment.ok_or_else(|| {
        Error::InvalidConfig("moment experiment needs a `moment` settings block".into())
    })?;
    if config.paths < 1000 {
        return Err(Error::InvalidConfig(format!(
            "moment check needs at least 1000 paths, got {}",
            config.paths
        )));
    }
    let spec = config.noise_spec()?;
    moment_bound_check(
        &spec,
        &config.time_grid(),
        config.seed,
        config.paths,
        m.n_keep,
        m.alpha,
        config.params.gamma,
        m.p,
        &config.params,
    )
    .map_err(reclassify)
}

/// Per-path outcome of the bound sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundSweep {
    pub paths: usize,
    pub all_pass: bool,
    pub reports: Vec<BoundReport>,
}

/// Simulates `paths` trajectories and runs the certified bound checkers
/// (energy, low-regularity bootstrap, certified-outer top bound) on each.
pub fn run_check_bounds(config: &RunConfig) -> Result<BoundSweep> {
    config.validate()?;
    let spec = config.noise_spec()?;
    let grid = config.time_grid();
    let params = config.params;
    let solver_cfg = config.solver_config(config.solver.modes)?;
    if config.solver.modes > config.noise.modes {
        return Err(Error::InvalidConfig(
            "solver resolution exceeds the noise resolution".into(),
        ));
    }

    let per_path: Vec<Vec<BoundReport>> = (0..config.paths)
        .into_par_iter()
        .map(|i| -> Result<Vec<BoundReport>> {
            let path = sample_convolution(&spec, &grid, config.path_seed(i), &params)?;
            let traj = solve(&solver_cfg, &path)?;
            Ok(vec![
                gronwall_bound(&traj, &path, &solver_cfg, 0.5)?,
                bootstrap_rho_bound(&traj, &path, &solver_cfg, 0.0, 0.8)?,
                bootstrap_top_bound(&traj, &path, &solver_cfg, 0.9, TopBoundMode::CertifiedOuter)?,
            ])
        })
        .collect::<Result<_>>()?;

    let reports: Vec<BoundReport> = per_path.into_iter().flatten().collect();
    let all_pass = reports.iter().all(|r| r.pass);
    Ok(BoundSweep {
        paths: config.paths,
        all_pass,
        reports,
    })
}

/// One simulated trajectory (path index 0).
pub fn run_simulate(config: &RunConfig) -> Result<(Trajectory, NoisePathSet)> {
    config.validate()?;
    if config.solver.modes > config.noise.modes {
        return Err(Error::InvalidConfig(
            "solver resolution exceeds the noise resolution".into(),
        ));
    }
    let spec = config.noise_spec()?;
    let grid = config.time_grid();
    let path = sample_convolution(&spec, &grid, config.path_seed(0), &config.params)?;
    let solver_cfg = config.solver_config(config.solver.modes)?;
    let traj = solve(&solver_cfg, &path)?;
    Ok((traj, path))
}

/// Persists an experiment's config, report JSON, and per-path error CSV.
pub fn persist_rate_report(config: &RunConfig, report: &RateReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.json"), serde_json::to_vec_pretty(config)?)?;
    fs::write(
        dir.join(format!("{}_report.json", report.experiment)),
        serde_json::to_vec_pretty(report)?,
    )?;
    let mut csv = Vec::new();
    writeln!(csv, "experiment,N,path_seed,error")?;
    for level in &report.levels {
        for (i, err) in level.errors.iter().enumerate() {
            writeln!(
                csv,
                "{},{},{},{}",
                report.experiment,
                level.resolution,
                config.path_seed(i),
                err
            )?;
        }
    }
    fs::write(dir.join(format!("{}.csv", report.experiment)), csv)?;
    Ok(())
}

pub fn persist_json<T: Serialize>(config: &RunConfig, value: &T, name: &str, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.json"), serde_json::to_vec_pretty(config)?)?;
    fs::write(dir.join(name), serde_json::to_vec_pretty(value)?)?;
    Ok(())
}

/// One named check of the self-test suite.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SelftestCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SelftestReport {
    pub checks: Vec<SelftestCheck>,
    pub pass: bool,
}

/// Deterministic invariant suite: spectral identities, nonlinearity algebra,
/// frozen constant regressions, solver linear exactness, and the bound
/// checkers on canned paths. Hermetic (no files, no network) and fast.
pub fn run_selftest() -> SelftestReport {
    let mut checks = Vec::new();
    let mut push = |name: &str, pass: bool, detail: String| {
        checks.push(SelftestCheck {
            name: name.to_string(),
            pass,
            detail,
        });
    };
    let params = ModelParams::standard();
    let streams = NoiseStreams::new(0x5e1f);
    let draw = |tag: u64, len: usize| -> SpectralVector {
        SpectralVector::new(
            (0..len)
                .map(|j| streams.normal(tag, j as u64))
                .collect::<Vec<_>>(),
        )
        .expect("normals are finite")
    };

    // Frozen constant regressions; any corruption of a certified constant
    // trips these before it can weaken an inequality checker.
    {
        use crate::nonlinearity::{
            coercivity_bracket, growth_constant, monotonicity_substitute_constant, GrowthItem,
        };
        use crate::spectral::basis_constants;
        let eig = basis_constants(0.5, &params).map(|c| c.eig_sum.estimate());
        let k_half = growth_constant(0.0, GrowthItem::HalfNorm, &params).map(|g| g.bound);
        let k_dual = growth_constant(0.8, GrowthItem::DualNorm, &params).map(|g| g.bound);
        let values = [
            ("eig_sum(1/2)", eig.unwrap_or(f64::NAN), 1.0 / 6.0, 1e-12),
            (
                "growth_half",
                k_half.unwrap_or(f64::NAN),
                0.5773502691896258,
                1e-12,
            ),
            (
                "growth_dual(0.8)",
                k_dual.unwrap_or(f64::NAN),
                0.8413223858888501,
                1e-10,
            ),
            (
                "coercivity_bracket",
                coercivity_bracket(&params),
                0.7611265676635564,
                1e-12,
            ),
            (
                "monotonicity_substitute",
                monotonicity_substitute_constant(&params),
                1.0 / 256.0,
                1e-15,
            ),
        ];
        for (name, got, want, tol) in values {
            push(
                &format!("constants/{name}"),
                (got - want).abs() <= tol,
                format!("got {got}, expected {want}"),
            );
        }
    }

    // Parseval, semigroup law, contractions, smoothing.
    {
        let mut worst = 0.0f64;
        let mut ok = true;
        for tag in 0..100u64 {
            let v = draw(tag, 48);
            let parseval =
                (v.hr_norm(0.0, &params).powi(2) - v.coeffs().iter().map(|a| a * a).sum::<f64>())
                    .abs();
            worst = worst.max(parseval / v.h_norm().powi(2).max(1e-300));

            let s = 0.7 * ((tag % 13) as f64 / 13.0) + 0.1;
            let t = 1.3 * ((tag % 7) as f64 / 7.0) + 0.1;
            let two_step = v
                .semigroup(t, &params)
                .and_then(|u| u.semigroup(s, &params))
                .expect("nonnegative times");
            let one_step = v.semigroup(s + t, &params).expect("nonnegative time");
            let gap = two_step.h_distance(&one_step) / one_step.h_norm().max(1e-300);
            ok &= gap <= 1e-12;

            for r in [-0.5, 0.0, 0.5, 1.0] {
                ok &= v.semigroup(t, &params).unwrap().hr_norm(r, &params)
                    <= v.hr_norm(r, &params);
                ok &= v.project(16).hr_norm(r, &params) <= v.hr_norm(r, &params);
            }
        }
        // Coefficient-wise smoothing factor |mu|^d e^{mu t} <= t^{-d}.
        for n in 1..=64usize {
            let mu = crate::spectral::eigenvalue(n, &params).unwrap();
            for t in [0.01, 0.1, 1.0] {
                for d in [0.0, 0.25, 0.5, 1.0] {
                    ok &= mu.abs().powf(d) * (mu * t).exp() <= t.powf(-d) * (1.0 + 1e-12);
                }
            }
        }
        push(
            "spectral/invariants",
            ok && worst <= 1e-12,
            format!("worst parseval residual {worst:.3e}"),
        );
    }

    // Nonlinearity identities on random draws.
    {
        use crate::nonlinearity::*;
        let mut ok = true;
        let mut detail = String::new();
        for tag in 0..60u64 {
            let v = draw(1000 + tag, 32);
            let w = draw(2000 + tag, 32);
            let fd = eval_f_direct(&v, &params).unwrap();
            let ff = eval_f_fast(&v, &params).unwrap();
            if fd.h_distance(&ff) > 1e-10 * fd.h_norm().max(1e-300) {
                ok = false;
                detail = "fast/direct divergence".into();
            }
            let pairing = energy_pairing(&v, &params).unwrap();
            if pairing.abs() > 1e-10 * (1.0 + v.h_norm().powi(3)) {
                ok = false;
                detail = format!("energy pairing {pairing:.3e}");
            }
            if !lipschitz_check(&v, &w, &params).unwrap().pass {
                ok = false;
                detail = "lipschitz violation".into();
            }
            if !coercivity_check(&v, &w, 0.5, &params).unwrap().pass {
                ok = false;
                detail = "coercivity violation".into();
            }
            let k3 = growth_constant(0.0, GrowthItem::HalfNorm, &params).unwrap();
            if fd.h_norm() > k3.bound * v.hr_norm(0.5, &params).powi(2) * (1.0 + 1e-12) {
                ok = false;
                detail = "half-norm growth violation".into();
            }
            for eps in [0.1, 1.0, 10.0] {
                if !monotonicity_check(&v, &w, eps, &params).unwrap().0.pass {
                    ok = false;
                    detail = format!("monotonicity violation at eps {eps}");
                }
            }
        }
        push("nonlinearity/identities", ok, detail);
    }

    // Solver linear exactness.
    {
        let mut linear = params;
        linear.c1 = 0.0;
        let xi = draw(5000, 16);
        let spec = NoiseSpec::from_amps(linear.beta, vec![0.0; 16]).unwrap();
        let noise = sample_convolution(&spec, &uniform_grid(1.0, 64), 0, &linear).unwrap();
        let cfg = SolverConfig {
            modes: 16,
            steps: 64,
            integrator: Integrator::ExpEuler,
            initial: xi.clone(),
            params: linear,
        };
        let traj = solve(&cfg, &noise).unwrap();
        let mut ok = true;
        for (t, state) in traj.times.iter().zip(&traj.states) {
            let exact = xi.semigroup(*t, &linear).unwrap();
            ok &= state.h_distance(&exact) <= 1e-12 * exact.h_norm().max(1e-300);
        }
        push("solver/linear_exactness", ok, String::new());
    }

    // Bound checkers on canned stochastic paths.
    {
        let spec = NoiseSpec::power_law(params.beta, 0.05, 32, &params).unwrap();
        let grid = uniform_grid(params.horizon, 128);
        let mut ok = true;
        let mut detail = String::new();
        for seed in 0..10u64 {
            let path = sample_convolution(&spec, &grid, seed, &params).unwrap();
            let cfg = SolverConfig {
                modes: 16,
                steps: 128,
                integrator: Integrator::ExpEuler,
                initial: InitialCondition::PowerLaw { scale: 1.0 }
                    .materialize(16, &params)
                    .unwrap(),
                params,
            };
            let traj = solve(&cfg, &path).unwrap();
            for report in [
                gronwall_bound(&traj, &path, &cfg, 0.5).unwrap(),
                bootstrap_rho_bound(&traj, &path, &cfg, 0.0, 0.8).unwrap(),
                bootstrap_top_bound(&traj, &path, &cfg, 0.9, TopBoundMode::CertifiedOuter)
                    .unwrap(),
            ] {
                if !report.pass {
                    ok = false;
                    detail = format!("{} failed with slack {:.3e}", report.bound_name, report.slack);
                }
            }
        }
        push("bounds/canned_paths", ok, detail);
    }

    let pass = checks.iter().all(|c| c.pass);
    SelftestReport { checks, pass }
}
