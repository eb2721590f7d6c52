//! Command-line driver for the simulator and its verification experiments.
//!
//! Exit codes: 0 on success, 1 on an assertion/threshold failure, 2 on an
//! invalid configuration.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use burgers_spectral::error::Error;
use burgers_spectral::harness::{
    self, default_config, persist_json, persist_rate_report, RunConfig,
};

#[derive(Parser)]
#[command(
    name = "burgers-spectral",
    about = "Spectral Galerkin simulator and verification harness for the stochastic Burgers equation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// JSON run configuration; built-in defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Root seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory override.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Path count override.
    #[arg(long)]
    paths: Option<usize>,
    /// Worker thread count (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory and write its CSV dump and norm summary.
    Simulate(CommonOpts),
    /// Truncation-tail decay rate of the stochastic convolution.
    RatesNoise(CommonOpts),
    /// Galerkin convergence rate against a fine reference resolution.
    RatesGalerkin(CommonOpts),
    /// Monte-Carlo check of the sup-moment bound for the projected convolution.
    Moments(CommonOpts),
    /// A priori bound checkers over simulated paths.
    CheckBounds(CommonOpts),
    /// Deterministic invariant suite; hermetic and fast.
    Selftest(CommonOpts),
}

fn load_config(opts: &CommonOpts, experiment: &str) -> Result<RunConfig, Error> {
    let mut config = match &opts.config {
        Some(path) => RunConfig::from_json(&fs::read_to_string(path)?)?,
        None => default_config(experiment)?,
    };
    if let Some(seed) = opts.seed {
        config.seed = seed;
    }
    if let Some(paths) = opts.paths {
        config.paths = paths;
    }
    if let Some(out) = &opts.out {
        config.out_dir = Some(out.clone());
    }
    config.validate()?;
    Ok(config)
}

fn init_threads(opts: &CommonOpts) {
    if let Some(threads) = opts.threads {
        // Ignore the error if a global pool already exists.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Simulate(opts) => {
            init_threads(&opts);
            let config = load_config(&opts, "simulate")?;
            let (traj, path) = harness::run_simulate(&config)?;
            if let Some(dir) = &config.out_dir {
                fs::create_dir_all(dir)?;
                fs::write(dir.join("config.json"), serde_json::to_vec_pretty(&config)?)?;
                let mut csv = Vec::new();
                traj.write_csv(&mut csv)?;
                fs::write(dir.join("trajectory.csv"), csv)?;
                let mut noise_csv = Vec::new();
                path.write_csv(&mut noise_csv)?;
                fs::write(dir.join("noise.csv"), noise_csv)?;
                fs::write(
                    dir.join("summary.json"),
                    serde_json::to_vec_pretty(&traj.summary_json(&config.params))?,
                )?;
            }
            println!(
                "simulate: {} modes, {} steps, final H norm {:.6e}",
                config.solver.modes,
                config.solver.steps,
                traj.final_state().h_norm()
            );
            Ok(true)
        }
        Command::RatesNoise(opts) => {
            init_threads(&opts);
            let config = load_config(&opts, "rates-noise")?;
            let report = harness::run_noise_tail_rate(&config)?;
            if let Some(dir) = &config.out_dir {
                persist_rate_report(&config, &report, dir)?;
            }
            print_rate(&report);
            Ok(report.pass)
        }
        Command::RatesGalerkin(opts) => {
            init_threads(&opts);
            let config = load_config(&opts, "rates-galerkin")?;
            let report = harness::run_galerkin_rate(&config)?;
            if let Some(dir) = &config.out_dir {
                persist_rate_report(&config, &report, dir)?;
            }
            print_rate(&report);
            Ok(report.pass)
        }
        Command::Moments(opts) => {
            init_threads(&opts);
            let config = load_config(&opts, "moments")?;
            let report = harness::run_moment_check(&config)?;
            if let Some(dir) = &config.out_dir {
                persist_json(&config, &report, "moments_report.json", dir)?;
            }
            println!(
                "moments: empirical {:.6e} <= bound {:.6e} (ratio {:.4}) over {} paths: {}",
                report.empirical,
                report.bound,
                report.ratio,
                report.paths,
                verdict(report.pass)
            );
            Ok(report.pass)
        }
        Command::CheckBounds(opts) => {
            init_threads(&opts);
            let config = load_config(&opts, "check-bounds")?;
            let sweep = harness::run_check_bounds(&config)?;
            if let Some(dir) = &config.out_dir {
                persist_json(&config, &sweep.reports, "bound_reports.json", dir)?;
            }
            let failures = sweep.reports.iter().filter(|r| !r.pass).count();
            println!(
                "check-bounds: {} reports over {} paths, {} failures: {}",
                sweep.reports.len(),
                sweep.paths,
                failures,
                verdict(sweep.all_pass)
            );
            Ok(sweep.all_pass)
        }
        Command::Selftest(opts) => {
            init_threads(&opts);
            let report = harness::run_selftest();
            for check in &report.checks {
                println!(
                    "selftest: {:<32} {}{}",
                    check.name,
                    verdict(check.pass),
                    if check.detail.is_empty() {
                        String::new()
                    } else {
                        format!("  ({})", check.detail)
                    }
                );
            }
            Ok(report.pass)
        }
    }
}

fn print_rate(report: &harness::RateReport) {
    for level in &report.levels {
        println!(
            "{}: N = {:>5}, mean error {:.6e}, median {:.6e}",
            report.experiment, level.resolution, level.mean_error, level.median_error
        );
    }
    match &report.fit {
        Some(fit) => println!(
            "{}: slope {:.4} +- {:.4}, threshold {:.4} (tolerance {:.2}): {}",
            report.experiment,
            fit.slope,
            fit.stderr,
            report.threshold,
            report.tolerance,
            verdict(report.pass)
        ),
        None => println!("{}: degenerate fit (no error mass)", report.experiment),
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidConfig(_) | Error::InvalidParameter(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
