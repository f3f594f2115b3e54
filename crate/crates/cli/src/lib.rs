//! Command implementations behind the `skiff` binary: closed-loop episode
//! batches, current sweeps, and runtime self-checks, all driven by one TOML
//! configuration.

pub mod config;

use config::{ConfigError, RunConfig};
use serde::Serialize;
use skiff_core::sim::{
    run_current_sweep, run_monte_carlo, write_records_csv, write_sweep_csv, EpisodeSummary,
    SimError,
};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

/// Exit codes: 0 success, 1 internal error, 2 configuration error,
/// 3 simulation failure, 4 self-checks failed.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Simulation(String),
    #[error("self checks failed")]
    ChecksFailed,
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Internal(_) => 1,
            CliError::Config(_) => 2,
            CliError::Simulation(_) => 3,
            CliError::ChecksFailed => 4,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(_) | SimError::ReferenceTooShort { .. } => {
                CliError::Config(e.to_string())
            }
            SimError::Io(_) | SimError::Csv(_) => CliError::Internal(e.to_string()),
            _ => CliError::Simulation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

/// Where outputs land: the --out flag, then the configuration, then
/// SKIFF_OUT_DIR, then ./out.
pub fn resolve_out_dir(flag: Option<&Path>, config: &RunConfig) -> PathBuf {
    if let Some(dir) = flag {
        return dir.to_path_buf();
    }
    if let Some(dir) = &config.out_dir {
        return dir.clone();
    }
    if let Some(dir) = std::env::var_os("SKIFF_OUT_DIR") {
        return PathBuf::from(dir);
    }
    PathBuf::from("out")
}

#[derive(Serialize)]
struct SimulateSummary {
    controller: String,
    profile: String,
    current_speed_mps: f64,
    current_angle_rad: f64,
    seed: u64,
    episodes: Vec<EpisodeSummary>,
    episodes_converged: usize,
    mean_final_error_m: f64,
    max_final_error_m: f64,
    mean_solve_ms: f64,
}

/// Run the configured Monte Carlo batch, write one CSV per episode and a
/// JSON summary, and print a per-episode report.
pub fn run_simulate(
    config: &RunConfig,
    config_dir: &Path,
    out_dir: &Path,
    out: &mut impl Write,
) -> Result<(), CliError> {
    let model = config.build_model(config_dir)?;
    let factory = config.controller_factory()?;
    let mc = config.monte_carlo_config();
    let profile = config.episode.profile;
    let reference = mc.base.reference(profile);
    let controller_name = factory
        .build(&model)
        .map_err(|e| CliError::Config(e.to_string()))?
        .name()
        .to_string();

    let results = run_monte_carlo(&model, &factory, &reference, &mc)?;

    std::fs::create_dir_all(out_dir)?;
    let profile_name = match profile {
        skiff_core::sim::ReferenceProfile::Turning => "turning",
        skiff_core::sim::ReferenceProfile::Zigzag => "zigzag",
    };
    for (i, result) in results.iter().enumerate() {
        let path = out_dir.join(format!("{controller_name}_{profile_name}_ep{i:02}.csv"));
        let file = BufWriter::new(File::create(&path)?);
        write_records_csv(file, &result.records)?;
    }

    let n = results.len() as f64;
    let summary = SimulateSummary {
        controller: controller_name.clone(),
        profile: profile_name.to_string(),
        current_speed_mps: config.episode.current_speed_mps,
        current_angle_rad: config.episode.current_angle_rad,
        seed: mc.seed,
        episodes: results.iter().map(|r| r.summary()).collect(),
        episodes_converged: results.iter().filter(|r| r.converged).count(),
        mean_final_error_m: results.iter().map(|r| r.final_error_m).sum::<f64>() / n,
        max_final_error_m: results
            .iter()
            .map(|r| r.final_error_m)
            .fold(0.0, f64::max),
        mean_solve_ms: results.iter().map(|r| r.mean_solve_ms).sum::<f64>() / n,
    };
    let json = serde_json::to_string_pretty(&summary)
        .map_err(|e| CliError::Internal(e.to_string()))?;
    std::fs::write(out_dir.join("summary.json"), &json)?;

    writeln!(
        out,
        "controller {controller_name}, profile {profile_name}, {} episodes, seed {}",
        results.len(),
        mc.seed
    )?;
    for (i, r) in results.iter().enumerate() {
        writeln!(
            out,
            "  episode {i:02}: final error {:.3} m, converged {}, solve {:.2} ms mean / {:.2} ms max",
            r.final_error_m, r.converged, r.mean_solve_ms, r.max_solve_ms
        )?;
    }
    writeln!(
        out,
        "converged {}/{}, mean final error {:.3} m, mean solve {:.2} ms",
        summary.episodes_converged,
        results.len(),
        summary.mean_final_error_m,
        summary.mean_solve_ms
    )?;
    writeln!(out, "wrote {}", out_dir.display())?;
    Ok(())
}

/// Run the configured controller-by-current grid and write sweep.csv.
pub fn run_sweep(
    config: &RunConfig,
    config_dir: &Path,
    out_dir: &Path,
    out: &mut impl Write,
) -> Result<(), CliError> {
    let model = config.build_model(config_dir)?;
    let (factories, sweep) = config.sweep_plan()?;
    let reference = sweep.monte_carlo.base.reference(config.episode.profile);

    let rows = run_current_sweep(&model, &factories, &reference, &sweep)?;

    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join("sweep.csv");
    let file = BufWriter::new(File::create(&path)?);
    write_sweep_csv(file, &rows)?;

    writeln!(
        out,
        "{:<14} {:>9} {:>9} {:>14} {:>13} {:>13}",
        "controller", "speed", "angle", "mean err (m)", "max err (m)", "solve (ms)"
    )?;
    for row in &rows {
        writeln!(
            out,
            "{:<14} {:>9.2} {:>9.3} {:>14.3} {:>13.3} {:>13.2}",
            row.controller,
            row.speed_mps,
            row.angle_rad,
            row.mean_final_err_m,
            row.max_final_err_m,
            row.mean_solve_ms
        )?;
    }
    // Worst cell per controller is the headline number.
    for factory in &factories {
        let name = factory
            .build(&model)
            .map_err(|e| CliError::Config(e.to_string()))?
            .name()
            .to_string();
        let worst = rows
            .iter()
            .filter(|r| r.controller == name)
            .map(|r| r.mean_final_err_m)
            .fold(0.0, f64::max);
        writeln!(out, "{name}: worst mean final error {worst:.3} m")?;
    }
    writeln!(out, "wrote {}", path.display())?;
    Ok(())
}

/// Run the self-check suites and report pass/fail per check.
pub fn run_validate(
    config: &RunConfig,
    config_dir: &Path,
    seed: u64,
    out: &mut impl Write,
) -> Result<(), CliError> {
    let model = config.build_model(config_dir)?;
    let reports = skiff_core::validate::run_all(&model, seed);
    let mut all_passed = true;
    for report in &reports {
        write!(out, "{}", report.render())?;
        all_passed &= report.passed();
    }
    if all_passed {
        writeln!(out, "all checks passed")?;
        Ok(())
    } else {
        writeln!(out, "CHECKS FAILED")?;
        Err(CliError::ChecksFailed)
    }
}
