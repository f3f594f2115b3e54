//! Batched experiments: Monte Carlo over randomized initial conditions and
//! a current speed-by-direction sweep. Episodes are seeded from one master
//! seed and run in parallel with a deterministic, order-preserving layout.

use super::episode::{run_episode, EpisodeConfig, EpisodeResult};
use super::reference::ReferenceTrajectory;
use super::{ControllerFactory, SimError};
use crate::hydro::{CurrentField, FossenState, HydroModel};
use crate::Vec6;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;

#[derive(Clone, Copy, Debug)]
pub struct MonteCarloConfig {
    pub episodes: usize,
    pub seed: u64,
    /// Initial positions are drawn uniformly from a disk of this radius
    /// around the reference start.
    pub init_radius_m: f64,
    /// Initial heading error is uniform in [-range, range].
    pub heading_range_rad: f64,
    pub base: EpisodeConfig,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        MonteCarloConfig {
            episodes: 10,
            seed: 7,
            init_radius_m: 5.0,
            heading_range_rad: 1.0,
            base: EpisodeConfig::default(),
        }
    }
}

/// Draw a random initial state: offset in the horizontal plane, heading
/// error, zero velocity.
pub fn sample_initial_state(
    rng: &mut impl Rng,
    init_radius_m: f64,
    heading_range_rad: f64,
) -> FossenState {
    let radius = init_radius_m * rng.gen_range(0.0..1.0f64).sqrt();
    let bearing = rng.gen_range(0.0..std::f64::consts::TAU);
    let heading = rng.gen_range(-heading_range_rad..=heading_range_rad);
    let mut eta = Vec6::zeros();
    eta[0] = radius * bearing.cos();
    eta[1] = radius * bearing.sin();
    eta[5] = heading;
    FossenState::new(eta, Vec6::zeros())
}

/// Run `config.episodes` independent episodes. Each gets its own seed from
/// a master stream and its own controller instance, so results are
/// reproducible regardless of thread scheduling and are returned in
/// episode order.
pub fn run_monte_carlo(
    plant: &HydroModel,
    factory: &ControllerFactory,
    reference: &ReferenceTrajectory,
    config: &MonteCarloConfig,
) -> Result<Vec<EpisodeResult>, SimError> {
    if config.episodes == 0 {
        return Err(SimError::Config("episode count must be at least 1".into()));
    }
    let mut master = ChaCha8Rng::seed_from_u64(config.seed);
    let seeds: Vec<u64> = (0..config.episodes).map(|_| master.gen()).collect();
    seeds
        .par_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut episode = config.base;
            episode.initial_state =
                sample_initial_state(&mut rng, config.init_radius_m, config.heading_range_rad);
            let mut controller = factory
                .build(plant)
                .map_err(|source| SimError::Controller { t: 0.0, source })?;
            run_episode(plant, controller.as_mut(), reference, &episode)
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub speeds_mps: Vec<f64>,
    /// Current directions: this many angles evenly spaced over the circle.
    /// Zero-speed entries collapse to a single angle.
    pub angle_count: usize,
    pub monte_carlo: MonteCarloConfig,
}

/// Aggregates for one (controller, speed, angle) cell.
#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub controller: String,
    pub speed_mps: f64,
    pub angle_rad: f64,
    pub mean_final_err_m: f64,
    pub max_final_err_m: f64,
    pub mean_solve_ms: f64,
    pub episodes_converged: usize,
    pub episodes: usize,
}

/// Run every controller against every current condition. Rows come back in
/// the deterministic order controllers x speeds x angles.
pub fn run_current_sweep(
    plant: &HydroModel,
    controllers: &[ControllerFactory],
    reference: &ReferenceTrajectory,
    config: &SweepConfig,
) -> Result<Vec<SweepRow>, SimError> {
    if config.angle_count == 0 {
        return Err(SimError::Config("angle count must be at least 1".into()));
    }
    let mut rows = Vec::new();
    for factory in controllers {
        let name = factory.build(plant).map_err(|source| SimError::Controller {
            t: 0.0,
            source,
        })?;
        let name = name.name().to_string();
        for &speed in &config.speeds_mps {
            let angles: Vec<f64> = if speed == 0.0 {
                vec![0.0]
            } else {
                (0..config.angle_count)
                    .map(|i| std::f64::consts::TAU * i as f64 / config.angle_count as f64)
                    .collect()
            };
            for angle in angles {
                let mut mc = config.monte_carlo;
                mc.base.current = CurrentField::from_speed_angle(speed, angle);
                let results = run_monte_carlo(plant, factory, reference, &mc)?;
                let n = results.len() as f64;
                rows.push(SweepRow {
                    controller: name.clone(),
                    speed_mps: speed,
                    angle_rad: angle,
                    mean_final_err_m: results.iter().map(|r| r.final_error_m).sum::<f64>() / n,
                    max_final_err_m: results
                        .iter()
                        .map(|r| r.final_error_m)
                        .fold(0.0, f64::max),
                    mean_solve_ms: results.iter().map(|r| r.mean_solve_ms).sum::<f64>() / n,
                    episodes_converged: results.iter().filter(|r| r.converged).count(),
                    episodes: results.len(),
                });
            }
        }
    }
    Ok(rows)
}

/// Write sweep rows as CSV with a fixed column order.
pub fn write_sweep_csv<W: Write>(writer: W, rows: &[SweepRow]) -> Result<(), SimError> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record([
        "controller",
        "speed_mps",
        "angle_rad",
        "mean_final_err_m",
        "max_final_err_m",
        "mean_solve_ms",
        "episodes_converged",
        "episodes",
    ])?;
    for row in rows {
        out.write_record([
            row.controller.clone(),
            format!("{:.3}", row.speed_mps),
            format!("{:.6}", row.angle_rad),
            format!("{:.6}", row.mean_final_err_m),
            format!("{:.6}", row.max_final_err_m),
            format!("{:.4}", row.mean_solve_ms),
            row.episodes_converged.to_string(),
            row.episodes.to_string(),
        ])?;
    }
    out.flush().map_err(SimError::from)?;
    Ok(())
}
