//! Single closed-loop episode: a receding-horizon controller running at the
//! control rate against an RK4 plant running at a faster substep rate, with
//! per-step records and summary tracking metrics.

use super::plant::rk4_step;
use super::reference::ReferenceTrajectory;
use super::SimError;
use crate::controller::VesselController;
use crate::hydro::{clamp_thrust, reorder, thrust_wrench_lie, CurrentField, FossenState, HydroModel};
use crate::lie::euler_to_pose;
use serde::Serialize;
use std::io::Write;
use std::time::Instant;

/// A tracked episode counts as converged when the position error stays
/// inside this radius for the whole tail of the run.
pub const CONVERGENCE_RADIUS_M: f64 = 0.15;
/// Settling time before the convergence radius is enforced.
pub const CONVERGENCE_SETTLE_S: f64 = 30.0;
/// The final error is the mean position error over this closing window.
pub const FINAL_WINDOW_S: f64 = 5.0;

#[derive(Clone, Copy, Debug)]
pub struct EpisodeConfig {
    pub duration_s: f64,
    pub control_rate_hz: f64,
    /// Plant RK4 substeps per control interval.
    pub plant_substeps: usize,
    /// Prediction horizon in control intervals.
    pub horizon_steps: usize,
    pub current: CurrentField,
    /// Absolute initial state; the plant converts to relative velocity.
    pub initial_state: FossenState,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        EpisodeConfig {
            duration_s: 60.0,
            control_rate_hz: 20.0,
            plant_substeps: 4,
            horizon_steps: 100,
            current: CurrentField::zero(),
            initial_state: FossenState::zero(),
        }
    }
}

impl EpisodeConfig {
    pub fn control_dt(&self) -> f64 {
        1.0 / self.control_rate_hz
    }

    pub fn steps(&self) -> usize {
        (self.duration_s * self.control_rate_hz).round() as usize
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.duration_s > 0.0 && self.control_rate_hz > 0.0) {
            return Err(SimError::Config(
                "duration and control rate must be positive".into(),
            ));
        }
        if self.plant_substeps == 0 || self.horizon_steps == 0 {
            return Err(SimError::Config(
                "plant substeps and horizon must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// A reference long enough for every lookahead window of this episode.
    pub fn reference(&self, profile: super::ReferenceProfile) -> ReferenceTrajectory {
        ReferenceTrajectory::generate(
            profile,
            self.control_dt(),
            self.steps() + self.horizon_steps,
        )
    }
}

/// One control interval of a finished episode.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct StepRecord {
    pub t: f64,
    /// Absolute state at the control instant, before this interval's force.
    pub state: FossenState,
    /// Thrust actually applied over the interval, after plant-side limits.
    pub force: [f64; 2],
    pub pos_err: f64,
    pub solve_ms: f64,
    pub iterations: usize,
    pub solver_converged: bool,
}

#[derive(Clone, Debug)]
pub struct EpisodeResult {
    pub records: Vec<StepRecord>,
    pub final_error_m: f64,
    pub converged: bool,
    pub mean_solve_ms: f64,
    pub max_solve_ms: f64,
    /// Control steps where the solver hit its iteration cap.
    pub solver_failures: usize,
}

/// Aggregate view of an episode, shaped for serialization.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EpisodeSummary {
    pub steps: usize,
    pub final_error_m: f64,
    pub converged: bool,
    pub mean_solve_ms: f64,
    pub max_solve_ms: f64,
    pub solver_failures: usize,
}

impl EpisodeResult {
    pub fn summary(&self) -> EpisodeSummary {
        EpisodeSummary {
            steps: self.records.len(),
            final_error_m: self.final_error_m,
            converged: self.converged,
            mean_solve_ms: self.mean_solve_ms,
            max_solve_ms: self.max_solve_ms,
            solver_failures: self.solver_failures,
        }
    }
}

/// Run one closed-loop episode of `controller` against `plant`.
///
/// The reference must cover the episode plus one full horizon; build it
/// with [`EpisodeConfig::reference`] or check [`ReferenceTrajectory::window`]
/// lengths yourself.
pub fn run_episode(
    plant: &HydroModel,
    controller: &mut dyn VesselController,
    reference: &ReferenceTrajectory,
    config: &EpisodeConfig,
) -> Result<EpisodeResult, SimError> {
    config.validate()?;
    let steps = config.steps();
    let dt = config.control_dt();
    if (reference.dt - dt).abs() > 1e-12 {
        return Err(SimError::Config(format!(
            "reference dt {} does not match control dt {}",
            reference.dt, dt
        )));
    }
    let needed = steps + config.horizon_steps;
    if reference.samples() <= needed {
        return Err(SimError::ReferenceTooShort {
            needed: needed + 1,
            have: reference.samples(),
        });
    }

    let mut eta = config.initial_state.eta;
    let rot0 = euler_to_pose(&eta).rotation;
    let mut nu_r = config.initial_state.nu - config.current.body_velocity(&rot0);
    let sub_dt = dt / config.plant_substeps as f64;

    let mut records = Vec::with_capacity(steps);
    for k in 0..steps {
        let t = k as f64 * dt;
        let pose = euler_to_pose(&eta);
        let nu = nu_r + config.current.body_velocity(&pose.rotation);
        let state = FossenState::new(eta, nu);
        if !state.is_finite() {
            return Err(SimError::Diverged { t });
        }
        let window = reference
            .window(k, config.horizon_steps)
            .expect("length checked above");
        let started = Instant::now();
        let step = controller
            .control(&state, &window)
            .map_err(|source| SimError::Controller { t, source })?;
        let solve_ms = started.elapsed().as_secs_f64() * 1e3;

        let (force, _saturated) = clamp_thrust(plant.params(), &step.force);
        let tau = reorder(&thrust_wrench_lie(plant.params().lever_arm, &force));
        let pos_err = (pose.position - reference.poses[k].position).norm();
        records.push(StepRecord {
            t,
            state,
            force,
            pos_err,
            solve_ms,
            iterations: step.iterations,
            solver_converged: step.converged,
        });

        for _ in 0..config.plant_substeps {
            (eta, nu_r) = rk4_step(plant, &eta, &nu_r, &config.current, &tau, sub_dt)?;
        }
    }

    let final_from = config.duration_s - FINAL_WINDOW_S;
    let tail: Vec<f64> = records
        .iter()
        .filter(|r| r.t >= final_from)
        .map(|r| r.pos_err)
        .collect();
    let final_error_m = if tail.is_empty() {
        records.last().map(|r| r.pos_err).unwrap_or(f64::NAN)
    } else {
        tail.iter().sum::<f64>() / tail.len() as f64
    };
    let converged = records
        .iter()
        .filter(|r| r.t > CONVERGENCE_SETTLE_S)
        .all(|r| r.pos_err < CONVERGENCE_RADIUS_M)
        && records.iter().any(|r| r.t > CONVERGENCE_SETTLE_S);
    let n = records.len().max(1) as f64;
    let mean_solve_ms = records.iter().map(|r| r.solve_ms).sum::<f64>() / n;
    let max_solve_ms = records.iter().map(|r| r.solve_ms).fold(0.0, f64::max);
    let solver_failures = records.iter().filter(|r| !r.solver_converged).count();

    Ok(EpisodeResult {
        records,
        final_error_m,
        converged,
        mean_solve_ms,
        max_solve_ms,
        solver_failures,
    })
}

/// Write per-step records as CSV with a fixed, documented column order.
pub fn write_records_csv<W: Write>(writer: W, records: &[StepRecord]) -> Result<(), SimError> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record([
        "t", "x", "y", "z", "phi", "theta", "psi", "u", "v", "w", "p", "q", "r", "u1", "u2",
        "pos_err", "solve_ms",
    ])?;
    for r in records {
        let mut row: Vec<String> = Vec::with_capacity(17);
        row.push(format!("{:.3}", r.t));
        for i in 0..6 {
            row.push(format!("{:.6}", r.state.eta[i]));
        }
        for i in 0..6 {
            row.push(format!("{:.6}", r.state.nu[i]));
        }
        row.push(format!("{:.4}", r.force[0]));
        row.push(format!("{:.4}", r.force[1]));
        row.push(format!("{:.6}", r.pos_err));
        row.push(format!("{:.4}", r.solve_ms));
        out.write_record(&row)?;
    }
    out.flush().map_err(SimError::from)?;
    Ok(())
}
