//! Closed-loop simulation: reference generation, plant integration,
//! single-episode rollout, and batched campaigns (Monte Carlo over initial
//! conditions, current-direction sweeps).
//!
//! The plant integrates the relative-velocity form of the vessel dynamics,
//! so a steady horizontal current enters the kinematics as a pure drift and
//! the hydrodynamic forces see only the flow-relative velocity.

mod campaign;
mod episode;
mod plant;
mod reference;

pub use campaign::{
    run_current_sweep, run_monte_carlo, sample_initial_state, write_sweep_csv, MonteCarloConfig,
    SweepConfig, SweepRow,
};
pub use episode::{
    run_episode, write_records_csv, EpisodeConfig, EpisodeResult, EpisodeSummary, StepRecord,
    CONVERGENCE_RADIUS_M, CONVERGENCE_SETTLE_S, FINAL_WINDOW_S,
};
pub use plant::rk4_step;
pub use reference::{ReferenceProfile, ReferenceTrajectory};

use crate::controller::{ControlError, ControllerKind, VesselController};
use crate::hydro::HydroModel;
use crate::lie::LieError;
use crate::mpc::{ErrorStateMpc, MpcWeights};
use crate::nmpc::{NlpConfig, NonlinearMpc};
use crate::qp::AdmmConfig;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("reference trajectory too short: need {needed} samples, have {have}")]
    ReferenceTooShort { needed: usize, have: usize },
    #[error("controller failed at t={t:.2} s: {source}")]
    Controller { t: f64, source: ControlError },
    #[error("plant state diverged at t={t:.2} s")]
    Diverged { t: f64 },
    #[error("kinematics: {0}")]
    Lie(#[from] LieError),
    #[error("bad simulation configuration: {0}")]
    Config(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Recipe for constructing a controller; campaigns clone one per episode so
/// warm-start state never leaks across runs.
#[derive(Clone, Copy, Debug)]
pub struct ControllerFactory {
    pub kind: ControllerKind,
    pub weights: MpcWeights,
    pub qp: AdmmConfig,
    pub sqp_max_iterations: usize,
    pub sqp_tolerance: f64,
    /// Override the thrust box from the vessel parameters; `None` keeps it.
    pub input_bounds: Option<[f64; 2]>,
}

impl ControllerFactory {
    pub fn new(kind: ControllerKind) -> Self {
        ControllerFactory {
            kind,
            weights: MpcWeights::default_tracking(),
            qp: AdmmConfig::control(),
            sqp_max_iterations: NlpConfig::default().max_iterations,
            sqp_tolerance: NlpConfig::default().tolerance,
            input_bounds: None,
        }
    }

    pub fn build(&self, model: &HydroModel) -> Result<Box<dyn VesselController>, ControlError> {
        match self.kind {
            ControllerKind::ErrorState => {
                let mut controller = ErrorStateMpc::new(model.clone(), self.weights, self.qp)?;
                if let Some(bounds) = self.input_bounds {
                    controller = controller.with_input_bounds(Some(bounds));
                }
                Ok(Box::new(controller))
            }
            ControllerKind::Nmpc | ControllerKind::NmpcSimple => {
                let config = NlpConfig {
                    max_iterations: self.sqp_max_iterations,
                    tolerance: self.sqp_tolerance,
                    include_restoring: self.kind == ControllerKind::Nmpc,
                    qp: self.qp,
                    ..NlpConfig::default()
                };
                let mut controller = NonlinearMpc::new(model.clone(), self.weights, config)?;
                if let Some(bounds) = self.input_bounds {
                    controller = controller.with_input_bounds(Some(bounds));
                }
                Ok(Box::new(controller))
            }
        }
    }
}
