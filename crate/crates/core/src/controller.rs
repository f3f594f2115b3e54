//! Common interface the simulation harness drives controllers through.

use crate::hydro::FossenState;
use crate::lie::{LieError, Pose, Twist};
use serde::{Deserialize, Serialize};

/// Desired motion over one horizon: `poses[k]` and `twists[k]` for
/// k = 0..=N, sampled every `dt` seconds. `poses[0]` is the reference at
/// the current instant. Twists are body-frame, Lie-ordered.
#[derive(Clone, Copy, Debug)]
pub struct ReferenceWindow<'a> {
    pub poses: &'a [Pose],
    pub twists: &'a [Twist],
    pub dt: f64,
}

impl<'a> ReferenceWindow<'a> {
    /// Number of control intervals in the window.
    pub fn intervals(&self) -> usize {
        self.poses.len().saturating_sub(1)
    }

    pub fn validate(&self) -> Result<(), ControlError> {
        if self.poses.len() != self.twists.len() {
            return Err(ControlError::Window(format!(
                "pose count {} != twist count {}",
                self.poses.len(),
                self.twists.len()
            )));
        }
        if self.poses.len() < 2 {
            return Err(ControlError::Window(format!(
                "window needs at least 2 samples, got {}",
                self.poses.len()
            )));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(ControlError::Window(format!("bad dt {}", self.dt)));
        }
        Ok(())
    }
}

/// One controller decision: thrust per propeller in newtons, plus solver
/// diagnostics for logging.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ControlStep {
    /// [port, starboard] axial thrust in N.
    pub force: [f64; 2],
    /// Iterations the underlying solver spent.
    pub iterations: usize,
    /// Whether the solver met its tolerance.
    pub converged: bool,
    /// Objective value of the accepted iterate.
    pub objective: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum ControlError {
    #[error("geometry error: {0}")]
    Lie(#[from] LieError),
    #[error("bad reference window: {0}")]
    Window(String),
    #[error("solver failed: {0}")]
    Solver(String),
    #[error("bad controller configuration: {0}")]
    Config(String),
}

/// A receding-horizon tracking controller. Implementations keep their own
/// warm-start state, so `control` takes `&mut self`.
pub trait VesselController {
    fn control(
        &mut self,
        state: &FossenState,
        window: &ReferenceWindow<'_>,
    ) -> Result<ControlStep, ControlError>;

    /// Forget warm starts, as at the start of a fresh episode.
    fn reset(&mut self);

    /// Short stable name for logs and output files.
    fn name(&self) -> &'static str;
}

/// Which controller an experiment runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControllerKind {
    /// Convex error-state tracker in the Lie algebra.
    ErrorState,
    /// Nonlinear SQP tracker in Euler coordinates.
    Nmpc,
    /// Same, with restoring forces dropped from its internal model.
    NmpcSimple,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 3] = [
        ControllerKind::ErrorState,
        ControllerKind::Nmpc,
        ControllerKind::NmpcSimple,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ControllerKind::ErrorState => "error-state",
            ControllerKind::Nmpc => "nmpc",
            ControllerKind::NmpcSimple => "nmpc-simple",
        }
    }
}

impl std::str::FromStr for ControllerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "error-state" | "proposed" => Ok(ControllerKind::ErrorState),
            "nmpc" => Ok(ControllerKind::Nmpc),
            "nmpc-simple" | "nmpc-no-restoring" => Ok(ControllerKind::NmpcSimple),
            other => Err(format!(
                "unknown controller '{other}', expected error-state, nmpc, or nmpc-simple"
            )),
        }
    }
}

impl std::fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}
