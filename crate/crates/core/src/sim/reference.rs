//! Reference trajectories built by exact group integration of a scheduled
//! body twist: each control interval advances the pose by the closed-form
//! rigid-body motion of the interval's twist, so the samples sit on the
//! intended path to rounding accuracy at any step size.

use crate::controller::ReferenceWindow;
use crate::lie::{exp_se3, Pose, Twist};
use crate::Vec3;
use serde::{Deserialize, Serialize};

/// Built-in maneuver shapes. Both advance at 0.5 m/s surge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceProfile {
    /// Constant 0.1 rad/s yaw rate: a circle of radius 5 m.
    Turning,
    /// Sinusoidal yaw rate 0.1 sin(t/5) rad/s: a weaving course.
    Zigzag,
}

impl ReferenceProfile {
    /// Commanded body twist at time `t`, angular part first.
    pub fn twist_at(&self, t: f64) -> Twist {
        let surge = Vec3::new(0.5, 0.0, 0.0);
        let yaw_rate = match self {
            ReferenceProfile::Turning => 0.1,
            ReferenceProfile::Zigzag => 0.1 * (t / 5.0).sin(),
        };
        Twist::new(Vec3::new(0.0, 0.0, yaw_rate), surge)
    }
}

/// Sampled reference: pose and twist at each control instant.
#[derive(Clone, Debug)]
pub struct ReferenceTrajectory {
    pub poses: Vec<Pose>,
    pub twists: Vec<Twist>,
    pub dt: f64,
}

impl ReferenceTrajectory {
    /// Integrate `steps` intervals of length `dt` starting from the
    /// identity pose. The twist is held constant over each interval.
    pub fn generate(profile: ReferenceProfile, dt: f64, steps: usize) -> Self {
        let mut poses = Vec::with_capacity(steps + 1);
        let mut twists = Vec::with_capacity(steps + 1);
        poses.push(Pose::identity());
        for k in 0..steps {
            let xi = profile.twist_at(k as f64 * dt);
            twists.push(xi);
            let step = exp_se3(&Twist(xi.0 * dt));
            poses.push(poses[k] * step);
        }
        twists.push(profile.twist_at(steps as f64 * dt));
        ReferenceTrajectory { poses, twists, dt }
    }

    pub fn samples(&self) -> usize {
        self.poses.len()
    }

    /// Lookahead window of `intervals` steps starting at sample `start`,
    /// or `None` if the trajectory ends too early.
    pub fn window(&self, start: usize, intervals: usize) -> Option<ReferenceWindow<'_>> {
        let end = start.checked_add(intervals)?;
        if end >= self.poses.len() {
            return None;
        }
        Some(ReferenceWindow {
            poses: &self.poses[start..=end],
            twists: &self.twists[start..=end],
            dt: self.dt,
        })
    }
}
