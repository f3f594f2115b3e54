//! Six-degree-of-freedom vessel model: rigid-body and added inertia,
//! Coriolis, damping, hydrostatic restoring, ocean current, and thruster
//! allocation, plus the analytic force Jacobians the controllers need.
//!
//! Everything here works in the Fossen state (eta, nu) with linear velocity
//! stacked first; [`reorder`]/[`reorder_matrix`] convert vectors and
//! quadratic forms to the Lie ordering (angular first) used by the
//! error-state controller.

mod model;
mod params;
mod thrust;

pub use model::{coriolis, damping, HydroModel};
pub use params::{rigid_body_mass, ParamsError, VesselParams};
pub use thrust::{clamp_thrust, force_to_rpm, rpm_to_force, thrust_matrix_lie, thrust_wrench_lie};

use crate::lie::{euler_to_pose, swap_halves, swap_halves_matrix, Pose, Twist};
use crate::{Vec3, Vec6};
use serde::{Deserialize, Serialize};

/// Swap the linear and angular halves of a 6-vector, converting between
/// Fossen ordering [v; omega] and Lie ordering [omega; v]. Involutive.
pub fn reorder(v: &Vec6) -> Vec6 {
    swap_halves(v)
}

/// Apply the half-swap permutation congruently to a 6x6 matrix, so that
/// `reorder_matrix(m)` represents the same bilinear form on reordered
/// vectors. Involutive.
pub fn reorder_matrix(m: &crate::Mat6) -> crate::Mat6 {
    swap_halves_matrix(m)
}

/// Vessel state in Fossen coordinates: generalized NED position
/// eta = [x y z phi theta psi] and body velocity nu = [u v w p q r].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FossenState {
    pub eta: Vec6,
    pub nu: Vec6,
}

impl FossenState {
    pub fn new(eta: Vec6, nu: Vec6) -> Self {
        FossenState { eta, nu }
    }

    pub fn zero() -> Self {
        FossenState {
            eta: Vec6::zeros(),
            nu: Vec6::zeros(),
        }
    }

    /// Pose of the body frame.
    pub fn pose(&self) -> Pose {
        euler_to_pose(&self.eta)
    }

    /// Body velocity as a Lie-ordered twist.
    pub fn twist(&self) -> Twist {
        Twist::from_fossen(&self.nu)
    }

    pub fn is_finite(&self) -> bool {
        self.eta.iter().all(|x| x.is_finite()) && self.nu.iter().all(|x| x.is_finite())
    }
}

/// Constant, irrotational ocean current given in the NED frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurrentField {
    pub v_ned: Vec3,
}

impl CurrentField {
    pub fn zero() -> Self {
        CurrentField {
            v_ned: Vec3::zeros(),
        }
    }

    /// Horizontal current of the given speed flowing toward `angle` rad
    /// (0 = north, pi/2 = east).
    pub fn from_speed_angle(speed: f64, angle: f64) -> Self {
        CurrentField {
            v_ned: Vec3::new(speed * angle.cos(), speed * angle.sin(), 0.0),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.v_ned == Vec3::zeros()
    }

    /// Body-frame current velocity in Fossen ordering; the angular part is
    /// zero because the current is irrotational.
    pub fn body_velocity(&self, rotation: &crate::lie::Rotation) -> Vec6 {
        let lin = rotation.transpose() * self.v_ned;
        let mut out = Vec6::zeros();
        out.fixed_rows_mut::<3>(0).copy_from(&lin);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::exp_so3;
    use approx::assert_abs_diff_eq;

    #[test]
    fn reorder_swaps_halves_and_is_involutive() {
        let v = Vec6::new(1.0, 2.0, 3.0, 4.0, 5.0, 6.0);
        let swapped = reorder(&v);
        assert_eq!(swapped, Vec6::new(4.0, 5.0, 6.0, 1.0, 2.0, 3.0));
        assert_eq!(reorder(&swapped), v);
    }

    #[test]
    fn current_body_velocity_has_zero_angular_part() {
        let current = CurrentField::from_speed_angle(0.5, 1.1);
        let r = exp_so3(&Vec3::new(0.2, -0.1, 0.7));
        let nu_c = current.body_velocity(&r);
        assert_eq!(nu_c.fixed_rows::<3>(3).norm(), 0.0);
        // Rotating back recovers the NED vector.
        let back = r * Vec3::from(nu_c.fixed_rows::<3>(0));
        assert_abs_diff_eq!(back, current.v_ned, epsilon = 1e-12);
        assert_abs_diff_eq!(current.v_ned.norm(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn state_accessors_round_trip() {
        let state = FossenState::new(
            Vec6::new(1.0, 2.0, 0.5, 0.1, -0.2, 0.3),
            Vec6::new(0.5, 0.1, 0.0, 0.01, 0.02, 0.1),
        );
        let twist = state.twist();
        assert_eq!(twist.to_fossen(), state.nu);
        let eta_back = crate::lie::pose_to_euler(&state.pose()).unwrap();
        assert_abs_diff_eq!(eta_back, state.eta, epsilon = 1e-12);
        assert!(state.is_finite());
        let mut bad = state;
        bad.nu[2] = f64::NAN;
        assert!(!bad.is_finite());
    }
}
