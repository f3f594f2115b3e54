//! Twin-thruster actuation: wrench assembly, saturation, and the
//! propeller-speed characteristic.

use super::params::VesselParams;
use crate::Vec6;
use nalgebra::SMatrix;

/// Body wrench in Lie ordering [torque; force] for port/starboard thrusts
/// `u = [u1, u2]` in newtons. Differential thrust yaws, collective thrust
/// drives surge; the port lever arm is positive to starboard convention.
pub fn thrust_wrench_lie(lever_arm: f64, u: &[f64; 2]) -> Vec6 {
    Vec6::new(0.0, 0.0, lever_arm * (u[0] - u[1]), u[0] + u[1], 0.0, 0.0)
}

/// Constant allocation matrix T with thrust_wrench_lie(l, u) = T u.
pub fn thrust_matrix_lie(lever_arm: f64) -> SMatrix<f64, 6, 2> {
    let mut t = SMatrix::<f64, 6, 2>::zeros();
    t[(2, 0)] = lever_arm;
    t[(2, 1)] = -lever_arm;
    t[(3, 0)] = 1.0;
    t[(3, 1)] = 1.0;
    t
}

/// Clamp both thrusts to the vessel's limits. Returns the clamped pair and
/// whether anything was saturated.
pub fn clamp_thrust(params: &VesselParams, u: &[f64; 2]) -> ([f64; 2], bool) {
    let [lo, hi] = params.thrust_limits;
    let clamped = [u[0].clamp(lo, hi), u[1].clamp(lo, hi)];
    (clamped, clamped != *u)
}

/// Propeller thrust from shaft speed: F = k n |n| with a different k astern.
pub fn rpm_to_force(params: &VesselParams, n: f64) -> f64 {
    let k = if n >= 0.0 {
        params.thrust_coeff_pos
    } else {
        params.thrust_coeff_neg
    };
    k * n * n.abs()
}

/// Shaft speed producing a given thrust; inverse of [`rpm_to_force`].
pub fn force_to_rpm(params: &VesselParams, f: f64) -> f64 {
    if f >= 0.0 {
        (f / params.thrust_coeff_pos).sqrt()
    } else {
        -(-f / params.thrust_coeff_neg).sqrt()
    }
}
