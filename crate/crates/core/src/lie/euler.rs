//! ZYX Euler-angle conversions and the Euler-coordinate kinematics.
//!
//! eta = [x y z phi theta psi] in NED: position, then roll/pitch/yaw.
//! The rotation convention is R = Rz(psi) Ry(theta) Rx(phi).

use super::{hat3, LieError, Pose, Rotation, GIMBAL_MARGIN};
use crate::{Mat3, Mat6, Vec3, Vec6};
use std::f64::consts::FRAC_PI_2;

fn rotation_zyx(phi: f64, theta: f64, psi: f64) -> Mat3 {
    let (sphi, cphi) = phi.sin_cos();
    let (sth, cth) = theta.sin_cos();
    let (spsi, cpsi) = psi.sin_cos();
    Mat3::new(
        cpsi * cth,
        cpsi * sth * sphi - spsi * cphi,
        cpsi * sth * cphi + spsi * sphi,
        spsi * cth,
        spsi * sth * sphi + cpsi * cphi,
        spsi * sth * cphi - cpsi * sphi,
        -sth,
        cth * sphi,
        cth * cphi,
    )
}

/// Pose of an Euler-coordinate state.
pub fn euler_to_pose(eta: &Vec6) -> Pose {
    let r = rotation_zyx(eta[3], eta[4], eta[5]);
    Pose::new(
        Rotation::from_matrix_unchecked(r),
        Vec3::new(eta[0], eta[1], eta[2]),
    )
}

/// Euler coordinates of a pose. Rejects pitch within [`GIMBAL_MARGIN`] of
/// +-pi/2, where roll and yaw are not separable.
pub fn pose_to_euler(x: &Pose) -> Result<Vec6, LieError> {
    let m = x.rotation.matrix();
    let sth = -m[(2, 0)];
    let theta = sth.clamp(-1.0, 1.0).asin();
    if FRAC_PI_2 - theta.abs() < GIMBAL_MARGIN {
        return Err(LieError::GimbalLock(theta));
    }
    let phi = m[(2, 1)].atan2(m[(2, 2)]);
    let psi = m[(1, 0)].atan2(m[(0, 0)]);
    Ok(Vec6::new(
        x.position.x,
        x.position.y,
        x.position.z,
        phi,
        theta,
        psi,
    ))
}

/// Angle-rate transform T(Theta): Theta_dot = T(Theta) omega_body.
fn angle_rate_transform(phi: f64, theta: f64) -> Mat3 {
    let (sphi, cphi) = phi.sin_cos();
    let (sth, cth) = theta.sin_cos();
    let tth = sth / cth;
    Mat3::new(
        1.0,
        sphi * tth,
        cphi * tth,
        0.0,
        cphi,
        -sphi,
        0.0,
        sphi / cth,
        cphi / cth,
    )
}

/// Kinematic map J(eta) with eta_dot = J(eta) nu for Fossen-ordered
/// nu = [v; omega]: block diagonal of the rotation and the angle-rate
/// transform. Errors at gimbal lock, where T is singular.
pub fn euler_kinematics(eta: &Vec6) -> Result<Mat6, LieError> {
    let (phi, theta) = (eta[3], eta[4]);
    if FRAC_PI_2 - theta.abs() < GIMBAL_MARGIN {
        return Err(LieError::GimbalLock(theta));
    }
    let r = rotation_zyx(phi, theta, eta[5]);
    let t = angle_rate_transform(phi, theta);
    let mut out = Mat6::zeros();
    out.fixed_view_mut::<3, 3>(0, 0).copy_from(&r);
    out.fixed_view_mut::<3, 3>(3, 3).copy_from(&t);
    Ok(out)
}

/// Analytic Jacobian of eta_dot = J(eta) nu with respect to the three
/// angles, holding nu fixed: columns are d(J nu)/d(phi, theta, psi).
/// The rotation part uses dR/dphi = R hat(e1), dR/dtheta = Rz Ry hat(e2) Rx,
/// dR/dpsi = hat(e3) R; the angle-rate part is differentiated entrywise.
pub fn euler_kinematics_jacobian(eta: &Vec6, nu: &Vec6) -> Result<nalgebra::SMatrix<f64, 6, 3>, LieError> {
    let (phi, theta, psi) = (eta[3], eta[4], eta[5]);
    if FRAC_PI_2 - theta.abs() < GIMBAL_MARGIN {
        return Err(LieError::GimbalLock(theta));
    }
    let v: Vec3 = nu.fixed_rows::<3>(0).into();
    let w: Vec3 = nu.fixed_rows::<3>(3).into();

    let r = rotation_zyx(phi, theta, psi);
    let (sphi, cphi) = phi.sin_cos();
    let (sth, cth) = theta.sin_cos();

    let dr_dphi = r * hat3(&Vec3::x());
    let rz = rotation_zyx(0.0, 0.0, psi);
    let ry = rotation_zyx(0.0, theta, 0.0);
    let rx = rotation_zyx(phi, 0.0, 0.0);
    let dr_dtheta = rz * ry * hat3(&Vec3::y()) * rx;
    let dr_dpsi = hat3(&Vec3::z()) * r;

    let sec2 = 1.0 / (cth * cth);
    let tth = sth / cth;
    let dt_dphi = Mat3::new(
        0.0,
        cphi * tth,
        -sphi * tth,
        0.0,
        -sphi,
        -cphi,
        0.0,
        cphi / cth,
        -sphi / cth,
    );
    let dt_dtheta = Mat3::new(
        0.0,
        sphi * sec2,
        cphi * sec2,
        0.0,
        0.0,
        0.0,
        0.0,
        sphi * sth * sec2,
        cphi * sth * sec2,
    );

    let mut out = nalgebra::SMatrix::<f64, 6, 3>::zeros();
    out.fixed_view_mut::<3, 1>(0, 0).copy_from(&(dr_dphi * v));
    out.fixed_view_mut::<3, 1>(0, 1).copy_from(&(dr_dtheta * v));
    out.fixed_view_mut::<3, 1>(0, 2).copy_from(&(dr_dpsi * v));
    out.fixed_view_mut::<3, 1>(3, 0).copy_from(&(dt_dphi * w));
    out.fixed_view_mut::<3, 1>(3, 1).copy_from(&(dt_dtheta * w));
    // T does not depend on yaw; the third angular column stays zero.
    Ok(out)
}
