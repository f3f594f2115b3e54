//! Rigid transforms and the SE(3) exponential/logarithm.

use super::so3::{rodrigues_coefficients, Rotation};
use super::{exp_so3, hat3, log_so3, LieError, Twist, SMALL_ANGLE};
use crate::{Mat3, Mat4, Vec3};

/// Rigid transform: rotation plus translation, acting as p -> R p + t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub rotation: Rotation,
    pub position: Vec3,
}

impl Pose {
    pub fn identity() -> Self {
        Pose {
            rotation: Rotation::identity(),
            position: Vec3::zeros(),
        }
    }

    pub fn new(rotation: Rotation, position: Vec3) -> Self {
        Pose { rotation, position }
    }

    pub fn inverse(&self) -> Pose {
        let rt = self.rotation.transpose();
        Pose {
            rotation: rt,
            position: -(rt * self.position),
        }
    }

    /// Homogeneous 4x4 form.
    pub fn matrix4(&self) -> Mat4 {
        let mut out = Mat4::identity();
        out.fixed_view_mut::<3, 3>(0, 0).copy_from(self.rotation.matrix());
        out.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.position);
        out
    }

    pub fn transform_point(&self, p: &Vec3) -> Vec3 {
        self.rotation * *p + self.position
    }
}

impl std::ops::Mul for Pose {
    type Output = Pose;
    fn mul(self, rhs: Pose) -> Pose {
        Pose {
            rotation: self.rotation * rhs.rotation,
            position: self.rotation * rhs.position + self.position,
        }
    }
}

/// SE(3) left Jacobian V(omega): exp maps translation v to V v.
fn left_jacobian(omega: &Vec3) -> Mat3 {
    let theta = omega.norm();
    let (_, b, c) = rodrigues_coefficients(theta);
    let w = hat3(omega);
    Mat3::identity() + w * b + w * w * c
}

/// Inverse left Jacobian, closed form with series fallback.
fn left_jacobian_inv(omega: &Vec3) -> Mat3 {
    let theta = omega.norm();
    let w = hat3(omega);
    let coeff = if theta < SMALL_ANGLE {
        let t2 = theta * theta;
        1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0
    } else {
        // (1 - theta sin(theta) / (2 (1 - cos(theta)))) / theta^2,
        // finite for all theta in (0, pi].
        (1.0 - theta * theta.sin() / (2.0 * (1.0 - theta.cos()))) / (theta * theta)
    };
    Mat3::identity() - w * 0.5 + w * w * coeff
}

/// Exponential of a twist: rotation by Rodrigues, translation through the
/// left Jacobian.
pub fn exp_se3(xi: &Twist) -> Pose {
    let omega = xi.angular();
    Pose {
        rotation: exp_so3(&omega),
        position: left_jacobian(&omega) * xi.linear(),
    }
}

/// Principal-branch logarithm; inherits the near-pi rejection of [`log_so3`].
pub fn log_se3(x: &Pose) -> Result<Twist, LieError> {
    let omega = log_so3(&x.rotation)?;
    let v = left_jacobian_inv(&omega) * x.position;
    Ok(Twist::new(omega, v))
}

/// Left-invariant tracking error between a desired and an actual pose.
#[derive(Debug, Clone, Copy)]
pub struct LeftError {
    /// Group form: Psi = X_d^-1 X.
    pub group: Pose,
    /// Algebra coordinates: psi = vee6(log(Psi)), Lie ordering.
    pub log: Twist,
}

/// psi = log(X_d^-1 X). Identity poses give exactly zero; the error is
/// invariant under a common left transform of both arguments.
pub fn left_error(desired: &Pose, actual: &Pose) -> Result<LeftError, LieError> {
    let group = desired.inverse() * *actual;
    let log = log_se3(&group)?;
    Ok(LeftError { group, log })
}
