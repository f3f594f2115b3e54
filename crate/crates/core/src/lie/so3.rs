//! Rotations and the SO(3) exponential/logarithm.

use super::{hat3, LieError, BRANCH_MARGIN, SMALL_ANGLE};
use crate::{Mat3, Vec3};

/// Proper rotation matrix (orthonormal, determinant +1).
///
/// Construction through [`Rotation::from_matrix`] validates orthonormality to
/// 1e-9; values produced internally (composition, [`exp_so3`]) stay valid by
/// construction up to roundoff. [`Rotation::renormalize`] projects back onto
/// SO(3) when accumulated drift matters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(Mat3);

impl Rotation {
    pub fn identity() -> Self {
        Rotation(Mat3::identity())
    }

    /// Validating constructor.
    pub fn from_matrix(m: Mat3) -> Result<Self, LieError> {
        let err = orthonormality_error(&m);
        if err > 1e-9 || m.determinant() < 0.0 {
            return Err(LieError::NotRotation(err));
        }
        Ok(Rotation(m))
    }

    /// Wrap a matrix that is known to be a rotation by construction.
    pub fn from_matrix_unchecked(m: Mat3) -> Self {
        Rotation(m)
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn transpose(&self) -> Rotation {
        Rotation(self.0.transpose())
    }

    /// max-norm of R'R - I.
    pub fn orthonormality_error(&self) -> f64 {
        orthonormality_error(&self.0)
    }

    /// Polar projection onto SO(3) via SVD. Returns the drift that was
    /// removed so callers can log it; never changes the rotation by more
    /// than the drift itself.
    pub fn renormalize(&mut self) -> f64 {
        let drift = self.orthonormality_error();
        let svd = self.0.svd(true, true);
        let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
        let mut r = u * vt;
        // A proper rotation is the nearest orthogonal matrix with det +1;
        // for the small drifts encountered here det(u vt) is always +1.
        if r.determinant() < 0.0 {
            let mut u_flip = u;
            u_flip.column_mut(2).neg_mut();
            r = u_flip * vt;
        }
        self.0 = r;
        drift
    }
}

impl std::ops::Mul for Rotation {
    type Output = Rotation;
    fn mul(self, rhs: Rotation) -> Rotation {
        Rotation(self.0 * rhs.0)
    }
}

impl std::ops::Mul<Vec3> for Rotation {
    type Output = Vec3;
    fn mul(self, rhs: Vec3) -> Vec3 {
        self.0 * rhs
    }
}

fn orthonormality_error(m: &Mat3) -> f64 {
    (m.transpose() * m - Mat3::identity()).amax()
}

/// Trig coefficients of the Rodrigues formula and the SE(3) left Jacobian,
/// with 4th-order series below [`SMALL_ANGLE`]:
/// a = sin(t)/t, b = (1-cos(t))/t^2, c = (t-sin(t))/t^3.
pub(super) fn rodrigues_coefficients(theta: f64) -> (f64, f64, f64) {
    if theta < SMALL_ANGLE {
        let t2 = theta * theta;
        let t4 = t2 * t2;
        (
            1.0 - t2 / 6.0 + t4 / 120.0,
            0.5 - t2 / 24.0 + t4 / 720.0,
            1.0 / 6.0 - t2 / 120.0 + t4 / 5040.0,
        )
    } else {
        let s = theta.sin();
        let c = theta.cos();
        let t2 = theta * theta;
        (s / theta, (1.0 - c) / t2, (theta - s) / (t2 * theta))
    }
}

/// Rodrigues exponential: exp(hat3(omega)).
pub fn exp_so3(omega: &Vec3) -> Rotation {
    let theta = omega.norm();
    let (a, b, _) = rodrigues_coefficients(theta);
    let w = hat3(omega);
    Rotation(Mat3::identity() + w * a + w * w * b)
}

/// Principal-branch logarithm. Errors when the rotation angle is within
/// [`BRANCH_MARGIN`] of pi, where the axis sign is ambiguous.
pub fn log_so3(r: &Rotation) -> Result<Vec3, LieError> {
    let m = r.matrix();
    // 2 sin(theta) * axis, robustly paired with cos(theta) from the trace.
    let raw = Vec3::new(
        m[(2, 1)] - m[(1, 2)],
        m[(0, 2)] - m[(2, 0)],
        m[(1, 0)] - m[(0, 1)],
    );
    let sin_theta = 0.5 * raw.norm();
    let cos_theta = 0.5 * (m.trace() - 1.0);
    let theta = sin_theta.atan2(cos_theta);
    if theta > std::f64::consts::PI - BRANCH_MARGIN {
        return Err(LieError::BranchAmbiguity(theta));
    }
    let scale = if theta < SMALL_ANGLE {
        // theta / (2 sin(theta)) expanded to 4th order.
        let t2 = theta * theta;
        0.5 * (1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0)
    } else {
        0.5 * theta / sin_theta
    };
    Ok(raw * scale)
}
