//! SO(3)/SE(3) primitives used by every layer above.
//!
//! Twists use Lie ordering, xi = [omega; v] with the angular block first, so
//! that hat6 produces the usual homogeneous form
//!
//! ```text
//! hat6(xi) = [ hat3(omega)  v ]
//!            [ 0            0 ]
//! ```
//!
//! Rotation logarithms are restricted to the principal branch: angles within
//! 1e-6 of pi are rejected rather than silently picking a sign.

mod euler;
mod se3;
mod so3;

pub use euler::{euler_kinematics, euler_kinematics_jacobian, euler_to_pose, pose_to_euler};
pub use se3::{exp_se3, left_error, log_se3, LeftError, Pose};
pub use so3::{exp_so3, log_so3, Rotation};

use crate::{Mat3, Mat4, Mat6, Vec3, Vec6};
use thiserror::Error;

/// Angle threshold below which exp/log switch to their truncated series.
pub(crate) const SMALL_ANGLE: f64 = 1e-5;
/// Margin around pi inside which the rotation logarithm is refused.
pub(crate) const BRANCH_MARGIN: f64 = 1e-6;
/// Pitch margin around +-pi/2 inside which Euler conversions are refused.
pub(crate) const GIMBAL_MARGIN: f64 = 1e-6;

/// Failures of the geometric primitives.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LieError {
    /// vee3 input had a symmetric part above tolerance.
    #[error("matrix is not skew-symmetric (relative symmetric part {0:.3e})")]
    NotSkewSymmetric(f64),
    /// vee6 input had a nonzero bottom row or a non-skew rotation block.
    #[error("matrix is not in se(3) form (violation {0:.3e})")]
    NotSe3(f64),
    /// Rotation matrix failed the orthonormality check.
    #[error("matrix is not a rotation (orthonormality error {0:.3e})")]
    NotRotation(f64),
    /// Rotation angle within [`BRANCH_MARGIN`] of pi: log branch is ambiguous.
    #[error("rotation angle {0:.9} rad is within 1e-6 of pi; logarithm branch is ambiguous")]
    BranchAmbiguity(f64),
    /// Pitch within [`GIMBAL_MARGIN`] of +-pi/2: Euler kinematics are singular.
    #[error("pitch {0:.9} rad is within 1e-6 of +-pi/2 (gimbal lock)")]
    GimbalLock(f64),
}

/// Body twist in Lie ordering: angular velocity stacked over linear velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Twist(pub Vec6);

impl Twist {
    pub fn new(angular: Vec3, linear: Vec3) -> Self {
        Twist(Vec6::new(
            angular.x, angular.y, angular.z, linear.x, linear.y, linear.z,
        ))
    }

    pub fn zero() -> Self {
        Twist(Vec6::zeros())
    }

    pub fn angular(&self) -> Vec3 {
        self.0.fixed_rows::<3>(0).into()
    }

    pub fn linear(&self) -> Vec3 {
        self.0.fixed_rows::<3>(3).into()
    }

    /// Reinterpret a Fossen-ordered velocity [v; omega] as a twist [omega; v].
    pub fn from_fossen(nu: &Vec6) -> Self {
        Twist(swap_halves(nu))
    }

    /// The Fossen-ordered velocity [v; omega] of this twist.
    pub fn to_fossen(&self) -> Vec6 {
        swap_halves(&self.0)
    }

    pub fn as_vector(&self) -> &Vec6 {
        &self.0
    }
}

/// Swap the upper and lower 3-blocks of a 6-vector. Involutive; converts
/// between Fossen ordering [v; omega] and Lie ordering [omega; v].
pub(crate) fn swap_halves(v: &Vec6) -> Vec6 {
    Vec6::new(v[3], v[4], v[5], v[0], v[1], v[2])
}

/// Congruence of [`swap_halves`] on a 6x6 matrix: swaps both block rows and
/// block columns. Involutive.
pub(crate) fn swap_halves_matrix(m: &Mat6) -> Mat6 {
    let mut out = Mat6::zeros();
    for i in 0..6 {
        for j in 0..6 {
            out[((i + 3) % 6, (j + 3) % 6)] = m[(i, j)];
        }
    }
    out
}

/// Skew-symmetric matrix of a 3-vector: hat3(a) b = a x b.
pub fn hat3(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Inverse of [`hat3`]. Rejects matrices whose symmetric part exceeds 1e-9
/// relative to the matrix magnitude.
pub fn vee3(m: &Mat3) -> Result<Vec3, LieError> {
    let scale = m.amax().max(1.0);
    let sym = 0.5 * (m + m.transpose());
    let violation = sym.amax() / scale;
    if violation > 1e-9 {
        return Err(LieError::NotSkewSymmetric(violation));
    }
    Ok(Vec3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)]))
}

/// Homogeneous se(3) matrix of a twist.
pub fn hat6(xi: &Twist) -> Mat4 {
    let w = hat3(&xi.angular());
    let v = xi.linear();
    let mut out = Mat4::zeros();
    out.fixed_view_mut::<3, 3>(0, 0).copy_from(&w);
    out.fixed_view_mut::<3, 1>(0, 3).copy_from(&v);
    out
}

/// Inverse of [`hat6`]. Rejects matrices with a nonzero bottom row or a
/// non-skew rotation block.
pub fn vee6(m: &Mat4) -> Result<Twist, LieError> {
    let scale = m.amax().max(1.0);
    let bottom = m
        .row(3)
        .iter()
        .fold(0.0f64, |acc, x| acc.max(x.abs()));
    if bottom / scale > 1e-9 {
        return Err(LieError::NotSe3(bottom / scale));
    }
    let block: Mat3 = m.fixed_view::<3, 3>(0, 0).into();
    let omega = vee3(&block).map_err(|_| {
        let sym = 0.5 * (block + block.transpose());
        LieError::NotSe3(sym.amax() / scale)
    })?;
    let v: Vec3 = m.fixed_view::<3, 1>(0, 3).into();
    Ok(Twist::new(omega, v))
}

/// Little adjoint ad_xi of a twist, in Lie ordering:
///
/// ```text
/// ad_xi = [ hat3(omega)  0           ]
///         [ hat3(v)      hat3(omega) ]
/// ```
pub fn little_adjoint(xi: &Twist) -> Mat6 {
    let w = hat3(&xi.angular());
    let v = hat3(&xi.linear());
    let mut out = Mat6::zeros();
    out.fixed_view_mut::<3, 3>(0, 0).copy_from(&w);
    out.fixed_view_mut::<3, 3>(3, 0).copy_from(&v);
    out.fixed_view_mut::<3, 3>(3, 3).copy_from(&w);
    out
}

/// Adjoint of a pose, in Lie ordering:
///
/// ```text
/// Ad_X = [ R            0 ]
///        [ hat3(p) R    R ]
/// ```
///
/// satisfying Ad_X xi = vee6(X hat6(xi) X^-1).
pub fn adjoint(x: &Pose) -> Mat6 {
    let r = x.rotation.matrix();
    let pr = hat3(&x.position) * r;
    let mut out = Mat6::zeros();
    out.fixed_view_mut::<3, 3>(0, 0).copy_from(r);
    out.fixed_view_mut::<3, 3>(3, 0).copy_from(&pr);
    out.fixed_view_mut::<3, 3>(3, 3).copy_from(r);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{mat3_exp_series, random_pose, random_twist, seeded_rng};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn hat3_matches_component_layout() {
        let m = hat3(&Vec3::new(1.0, 2.0, 3.0));
        let expected = Mat3::new(0.0, -3.0, 2.0, 3.0, 0.0, -1.0, -2.0, 1.0, 0.0);
        assert_eq!(m, expected);
    }

    #[test]
    fn hat3_reproduces_cross_product() {
        let a = Vec3::new(0.3, -1.2, 2.0);
        let b = Vec3::new(-0.5, 0.1, 0.7);
        assert_abs_diff_eq!(hat3(&a) * b, a.cross(&b), epsilon = 1e-15);
    }

    #[test]
    fn vee3_rejects_symmetric_part() {
        let mut m = hat3(&Vec3::new(1.0, 2.0, 3.0));
        m[(0, 1)] += 1e-6;
        let err = vee3(&m).unwrap_err();
        assert!(matches!(err, LieError::NotSkewSymmetric(_)), "got {err:?}");
    }

    #[test]
    fn vee3_roundtrip() {
        let v = Vec3::new(-0.4, 1.9, 0.02);
        assert_eq!(vee3(&hat3(&v)).unwrap(), v);
    }

    #[test]
    fn hat6_matches_block_layout() {
        let xi = Twist(Vec6::new(0.0, 0.0, 1.0, 1.0, 0.0, 0.0));
        let m = hat6(&xi);
        let expected = Mat4::new(
            0.0, -1.0, 0.0, 1.0, //
            1.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 0.0,
        );
        assert_eq!(m, expected);
    }

    #[test]
    fn vee6_rejects_nonzero_bottom_row() {
        let mut m = hat6(&Twist::new(Vec3::new(0.1, 0.2, 0.3), Vec3::new(1.0, 2.0, 3.0)));
        m[(3, 0)] = 1e-6;
        assert!(matches!(vee6(&m), Err(LieError::NotSe3(_))));
    }

    #[test]
    fn adjoint_matches_conjugation() {
        // Oracle: the adjoint is conjugation by X in the homogeneous form.
        let mut rng = seeded_rng(11);
        for _ in 0..50 {
            let x = random_pose(&mut rng);
            let xi = random_twist(&mut rng, 2.0);
            let conj = x.matrix4() * hat6(&xi) * x.inverse().matrix4();
            let direct = adjoint(&x) * xi.as_vector();
            let via_conj = vee6(&conj).unwrap();
            assert_abs_diff_eq!(direct, *via_conj.as_vector(), epsilon = 1e-12);
        }
    }

    #[test]
    fn little_adjoint_is_adjoint_derivative() {
        // (Ad_{exp(h xi)} - I)/h -> ad_xi with O(h) error; check the
        // convergence rate on a halving sequence.
        let xi = Twist::new(Vec3::new(0.3, -0.2, 0.5), Vec3::new(1.0, 0.2, -0.7));
        let ad = little_adjoint(&xi);
        let mut prev_err = f64::INFINITY;
        for k in 0..4 {
            let h = 1e-2 / f64::powi(2.0, k);
            let scaled = Twist(xi.as_vector() * h);
            let fd = (adjoint(&exp_se3(&scaled)) - Mat6::identity()) / h;
            let err = (fd - ad).amax();
            assert!(err < 0.6 * prev_err, "error {err:.3e} not shrinking at h={h:.1e}");
            prev_err = err;
        }
        assert!(prev_err < 1e-3);
    }

    #[test]
    fn little_adjoint_is_minus_bracket_transpose_free() {
        // ad_xi eta = vee6([hat6(xi), hat6(eta)]) on random pairs.
        let mut rng = seeded_rng(12);
        for _ in 0..50 {
            let a = random_twist(&mut rng, 2.0);
            let b = random_twist(&mut rng, 2.0);
            let bracket = hat6(&a) * hat6(&b) - hat6(&b) * hat6(&a);
            let via_ad = little_adjoint(&a) * b.as_vector();
            assert_abs_diff_eq!(
                via_ad,
                *vee6(&bracket).unwrap().as_vector(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn swap_halves_is_involutive() {
        let v = Vec6::new(1.0, 2.0, 3.0, 4.0, 5.0, 6.0);
        let swapped = swap_halves(&v);
        assert_eq!(swapped, Vec6::new(4.0, 5.0, 6.0, 1.0, 2.0, 3.0));
        assert_eq!(swap_halves(&swapped), v);
    }

    #[test]
    fn adjoint_exp_agrees_with_series() {
        // Independent route: Ad_{exp(xi)} block equals the series expm of ad
        // restricted to the rotation part.
        let omega = Vec3::new(0.2, 0.1, -0.4);
        let r = mat3_exp_series(&hat3(&omega), 24);
        let x = exp_se3(&Twist::new(omega, Vec3::zeros()));
        assert_abs_diff_eq!(*x.rotation.matrix(), r, epsilon = 1e-14);
    }

    proptest! {
        #[test]
        fn prop_hat_vee_roundtrip(v in proptest::array::uniform6(-10.0f64..10.0)) {
            let xi = Twist(Vec6::from_column_slice(&v));
            let back = vee6(&hat6(&xi)).unwrap();
            prop_assert_eq!(back.as_vector(), xi.as_vector());
        }

        #[test]
        fn prop_swap_matrix_congruence(vals in proptest::array::uniform32(-5.0f64..5.0)) {
            // Quadratic forms are preserved: x' M x = swap(x)' swap(M) swap(x).
            let mut m = Mat6::zeros();
            for i in 0..6 {
                for j in 0..6 {
                    m[(i, j)] = vals[(i * 6 + j) % 32];
                }
            }
            let x = Vec6::new(vals[0], vals[5], vals[9], vals[14], vals[20], vals[31]);
            let q1 = (x.transpose() * m * x)[0];
            let sx = swap_halves(&x);
            let sm = swap_halves_matrix(&m);
            let q2 = (sx.transpose() * sm * sx)[0];
            prop_assert!((q1 - q2).abs() <= 1e-9 * q1.abs().max(1.0));
        }
    }
}
