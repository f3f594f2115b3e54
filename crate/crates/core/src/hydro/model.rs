//! Force assembly and the continuous-time equations of motion.

use super::params::{ParamsError, VesselParams};
use super::{reorder, reorder_matrix, CurrentField, FossenState};
use crate::lie::{euler_kinematics, euler_to_pose, hat3, LieError};
use crate::{Mat6, Vec3, Vec6};

/// Coriolis/centripetal matrix derived from a symmetric inertia matrix and
/// a velocity, with the listed entries zeroed afterwards. Fossen ordering.
/// Skew-symmetric whenever the mask is symmetric as a set.
pub fn coriolis(m: &Mat6, nu: &Vec6, mask: &[(usize, usize)]) -> Mat6 {
    let v: Vec3 = nu.fixed_rows::<3>(0).into();
    let w: Vec3 = nu.fixed_rows::<3>(3).into();
    let a = m.fixed_view::<3, 3>(0, 0) * v + m.fixed_view::<3, 3>(0, 3) * w;
    let b = m.fixed_view::<3, 3>(3, 0) * v + m.fixed_view::<3, 3>(3, 3) * w;
    let sa = hat3(&a);
    let sb = hat3(&b);
    let mut c = Mat6::zeros();
    c.fixed_view_mut::<3, 3>(0, 3).copy_from(&(-sa));
    c.fixed_view_mut::<3, 3>(3, 0).copy_from(&(-sa));
    c.fixed_view_mut::<3, 3>(3, 3).copy_from(&(-sb));
    for &(r, col) in mask {
        c[(r, col)] = 0.0;
    }
    c
}

/// Diagonal damping matrix from SNAME-signed derivatives (each <= 0):
/// D_ii = -lin_i - quad_i |nu_i|. Positive semidefinite by the sign
/// convention.
pub fn damping(lin: &Vec6, quad: &Vec6, nu: &Vec6) -> Mat6 {
    Mat6::from_diagonal(&Vec6::from_fn(|i, _| -lin[i] - quad[i] * nu[i].abs()))
}

/// Vessel dynamics with cached inertia inverses in both orderings.
///
/// The hydrodynamic terms act on the relative velocity nu_r = nu - nu_c:
///
/// ```text
/// M nu_r_dot = tau - C(nu_r) nu_r - D(nu_r) nu_r - g(eta)
/// eta_dot    = J(eta) nu
/// ```
///
/// and the body-frame current obeys nu_c_dot = [-omega x nu_c_lin; 0] for a
/// constant irrotational NED current.
#[derive(Clone, Debug)]
pub struct HydroModel {
    params: VesselParams,
    m_rb: Mat6,
    mass_fossen: Mat6,
    mass_fossen_inv: Mat6,
    mass_lie: Mat6,
    mass_lie_inv: Mat6,
    damping_linear_lie: Vec6,
    damping_quadratic_lie: Vec6,
}

impl HydroModel {
    pub fn new(params: VesselParams) -> Result<Self, ParamsError> {
        params.validate()?;
        let m_rb = params.rigid_body_mass();
        let mass_fossen = params.mass_matrix();
        let mass_fossen_inv = mass_fossen
            .try_inverse()
            .ok_or_else(|| ParamsError::Invalid {
                key: "added_mass",
                reason: "total mass matrix is numerically singular".into(),
            })?;
        let mass_lie = reorder_matrix(&mass_fossen);
        let mass_lie_inv = reorder_matrix(&mass_fossen_inv);
        let damping_linear_lie = reorder(&params.damping_linear);
        let damping_quadratic_lie = reorder(&params.damping_quadratic);
        Ok(HydroModel {
            params,
            m_rb,
            mass_fossen,
            mass_fossen_inv,
            mass_lie,
            mass_lie_inv,
            damping_linear_lie,
            damping_quadratic_lie,
        })
    }

    pub fn params(&self) -> &VesselParams {
        &self.params
    }

    pub fn mass_fossen(&self) -> &Mat6 {
        &self.mass_fossen
    }

    pub fn mass_fossen_inv(&self) -> &Mat6 {
        &self.mass_fossen_inv
    }

    pub fn mass_lie(&self) -> &Mat6 {
        &self.mass_lie
    }

    pub fn mass_lie_inv(&self) -> &Mat6 {
        &self.mass_lie_inv
    }

    /// Total Coriolis matrix: rigid-body part plus masked added-mass part.
    pub fn coriolis_fossen(&self, nu_r: &Vec6) -> Mat6 {
        coriolis(&self.m_rb, nu_r, &[])
            + coriolis(&self.params.added_mass, nu_r, &self.params.coriolis_am_mask)
    }

    pub fn coriolis_lie(&self, xi_r: &Vec6) -> Mat6 {
        reorder_matrix(&self.coriolis_fossen(&reorder(xi_r)))
    }

    pub fn damping_fossen(&self, nu_r: &Vec6) -> Mat6 {
        damping(
            &self.params.damping_linear,
            &self.params.damping_quadratic,
            nu_r,
        )
    }

    pub fn damping_lie(&self, xi_r: &Vec6) -> Mat6 {
        damping(
            &self.damping_linear_lie,
            &self.damping_quadratic_lie,
            xi_r,
        )
    }

    /// Hydrostatic restoring force, linear in the heave/roll/pitch
    /// displacement.
    pub fn restoring_fossen(&self, eta: &Vec6) -> Vec6 {
        let disp = Vec6::new(0.0, 0.0, eta[2], eta[3], eta[4], 0.0);
        self.params.restoring * disp
    }

    /// Relative acceleration nu_r_dot = M^-1 (tau - C nu_r - D nu_r - g).
    pub fn relative_acceleration(&self, eta: &Vec6, nu_r: &Vec6, tau: &Vec6) -> Vec6 {
        let force = tau
            - self.coriolis_fossen(nu_r) * nu_r
            - self.damping_fossen(nu_r) * nu_r
            - self.restoring_fossen(eta);
        self.mass_fossen_inv * force
    }

    /// Time derivative of (eta, nu_r); the coordinates the plant integrator
    /// uses, because the nu_r flow is unchanged by a horizontal current.
    /// `tau` is a Fossen-ordered body wrench.
    pub fn relative_derivative(
        &self,
        eta: &Vec6,
        nu_r: &Vec6,
        current: &CurrentField,
        tau: &Vec6,
    ) -> Result<(Vec6, Vec6), LieError> {
        let j = euler_kinematics(eta)?;
        // J maps the body-frame current straight back to v_ned, so the
        // current enters eta_dot as a world-frame constant. Adding it after
        // the frame map keeps z_dot and the angle rates bitwise independent
        // of a horizontal current.
        let mut eta_dot = j * nu_r;
        eta_dot[0] += current.v_ned[0];
        eta_dot[1] += current.v_ned[1];
        eta_dot[2] += current.v_ned[2];
        Ok((eta_dot, self.relative_acceleration(eta, nu_r, tau)))
    }

    /// Time derivative of the Fossen state (eta, nu). The reported nu_dot
    /// includes the rotating-frame rate of the body-frame current, so this
    /// is the same ODE as [`Self::relative_derivative`] in absolute
    /// coordinates.
    pub fn continuous_dynamics(
        &self,
        state: &FossenState,
        current: &CurrentField,
        tau: &Vec6,
    ) -> Result<(Vec6, Vec6), LieError> {
        let rot = euler_to_pose(&state.eta).rotation;
        let nu_c = current.body_velocity(&rot);
        let nu_r = state.nu - nu_c;
        let (eta_dot, nu_r_dot) = self.relative_derivative(&state.eta, &nu_r, current, tau)?;
        let omega: Vec3 = state.nu.fixed_rows::<3>(3).into();
        let mut nu_c_dot = Vec6::zeros();
        nu_c_dot
            .fixed_rows_mut::<3>(0)
            .copy_from(&(-omega.cross(&Vec3::from(nu_c.fixed_rows::<3>(0)))));
        Ok((eta_dot, nu_r_dot + nu_c_dot))
    }

    /// d(C(nu) nu_bar)/d nu. Exact because the Coriolis matrix is linear in
    /// its velocity argument; built columnwise so the mask is honored.
    pub fn coriolis_jacobian_fossen(&self, nu_bar: &Vec6) -> Mat6 {
        let mut jac = Mat6::zeros();
        for l in 0..6 {
            let mut basis = Vec6::zeros();
            basis[l] = 1.0;
            jac.set_column(l, &(self.coriolis_fossen(&basis) * nu_bar));
        }
        jac
    }

    pub fn coriolis_jacobian_lie(&self, xi_bar: &Vec6) -> Mat6 {
        reorder_matrix(&self.coriolis_jacobian_fossen(&reorder(xi_bar)))
    }

    /// d(D(nu) nu_bar)/d nu evaluated at nu = nu_bar: the diagonal of
    /// -quad_i |nu_bar_i|, with subgradient 0 at nu_bar_i = 0.
    pub fn damping_jacobian_fossen(&self, nu_bar: &Vec6) -> Mat6 {
        Mat6::from_diagonal(&Vec6::from_fn(|i, _| {
            -self.params.damping_quadratic[i] * nu_bar[i].abs()
        }))
    }

    pub fn damping_jacobian_lie(&self, xi_bar: &Vec6) -> Mat6 {
        Mat6::from_diagonal(&Vec6::from_fn(|i, _| {
            -self.damping_quadratic_lie[i] * xi_bar[i].abs()
        }))
    }
}
