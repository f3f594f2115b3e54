//! Vessel parameter file: schema, loading, and physical validation.

use crate::lie::hat3;
use crate::{Mat3, Mat6, Vec3, Vec6};
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum ParamsError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    /// Carries the toml parser's message, which includes line/column.
    #[error("parameter file syntax: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("parameter `{key}` invalid: {reason}")]
    Invalid { key: &'static str, reason: String },
}

fn invalid(key: &'static str, reason: impl Into<String>) -> ParamsError {
    ParamsError::Invalid {
        key,
        reason: reason.into(),
    }
}

/// On-disk schema. Matrices are row-major; damping derivatives carry SNAME
/// signs (non-positive); everything SI.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    mass: f64,
    cog: [f64; 3],
    inertia: [[f64; 3]; 3],
    added_mass: [[f64; 6]; 6],
    damping_linear: [f64; 6],
    damping_quadratic: [f64; 6],
    restoring: [[f64; 6]; 6],
    lever_arm: f64,
    thrust_coeff_pos: f64,
    thrust_coeff_neg: f64,
    thrust_limits: [f64; 2],
    coriolis_am_mask: Vec<[usize; 2]>,
}

/// Validated vessel description. All matrices and vectors are in Fossen
/// ordering (linear quantities first).
#[derive(Clone, Debug, PartialEq)]
pub struct VesselParams {
    /// Total mass (kg).
    pub mass: f64,
    /// Center of gravity in body coordinates (m).
    pub cog: Vec3,
    /// Inertia tensor about the body origin (kg m^2).
    pub inertia: Mat3,
    /// Added inertia matrix (kg, kg m^2), positive semidefinite.
    pub added_mass: Mat6,
    /// Diagonal linear damping derivatives, SNAME signs, each <= 0.
    pub damping_linear: Vec6,
    /// Diagonal quadratic damping derivatives, SNAME signs, each <= 0.
    pub damping_quadratic: Vec6,
    /// Linear restoring stiffness acting on [0, 0, z, roll, pitch, 0].
    pub restoring: Mat6,
    /// Thruster lateral lever arm (m); port thrust yields +yaw moment.
    pub lever_arm: f64,
    /// Propeller force curve F = k n |n|, forward coefficient.
    pub thrust_coeff_pos: f64,
    /// Same, reverse coefficient.
    pub thrust_coeff_neg: f64,
    /// Per-propeller force range [min, max] (N), min < 0 < max.
    pub thrust_limits: [f64; 2],
    /// Added-mass Coriolis entries the model zeroes, (row, col) 0-based in
    /// Fossen ordering. Must be symmetric as a set so the masked matrix
    /// stays skew-symmetric.
    pub coriolis_am_mask: Vec<(usize, usize)>,
}

impl VesselParams {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ParamsError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ParamsError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ParamsError> {
        let raw: RawParams = toml::from_str(text)?;
        let params = VesselParams {
            mass: raw.mass,
            cog: Vec3::from_row_slice(&raw.cog),
            inertia: mat3_from_rows(&raw.inertia),
            added_mass: mat6_from_rows(&raw.added_mass),
            damping_linear: Vec6::from_row_slice(&raw.damping_linear),
            damping_quadratic: Vec6::from_row_slice(&raw.damping_quadratic),
            restoring: mat6_from_rows(&raw.restoring),
            lever_arm: raw.lever_arm,
            thrust_coeff_pos: raw.thrust_coeff_pos,
            thrust_coeff_neg: raw.thrust_coeff_neg,
            thrust_limits: raw.thrust_limits,
            coriolis_am_mask: raw.coriolis_am_mask.iter().map(|&[r, c]| (r, c)).collect(),
        };
        params.validate()?;
        Ok(params)
    }

    /// Physical consistency checks; every loaded file passes through here.
    pub fn validate(&self) -> Result<(), ParamsError> {
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return Err(invalid("mass", format!("must be positive, got {}", self.mass)));
        }
        check_symmetric("inertia", &self.inertia)?;
        check_symmetric("added_mass", &self.added_mass)?;
        check_symmetric("restoring", &self.restoring)?;

        for (key, v) in [
            ("damping_linear", &self.damping_linear),
            ("damping_quadratic", &self.damping_quadratic),
        ] {
            if let Some((i, &c)) = v.iter().enumerate().find(|(_, c)| !(**c <= 0.0)) {
                return Err(invalid(
                    key,
                    format!("derivative {i} = {c} violates the non-positive sign convention"),
                ));
            }
        }

        let m = self.mass_matrix();
        if (m - m.transpose()).norm() > 1e-9 * m.norm() {
            return Err(invalid("added_mass", "total mass matrix is not symmetric"));
        }
        if m.symmetric_eigenvalues().min() <= 0.0 {
            return Err(invalid(
                "added_mass",
                "total mass matrix (rigid body + added) is not positive definite",
            ));
        }

        let g_disp = self.restoring.fixed_view::<3, 3>(2, 2).into_owned();
        if g_disp.symmetric_eigenvalues().min() < -1e-9 {
            return Err(invalid(
                "restoring",
                "heave/roll/pitch stiffness block must be positive semidefinite",
            ));
        }

        if !(self.lever_arm > 0.0) {
            return Err(invalid("lever_arm", "must be positive"));
        }
        if !(self.thrust_coeff_pos > 0.0) {
            return Err(invalid("thrust_coeff_pos", "must be positive"));
        }
        if !(self.thrust_coeff_neg > 0.0) {
            return Err(invalid("thrust_coeff_neg", "must be positive"));
        }
        let [lo, hi] = self.thrust_limits;
        if !(lo < 0.0 && hi > 0.0) {
            return Err(invalid(
                "thrust_limits",
                format!("need min < 0 < max, got [{lo}, {hi}]"),
            ));
        }

        for &(r, c) in &self.coriolis_am_mask {
            if r >= 6 || c >= 6 {
                return Err(invalid(
                    "coriolis_am_mask",
                    format!("index ({r}, {c}) out of range"),
                ));
            }
            if !self.coriolis_am_mask.contains(&(c, r)) {
                return Err(invalid(
                    "coriolis_am_mask",
                    format!(
                        "entry ({r}, {c}) has no mirror ({c}, {r}); an asymmetric mask \
                         would break the skew-symmetry of the Coriolis matrix"
                    ),
                ));
            }
        }
        Ok(())
    }

    /// Rigid-body inertia matrix assembled from mass, center of gravity,
    /// and the inertia tensor about the body origin.
    pub fn rigid_body_mass(&self) -> Mat6 {
        rigid_body_mass(self.mass, &self.cog, &self.inertia)
    }

    /// Total inertia: rigid body plus added mass.
    pub fn mass_matrix(&self) -> Mat6 {
        self.rigid_body_mass() + self.added_mass
    }
}

/// The standard block form: [[m I, -m S(cog)], [m S(cog), I_o]] with I_o
/// the inertia tensor about the body origin.
pub fn rigid_body_mass(mass: f64, cog: &Vec3, inertia: &Mat3) -> Mat6 {
    let s = hat3(cog);
    let mut out = Mat6::zeros();
    out.fixed_view_mut::<3, 3>(0, 0)
        .copy_from(&(Mat3::identity() * mass));
    out.fixed_view_mut::<3, 3>(0, 3).copy_from(&(-s * mass));
    out.fixed_view_mut::<3, 3>(3, 0).copy_from(&(s * mass));
    out.fixed_view_mut::<3, 3>(3, 3).copy_from(inertia);
    out
}

fn mat3_from_rows(rows: &[[f64; 3]; 3]) -> Mat3 {
    Mat3::from_fn(|r, c| rows[r][c])
}

fn mat6_from_rows(rows: &[[f64; 6]; 6]) -> Mat6 {
    Mat6::from_fn(|r, c| rows[r][c])
}

fn check_symmetric<const N: usize>(
    key: &'static str,
    m: &nalgebra::SMatrix<f64, N, N>,
) -> Result<(), ParamsError> {
    let scale = m.norm().max(1.0);
    if (m - m.transpose()).norm() > 1e-9 * scale {
        return Err(invalid(key, "matrix is not symmetric"));
    }
    Ok(())
}
