//! Geometric trajectory tracking for small marine vehicles.
//!
//! The crate is a stack of layers, lowest first:
//!
//! - [`lie`]: SO(3)/SE(3) primitives: hat/vee maps, exponential and
//!   logarithm, adjoints, left-invariant error, Euler-angle conversions.
//! - [`hydro`]: vessel parameters loaded from TOML and the 6-DOF
//!   rigid-body/hydrodynamic model (mass assembly, Coriolis, damping,
//!   restoring, ocean current, thrust allocation) plus the analytic
//!   Jacobians the controllers linearize with.
//! - [`qp`]: solvers for time-varying linear-quadratic tracking problems
//!   with affine dynamics offsets: a Riccati backward recursion for the
//!   unconstrained case and ADMM for box-constrained inputs, with exact
//!   KKT residual diagnostics.
//! - [`mpc`]: the convex error-state tracking controller. Errors live in
//!   the Lie algebra of SE(3); per-stage linearization about the reference
//!   twist keeps the problem convex at any attitude error.
//! - [`nmpc`]: a sequential-quadratic-programming baseline in Euler
//!   coordinates, with and without restoring forces in its model.
//! - [`sim`]: reference generation, RK4 plant integration, episode and
//!   Monte Carlo execution, current sweeps, metrics, CSV/JSON output.
//! - [`validate`]: runnable invariant suites (geometry axioms, Jacobian
//!   finite-difference checks, solver cross-checks, dissipation) used by
//!   the CLI's `validate` subcommand.
//!
//! Conventions: NED world frame, body frame fixed at the vessel origin.
//! Fossen ordering stacks linear before angular velocity, nu = [u v w p q r];
//! Lie ordering stacks angular before linear, xi = [omega; v]. The two are
//! related by swapping halves, see [`hydro::reorder`]. All units SI.

pub mod controller;
pub mod hydro;
pub mod lie;
pub mod mpc;
pub mod nmpc;
pub mod qp;
pub mod sim;
pub mod validate;

#[cfg(test)]
pub(crate) mod testutil;

/// Column 3-vector of f64.
pub type Vec3 = nalgebra::Vector3<f64>;
/// Column 6-vector of f64.
pub type Vec6 = nalgebra::Vector6<f64>;
/// Column 12-vector of f64.
pub type Vec12 = nalgebra::SVector<f64, 12>;
/// 3x3 matrix of f64.
pub type Mat3 = nalgebra::Matrix3<f64>;
/// 4x4 matrix of f64.
pub type Mat4 = nalgebra::Matrix4<f64>;
/// 6x6 matrix of f64.
pub type Mat6 = nalgebra::Matrix6<f64>;
/// 12x12 matrix of f64.
pub type Mat12 = nalgebra::SMatrix<f64, 12, 12>;
