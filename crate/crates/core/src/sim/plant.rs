//! Plant integration. The state is (eta, nu_r): generalized position and
//! flow-relative body velocity. Integrating nu_r keeps every hydrodynamic
//! term independent of the ambient current, which then enters only as a
//! constant position drift.

use crate::hydro::{CurrentField, HydroModel};
use crate::lie::LieError;
use crate::Vec6;

/// One classical Runge-Kutta step of the relative-velocity dynamics under
/// a constant body wrench `tau` (Fossen ordering).
pub fn rk4_step(
    model: &HydroModel,
    eta: &Vec6,
    nu_r: &Vec6,
    current: &CurrentField,
    tau: &Vec6,
    dt: f64,
) -> Result<(Vec6, Vec6), LieError> {
    let f = |eta: &Vec6, nu_r: &Vec6| model.relative_derivative(eta, nu_r, current, tau);
    let (k1e, k1n) = f(eta, nu_r)?;
    let (k2e, k2n) = f(&(eta + 0.5 * dt * k1e), &(nu_r + 0.5 * dt * k1n))?;
    let (k3e, k3n) = f(&(eta + 0.5 * dt * k2e), &(nu_r + 0.5 * dt * k2n))?;
    let (k4e, k4n) = f(&(eta + dt * k3e), &(nu_r + dt * k3n))?;
    Ok((
        eta + dt / 6.0 * (k1e + 2.0 * k2e + 2.0 * k3e + k4e),
        nu_r + dt / 6.0 * (k1n + 2.0 * k2n + 2.0 * k3n + k4n),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hydro::reorder;
    use crate::testutil::{loglog_slope, otter_model};
    use crate::Vec3;

    fn rich_state() -> (Vec6, Vec6) {
        (
            Vec6::new(1.0, -0.5, 0.02, 0.03, -0.02, 0.6),
            Vec6::new(0.6, 0.15, -0.01, 0.02, -0.01, 0.12),
        )
    }

    fn integrate(
        model: &HydroModel,
        mut eta: Vec6,
        mut nu_r: Vec6,
        current: &CurrentField,
        tau: &Vec6,
        dt: f64,
        steps: usize,
    ) -> (Vec6, Vec6) {
        for _ in 0..steps {
            (eta, nu_r) = rk4_step(model, &eta, &nu_r, current, tau, dt).unwrap();
        }
        (eta, nu_r)
    }

    #[test]
    fn step_error_is_fourth_order() {
        let model = otter_model();
        let (eta0, nu0) = rich_state();
        let current = CurrentField::zero();
        let tau = Vec6::new(30.0, 0.0, 0.0, 0.0, 0.0, 3.0);
        let horizon = 1.0;
        let reference = integrate(&model, eta0, nu0, &current, &tau, horizon / 4096.0, 4096);
        let counts = [16usize, 32, 64, 128];
        let dts: Vec<f64> = counts.iter().map(|n| horizon / *n as f64).collect();
        let errs: Vec<f64> = counts
            .iter()
            .map(|n| {
                let (eta, nu) = integrate(&model, eta0, nu0, &current, &tau, horizon / *n as f64, *n);
                ((eta - reference.0).norm_squared() + (nu - reference.1).norm_squared()).sqrt()
            })
            .collect();
        let slope = loglog_slope(&dts, &errs);
        assert!((slope - 4.0).abs() < 0.3, "slope {slope}");
    }

    #[test]
    fn unforced_decay_never_gains_energy() {
        // Kinetic plus hydrostatic energy; damping dissipates and the
        // restoring terms only exchange, so the total must fall.
        let model = otter_model();
        let g_rest = model.params().restoring;
        let mut eta = Vec6::zeros();
        let mut nu = Vec6::new(0.8, 0.3, 0.05, 0.05, 0.05, 0.3);
        let energy = |eta: &Vec6, nu: &Vec6| {
            let mut disp = Vec6::zeros();
            disp[2] = eta[2];
            disp[3] = eta[3];
            disp[4] = eta[4];
            0.5 * (nu.transpose() * model.mass_fossen() * nu)[0]
                + 0.5 * (disp.transpose() * g_rest * disp)[0]
        };
        let current = CurrentField::zero();
        let tau = Vec6::zeros();
        let mut prev = energy(&eta, &nu);
        let e0 = prev;
        for _ in 0..1600 {
            (eta, nu) = rk4_step(&model, &eta, &nu, &current, &tau, 0.0125).unwrap();
            let e = energy(&eta, &nu);
            assert!(e <= prev + 1e-9 * e0, "energy rose: {prev} -> {e}");
            prev = e;
        }
        assert!(prev < 0.2 * e0, "decay too slow: {prev} of {e0}");
    }

    #[test]
    fn horizontal_current_only_drifts_the_position() {
        // With the same relative initial velocity, a horizontal current
        // leaves depth, attitude, and relative velocity bitwise unchanged
        // and moves the horizontal track by exactly the drift.
        let model = otter_model();
        let (eta0, nu_r0) = rich_state();
        let still = CurrentField::zero();
        let moving = CurrentField::from_speed_angle(0.35, 2.1);
        let dt = 0.0125;
        let mut a = (eta0, nu_r0);
        let mut b = (eta0, nu_r0);
        for k in 1..=800usize {
            let t = k as f64 * dt;
            // Open-loop wrench with some differential content.
            let tau = reorder(&crate::hydro::thrust_wrench_lie(
                model.params().lever_arm,
                &[20.0 + 5.0 * (0.5 * t).sin(), 20.0 - 5.0 * (0.5 * t).sin()],
            ));
            a = rk4_step(&model, &a.0, &a.1, &still, &tau, dt).unwrap();
            b = rk4_step(&model, &b.0, &b.1, &moving, &tau, dt).unwrap();
            assert_eq!(a.1, b.1);
            assert_eq!(a.0[2], b.0[2]);
            assert_eq!(Vec3::new(a.0[3], a.0[4], a.0[5]), Vec3::new(b.0[3], b.0[4], b.0[5]));
            let drift_x = b.0[0] - a.0[0];
            let drift_y = b.0[1] - a.0[1];
            assert!((drift_x - moving.v_ned[0] * t).abs() < 1e-9, "x drift at t={t}");
            assert!((drift_y - moving.v_ned[1] * t).abs() < 1e-9, "y drift at t={t}");
        }
    }
}
