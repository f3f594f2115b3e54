//! Runtime self-checks: seeded, deterministic diagnostics over the
//! geometry kernels, force Jacobians, trajectory solvers, and plant
//! energetics. The CLI exposes these so a build can be vetted on the
//! machine that will run it, without the test harness.

use crate::hydro::{thrust_matrix_lie, CurrentField, HydroModel};
use crate::lie::{adjoint, exp_se3, left_error, log_se3, Pose, Twist};
use crate::mpc::{build_stage, MpcWeights};
use crate::qp::{admm_solve, kkt_residual, riccati_solve, AdmmConfig, LqProblem};
use crate::sim::rk4_step;
use crate::{Vec12, Vec3, Vec6};
use nalgebra::Vector2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Measured value against its tolerance, human readable.
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct CheckReport {
    pub suite: String,
    pub seed: u64,
    pub results: Vec<CheckResult>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    /// One status line per check, grep friendly.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "suite {} (seed {})", self.suite, self.seed);
        for r in &self.results {
            let tag = if r.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "  [{tag}] {}/{}: {}", self.suite, r.name, r.detail);
        }
        out
    }
}

fn check(name: &str, value: f64, tolerance: f64) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        passed: value.is_finite() && value <= tolerance,
        detail: format!("max error {value:.3e} (tol {tolerance:.1e})"),
    }
}

fn random_twist(rng: &mut ChaCha8Rng, max_angle: f64) -> Twist {
    let axis = loop {
        let raw = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        if raw.norm() > 1e-3 {
            break raw.normalize();
        }
    };
    let angle = rng.gen_range(0.0..max_angle);
    let linear = Vec3::new(
        rng.gen_range(-2.0..2.0),
        rng.gen_range(-2.0..2.0),
        rng.gen_range(-2.0..2.0),
    );
    Twist::new(axis * angle, linear)
}

fn random_pose(rng: &mut ChaCha8Rng) -> Pose {
    let mut x = exp_se3(&random_twist(rng, 2.8));
    x.position = Vec3::new(
        rng.gen_range(-5.0..5.0),
        rng.gen_range(-5.0..5.0),
        rng.gen_range(-5.0..5.0),
    );
    x
}

/// Group and algebra identities on random rotations and rigid motions.
pub fn geometry_checks(seed: u64) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut roundtrip = 0.0f64;
    let mut adjoint_err = 0.0f64;
    let mut invariance = 0.0f64;
    for _ in 0..200 {
        let xi = random_twist(&mut rng, 2.8);
        let x = exp_se3(&xi);
        if let Ok(back) = log_se3(&x) {
            roundtrip = roundtrip.max((back.0 - xi.0).amax());
        }
        // Conjugation must match the adjoint action on the algebra.
        let g = random_pose(&mut rng);
        let small = Twist(xi.0 * 0.01);
        let lhs = g * exp_se3(&small) * g.inverse();
        let rhs = exp_se3(&Twist(adjoint(&g) * small.0));
        adjoint_err = adjoint_err.max((lhs.matrix4() - rhs.matrix4()).amax());
        // Left translation of both poses leaves the error untouched.
        let desired = random_pose(&mut rng);
        let actual = random_pose(&mut rng);
        if let (Ok(e), Ok(te)) = (
            left_error(&desired, &actual),
            left_error(&(g * desired), &(g * actual)),
        ) {
            invariance = invariance.max((e.log.0 - te.log.0).amax());
        }
    }
    CheckReport {
        suite: "geometry".into(),
        seed,
        results: vec![
            check("exp-log-roundtrip", roundtrip, 1e-8),
            check("adjoint-conjugation", adjoint_err, 1e-9),
            check("error-left-invariance", invariance, 1e-9),
        ],
    }
}

/// Analytic force Jacobians against central differences.
pub fn jacobian_checks(model: &HydroModel, seed: u64) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1e-6;
    let mut coriolis = 0.0f64;
    let mut damping = 0.0f64;
    for _ in 0..50 {
        let xi = Vec6::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        // Full derivative of xi -> C(xi) xi: the matrix evaluated at the
        // point plus the matrix-variation term, and likewise for damping.
        let jc = model.coriolis_lie(&xi) + model.coriolis_jacobian_lie(&xi);
        let jd = model.damping_lie(&xi) + model.damping_jacobian_lie(&xi);
        for col in 0..6 {
            let mut hi = xi;
            let mut lo = xi;
            hi[col] += h;
            lo[col] -= h;
            let fd_c = (model.coriolis_lie(&hi) * hi - model.coriolis_lie(&lo) * lo) / (2.0 * h);
            let fd_d = (model.damping_lie(&hi) * hi - model.damping_lie(&lo) * lo) / (2.0 * h);
            coriolis = coriolis.max((jc.column(col) - fd_c).amax());
            damping = damping.max((jd.column(col) - fd_d).amax());
        }
    }
    CheckReport {
        suite: "jacobians".into(),
        seed,
        results: vec![
            check("coriolis-vs-finite-difference", coriolis, 1e-5),
            check("damping-vs-finite-difference", damping, 1e-4),
        ],
    }
}

/// Random tracking problems: the structured solver must satisfy first-order
/// optimality, and the box solver must agree with it when bounds are slack.
pub fn solver_checks(model: &HydroModel, seed: u64) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = MpcWeights::default_tracking();
    let q = weights.output_weight_lie();
    let r = weights.input_weight();
    let thrust = thrust_matrix_lie(model.params().lever_arm);
    let dt = 0.05;
    let mut stationarity = 0.0f64;
    let mut dynamics = 0.0f64;
    let mut box_gap = 0.0f64;
    for _ in 0..10 {
        let n = rng.gen_range(5..=20);
        let mut stages = Vec::with_capacity(n);
        for _ in 0..n {
            let xi_k = Vec6::from_fn(|_, _| rng.gen_range(-0.4..0.4));
            let xi_k1 = Vec6::from_fn(|_, _| rng.gen_range(-0.4..0.4));
            stages.push(build_stage(model, &thrust, &xi_k, &xi_k1, dt));
        }
        let problem = LqProblem {
            stages,
            q,
            p_terminal: weights.terminal_scale * q,
            r,
            x0: Vec12::from_fn(|_, _| rng.gen_range(-0.5..0.5)),
            bounds: None,
        };
        let solution = riccati_solve(&problem).expect("well posed by construction");
        let residual = kkt_residual(&problem, &solution.inputs, &solution.states);
        stationarity = stationarity.max(residual.stationarity);
        dynamics = dynamics.max(residual.dynamics);

        let mut boxed = problem.clone();
        boxed.bounds = Some((Vector2::repeat(-1e7), Vector2::repeat(1e7)));
        // force_iterative so this actually runs the splitting iterations;
        // otherwise slack bounds short-circuit to the exact recursion and
        // the comparison is vacuous.
        let admm = admm_solve(
            &boxed,
            &AdmmConfig {
                eps_abs: 1e-9,
                eps_rel: 1e-9,
                force_iterative: true,
                ..AdmmConfig::default()
            },
            None,
        )
        .expect("well posed by construction");
        for (a, b) in admm.inputs.iter().zip(&solution.inputs) {
            box_gap = box_gap.max((a - b).amax());
        }
    }
    CheckReport {
        suite: "solvers".into(),
        seed,
        results: vec![
            check("stationarity-residual", stationarity, 1e-8),
            check("dynamics-residual", dynamics, 1e-8),
            check("box-solver-vs-unconstrained", box_gap, 1e-3),
        ],
    }
}

/// Passivity of the force model and of the integrated plant.
pub fn dissipation_checks(model: &HydroModel, seed: u64) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coriolis_power = 0.0f64;
    let mut damping_power = 0.0f64;
    for _ in 0..500 {
        let nu = Vec6::from_fn(|_, _| rng.gen_range(-2.0..2.0));
        let c = model.coriolis_fossen(&nu);
        let d = model.damping_fossen(&nu);
        coriolis_power = coriolis_power.max((nu.transpose() * c * nu)[0].abs());
        // D enters the dynamics as a resisting force, so the power it
        // extracts, nu' D nu, must never go negative.
        damping_power = damping_power.max(-(nu.transpose() * d * nu)[0]);
    }
    // Unforced decay from a moving start must shed energy.
    let mut eta = Vec6::zeros();
    let mut nu = Vec6::new(0.7, 0.2, 0.03, 0.04, 0.03, 0.25);
    let energy = |eta: &Vec6, nu: &Vec6| {
        let mut disp = Vec6::zeros();
        disp[2] = eta[2];
        disp[3] = eta[3];
        disp[4] = eta[4];
        0.5 * (nu.transpose() * model.mass_fossen() * nu)[0]
            + 0.5 * (disp.transpose() * model.params().restoring * disp)[0]
    };
    let e0 = energy(&eta, &nu);
    let mut worst_rise = 0.0f64;
    let mut prev = e0;
    let current = CurrentField::zero();
    for _ in 0..800 {
        match rk4_step(model, &eta, &nu, &current, &Vec6::zeros(), 0.0125) {
            Ok(next) => (eta, nu) = next,
            Err(_) => break,
        }
        let e = energy(&eta, &nu);
        worst_rise = worst_rise.max(e - prev);
        prev = e;
    }
    CheckReport {
        suite: "dissipation".into(),
        seed,
        results: vec![
            check("coriolis-workless", coriolis_power, 1e-9),
            check("damping-dissipative", damping_power, 0.0),
            check("energy-monotone-decay", worst_rise / e0.max(1e-12), 1e-9),
            check("decay-reaches-fraction", prev / e0.max(1e-12), 0.5),
        ],
    }
}

/// All suites in a fixed order.
pub fn run_all(model: &HydroModel, seed: u64) -> Vec<CheckReport> {
    vec![
        geometry_checks(seed),
        jacobian_checks(model, seed.wrapping_add(1)),
        solver_checks(model, seed.wrapping_add(2)),
        dissipation_checks(model, seed.wrapping_add(3)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::otter_model;

    #[test]
    fn every_suite_passes_on_the_reference_vessel() {
        let model = otter_model();
        for report in run_all(&model, 0) {
            assert!(report.passed(), "{}", report.render());
        }
    }

    #[test]
    fn reports_are_deterministic_for_a_fixed_seed() {
        let model = otter_model();
        let a: Vec<String> = run_all(&model, 42).iter().map(|r| r.render()).collect();
        let b: Vec<String> = run_all(&model, 42).iter().map(|r| r.render()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn render_labels_every_check_with_its_suite() {
        let report = geometry_checks(3);
        let text = report.render();
        assert!(text.contains("suite geometry (seed 3)"));
        assert!(text.contains("[PASS] geometry/exp-log-roundtrip"));
        assert_eq!(
            text.matches("[PASS]").count() + text.matches("[FAIL]").count(),
            3
        );
    }

    #[test]
    fn a_failed_check_is_reported_not_hidden() {
        let bad = check("example", 1.0, 1e-3);
        assert!(!bad.passed);
        let nan = check("example", f64::NAN, 1e-3);
        assert!(!nan.passed);
    }
}
