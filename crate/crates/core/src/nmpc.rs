//! Sequential-quadratic-programming tracking baseline in Euler coordinates.
//!
//! The decision variables are the thrust sequence; states follow by an
//! explicit Euler rollout of the full nonlinear model (optionally without
//! restoring forces). Each iteration linearizes the rollout, solves the
//! resulting box-constrained LQ subproblem in absolute inputs, and
//! backtracks on the true cost. Because the problem is nonconvex in the
//! attitude variables, convergence is local; a shifted warm start keeps
//! successive solves close.

use crate::controller::{
    ControlError, ControlStep, ReferenceWindow, VesselController,
};
use crate::hydro::{thrust_matrix_lie, FossenState, HydroModel};
use crate::lie::{euler_kinematics, euler_kinematics_jacobian, pose_to_euler, LieError};
use crate::mpc::MpcWeights;
use crate::qp::{admm_solve, AdmmConfig, AdmmWarmStart, LqProblem, LqStage};
use crate::{Mat12, Vec12, Vec6};
use nalgebra::{SMatrix, Vector2};

/// Wrap an angle to (-pi, pi].
pub fn wrap_angle(x: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let w = x.rem_euclid(two_pi);
    if w > std::f64::consts::PI {
        w - two_pi
    } else {
        w
    }
}

#[derive(Clone, Copy, Debug)]
pub struct NlpConfig {
    /// Outer linearize-solve-step iterations per control call.
    pub max_iterations: usize,
    /// Stop when the largest proposed input change falls below this
    /// (newtons). Must sit above the noise floor of the subproblem solver;
    /// 0.05 N is invisible on thrusters spanning nearly 200 N.
    pub tolerance: f64,
    /// Armijo sufficient-decrease ratio.
    pub armijo_ratio: f64,
    /// Step halvings before a line search gives up.
    pub max_line_search: usize,
    /// Keep restoring forces in the internal model. The "simple" baseline
    /// drops them.
    pub include_restoring: bool,
    /// Settings for the box-QP subproblem solver.
    pub qp: AdmmConfig,
}

impl Default for NlpConfig {
    fn default() -> Self {
        NlpConfig {
            max_iterations: 30,
            tolerance: 0.05,
            armijo_ratio: 1e-4,
            max_line_search: 8,
            include_restoring: true,
            qp: AdmmConfig::control(),
        }
    }
}

/// Stacked Fossen state [eta; nu].
fn stack(eta: &Vec6, nu: &Vec6) -> Vec12 {
    let mut z = Vec12::zeros();
    z.fixed_rows_mut::<6>(0).copy_from(eta);
    z.fixed_rows_mut::<6>(6).copy_from(nu);
    z
}

/// One explicit Euler step of the Fossen dynamics under a body wrench.
fn euler_step(
    model: &HydroModel,
    include_restoring: bool,
    z: &Vec12,
    tau: &Vec6,
    dt: f64,
) -> Result<Vec12, LieError> {
    let eta: Vec6 = z.fixed_rows::<6>(0).into();
    let nu: Vec6 = z.fixed_rows::<6>(6).into();
    let j = euler_kinematics(&eta)?;
    let mut force = tau
        - model.coriolis_fossen(&nu) * nu
        - model.damping_fossen(&nu) * nu;
    if include_restoring {
        force -= model.restoring_fossen(&eta);
    }
    let nu_dot = model.mass_fossen_inv() * force;
    Ok(stack(&(eta + dt * (j * nu)), &(nu + dt * nu_dot)))
}

/// States z_0..z_N of the Euler rollout under the given thrusts.
pub fn rollout_euler(
    model: &HydroModel,
    include_restoring: bool,
    thrust_fossen: &SMatrix<f64, 6, 2>,
    z0: &Vec12,
    inputs: &[Vector2<f64>],
    dt: f64,
) -> Result<Vec<Vec12>, LieError> {
    let mut states = Vec::with_capacity(inputs.len() + 1);
    states.push(*z0);
    let mut z = *z0;
    for u in inputs {
        z = euler_step(model, include_restoring, &z, &(thrust_fossen * u), dt)?;
        states.push(z);
    }
    Ok(states)
}

/// Jacobian of one Euler step with respect to the state.
pub fn step_state_jacobian(
    model: &HydroModel,
    include_restoring: bool,
    z: &Vec12,
    dt: f64,
) -> Result<Mat12, LieError> {
    let eta: Vec6 = z.fixed_rows::<6>(0).into();
    let nu: Vec6 = z.fixed_rows::<6>(6).into();
    let j = euler_kinematics(&eta)?;
    let j_angles = euler_kinematics_jacobian(&eta, &nu)?;

    let mut a = Mat12::identity();
    // d eta_dot / d eta: only the attitude angles enter J.
    let mut angle_cols = a.fixed_view_mut::<6, 3>(0, 3);
    angle_cols += dt * j_angles;
    let mut top_right = a.fixed_view_mut::<6, 6>(0, 6);
    top_right += dt * j;
    // d nu_dot / d nu: force linearization about nu itself.
    let h = -(model.coriolis_fossen(&nu)
        + model.damping_fossen(&nu)
        + model.coriolis_jacobian_fossen(&nu)
        + model.damping_jacobian_fossen(&nu));
    let mut bottom_right = a.fixed_view_mut::<6, 6>(6, 6);
    bottom_right += dt * model.mass_fossen_inv() * h;
    // d nu_dot / d eta: restoring depends on (z, phi, theta) linearly.
    if include_restoring {
        let dgr = model.mass_fossen_inv() * model.params().restoring;
        for col in 2..5 {
            let mut block = a.fixed_view_mut::<6, 1>(6, col);
            block += -dt * dgr.column(col);
        }
    }
    Ok(a)
}

/// Solver diagnostics for one receding-horizon solve.
#[derive(Clone, Debug)]
pub struct SqpReport {
    pub inputs: Vec<Vector2<f64>>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub struct NonlinearMpc {
    model: HydroModel,
    q: Mat12,
    p_terminal: Mat12,
    r: SMatrix<f64, 2, 2>,
    thrust_fossen: SMatrix<f64, 6, 2>,
    bounds: Option<(Vector2<f64>, Vector2<f64>)>,
    config: NlpConfig,
    warm: Option<Vec<Vector2<f64>>>,
}

impl NonlinearMpc {
    /// Unconstrained by default, mirroring the proposed controller; opt
    /// into the thrust box with [`NonlinearMpc::with_input_bounds`].
    pub fn new(
        model: HydroModel,
        weights: MpcWeights,
        config: NlpConfig,
    ) -> Result<Self, ControlError> {
        weights.validate().map_err(ControlError::Config)?;
        let q = weights.output_weight_fossen();
        let t_lie = thrust_matrix_lie(model.params().lever_arm);
        let mut thrust_fossen = SMatrix::<f64, 6, 2>::zeros();
        thrust_fossen
            .fixed_view_mut::<3, 2>(0, 0)
            .copy_from(&t_lie.fixed_view::<3, 2>(3, 0));
        thrust_fossen
            .fixed_view_mut::<3, 2>(3, 0)
            .copy_from(&t_lie.fixed_view::<3, 2>(0, 0));
        Ok(NonlinearMpc {
            q,
            p_terminal: weights.terminal_scale * q,
            r: weights.input_weight(),
            thrust_fossen,
            bounds: None,
            config,
            warm: None,
            model,
        })
    }

    /// Override the thrust box; `None` solves unconstrained.
    pub fn with_input_bounds(mut self, bounds: Option<[f64; 2]>) -> Self {
        self.bounds = bounds.map(|[lo, hi]| (Vector2::repeat(lo), Vector2::repeat(hi)));
        self
    }

    pub fn model(&self) -> &HydroModel {
        &self.model
    }

    fn reference_residual(&self, z: &Vec12, eta_ref: &Vec6, nu_ref: &Vec6) -> Vec12 {
        let mut d = stack(eta_ref, nu_ref) - z;
        for i in 3..6 {
            d[i] = wrap_angle(d[i]);
        }
        d
    }

    /// True tracking cost of a rollout against the window references.
    fn trajectory_cost(
        &self,
        states: &[Vec12],
        inputs: &[Vector2<f64>],
        eta_ref: &[Vec6],
        nu_ref: &[Vec6],
    ) -> f64 {
        let n = inputs.len();
        let mut j = 0.0;
        for k in 0..n {
            j += (inputs[k].transpose() * self.r * inputs[k])[0];
            let d = self.reference_residual(&states[k + 1], &eta_ref[k + 1], &nu_ref[k + 1]);
            let w = if k + 1 == n {
                self.q + self.p_terminal
            } else {
                self.q
            };
            j += (d.transpose() * w * d)[0];
        }
        j
    }

    /// Full receding-horizon solve from the given state; `control` wraps
    /// this and keeps the warm start.
    pub fn plan(
        &mut self,
        state: &FossenState,
        window: &ReferenceWindow<'_>,
    ) -> Result<SqpReport, ControlError> {
        window.validate()?;
        let n = window.intervals();
        let dt = window.dt;
        let mut eta_ref = Vec::with_capacity(n + 1);
        let mut nu_ref = Vec::with_capacity(n + 1);
        for k in 0..=n {
            eta_ref.push(pose_to_euler(&window.poses[k])?);
            nu_ref.push(window.twists[k].to_fossen());
        }
        let z0 = stack(&state.eta, &state.nu);

        let clamp = |u: &Vector2<f64>| match &self.bounds {
            Some((lo, hi)) => Vector2::new(u[0].clamp(lo[0], hi[0]), u[1].clamp(lo[1], hi[1])),
            None => *u,
        };
        let mut u: Vec<Vector2<f64>> = match self.warm.take() {
            Some(w) if w.len() == n => w.iter().map(&clamp).collect(),
            _ => vec![Vector2::zeros(); n],
        };
        let mut states = rollout_euler(
            &self.model,
            self.config.include_restoring,
            &self.thrust_fossen,
            &z0,
            &u,
            dt,
        )?;
        let mut cost = self.trajectory_cost(&states, &u, &eta_ref, &nu_ref);

        let b_stage = {
            let mut b = SMatrix::<f64, 12, 2>::zeros();
            b.fixed_view_mut::<6, 2>(6, 0)
                .copy_from(&(dt * self.model.mass_fossen_inv() * self.thrust_fossen));
            b
        };

        let mut converged = false;
        let mut iterations = 0;
        let mut qp_warm: Option<AdmmWarmStart<2>> = None;
        while iterations < self.config.max_iterations {
            iterations += 1;

            // Subproblem in (state deviation, absolute input): because the
            // wrench is linear in u, x_{k+1} = A x_k + B u_k - B u_bar_k
            // is exact to first order around the current rollout.
            let stages: Result<Vec<LqStage<12, 2>>, LieError> = (0..n)
                .map(|k| {
                    let a = step_state_jacobian(
                        &self.model,
                        self.config.include_restoring,
                        &states[k],
                        dt,
                    )?;
                    Ok(LqStage {
                        a,
                        b: b_stage,
                        h: -b_stage * u[k],
                        g: Mat12::identity(),
                        d: self.reference_residual(
                            &states[k + 1],
                            &eta_ref[k + 1],
                            &nu_ref[k + 1],
                        ),
                        r_lin: Vector2::zeros(),
                    })
                })
                .collect();
            let problem = LqProblem {
                stages: stages.map_err(ControlError::Lie)?,
                q: self.q,
                p_terminal: self.p_terminal,
                r: self.r,
                x0: Vec12::zeros(),
                bounds: self.bounds,
            };
            let sub = admm_solve(&problem, &self.config.qp, qp_warm.as_ref())
                .map_err(|e| ControlError::Solver(e.to_string()))?;
            if !sub.duals.is_empty() {
                qp_warm = Some(AdmmWarmStart {
                    inputs: sub.inputs.clone(),
                    duals: sub.duals.clone(),
                    rho: sub.penalty,
                });
            }

            let step_norm = sub
                .inputs
                .iter()
                .zip(&u)
                .map(|(a, b)| (a - b).amax())
                .fold(0.0, f64::max);
            if step_norm <= self.config.tolerance {
                converged = true;
                break;
            }
            // Predicted decrease from the subproblem; the model value at
            // the current iterate is the true cost by construction.
            let predicted = (cost - sub.objective).max(0.0);

            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..=self.config.max_line_search {
                let trial: Vec<Vector2<f64>> = u
                    .iter()
                    .zip(&sub.inputs)
                    .map(|(cur, new)| cur + alpha * (new - cur))
                    .collect();
                match rollout_euler(
                    &self.model,
                    self.config.include_restoring,
                    &self.thrust_fossen,
                    &z0,
                    &trial,
                    dt,
                ) {
                    Ok(trial_states) => {
                        let trial_cost =
                            self.trajectory_cost(&trial_states, &trial, &eta_ref, &nu_ref);
                        if trial_cost
                            <= cost - self.config.armijo_ratio * alpha * predicted
                        {
                            u = trial;
                            states = trial_states;
                            cost = trial_cost;
                            accepted = true;
                            break;
                        }
                    }
                    // A trial that leaves the valid attitude region just
                    // shortens the step.
                    Err(_) => {}
                }
                alpha *= 0.5;
            }
            if !accepted {
                break;
            }
        }

        // Shifted warm start for the next call.
        let mut next = u.clone();
        next.rotate_left(1);
        *next.last_mut().unwrap() = *u.last().unwrap();
        self.warm = Some(next);

        Ok(SqpReport {
            inputs: u,
            objective: cost,
            iterations,
            converged,
        })
    }
}

impl VesselController for NonlinearMpc {
    fn control(
        &mut self,
        state: &FossenState,
        window: &ReferenceWindow<'_>,
    ) -> Result<ControlStep, ControlError> {
        let report = self.plan(state, window)?;
        Ok(ControlStep {
            force: [report.inputs[0][0], report.inputs[0][1]],
            iterations: report.iterations,
            converged: report.converged,
            objective: report.objective,
        })
    }

    fn reset(&mut self) {
        self.warm = None;
    }

    fn name(&self) -> &'static str {
        if self.config.include_restoring {
            "nmpc"
        } else {
            "nmpc-simple"
        }
    }
}
