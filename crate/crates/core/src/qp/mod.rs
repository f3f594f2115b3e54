//! Solvers for time-varying linear-quadratic tracking problems.
//!
//! Problem form, with x_0 fixed and stages k = 0..N-1:
//!
//! ```text
//! x_{k+1} = A_k x_k + B_k u_k + h_k
//! y_{k+1} = G_k x_{k+1} - d_k
//!
//! minimize  sum_k [ u_k' R u_k + 2 r_k' u_k ]  +  sum_{k=1}^{N} y_k' W_k y_k
//! ```
//!
//! where W_k = Q except at the horizon end, whose weight is Q + P. Note the
//! quadratic forms carry no 1/2 and the linear input term carries a 2, so
//! gradients are 2Ru + 2r etc. Inputs may be box-bounded.
//!
//! [`riccati_solve`] handles the unconstrained problem exactly with a
//! backward recursion; [`admm_solve`] adds box bounds via an operator split
//! whose inner minimization reuses the same recursion. Both are entirely
//! deterministic.

mod admm;
mod riccati;

pub use admm::{admm_solve, AdmmConfig, AdmmWarmStart};
pub use riccati::{riccati_solve, RiccatiFactor};

use nalgebra::{SMatrix, SVector};

/// One step of the horizon: dynamics into x_{k+1} plus the output penalized
/// there.
#[derive(Clone, Debug)]
pub struct LqStage<const NX: usize, const NU: usize> {
    pub a: SMatrix<f64, NX, NX>,
    pub b: SMatrix<f64, NX, NU>,
    /// Affine dynamics offset: x_{k+1} = a x_k + b u_k + h.
    pub h: SVector<f64, NX>,
    /// Output map applied to the successor state x_{k+1}.
    pub g: SMatrix<f64, NX, NX>,
    /// Output offset: the stage cost penalizes g x_{k+1} - d.
    pub d: SVector<f64, NX>,
    /// Linear input cost: the stage adds 2 r_lin' u_k.
    pub r_lin: SVector<f64, NU>,
}

#[derive(Clone, Debug)]
pub struct LqProblem<const NX: usize, const NU: usize> {
    pub stages: Vec<LqStage<NX, NU>>,
    /// Running output weight, symmetric PSD.
    pub q: SMatrix<f64, NX, NX>,
    /// Extra terminal output weight, symmetric PSD; the last output is
    /// penalized by q + p_terminal.
    pub p_terminal: SMatrix<f64, NX, NX>,
    /// Input weight, symmetric PD.
    pub r: SMatrix<f64, NU, NU>,
    pub x0: SVector<f64, NX>,
    /// Elementwise input bounds (lo, hi); entries may be infinite.
    pub bounds: Option<(SVector<f64, NU>, SVector<f64, NU>)>,
}

#[derive(Debug, thiserror::Error)]
pub enum QpError {
    #[error("problem has no stages")]
    EmptyHorizon,
    #[error("input-block Hessian not positive definite at stage {0}")]
    NotPositiveDefinite(usize),
    #[error("invalid problem data: {0}")]
    Invalid(String),
}

impl<const NX: usize, const NU: usize> LqProblem<NX, NU> {
    pub fn horizon(&self) -> usize {
        self.stages.len()
    }

    /// Weight on the output of stage k, i.e. on y_{k+1}.
    pub fn weight_at(&self, k: usize) -> SMatrix<f64, NX, NX> {
        if k + 1 == self.stages.len() {
            self.q + self.p_terminal
        } else {
            self.q
        }
    }

    /// Structural checks; solvers assume these hold.
    pub fn validate(&self) -> Result<(), QpError> {
        if self.stages.is_empty() {
            return Err(QpError::EmptyHorizon);
        }
        let sym = |m: &SMatrix<f64, NX, NX>| (m - m.transpose()).amax() <= 1e-9 * m.amax().max(1.0);
        if !sym(&self.q) || !sym(&self.p_terminal) {
            return Err(QpError::Invalid("output weight not symmetric".into()));
        }
        if (self.r - self.r.transpose()).amax() > 1e-12 * self.r.amax().max(1.0) {
            return Err(QpError::Invalid("input weight not symmetric".into()));
        }
        if let Some((lo, hi)) = &self.bounds {
            for i in 0..NU {
                if !(lo[i] <= hi[i]) {
                    return Err(QpError::Invalid(format!(
                        "bound {i} is empty: [{}, {}]",
                        lo[i], hi[i]
                    )));
                }
            }
        }
        let finite = self
            .stages
            .iter()
            .all(|s| {
                s.a.iter()
                    .chain(s.b.iter())
                    .chain(s.h.iter())
                    .chain(s.g.iter())
                    .chain(s.d.iter())
                    .chain(s.r_lin.iter())
                    .all(|v| v.is_finite())
            })
            && self.x0.iter().all(|v| v.is_finite());
        if !finite {
            return Err(QpError::Invalid("non-finite stage data".into()));
        }
        Ok(())
    }

    /// States x_0..x_N produced by the dynamics under the given inputs.
    pub fn rollout(&self, inputs: &[SVector<f64, NU>]) -> Vec<SVector<f64, NX>> {
        let mut states = Vec::with_capacity(self.stages.len() + 1);
        states.push(self.x0);
        let mut x = self.x0;
        for (st, u) in self.stages.iter().zip(inputs) {
            x = st.a * x + st.b * u + st.h;
            states.push(x);
        }
        states
    }

    /// Cost of a trajectory; `states` must have one more entry than
    /// `inputs` and is taken as given, not re-rolled.
    pub fn objective(&self, inputs: &[SVector<f64, NU>], states: &[SVector<f64, NX>]) -> f64 {
        let mut j = 0.0;
        for (k, (st, u)) in self.stages.iter().zip(inputs).enumerate() {
            j += (u.transpose() * self.r * u)[0] + 2.0 * st.r_lin.dot(u);
            let y = st.g * states[k + 1] - st.d;
            j += (y.transpose() * self.weight_at(k) * y)[0];
        }
        j
    }
}

/// Solution of an LQ problem with solver diagnostics. `states` is the
/// exact rollout of `inputs`, so the dynamics hold by construction.
#[derive(Clone, Debug)]
pub struct QpSolution<const NX: usize, const NU: usize> {
    pub inputs: Vec<SVector<f64, NU>>,
    pub states: Vec<SVector<f64, NX>>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Final consensus gap (box solver) or 0 for the exact recursion.
    pub primal_residual: f64,
    /// Final dual gap (box solver) or 0 for the exact recursion.
    pub dual_residual: f64,
    /// Scaled dual variables, kept so the next solve can warm start.
    /// Empty for the exact recursion.
    pub duals: Vec<SVector<f64, NU>>,
    /// Final consensus penalty (box solver) or None for the exact
    /// recursion. Feeding it back through the warm start saves the next
    /// solve from re-learning the problem scale.
    pub penalty: Option<f64>,
}

/// First-order optimality residuals of an unconstrained solution,
/// computed from the given trajectory via the costate recursion.
#[derive(Clone, Copy, Debug)]
pub struct KktResidual {
    /// max_k || 2 R u_k + 2 r_k + B_k' lambda_{k+1} ||_inf
    pub stationarity: f64,
    /// max_k || x_{k+1} - (A_k x_k + B_k u_k + h_k) ||_inf
    pub dynamics: f64,
}

pub fn kkt_residual<const NX: usize, const NU: usize>(
    problem: &LqProblem<NX, NU>,
    inputs: &[SVector<f64, NU>],
    states: &[SVector<f64, NX>],
) -> KktResidual {
    let n = problem.stages.len();
    assert_eq!(inputs.len(), n);
    assert_eq!(states.len(), n + 1);

    // Costates lambda_k = dJ/dx_k, built backwards. lambda[k] pairs with
    // states[k]; index 0 is unused.
    let mut lambda = vec![SVector::<f64, NX>::zeros(); n + 1];
    for k in (1..=n).rev() {
        let out = &problem.stages[k - 1];
        let w = problem.weight_at(k - 1);
        let grad_out = 2.0 * out.g.transpose() * (w * (out.g * states[k] - out.d));
        lambda[k] = if k < n {
            grad_out + problem.stages[k].a.transpose() * lambda[k + 1]
        } else {
            grad_out
        };
    }

    let mut stationarity: f64 = 0.0;
    let mut dynamics: f64 = 0.0;
    for (k, st) in problem.stages.iter().enumerate() {
        let grad_u = 2.0 * problem.r * inputs[k]
            + 2.0 * st.r_lin
            + st.b.transpose() * lambda[k + 1];
        stationarity = stationarity.max(grad_u.amax());
        let defect = states[k + 1] - (st.a * states[k] + st.b * inputs[k] + st.h);
        dynamics = dynamics.max(defect.amax());
    }
    KktResidual {
        stationarity,
        dynamics,
    }
}
