//! Backward-recursion solver for the unconstrained LQ problem.
//!
//! The quadratic data (dynamics, weights) is factored once; the affine
//! data (offsets, linear costs) then resolves in a cheap second pass, so a
//! penalty method can re-solve with varying linear terms at marginal cost.

use super::{LqProblem, QpError, QpSolution};
use nalgebra::{Cholesky, Const, SMatrix, SVector};

struct FactorStage<const NX: usize, const NU: usize> {
    /// Feedback gain K_k with u_k = K_k x_k + k_k.
    gain: SMatrix<f64, NU, NX>,
    /// Cholesky factor of H = R_eff + B' P_hat B.
    h_chol: Cholesky<f64, Const<NU>>,
    /// Cross term B' P_hat A.
    h_ux: SMatrix<f64, NU, NX>,
    /// Cost-to-go quadratic with the stage output cost folded in:
    /// P_hat = P_{k+1} + G' W G.
    p_hat: SMatrix<f64, NX, NX>,
    /// Constant part of the folded linear term: G' W d.
    d_fold: SVector<f64, NX>,
}

/// Factored quadratic part of an LQ problem. Reusable across solves that
/// differ only in affine data, and across penalty iterations at fixed rho.
pub struct RiccatiFactor<const NX: usize, const NU: usize> {
    stages: Vec<FactorStage<NX, NU>>,
}

impl<const NX: usize, const NU: usize> RiccatiFactor<NX, NU> {
    /// Backward pass over the quadratic data. `r_shift` is added to the
    /// diagonal of the input weight (the penalty rho/2 of the box solver);
    /// zero recovers the plain problem.
    pub fn new(problem: &LqProblem<NX, NU>, r_shift: f64) -> Result<Self, QpError> {
        let n = problem.stages.len();
        if n == 0 {
            return Err(QpError::EmptyHorizon);
        }
        let r_eff = problem.r + SMatrix::<f64, NU, NU>::identity() * r_shift;
        let mut stages = Vec::with_capacity(n);
        let mut p_mat = SMatrix::<f64, NX, NX>::zeros();
        for k in (0..n).rev() {
            let st = &problem.stages[k];
            let w = problem.weight_at(k);
            let gw = st.g.transpose() * w;
            let p_hat = p_mat + gw * st.g;
            let bt_p = st.b.transpose() * p_hat;
            let h = r_eff + bt_p * st.b;
            let h_chol = Cholesky::new(0.5 * (h + h.transpose()))
                .ok_or(QpError::NotPositiveDefinite(k))?;
            let h_ux = bt_p * st.a;
            let gain = -h_chol.solve(&h_ux);
            // Schur complement; symmetrized to stop drift over long horizons.
            let p_next = st.a.transpose() * p_hat * st.a + h_ux.transpose() * gain;
            p_mat = 0.5 * (p_next + p_next.transpose());
            stages.push(FactorStage {
                gain,
                h_chol,
                h_ux,
                p_hat,
                d_fold: gw * st.d,
            });
        }
        stages.reverse();
        Ok(RiccatiFactor { stages })
    }

    pub fn horizon(&self) -> usize {
        self.stages.len()
    }

    /// Affine backward pass plus forward rollout. When `r_override` is
    /// given it replaces every stage's linear input cost (the box solver's
    /// shifted terms); the quadratic data must be the one this factor was
    /// built from.
    pub fn solve(
        &self,
        problem: &LqProblem<NX, NU>,
        r_override: Option<&[SVector<f64, NU>]>,
    ) -> QpSolution<NX, NU> {
        let n = self.stages.len();
        debug_assert_eq!(problem.stages.len(), n);
        if let Some(r) = r_override {
            debug_assert_eq!(r.len(), n);
        }

        // Backward: feedforward terms k_k and costate offsets p_k.
        let mut feedforward = vec![SVector::<f64, NU>::zeros(); n];
        let mut p_vec = SVector::<f64, NX>::zeros();
        for k in (0..n).rev() {
            let st = &problem.stages[k];
            let f = &self.stages[k];
            let r_lin = r_override.map_or(st.r_lin, |r| r[k]);
            let ph = f.p_hat * st.h + (p_vec - f.d_fold);
            let g_u = st.b.transpose() * ph + r_lin;
            let kff = -f.h_chol.solve(&g_u);
            p_vec = st.a.transpose() * ph + f.h_ux.transpose() * kff;
            feedforward[k] = kff;
        }

        // Forward: closed-loop rollout.
        let mut inputs = Vec::with_capacity(n);
        let mut states = Vec::with_capacity(n + 1);
        let mut x = problem.x0;
        states.push(x);
        for k in 0..n {
            let st = &problem.stages[k];
            let u = self.stages[k].gain * x + feedforward[k];
            x = st.a * x + st.b * u + st.h;
            inputs.push(u);
            states.push(x);
        }
        let objective = problem.objective(&inputs, &states);
        QpSolution {
            inputs,
            states,
            objective,
            iterations: 1,
            converged: true,
            primal_residual: 0.0,
            dual_residual: 0.0,
            duals: Vec::new(),
            penalty: None,
        }
    }
}

/// Solve the unconstrained problem exactly. Any box bounds on the problem
/// are ignored here; use the box solver to enforce them.
pub fn riccati_solve<const NX: usize, const NU: usize>(
    problem: &LqProblem<NX, NU>,
) -> Result<QpSolution<NX, NU>, QpError> {
    Ok(RiccatiFactor::new(problem, 0.0)?.solve(problem, None))
}
