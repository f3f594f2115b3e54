//! Box-constrained LQ solver by operator splitting.
//!
//! Consensus form: minimize J(u) + I_box(z) subject to u = z, with scaled
//! duals w. The u-update is an unconstrained LQ solve whose quadratic part
//! is fixed while the penalty rho is, so it reuses one backward
//! factorization; the z-update is elementwise clamping.

use super::riccati::RiccatiFactor;
use super::{LqProblem, QpError, QpSolution};
use nalgebra::SVector;

#[derive(Clone, Copy, Debug)]
pub struct AdmmConfig {
    /// Initial quadratic penalty on the consensus gap.
    pub rho: f64,
    /// Over-relaxation factor in (0, 2); 1.6 is a good default.
    pub alpha: f64,
    pub eps_abs: f64,
    pub eps_rel: f64,
    pub max_iterations: usize,
    /// Rebalance rho toward the primal/dual residual ratio every few
    /// iterations. Essential on cheap-control problems where the condensed
    /// Hessian spans many orders of magnitude.
    pub adaptive_rho: bool,
    /// Run the splitting iterations even when the exact unconstrained
    /// solution already satisfies the box. Only the validation suites set
    /// this; it exists so the iterative path can be tested against the
    /// recursion on problems where the bounds end up inactive.
    pub force_iterative: bool,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        AdmmConfig {
            rho: 1.0,
            alpha: 1.6,
            eps_abs: 1e-6,
            eps_rel: 1e-6,
            max_iterations: 4000,
            adaptive_rho: true,
            force_iterative: false,
        }
    }
}

impl AdmmConfig {
    /// Tolerances for closed-loop control. Inputs only need to be accurate
    /// to a fraction of a newton, so stopping early buys a large speedup
    /// over the oracle-grade defaults.
    pub fn control() -> Self {
        AdmmConfig {
            eps_abs: 1e-4,
            eps_rel: 1e-4,
            max_iterations: 2000,
            ..AdmmConfig::default()
        }
    }
}

/// Consensus iterate carried between solves of neighboring problems.
#[derive(Clone, Debug)]
pub struct AdmmWarmStart<const NU: usize> {
    pub inputs: Vec<SVector<f64, NU>>,
    /// Scaled duals, as returned in [`QpSolution::duals`].
    pub duals: Vec<SVector<f64, NU>>,
    /// Penalty from the previous solve, as returned in
    /// [`QpSolution::penalty`]. None starts from the configured value.
    pub rho: Option<f64>,
}

fn stacked_norm<const NU: usize>(v: &[SVector<f64, NU>]) -> f64 {
    v.iter().map(|x| x.norm_squared()).sum::<f64>().sqrt()
}

/// Solve with elementwise input bounds. Problems without bounds fall back
/// to the exact recursion. The returned inputs are the clamped consensus
/// iterate, so they are always feasible; the states are their exact
/// rollout.
pub fn admm_solve<const NX: usize, const NU: usize>(
    problem: &LqProblem<NX, NU>,
    config: &AdmmConfig,
    warm: Option<&AdmmWarmStart<NU>>,
) -> Result<QpSolution<NX, NU>, QpError> {
    let Some((lo, hi)) = problem.bounds else {
        return super::riccati_solve(problem);
    };
    if !(config.rho > 0.0 && config.alpha > 0.0 && config.alpha < 2.0) {
        return Err(QpError::Invalid(format!(
            "bad penalty config rho={} alpha={}",
            config.rho, config.alpha
        )));
    }
    let n = problem.stages.len();
    if n == 0 {
        return Err(QpError::EmptyHorizon);
    }

    // The cost is strictly convex, so if the unconstrained optimum already
    // sits inside the box it is the constrained optimum too. Controllers
    // spend most of their time away from the thrust limits, where this
    // settles the solve in a single exact pass.
    let mut exact = super::riccati_solve(problem)?;
    if !config.force_iterative
        && exact
            .inputs
            .iter()
            .all(|u| (0..NU).all(|i| u[i] >= lo[i] && u[i] <= hi[i]))
    {
        // Zero duals are the multipliers of the inactive box; returning
        // them keeps warm-start carry alive for the caller.
        exact.duals = vec![SVector::<f64, NU>::zeros(); n];
        return Ok(exact);
    }

    let clamp = |v: &SVector<f64, NU>| SVector::<f64, NU>::from_fn(|i, _| v[i].clamp(lo[i], hi[i]));

    let mut rho = warm
        .and_then(|w| w.rho)
        .filter(|r| r.is_finite() && *r > 0.0)
        .unwrap_or(config.rho)
        .clamp(1e-6, 1e6);
    let mut factor = RiccatiFactor::new(problem, 0.5 * rho)?;
    let (mut z, mut w) = match warm {
        Some(ws) if ws.inputs.len() == n && ws.duals.len() == n => {
            (ws.inputs.iter().map(clamp).collect::<Vec<_>>(), ws.duals.clone())
        }
        _ => (
            vec![SVector::<f64, NU>::zeros(); n],
            vec![SVector::<f64, NU>::zeros(); n],
        ),
    };

    let sqrt_n = ((n * NU) as f64).sqrt();
    let mut r_shift = vec![SVector::<f64, NU>::zeros(); n];
    let mut iterations = 0;
    let mut converged = false;
    let mut primal = f64::INFINITY;
    let mut dual = f64::INFINITY;
    let mut u = vec![SVector::<f64, NU>::zeros(); n];

    while iterations < config.max_iterations {
        iterations += 1;
        // u-update: LQ solve with the penalty folded into the linear cost.
        for k in 0..n {
            r_shift[k] = problem.stages[k].r_lin - 0.5 * rho * (z[k] - w[k]);
        }
        let inner = factor.solve(problem, Some(&r_shift));
        u.copy_from_slice(&inner.inputs);

        // z-update with over-relaxation, then the dual ascent.
        let mut dual_sq = 0.0;
        let mut primal_sq = 0.0;
        for k in 0..n {
            let relaxed = config.alpha * u[k] + (1.0 - config.alpha) * z[k];
            let z_new = clamp(&(relaxed + w[k]));
            dual_sq += (z_new - z[k]).norm_squared();
            w[k] += relaxed - z_new;
            z[k] = z_new;
            primal_sq += (u[k] - z[k]).norm_squared();
        }
        primal = primal_sq.sqrt();
        dual = rho * dual_sq.sqrt();

        let eps_pri = sqrt_n * config.eps_abs
            + config.eps_rel * stacked_norm(&u).max(stacked_norm(&z));
        let eps_dual = sqrt_n * config.eps_abs + config.eps_rel * rho * stacked_norm(&w);
        if primal <= eps_pri && dual <= eps_dual {
            converged = true;
            break;
        }

        if config.adaptive_rho && iterations % 10 == 0 {
            // Residuals measured in multiples of their own tolerances; jump
            // rho to the geometric balance point instead of creeping by a
            // fixed factor. w is the dual scaled by 1/rho, so it rescales
            // with the change.
            let ratio = ((primal / eps_pri) / (dual / eps_dual)).sqrt();
            if ratio > 5.0 || ratio < 0.2 {
                let new_rho = (rho * ratio).clamp(1e-6, 1e6);
                if new_rho != rho && new_rho.is_finite() {
                    let scale = rho / new_rho;
                    for wk in &mut w {
                        *wk *= scale;
                    }
                    rho = new_rho;
                    factor = RiccatiFactor::new(problem, 0.5 * rho)?;
                }
            }
        }
    }

    let states = problem.rollout(&z);
    let objective = problem.objective(&z, &states);
    Ok(QpSolution {
        inputs: z,
        states,
        objective,
        iterations,
        converged,
        primal_residual: primal,
        dual_residual: dual,
        duals: w,
        penalty: Some(rho),
    })
}
