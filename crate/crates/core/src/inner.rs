//! Augmented Lagrangian and its approximate minimization over the box.
//!
//! The inner solver is an active-set truncated-Newton method: variables
//! estimated active are moved to their bounds, the others follow a
//! conjugate-gradient Newton direction along a projected, monotone
//! backtracking line search.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::kkt::active_sets_from_gradient;
use crate::linalg::projected_gradient;
use crate::model::{inf_norm, NlpProblem};

#[derive(Debug, Clone)]
pub struct AugLagEval {
    pub value: f64,
    pub grad: DVector<f64>,
    pub h: DVector<f64>,
}

/// `L_a(x, mu_bar; eps) = f + mu_bar^T h + |h|^2 / eps` and its gradient
/// `grad f + J (mu_bar + 2 h / eps)`.
pub fn auglag_eval(
    problem: &NlpProblem,
    x: &DVector<f64>,
    mu_bar: &DVector<f64>,
    epsilon: f64,
) -> Result<AugLagEval> {
    check_len("x", problem.n(), x.len())?;
    check_len("mu_bar", problem.p(), mu_bar.len())?;
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    Ok(auglag_unchecked(problem, x, mu_bar, epsilon))
}

fn auglag_value(problem: &NlpProblem, x: &DVector<f64>, mu_bar: &DVector<f64>, epsilon: f64) -> f64 {
    let h = problem.h(x);
    problem.f(x) + mu_bar.dot(&h) + h.norm_squared() / epsilon
}

fn auglag_unchecked(problem: &NlpProblem, x: &DVector<f64>, mu_bar: &DVector<f64>, epsilon: f64) -> AugLagEval {
    let h = problem.h(x);
    let value = problem.f(x) + mu_bar.dot(&h) + h.norm_squared() / epsilon;
    let first_order = mu_bar + &h * (2.0 / epsilon);
    let grad = problem.grad_f(x) + problem.jac_h(x) * first_order;
    AugLagEval { value, grad, h }
}

/// `hess_lag(x, mu_bar + 2h/eps) + (2/eps) J J^T`.
fn auglag_hessian(
    problem: &NlpProblem,
    x: &DVector<f64>,
    mu_bar: &DVector<f64>,
    epsilon: f64,
    h: &DVector<f64>,
) -> DMatrix<f64> {
    let jac = problem.jac_h(x);
    let first_order = mu_bar + h * (2.0 / epsilon);
    problem.hess_lag(x, &first_order) + (&jac * jac.transpose()) * (2.0 / epsilon)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerStatus {
    Converged,
    IterationCap,
    Stalled,
}

#[derive(Debug, Clone)]
pub struct InnerResult {
    pub x: DVector<f64>,
    pub pg_residual_inf: f64,
    pub iterations: usize,
    pub status: InnerStatus,
    /// `L_a` at the start point and after every iteration.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerOptions {
    pub max_iter: usize,
    /// Window parameter of the bound-constrained active-set estimate.
    pub active_nu: f64,
    pub armijo: f64,
    pub backtrack: f64,
    pub min_step: f64,
    pub cg_rel_tol: f64,
}

impl Default for InnerOptions {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            active_nu: 1e-6,
            armijo: 1e-4,
            backtrack: 0.5,
            min_step: 1e-16,
            cg_rel_tol: 0.1,
        }
    }
}

/// `||x - P(x - grad_x L_a)||_inf`.
pub fn pg_residual_inf(problem: &NlpProblem, x: &DVector<f64>, grad: &DVector<f64>) -> f64 {
    inf_norm(&projected_gradient(x, grad, problem.lower(), problem.upper()))
}

/// Truncated CG on `H d = -g`. Stops at relative residual `rel_tol` or on
/// non-positive curvature, returning the iterate reached so far (or `-g`
/// when curvature fails on the first step).
fn truncated_cg(hess: &DMatrix<f64>, g: &DVector<f64>, rel_tol: f64) -> DVector<f64> {
    let m = g.len();
    let mut d = DVector::zeros(m);
    let mut r = -g;
    let mut dir = r.clone();
    let g_norm = g.norm();
    let mut rr = r.norm_squared();
    let max_iter = 2 * m + 10;
    for it in 0..max_iter {
        if rr.sqrt() <= rel_tol * g_norm {
            break;
        }
        let hd = hess * &dir;
        let curv = dir.dot(&hd);
        if curv <= 0.0 {
            if it == 0 {
                return -g;
            }
            break;
        }
        let alpha = rr / curv;
        d.axpy(alpha, &dir, 1.0);
        r.axpy(-alpha, &hd, 1.0);
        let rr_new = r.norm_squared();
        dir = &r + &dir * (rr_new / rr);
        rr = rr_new;
    }
    d
}

/// Approximately minimizes `L_a(., mu_bar; epsilon)` over the box, stopping
/// once `||x - P(x - grad L_a)||_inf <= tau`.
pub fn inner_solve(
    problem: &NlpProblem,
    x_start: &DVector<f64>,
    mu_bar: &DVector<f64>,
    epsilon: f64,
    tau: f64,
    max_iter: usize,
) -> Result<InnerResult> {
    inner_solve_with(
        problem,
        x_start,
        mu_bar,
        epsilon,
        tau,
        &InnerOptions {
            max_iter,
            ..InnerOptions::default()
        },
    )
}

pub fn inner_solve_with(
    problem: &NlpProblem,
    x_start: &DVector<f64>,
    mu_bar: &DVector<f64>,
    epsilon: f64,
    tau: f64,
    opts: &InnerOptions,
) -> Result<InnerResult> {
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter(format!("tau must be positive, got {tau}")));
    }
    let (lower, upper) = (problem.lower(), problem.upper());
    let mut x = x_start.clone();
    let mut eval = auglag_eval(problem, &x, mu_bar, epsilon)?;
    let mut values = vec![eval.value];
    let value_at = |x: &DVector<f64>| auglag_value(problem, x, mu_bar, epsilon);

    let mut iterations = 0;
    let status = loop {
        let pg = pg_residual_inf(problem, &x, &eval.grad);
        if pg <= tau {
            break InnerStatus::Converged;
        }
        if iterations >= opts.max_iter {
            break InnerStatus::IterationCap;
        }

        let mut active = active_sets_from_gradient(&x, &eval.grad, lower, upper, opts.active_nu);
        let mut pinned = x.clone();
        for &i in &active.lower_active {
            pinned[i] = lower[i];
        }
        for &i in &active.upper_active {
            pinned[i] = upper[i];
        }
        if pinned != x {
            let v = value_at(&pinned);
            if v <= eval.value {
                x = pinned;
                eval = auglag_unchecked(problem, &x, mu_bar, epsilon);
            } else {
                // Keep the point; only variables already on a bound stay fixed.
                let on_bound = |i: &usize| x[*i] == lower[*i] || x[*i] == upper[*i];
                active.lower_active.retain(on_bound);
                active.upper_active.retain(on_bound);
                active.free = (0..x.len()).filter(|i| !active.is_active(*i)).collect();
            }
        }

        let free = &active.free;
        let g_free = DVector::from_iterator(free.len(), free.iter().map(|&i| eval.grad[i]));
        let hess = auglag_hessian(problem, &x, mu_bar, epsilon, &eval.h);
        let hess_free = DMatrix::from_fn(free.len(), free.len(), |a, b| hess[(free[a], free[b])]);

        let mut dir = truncated_cg(&hess_free, &g_free, opts.cg_rel_tol);
        if dir.dot(&g_free) >= 0.0 {
            dir = -&g_free;
        }

        let mut accepted = line_search(problem, &x, &eval, free, &dir, &value_at, opts);
        if accepted.is_none() && dir != -&g_free {
            accepted = line_search(problem, &x, &eval, free, &(-&g_free), &value_at, opts);
        }
        iterations += 1;
        match accepted {
            Some(next) => {
                x = next;
                eval = auglag_unchecked(problem, &x, mu_bar, epsilon);
                values.push(eval.value);
            }
            None => {
                values.push(eval.value);
                break InnerStatus::Stalled;
            }
        }
    };

    Ok(InnerResult {
        pg_residual_inf: pg_residual_inf(problem, &x, &eval.grad),
        x,
        iterations,
        status,
        values,
    })
}

/// Projected Armijo backtracking along `dir` on the free variables.
fn line_search(
    problem: &NlpProblem,
    x: &DVector<f64>,
    eval: &AugLagEval,
    free: &[usize],
    dir: &DVector<f64>,
    value_at: &impl Fn(&DVector<f64>) -> f64,
    opts: &InnerOptions,
) -> Option<DVector<f64>> {
    let (lower, upper) = (problem.lower(), problem.upper());
    let mut step = 1.0;
    while step >= opts.min_step {
        let mut trial = x.clone();
        let mut slope = 0.0;
        for (a, &i) in free.iter().enumerate() {
            trial[i] = (x[i] + step * dir[a]).max(lower[i]).min(upper[i]);
            slope += eval.grad[i] * (trial[i] - x[i]);
        }
        if slope < 0.0 {
            let v = value_at(&trial);
            if v <= eval.value + opts.armijo * slope {
                return Some(trial);
            }
        }
        step *= opts.backtrack;
    }
    None
}
