//! Newton step on the KKT system restricted to the estimated free variables.
//!
//! With `N` the free set and `B` the estimated active set, the step solves
//!
//! ```text
//! [ H_NN   J_N ] [ d_x ]     [ grad_N L ]
//! [ J_N^T   0  ] [ d_mu ] = -[    h     ]
//! ```
//!
//! then projects `x_N + d_x` onto the box and pins `x_B` to its bounds.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::kkt::{lagrangian, ActiveSetEstimate, LagrangianEval};
use crate::linalg::{default_drop_tol, factor_symmetric_indefinite};
use crate::model::{inf_norm, NlpProblem};

#[derive(Debug, Clone)]
pub struct NewtonTrial {
    /// Free indices, in the order of `d_x_free`.
    pub free: Vec<usize>,
    pub d_x_free: DVector<f64>,
    pub d_mu: DVector<f64>,
    pub x_trial: DVector<f64>,
    /// `mu_bar + d_mu`.
    pub mu_trial: DVector<f64>,
    /// `||(d_x_free, d_mu, (x_trial - x)_B)||_2`.
    pub acceptance_norm: f64,
    /// `||h(x_trial)||_inf`.
    pub trial_feasibility: f64,
}

impl NewtonTrial {
    /// `||(d_x_free, d_mu)||_2`.
    pub fn direction_norm(&self) -> f64 {
        (self.d_x_free.norm_squared() + self.d_mu.norm_squared()).sqrt()
    }
}

fn assemble(
    hess: &DMatrix<f64>,
    lag: &LagrangianEval,
    free: &[usize],
) -> (DMatrix<f64>, DVector<f64>) {
    let nf = free.len();
    let p = lag.h.len();
    let mut k = DMatrix::zeros(nf + p, nf + p);
    let mut rhs = DVector::zeros(nf + p);
    for (a, &i) in free.iter().enumerate() {
        for (b, &j) in free.iter().enumerate() {
            k[(a, b)] = hess[(i, j)];
        }
        for t in 0..p {
            k[(a, nf + t)] = lag.jac_h[(i, t)];
            k[(nf + t, a)] = lag.jac_h[(i, t)];
        }
        rhs[a] = -lag.grad_x[i];
    }
    for t in 0..p {
        rhs[nf + t] = -lag.h[t];
    }
    // exact symmetry regardless of round-off in the user Hessian
    for a in 0..nf {
        for b in (a + 1)..nf {
            let v = 0.5 * (k[(a, b)] + k[(b, a)]);
            k[(a, b)] = v;
            k[(b, a)] = v;
        }
    }
    (k, rhs)
}

/// Reduced KKT matrix and right-hand side at `(x, mu_bar)` for the free set
/// of `active`.
pub fn assemble_reduced_kkt(
    problem: &NlpProblem,
    x: &DVector<f64>,
    mu_bar: &DVector<f64>,
    active: &ActiveSetEstimate,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let lag = lagrangian(problem, x, mu_bar)?;
    let hess = problem.hess_lag(x, mu_bar);
    Ok(assemble(&hess, &lag, &active.free))
}

/// Solves the reduced system and builds the trial point. Returns `None`
/// when the system is singular or the solve fails its residual check.
pub fn compute_trial(
    problem: &NlpProblem,
    x: &DVector<f64>,
    mu_bar: &DVector<f64>,
    active: &ActiveSetEstimate,
) -> Result<Option<NewtonTrial>> {
    let lag = lagrangian(problem, x, mu_bar)?;
    let hess = problem.hess_lag(x, mu_bar);
    let (kmat, rhs) = assemble(&hess, &lag, &active.free);
    let fact = factor_symmetric_indefinite(&kmat, default_drop_tol(&kmat))?;
    let sol = match fact.solve(&rhs) {
        Ok(sol) => sol,
        Err(_) => return Ok(None),
    };

    let nf = active.free.len();
    let d_x_free = sol.rows(0, nf).into_owned();
    let d_mu = sol.rows(nf, problem.p()).into_owned();
    let (lower, upper) = (problem.lower(), problem.upper());

    let mut x_trial = x.clone();
    for (a, &i) in active.free.iter().enumerate() {
        x_trial[i] = (x[i] + d_x_free[a]).max(lower[i]).min(upper[i]);
    }
    let mut bound_shift = 0.0;
    for &i in &active.lower_active {
        x_trial[i] = lower[i];
        bound_shift += (lower[i] - x[i]).powi(2);
    }
    for &i in &active.upper_active {
        x_trial[i] = upper[i];
        bound_shift += (upper[i] - x[i]).powi(2);
    }

    let acceptance_norm = (d_x_free.norm_squared() + d_mu.norm_squared() + bound_shift).sqrt();
    let trial_feasibility = inf_norm(&problem.h(&x_trial));
    Ok(Some(NewtonTrial {
        free: active.free.clone(),
        mu_trial: mu_bar + &d_mu,
        d_x_free,
        d_mu,
        x_trial,
        acceptance_norm,
        trial_feasibility,
    }))
}

/// `acceptance_norm <= delta`, and, when `strict_feasibility_check` is set,
/// `trial_feasibility <= eta * h_current_inf`.
pub fn acceptance_test(
    trial: &NewtonTrial,
    delta: f64,
    eta: f64,
    h_current_inf: f64,
    strict_feasibility_check: bool,
) -> bool {
    trial.acceptance_norm <= delta
        && (!strict_feasibility_check || trial.trial_feasibility <= eta * h_current_inf)
}
