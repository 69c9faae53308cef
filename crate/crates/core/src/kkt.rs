//! Lagrangian quantities, bound-multiplier estimates, active-set estimates
//! and KKT residuals.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Result};
use crate::linalg::projected_gradient;
use crate::model::{inf_norm, NlpProblem};

/// Upper cap of the active-set window parameter.
pub const NU_MAX: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct LagrangianEval {
    pub value: f64,
    pub grad_x: DVector<f64>,
    pub h: DVector<f64>,
    pub jac_h: DMatrix<f64>,
}

/// Closed-form estimates of the multipliers of `x >= l` (`sigma`) and
/// `x <= u` (`rho`).
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierEstimates {
    pub sigma: DVector<f64>,
    pub rho: DVector<f64>,
}

/// Partition of the variables into estimated lower-active, upper-active and
/// free sets. Index lists are sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveSetEstimate {
    pub lower_active: Vec<usize>,
    pub upper_active: Vec<usize>,
    pub free: Vec<usize>,
    pub nu: f64,
}

impl ActiveSetEstimate {
    /// Everything free.
    pub fn all_free(n: usize) -> Self {
        Self {
            lower_active: Vec::new(),
            upper_active: Vec::new(),
            free: (0..n).collect(),
            nu: 0.0,
        }
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.lower_active.binary_search(&i).is_ok() || self.upper_active.binary_search(&i).is_ok()
    }
}

fn check_point(problem: &NlpProblem, x: &DVector<f64>, mu: &DVector<f64>) -> Result<()> {
    check_len("x", problem.n(), x.len())?;
    check_len("mu", problem.p(), mu.len())
}

/// `L(x, mu) = f(x) + mu^T h(x)` and its gradient in `x`.
pub fn lagrangian(problem: &NlpProblem, x: &DVector<f64>, mu: &DVector<f64>) -> Result<LagrangianEval> {
    check_point(problem, x, mu)?;
    let h = problem.h(x);
    let jac_h = problem.jac_h(x);
    check_len("h(x)", problem.p(), h.len())?;
    check_len("jacobian rows", problem.n(), jac_h.nrows())?;
    check_len("jacobian columns", problem.p(), jac_h.ncols())?;
    let value = problem.f(x) + mu.dot(&h);
    let grad_x = problem.grad_f(x) + &jac_h * mu;
    Ok(LagrangianEval {
        value,
        grad_x,
        h,
        jac_h,
    })
}

/// Bound-multiplier estimates for an arbitrary gradient `grad` (the
/// Lagrangian gradient for the full problem, or the augmented Lagrangian
/// gradient inside the bound-constrained subproblem).
pub fn multipliers_from_gradient(
    x: &DVector<f64>,
    grad: &DVector<f64>,
    lower: &DVector<f64>,
    upper: &DVector<f64>,
) -> MultiplierEstimates {
    let n = x.len();
    let mut sigma = DVector::zeros(n);
    let mut rho = DVector::zeros(n);
    for i in 0..n {
        let dl = (lower[i] - x[i]).powi(2);
        let du = (upper[i] - x[i]).powi(2);
        let denom = dl + du;
        sigma[i] = du / denom * grad[i];
        rho[i] = -(dl / denom) * grad[i];
    }
    MultiplierEstimates { sigma, rho }
}

pub fn multiplier_functions(
    problem: &NlpProblem,
    x: &DVector<f64>,
    mu: &DVector<f64>,
) -> Result<MultiplierEstimates> {
    let lag = lagrangian(problem, x, mu)?;
    Ok(multipliers_from_gradient(
        x,
        &lag.grad_x,
        problem.lower(),
        problem.upper(),
    ))
}

/// Active-set estimate from a gradient and its multiplier estimates. The
/// sign tests are strict, with no tolerance.
pub fn active_sets_from_gradient(
    x: &DVector<f64>,
    grad: &DVector<f64>,
    lower: &DVector<f64>,
    upper: &DVector<f64>,
    nu: f64,
) -> ActiveSetEstimate {
    let mult = multipliers_from_gradient(x, grad, lower, upper);
    let mut est = ActiveSetEstimate {
        lower_active: Vec::new(),
        upper_active: Vec::new(),
        free: Vec::new(),
        nu,
    };
    for i in 0..x.len() {
        if grad[i] > 0.0 && lower[i] <= x[i] && x[i] <= lower[i] + nu * mult.sigma[i] {
            est.lower_active.push(i);
        } else if grad[i] < 0.0 && upper[i] - nu * mult.rho[i] <= x[i] && x[i] <= upper[i] {
            est.upper_active.push(i);
        } else {
            est.free.push(i);
        }
    }
    est
}

pub fn estimate_active_sets(
    problem: &NlpProblem,
    x: &DVector<f64>,
    mu: &DVector<f64>,
    nu: f64,
) -> Result<ActiveSetEstimate> {
    let lag = lagrangian(problem, x, mu)?;
    Ok(active_sets_from_gradient(
        x,
        &lag.grad_x,
        problem.lower(),
        problem.upper(),
        nu,
    ))
}

/// `nu = min(1e-6, ||x - P(x - grad_x L)||^-3)` (Euclidean norm), with a
/// zero residual mapped to the cap.
pub fn nu_from_residual_norm(norm: f64) -> f64 {
    if norm == 0.0 {
        NU_MAX
    } else {
        NU_MAX.min(norm.powi(-3))
    }
}

pub fn nu_rule(problem: &NlpProblem, x: &DVector<f64>, mu: &DVector<f64>) -> Result<f64> {
    let lag = lagrangian(problem, x, mu)?;
    let r = projected_gradient(x, &lag.grad_x, problem.lower(), problem.upper());
    Ok(nu_from_residual_norm(r.norm()))
}

/// Projected-gradient stationarity and constraint violation, both in the
/// infinity norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktResidual {
    pub stationarity: f64,
    pub feasibility: f64,
}

pub fn kkt_residual(problem: &NlpProblem, x: &DVector<f64>, mu: &DVector<f64>) -> Result<KktResidual> {
    let lag = lagrangian(problem, x, mu)?;
    Ok(residual_from_eval(problem, x, &lag))
}

pub(crate) fn residual_from_eval(problem: &NlpProblem, x: &DVector<f64>, lag: &LagrangianEval) -> KktResidual {
    let r = projected_gradient(x, &lag.grad_x, problem.lower(), problem.upper());
    KktResidual {
        stationarity: inf_norm(&r),
        feasibility: inf_norm(&lag.h),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    /// f = x^2, h = x - 1 on [-10, 10].
    fn scalar() -> NlpProblem {
        NlpProblem::new(dvector![-10.0], dvector![10.0], dvector![2.0])
            .unwrap()
            .with_objective(|x| x[0] * x[0], |x| dvector![2.0 * x[0]])
            .with_constraints(
                1,
                |x| dvector![x[0] - 1.0],
                |_| DMatrix::from_element(1, 1, 1.0),
            )
    }

    /// f = g^T x on the box, no constraints.
    fn linear(g: DVector<f64>, l: DVector<f64>, u: DVector<f64>, x0: DVector<f64>) -> NlpProblem {
        let g2 = g.clone();
        NlpProblem::new(l, u, x0)
            .unwrap()
            .with_objective(move |x| g.dot(x), move |_| g2.clone())
    }

    #[test]
    fn lagrangian_value_and_gradient() {
        let p = scalar();
        let lag = lagrangian(&p, &dvector![2.0], &dvector![3.0]).unwrap();
        assert_eq!(lag.value, 7.0);
        assert_eq!(lag.grad_x, dvector![7.0]);

        let zero = lagrangian(&p, &dvector![2.0], &dvector![0.0]).unwrap();
        assert_eq!(zero.value, 4.0);
        assert_eq!(zero.grad_x, dvector![4.0]);

        let feasible = lagrangian(&p, &dvector![1.0], &dvector![123.0]).unwrap();
        assert_eq!(feasible.value, 1.0);
    }

    #[test]
    fn lagrangian_rejects_wrong_dimensions() {
        let p = scalar();
        assert!(lagrangian(&p, &dvector![1.0, 2.0], &dvector![0.0]).is_err());
        assert!(lagrangian(&p, &dvector![1.0], &dvector![]).is_err());
    }

    #[test]
    fn multiplier_function_examples() {
        let (l, u) = (dvector![0.0], dvector![2.0]);
        let m = multipliers_from_gradient(&dvector![1.0], &dvector![4.0], &l, &u);
        assert_eq!((m.sigma[0], m.rho[0]), (2.0, -2.0));

        let m = multipliers_from_gradient(&dvector![0.0], &dvector![3.0], &l, &u);
        assert_eq!((m.sigma[0], m.rho[0]), (3.0, 0.0));

        let m = multipliers_from_gradient(&dvector![0.7], &dvector![0.0], &l, &u);
        assert_eq!((m.sigma[0], m.rho[0]), (0.0, 0.0));
    }

    #[test]
    fn active_set_examples() {
        let (l, u) = (dvector![0.0], dvector![2.0]);
        let at_bound = active_sets_from_gradient(&dvector![0.0], &dvector![1.0], &l, &u, 1e-6);
        assert_eq!(at_bound.lower_active, vec![0]);

        // sigma = 1.999^2 / (0.001^2 + 1.999^2) * 4 ~ 3.996, window ~ 0.03996
        let near = active_sets_from_gradient(&dvector![0.001], &dvector![4.0], &l, &u, 0.01);
        assert_eq!(near.lower_active, vec![0]);
        assert!(near.free.is_empty());

        let flat = active_sets_from_gradient(&dvector![0.0], &dvector![0.0], &l, &u, 1.0);
        assert_eq!(flat.free, vec![0]);

        let upper = active_sets_from_gradient(&dvector![2.0], &dvector![-1.0], &l, &u, 1e-6);
        assert_eq!(upper.upper_active, vec![0]);
    }

    #[test]
    fn nu_rule_examples() {
        assert_eq!(nu_from_residual_norm(10.0), 1e-6);
        assert_eq!(nu_from_residual_norm(0.0), 1e-6);
        assert_eq!(nu_from_residual_norm(1e-3), 1e-6);
        assert_eq!(nu_from_residual_norm(1e3), 1e-9);

        // interior point, grad = (3, -4): residual norm 5 -> 5^-3 = 8e-3, capped.
        let p = linear(
            dvector![3.0, -4.0],
            dvector![-100.0, -100.0],
            dvector![100.0, 100.0],
            dvector![0.0, 0.0],
        );
        assert_eq!(nu_rule(&p, &dvector![0.0, 0.0], &dvector![]).unwrap(), 1e-6);
    }

    #[test]
    fn residual_examples() {
        let p = linear(
            dvector![3.0, -4.0],
            dvector![-100.0, -100.0],
            dvector![100.0, 100.0],
            dvector![0.0, 0.0],
        );
        let r = kkt_residual(&p, &dvector![0.0, 0.0], &dvector![]).unwrap();
        assert_eq!(r.stationarity, 4.0);
        assert_eq!(r.feasibility, 0.0);

        let q = linear(dvector![3.0], dvector![0.0], dvector![1.0], dvector![0.0]);
        let r = kkt_residual(&q, &dvector![0.0], &dvector![]).unwrap();
        assert_eq!(r.stationarity, 0.0);
    }
}
