//! Evaluable problem model, derivative validation and slack reformulation.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Error, Result};

pub type ScalarFn = Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
pub type MatrixFn = Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;
pub type HessLagFn = Arc<dyn Fn(&DVector<f64>, &DVector<f64>) -> DMatrix<f64> + Send + Sync>;

/// Default finite upper bound given to slack variables.
pub const DEFAULT_SLACK_UPPER: f64 = 1e8;

/// Analytic KKT pair of a problem.
#[derive(Debug, Clone, PartialEq)]
pub struct KnownSolution {
    pub x: DVector<f64>,
    pub mu: DVector<f64>,
}

/// `min f(x)  s.t.  h(x) = 0,  lower <= x <= upper` with exact first and
/// second derivatives.
///
/// The Jacobian is stored `n x p`: column `t` is the gradient of `h_t`.
/// `hess_lag(x, mu)` returns the Hessian of `f + mu^T h`.
///
/// All callbacks are pure; a problem can be shared across threads.
#[derive(Clone)]
pub struct NlpProblem {
    n: usize,
    p: usize,
    lower: DVector<f64>,
    upper: DVector<f64>,
    x0: DVector<f64>,
    f: ScalarFn,
    grad_f: VectorFn,
    h: VectorFn,
    jac_h: MatrixFn,
    hess_lag: HessLagFn,
    known_solution: Option<KnownSolution>,
}

impl fmt::Debug for NlpProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NlpProblem")
            .field("n", &self.n)
            .field("p", &self.p)
            .field("lower", &self.lower.as_slice())
            .field("upper", &self.upper.as_slice())
            .field("x0", &self.x0.as_slice())
            .finish_non_exhaustive()
    }
}

impl NlpProblem {
    /// A problem with zero objective and no equality constraints on the box
    /// `[lower, upper]`. Use the `with_*` methods to fill it in.
    pub fn new(lower: DVector<f64>, upper: DVector<f64>, x0: DVector<f64>) -> Result<Self> {
        let n = lower.len();
        if n == 0 {
            return Err(Error::InvalidParameter("problem needs at least one variable".into()));
        }
        check_len("upper bounds", n, upper.len())?;
        check_len("starting point", n, x0.len())?;
        Ok(Self {
            n,
            p: 0,
            lower,
            upper,
            x0,
            f: Arc::new(|_| 0.0),
            grad_f: Arc::new(move |_| DVector::zeros(n)),
            h: Arc::new(|_| DVector::zeros(0)),
            jac_h: Arc::new(move |_| DMatrix::zeros(n, 0)),
            hess_lag: Arc::new(move |_, _| DMatrix::zeros(n, n)),
            known_solution: None,
        })
    }

    pub fn with_objective<F, G>(mut self, f: F, grad_f: G) -> Self
    where
        F: Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
        G: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    {
        self.f = Arc::new(f);
        self.grad_f = Arc::new(grad_f);
        self
    }

    pub fn with_constraints<H, J>(mut self, p: usize, h: H, jac_h: J) -> Self
    where
        H: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
        J: Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    {
        self.p = p;
        self.h = Arc::new(h);
        self.jac_h = Arc::new(jac_h);
        self
    }

    pub fn with_hessian<H>(mut self, hess_lag: H) -> Self
    where
        H: Fn(&DVector<f64>, &DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    {
        self.hess_lag = Arc::new(hess_lag);
        self
    }

    pub fn with_known_solution(mut self, x: DVector<f64>, mu: DVector<f64>) -> Result<Self> {
        check_len("known solution x", self.n, x.len())?;
        check_len("known solution mu", self.p, mu.len())?;
        self.known_solution = Some(KnownSolution { x, mu });
        Ok(self)
    }

    pub fn with_x0(mut self, x0: DVector<f64>) -> Result<Self> {
        check_len("starting point", self.n, x0.len())?;
        self.x0 = x0;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn lower(&self) -> &DVector<f64> {
        &self.lower
    }

    pub fn upper(&self) -> &DVector<f64> {
        &self.upper
    }

    pub fn x0(&self) -> &DVector<f64> {
        &self.x0
    }

    pub fn known_solution(&self) -> Option<&KnownSolution> {
        self.known_solution.as_ref()
    }

    pub fn f(&self, x: &DVector<f64>) -> f64 {
        (self.f)(x)
    }

    pub fn grad_f(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.grad_f)(x)
    }

    pub fn h(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.h)(x)
    }

    pub fn jac_h(&self, x: &DVector<f64>) -> DMatrix<f64> {
        (self.jac_h)(x)
    }

    pub fn hess_lag(&self, x: &DVector<f64>, mu: &DVector<f64>) -> DMatrix<f64> {
        (self.hess_lag)(x, mu)
    }

    /// Infinity norm of the constraint violation.
    pub fn h_inf(&self, x: &DVector<f64>) -> f64 {
        inf_norm(&self.h(x))
    }
}

pub(crate) fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |m, a| m.max(a.abs()))
}

/// One finding of [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Issue {
    BoundsNotOrdered { index: usize, lower: f64, upper: f64 },
    StartOutsideBounds { index: usize, value: f64 },
    GradientMismatch { index: usize, rel_error: f64 },
    JacobianMismatch { constraint: usize, index: usize, rel_error: f64 },
    HessianNotSymmetric { max_asymmetry: f64 },
    HessianMismatch { rel_error: f64 },
    WrongShape { what: &'static str },
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::BoundsNotOrdered { index, lower, upper } => {
                write!(f, "bounds not strictly ordered at {index}: {lower} >= {upper}")
            }
            Issue::StartOutsideBounds { index, value } => {
                write!(f, "x0[{index}] = {value} lies outside its bounds")
            }
            Issue::GradientMismatch { index, rel_error } => {
                write!(f, "gradient component {index} disagrees with finite differences (rel. error {rel_error:.3e})")
            }
            Issue::JacobianMismatch { constraint, index, rel_error } => write!(
                f,
                "jacobian entry ({index}, {constraint}) disagrees with finite differences (rel. error {rel_error:.3e})"
            ),
            Issue::HessianNotSymmetric { max_asymmetry } => {
                write!(f, "hessian of the Lagrangian is not symmetric (max |H - H^T| = {max_asymmetry:.3e})")
            }
            Issue::HessianMismatch { rel_error } => write!(
                f,
                "hessian of the Lagrangian disagrees with finite differences (rel. error {rel_error:.3e})"
            ),
            Issue::WrongShape { what } => write!(f, "{what} has the wrong shape"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.issues.is_empty()
    }
}

pub const GRADIENT_RTOL: f64 = 1e-5;
pub const HESSIAN_RTOL: f64 = 1e-4;

fn fd_step(xi: f64) -> f64 {
    6e-6 * xi.abs().max(1.0)
}

/// Central-difference gradient of a scalar function.
pub fn fd_gradient(f: impl Fn(&DVector<f64>) -> f64, x: &DVector<f64>) -> DVector<f64> {
    let mut g = DVector::zeros(x.len());
    let mut xp = x.clone();
    for i in 0..x.len() {
        let step = fd_step(x[i]);
        xp[i] = x[i] + step;
        let fp = f(&xp);
        xp[i] = x[i] - step;
        let fm = f(&xp);
        xp[i] = x[i];
        g[i] = (fp - fm) / (2.0 * step);
    }
    g
}

/// Central-difference Jacobian (`n x m`, column `t` = gradient of component `t`)
/// of a vector function.
pub fn fd_jacobian(
    f: impl Fn(&DVector<f64>) -> DVector<f64>,
    x: &DVector<f64>,
    m: usize,
) -> DMatrix<f64> {
    let mut jac = DMatrix::zeros(x.len(), m);
    let mut xp = x.clone();
    for i in 0..x.len() {
        let step = fd_step(x[i]);
        xp[i] = x[i] + step;
        let fp = f(&xp);
        xp[i] = x[i] - step;
        let fm = f(&xp);
        xp[i] = x[i];
        for t in 0..m {
            jac[(i, t)] = (fp[t] - fm[t]) / (2.0 * step);
        }
    }
    jac
}

/// Checks bound ordering, the starting point and the analytic derivatives
/// against central finite differences at `x0`.
pub fn validate(problem: &NlpProblem) -> ValidationReport {
    let mut issues = Vec::new();
    let (n, p) = (problem.n(), problem.p());
    let (lower, upper, x0) = (problem.lower(), problem.upper(), problem.x0());

    for i in 0..n {
        if !(lower[i] < upper[i]) || !lower[i].is_finite() || !upper[i].is_finite() {
            issues.push(Issue::BoundsNotOrdered {
                index: i,
                lower: lower[i],
                upper: upper[i],
            });
        }
        if !(x0[i] >= lower[i] && x0[i] <= upper[i]) {
            issues.push(Issue::StartOutsideBounds {
                index: i,
                value: x0[i],
            });
        }
    }

    let grad = problem.grad_f(x0);
    let h0 = problem.h(x0);
    let jac = problem.jac_h(x0);
    let hess = problem.hess_lag(x0, &DVector::from_element(p, 1.0));
    if grad.len() != n {
        issues.push(Issue::WrongShape { what: "objective gradient" });
    }
    if h0.len() != p {
        issues.push(Issue::WrongShape { what: "constraint vector" });
    }
    if jac.shape() != (n, p) {
        issues.push(Issue::WrongShape { what: "constraint jacobian" });
    }
    if hess.shape() != (n, n) {
        issues.push(Issue::WrongShape { what: "hessian of the Lagrangian" });
    }
    if !issues.is_empty() && issues.iter().any(|i| matches!(i, Issue::WrongShape { .. })) {
        return ValidationReport { issues };
    }

    let grad_fd = fd_gradient(|x| problem.f(x), x0);
    for i in 0..n {
        let rel = (grad[i] - grad_fd[i]).abs() / grad_fd[i].abs().max(1.0);
        if rel > GRADIENT_RTOL {
            issues.push(Issue::GradientMismatch {
                index: i,
                rel_error: rel,
            });
        }
    }

    let jac_fd = fd_jacobian(|x| problem.h(x), x0, p);
    for t in 0..p {
        let scale = jac_fd.column(t).amax().max(1.0);
        for i in 0..n {
            let rel = (jac[(i, t)] - jac_fd[(i, t)]).abs() / scale;
            if rel > GRADIENT_RTOL {
                issues.push(Issue::JacobianMismatch {
                    constraint: t,
                    index: i,
                    rel_error: rel,
                });
            }
        }
    }

    let asym = (&hess - hess.transpose()).amax();
    if asym != 0.0 {
        issues.push(Issue::HessianNotSymmetric {
            max_asymmetry: asym,
        });
    }
    let ones = DVector::from_element(p, 1.0);
    let hess_fd = fd_jacobian(
        |x| problem.grad_f(x) + problem.jac_h(x) * &ones,
        x0,
        n,
    );
    let rel = (&hess - &hess_fd).amax() / hess_fd.amax().max(1.0);
    if rel > HESSIAN_RTOL {
        issues.push(Issue::HessianMismatch { rel_error: rel });
    }

    ValidationReport { issues }
}

/// Rewrites `g(x) <= 0` as `g(x) + s = 0` with slacks `0 <= s <= slack_upper`.
///
/// The constraint callbacks of `problem` are read as the inequality
/// functions `g`; its Hessian callback must return the Hessian of
/// `f + lambda^T g`. The result has `n + q` variables ordered `(x, s)`.
/// Slacks start at `clamp(-g(x0), 0, slack_upper)`.
pub fn reformulate_inequalities(problem: &NlpProblem, slack_upper: f64) -> Result<NlpProblem> {
    if !(slack_upper > 0.0) || !slack_upper.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "slack_upper must be a finite positive number, got {slack_upper}"
        )));
    }
    let (n, q) = (problem.n(), problem.p());
    if q == 0 {
        return Ok(problem.clone());
    }
    let m = n + q;

    let mut lower = DVector::zeros(m);
    let mut upper = DVector::from_element(m, slack_upper);
    lower.rows_mut(0, n).copy_from(problem.lower());
    upper.rows_mut(0, n).copy_from(problem.upper());

    let g0 = problem.h(problem.x0());
    let mut x0 = DVector::zeros(m);
    x0.rows_mut(0, n).copy_from(problem.x0());
    for t in 0..q {
        x0[n + t] = (-g0[t]).clamp(0.0, slack_upper);
    }

    let split = move |z: &DVector<f64>| -> (DVector<f64>, DVector<f64>) {
        (z.rows(0, n).into_owned(), z.rows(n, q).into_owned())
    };

    let (pf, pg, ph, pj, phl) = (
        problem.clone(),
        problem.clone(),
        problem.clone(),
        problem.clone(),
        problem.clone(),
    );
    let reformulated = NlpProblem::new(lower, upper, x0)?
        .with_objective(
            move |z| pf.f(&split(z).0),
            move |z| {
                let mut g = DVector::zeros(m);
                g.rows_mut(0, n).copy_from(&pg.grad_f(&split(z).0));
                g
            },
        )
        .with_constraints(
            q,
            move |z| {
                let (x, s) = split(z);
                ph.h(&x) + s
            },
            move |z| {
                let mut jac = DMatrix::zeros(m, q);
                jac.view_mut((0, 0), (n, q)).copy_from(&pj.jac_h(&split(z).0));
                for t in 0..q {
                    jac[(n + t, t)] = 1.0;
                }
                jac
            },
        )
        .with_hessian(move |z, mu| {
            let mut hess = DMatrix::zeros(m, m);
            hess.view_mut((0, 0), (n, n))
                .copy_from(&phl.hess_lag(&split(z).0, mu));
            hess
        });
    Ok(reformulated)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn square() -> NlpProblem {
        NlpProblem::new(dvector![-5.0, -5.0], dvector![5.0, 5.0], dvector![3.0, 1.0])
            .unwrap()
            .with_objective(|x| x.norm_squared(), |x| 2.0 * x)
            .with_hessian(|_, _| DMatrix::identity(2, 2) * 2.0)
    }

    #[test]
    fn clean_problem_validates() {
        assert!(validate(&square()).is_clean());
    }

    #[test]
    fn degenerate_bounds_are_flagged() {
        let p = NlpProblem::new(dvector![1.0], dvector![1.0], dvector![1.0])
            .unwrap()
            .with_objective(|x| x[0] * x[0], |x| 2.0 * x)
            .with_hessian(|_, _| DMatrix::identity(1, 1) * 2.0);
        let report = validate(&p);
        assert_eq!(
            report.issues,
            vec![Issue::BoundsNotOrdered {
                index: 0,
                lower: 1.0,
                upper: 1.0
            }]
        );
        assert!(report.issues[0].to_string().contains("bounds not strictly ordered"));
    }

    #[test]
    fn start_outside_box_is_flagged() {
        let p = square().with_x0(dvector![6.0, 0.0]).unwrap();
        assert_eq!(
            validate(&p).issues,
            vec![Issue::StartOutsideBounds { index: 0, value: 6.0 }]
        );
    }

    #[test]
    fn wrong_gradient_component_reports_relative_error() {
        // d/dx0 of |x|^2 at x0 = 3 is 6; the callback returns 6.6.
        let p = square().with_objective(
            |x| x.norm_squared(),
            |x| dvector![2.2 * x[0], 2.0 * x[1]],
        );
        let report = validate(&p);
        let hit = report
            .issues
            .iter()
            .find_map(|i| match i {
                Issue::GradientMismatch { index, rel_error } => Some((*index, *rel_error)),
                _ => None,
            })
            .expect("gradient mismatch reported");
        assert_eq!(hit.0, 0);
        assert!((hit.1 - 0.1).abs() < 1e-6, "rel error {}", hit.1);
    }

    #[test]
    fn wrong_jacobian_is_flagged() {
        let p = square().with_constraints(
            1,
            |x| dvector![x[0] * x[1]],
            |x| DMatrix::from_column_slice(2, 1, &[x[1], x[1]]),
        );
        let report = validate(&p);
        assert!(report.issues.iter().any(|i| matches!(
            i,
            Issue::JacobianMismatch { constraint: 0, index: 1, .. }
        )));
    }

    #[test]
    fn slack_upper_must_be_positive() {
        assert!(reformulate_inequalities(&square(), 0.0).is_err());
        assert!(reformulate_inequalities(&square(), -1.0).is_err());
    }

    #[test]
    fn empty_reformulation_is_identity() {
        let p = square();
        let r = reformulate_inequalities(&p, 1e8).unwrap();
        assert_eq!(r.n(), 2);
        assert_eq!(r.p(), 0);
        assert_eq!(r.x0(), p.x0());
        assert!(validate(&r).is_clean());
    }

    #[test]
    fn slack_definition() {
        // g(x) = x - 1 <= 0 on [-2, 2]
        let p = NlpProblem::new(dvector![-2.0], dvector![2.0], dvector![0.0])
            .unwrap()
            .with_objective(|x| x[0], |_| dvector![1.0])
            .with_constraints(
                1,
                |x| dvector![x[0] - 1.0],
                |_| DMatrix::from_element(1, 1, 1.0),
            );
        let r = reformulate_inequalities(&p, 1e8).unwrap();
        assert_eq!((r.n(), r.p()), (2, 1));
        assert_eq!(r.lower(), &dvector![-2.0, 0.0]);
        assert_eq!(r.upper(), &dvector![2.0, 1e8]);
        assert_eq!(r.x0(), &dvector![0.0, 1.0]);
        assert_eq!(r.h(&dvector![0.5, 0.25]), dvector![-0.25]);
        assert_eq!(r.jac_h(&dvector![0.5, 0.25]), DMatrix::from_column_slice(2, 1, &[1.0, 1.0]));
        assert!(validate(&r).is_clean());
    }
}
