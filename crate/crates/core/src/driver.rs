//! Outer loop: P-D ALM and the plain augmented Lagrangian baseline.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inner::{inner_solve_with, InnerOptions, InnerStatus};
use crate::kkt::{active_sets_from_gradient, lagrangian, nu_from_residual_norm, residual_from_eval};
use crate::linalg::{project_box_unchecked, projected_gradient};
use crate::model::{inf_norm, NlpProblem};
use crate::newton::{acceptance_test, compute_trial};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Newton acceleration with augmented Lagrangian fallback.
    Pdalm,
    /// Augmented Lagrangian subproblems only.
    Alm,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Pdalm => "pdalm",
            Mode::Alm => "alm",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pdalm" => Ok(Mode::Pdalm),
            "alm" => Ok(Mode::Alm),
            other => Err(Error::InvalidParameter(format!(
                "mode must be pdalm or alm, got {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub mode: Mode,
    pub mu_bar_min: f64,
    pub mu_bar_max: f64,
    pub beta: f64,
    pub eta: f64,
    pub theta: f64,
    pub delta0: f64,
    /// `None` selects [`epsilon0_auto`].
    pub epsilon0: Option<f64>,
    pub tau0: f64,
    pub tau_shrink: f64,
    pub tau_floor: f64,
    pub eps_opt: f64,
    pub eps_feas: f64,
    pub max_outer: usize,
    pub time_limit_s: f64,
    pub strict_feasibility_check: bool,
    /// Fixed active-set window; `None` recomputes it every iteration from
    /// the projected-gradient residual.
    pub nu: Option<f64>,
    pub max_inner: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Pdalm,
            mu_bar_min: -1e12,
            mu_bar_max: 1e12,
            beta: 0.5,
            eta: 0.5,
            theta: 0.1,
            delta0: 1.0,
            epsilon0: None,
            tau0: 1e-1,
            tau_shrink: 0.1,
            tau_floor: 1e-14,
            eps_opt: 1e-6,
            eps_feas: 1e-6,
            max_outer: 400,
            time_limit_s: 3600.0,
            strict_feasibility_check: true,
            nu: None,
            max_inner: 5000,
        }
    }
}

fn open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must lie in (0,1), got {v}")))
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

impl SolverConfig {
    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu_bar_min < self.mu_bar_max) || !self.mu_bar_min.is_finite() || !self.mu_bar_max.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "mu_bar_min must be below mu_bar_max, got [{}, {}]",
                self.mu_bar_min, self.mu_bar_max
            )));
        }
        open_unit("beta", self.beta)?;
        open_unit("eta", self.eta)?;
        open_unit("theta", self.theta)?;
        open_unit("tau_shrink", self.tau_shrink)?;
        positive("delta0", self.delta0)?;
        if let Some(e) = self.epsilon0 {
            positive("epsilon0", e)?;
        }
        positive("tau0", self.tau0)?;
        positive("tau_floor", self.tau_floor)?;
        positive("eps_opt", self.eps_opt)?;
        positive("eps_feas", self.eps_feas)?;
        positive("time_limit_s", self.time_limit_s)?;
        if let Some(nu) = self.nu {
            positive("nu", nu)?;
        }
        if self.max_inner == 0 {
            return Err(Error::InvalidParameter("max_inner must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Newton,
    Subproblem,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    KktSatisfied,
    MaxOuter,
    TimeLimit,
    InnerFailure,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::KktSatisfied => "kkt_satisfied",
            Status::MaxOuter => "max_outer",
            Status::TimeLimit => "time_limit",
            Status::InnerFailure => "inner_failure",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Status {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Status::KktSatisfied, Status::MaxOuter, Status::TimeLimit, Status::InnerFailure]
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown status {s:?}")))
    }
}

/// Primal-dual state at the start of outer iteration `k`; `step_kind` is
/// the step that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Iterate {
    pub k: usize,
    pub x: Vec<f64>,
    pub mu: Vec<f64>,
    pub mu_bar: Vec<f64>,
    pub epsilon: f64,
    pub delta: f64,
    pub tau: f64,
    pub step_kind: StepKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonRecord {
    pub available: bool,
    pub acceptance_norm: Option<f64>,
    pub trial_feasibility: Option<f64>,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnerRecord {
    pub iterations: usize,
    pub status: InnerStatus,
    pub pg_residual_inf: f64,
}

/// Outer iteration `k`: the state `(x_k, mu_bar_k, eps_k, delta_k, tau_k)`,
/// its residuals, and the step taken from it (`StepKind::None` on the
/// terminal record).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub x: Vec<f64>,
    pub mu_bar: Vec<f64>,
    pub f: f64,
    pub stationarity: f64,
    pub feasibility: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub tau: f64,
    pub nu: Option<f64>,
    pub n_lower_active: usize,
    pub n_upper_active: usize,
    pub step_kind: StepKind,
    pub newton: Option<NewtonRecord>,
    pub inner: Option<InnerRecord>,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: Status,
    pub final_iterate: Iterate,
    pub trace: Vec<IterationRecord>,
    pub f_final: f64,
    pub stationarity: f64,
    pub feasibility: f64,
    pub h0_inf: f64,
    pub outer_iterations: usize,
    pub newton_steps_accepted: usize,
    pub inner_iterations_total: usize,
    pub wall_time_s: f64,
    pub config: SolverConfig,
}

/// `mu_bar + (2 / epsilon) h`.
pub fn update_multiplier(mu_bar: &DVector<f64>, h_new: &DVector<f64>, epsilon: f64) -> DVector<f64> {
    mu_bar + h_new * (2.0 / epsilon)
}

pub fn project_multiplier(mu: &DVector<f64>, mu_bar_min: f64, mu_bar_max: f64) -> DVector<f64> {
    mu.map(|m| mu_bar_min.max(m.min(mu_bar_max)))
}

/// Keeps `epsilon` when `h_new_inf <= eta * h_old_inf`, otherwise shrinks it
/// by `theta`.
pub fn update_penalty(epsilon: f64, h_new_inf: f64, h_old_inf: f64, eta: f64, theta: f64) -> f64 {
    if h_new_inf <= eta * h_old_inf {
        epsilon
    } else {
        theta * epsilon
    }
}

/// Scaled stopping test; the feasibility clause is relative to `h0_inf`,
/// or absolute when the start is feasible.
pub fn stop_satisfied(stationarity: f64, grad_f_inf: f64, feasibility: f64, eps_opt: f64, eps_feas: f64, h0_inf: f64) -> bool {
    let feas_tol = if h0_inf > 0.0 { eps_feas * h0_inf } else { eps_feas };
    stationarity <= eps_opt * grad_f_inf.max(1.0) && feasibility <= feas_tol
}

pub fn check_stop(
    problem: &NlpProblem,
    x: &DVector<f64>,
    mu_bar: &DVector<f64>,
    eps_opt: f64,
    eps_feas: f64,
    h0_inf: f64,
) -> Result<bool> {
    let lag = lagrangian(problem, x, mu_bar)?;
    let res = residual_from_eval(problem, x, &lag);
    let grad_f_inf = inf_norm(&problem.grad_f(x));
    Ok(stop_satisfied(res.stationarity, grad_f_inf, res.feasibility, eps_opt, eps_feas, h0_inf))
}

/// `clamp(max(1, |h(x0)|^2 / 2) / (10 max(1, |f(x0)|)), 1e-8, 10)`.
pub fn epsilon0_auto(problem: &NlpProblem, x0: &DVector<f64>) -> f64 {
    epsilon0_from_values(problem.f(x0), problem.h(x0).norm_squared())
}

pub fn epsilon0_from_values(f0: f64, h0_norm_sq: f64) -> f64 {
    let raw = (0.5 * h0_norm_sq).max(1.0) / (10.0 * f0.abs().max(1.0));
    raw.clamp(1e-8, 10.0)
}

fn to_vec(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

/// Runs the outer iteration until the stopping test holds, the iteration or
/// time budget runs out, or the subproblem solver gets stuck.
pub fn solve(problem: &NlpProblem, config: &SolverConfig) -> Result<SolveReport> {
    config.validate()?;
    let start = Instant::now();
    let (lower, upper) = (problem.lower(), problem.upper());
    let p = problem.p();

    let mut x = project_box_unchecked(problem.x0(), lower, upper);
    let mut mu = DVector::zeros(p);
    let mut mu_bar = project_multiplier(&mu, config.mu_bar_min, config.mu_bar_max);
    let mut epsilon = config
        .epsilon0
        .unwrap_or_else(|| epsilon0_auto(problem, &x));
    let mut delta = config.delta0;
    let mut tau = config.tau0.max(config.tau_floor);
    let h0_inf = problem.h_inf(&x);
    let inner_opts = InnerOptions {
        max_iter: config.max_inner,
        ..InnerOptions::default()
    };

    let mut trace = Vec::new();
    let mut newton_steps_accepted = 0;
    let mut inner_iterations_total = 0;
    let mut last_step = StepKind::None;
    let mut k = 0;

    let (status, residual) = loop {
        let lag = lagrangian(problem, &x, &mu_bar)?;
        let res = residual_from_eval(problem, &x, &lag);
        let grad_f_inf = inf_norm(&problem.grad_f(&x));
        let mut record = IterationRecord {
            k,
            x: to_vec(&x),
            mu_bar: to_vec(&mu_bar),
            f: problem.f(&x),
            stationarity: res.stationarity,
            feasibility: res.feasibility,
            epsilon,
            delta,
            tau,
            nu: None,
            n_lower_active: 0,
            n_upper_active: 0,
            step_kind: StepKind::None,
            newton: None,
            inner: None,
            elapsed_s: start.elapsed().as_secs_f64(),
        };

        let terminal = if stop_satisfied(res.stationarity, grad_f_inf, res.feasibility, config.eps_opt, config.eps_feas, h0_inf) {
            Some(Status::KktSatisfied)
        } else if k >= config.max_outer {
            Some(Status::MaxOuter)
        } else if start.elapsed().as_secs_f64() > config.time_limit_s {
            Some(Status::TimeLimit)
        } else {
            None
        };
        if let Some(status) = terminal {
            trace.push(record);
            break (status, res);
        }

        let mut next: Option<(DVector<f64>, DVector<f64>)> = None;
        if config.mode == Mode::Pdalm {
            let nu = config.nu.unwrap_or_else(|| {
                nu_from_residual_norm(projected_gradient(&x, &lag.grad_x, lower, upper).norm())
            });
            let active = active_sets_from_gradient(&x, &lag.grad_x, lower, upper, nu);
            record.nu = Some(nu);
            record.n_lower_active = active.lower_active.len();
            record.n_upper_active = active.upper_active.len();
            let trial = compute_trial(problem, &x, &mu_bar, &active)?;
            let newton = match trial {
                Some(t) => {
                    let accepted = acceptance_test(&t, delta, config.eta, res.feasibility, config.strict_feasibility_check);
                    let rec = NewtonRecord {
                        available: true,
                        acceptance_norm: Some(t.acceptance_norm),
                        trial_feasibility: Some(t.trial_feasibility),
                        accepted,
                    };
                    if accepted {
                        next = Some((t.x_trial, t.mu_trial));
                    }
                    rec
                }
                None => NewtonRecord {
                    available: false,
                    acceptance_norm: None,
                    trial_feasibility: None,
                    accepted: false,
                },
            };
            record.newton = Some(newton);
        }

        let mut stuck = false;
        match next {
            Some((x_new, mu_new)) => {
                x = x_new;
                mu = mu_new;
                delta *= config.beta;
                newton_steps_accepted += 1;
                record.step_kind = StepKind::Newton;
            }
            None => {
                let inner = inner_solve_with(problem, &x, &mu_bar, epsilon, tau, &inner_opts)?;
                inner_iterations_total += inner.iterations;
                record.inner = Some(InnerRecord {
                    iterations: inner.iterations,
                    status: inner.status,
                    pg_residual_inf: inner.pg_residual_inf,
                });
                record.step_kind = StepKind::Subproblem;
                let h_new = problem.h(&inner.x);
                let mu_new = update_multiplier(&mu_bar, &h_new, epsilon);
                let eps_new = update_penalty(epsilon, inf_norm(&h_new), res.feasibility, config.eta, config.theta);
                let mu_bar_new = project_multiplier(&mu_new, config.mu_bar_min, config.mu_bar_max);
                stuck = inner.status == InnerStatus::Stalled
                    && inner.x == x
                    && mu_bar_new == mu_bar
                    && eps_new == epsilon;
                x = inner.x;
                mu = mu_new;
                epsilon = eps_new;
            }
        }
        mu_bar = project_multiplier(&mu, config.mu_bar_min, config.mu_bar_max);
        tau = (config.tau_shrink * tau).max(config.tau_floor);
        last_step = record.step_kind;
        trace.push(record);
        k += 1;

        if stuck {
            let lag = lagrangian(problem, &x, &mu_bar)?;
            let res = residual_from_eval(problem, &x, &lag);
            trace.push(IterationRecord {
                k,
                x: to_vec(&x),
                mu_bar: to_vec(&mu_bar),
                f: problem.f(&x),
                stationarity: res.stationarity,
                feasibility: res.feasibility,
                epsilon,
                delta,
                tau,
                nu: None,
                n_lower_active: 0,
                n_upper_active: 0,
                step_kind: StepKind::None,
                newton: None,
                inner: None,
                elapsed_s: start.elapsed().as_secs_f64(),
            });
            break (Status::InnerFailure, res);
        }
    };

    Ok(SolveReport {
        status,
        final_iterate: Iterate {
            k,
            x: to_vec(&x),
            mu: to_vec(&mu),
            mu_bar: to_vec(&mu_bar),
            epsilon,
            delta,
            tau,
            step_kind: last_step,
        },
        f_final: problem.f(&x),
        stationarity: residual.stationarity,
        feasibility: residual.feasibility,
        h0_inf,
        outer_iterations: k,
        newton_steps_accepted,
        inner_iterations_total,
        wall_time_s: start.elapsed().as_secs_f64(),
        trace,
        config: config.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dvector, DMatrix};

    #[test]
    fn multiplier_update_examples() {
        assert_eq!(update_multiplier(&dvector![1.0], &dvector![0.25], 0.5), dvector![2.0]);
        assert_eq!(update_multiplier(&dvector![1.5], &dvector![0.0], 0.5), dvector![1.5]);
        assert_eq!(update_multiplier(&dvector![0.0], &dvector![-1.0], 2.0), dvector![-1.0]);
    }

    #[test]
    fn multiplier_projection_examples() {
        assert_eq!(project_multiplier(&dvector![2.0], -1.0, 1.5), dvector![1.5]);
        assert_eq!(project_multiplier(&dvector![0.0], -1e12, 1e12), dvector![0.0]);
        assert_eq!(project_multiplier(&dvector![-5.0], -1.0, 1.5), dvector![-1.0]);
    }

    #[test]
    fn penalty_update_examples() {
        assert_eq!(update_penalty(1.0, 0.4, 1.0, 0.5, 0.1), 1.0);
        assert_eq!(update_penalty(1.0, 0.6, 1.0, 0.5, 0.1), 0.1);
        assert_eq!(update_penalty(1.0, 0.0, 0.0, 0.5, 0.1), 1.0);
        assert_eq!(update_penalty(1.0, 0.5, 1.0, 0.5, 0.1), 1.0);
    }

    #[test]
    fn epsilon0_examples() {
        assert_eq!(epsilon0_from_values(0.0, 0.0), 0.1);
        assert_eq!(epsilon0_from_values(1.0, 2000.0), 10.0);
        assert_eq!(epsilon0_from_values(1e9, 0.0), 1e-8);
    }

    #[test]
    fn stop_test_scaling() {
        // |grad f| = 1e6 relaxes the stationarity threshold to 1
        assert!(stop_satisfied(0.99, 1e6, 0.0, 1e-6, 1e-6, 1.0));
        assert!(!stop_satisfied(1.01, 1e6, 0.0, 1e-6, 1e-6, 1.0));
        // feasible start: absolute feasibility tolerance
        assert!(stop_satisfied(0.0, 0.0, 1e-6, 1e-6, 1e-6, 0.0));
        assert!(!stop_satisfied(0.0, 0.0, 2e-6, 1e-6, 1e-6, 0.0));
        // relative to h0
        assert!(stop_satisfied(0.0, 0.0, 9e-6, 1e-6, 1e-6, 10.0));
    }

    #[test]
    fn config_domain_checks() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = SolverConfig {
            beta: 1.5,
            ..SolverConfig::default()
        };
        let err = bad.validate().unwrap_err().to_string();
        assert!(err.contains("beta must lie in (0,1)"), "{err}");
        let bad = SolverConfig {
            mu_bar_min: 1.0,
            mu_bar_max: -1.0,
            ..SolverConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn mode_and_status_parse() {
        assert_eq!("alm".parse::<Mode>().unwrap(), Mode::Alm);
        assert!("newton".parse::<Mode>().is_err());
        assert_eq!("max_outer".parse::<Status>().unwrap(), Status::MaxOuter);
    }

    #[test]
    fn start_outside_box_is_projected() {
        let p = NlpProblem::new(dvector![0.0], dvector![1.0], dvector![5.0])
            .unwrap()
            .with_objective(|x| (x[0] - 0.25).powi(2), |x| dvector![2.0 * (x[0] - 0.25)])
            .with_hessian(|_, _| DMatrix::identity(1, 1) * 2.0);
        let r = solve(&p, &SolverConfig::default()).unwrap();
        assert_eq!(r.trace[0].x, vec![1.0]);
        assert_eq!(r.status, Status::KktSatisfied);
        assert!((r.final_iterate.x[0] - 0.25).abs() < 1e-6);
    }
}
